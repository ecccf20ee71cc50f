//! Binary fixed-point reals on top of `BigInt`: value = `m / 2^p`.
//!
//! Only what the eigen-solve needs: ring operations, division, square roots,
//! comparisons and decimal I/O. Every operation rounds toward −∞ at the last bit.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    m: BigInt,
    p: u32,
}

impl Fixed {
    pub fn zero(p: u32) -> Self {
        Fixed { m: BigInt::zero(), p }
    }

    pub fn from_int(x: &BigInt, p: u32) -> Self {
        Fixed { m: x << p, p }
    }

    pub fn from_i64(x: i64, p: u32) -> Self {
        Self::from_int(&BigInt::from(x), p)
    }

    /// Raw constructor: value `m / 2^p`.
    pub fn from_raw(m: BigInt, p: u32) -> Self {
        Fixed { m, p }
    }

    pub fn from_rational(x: &BigRational, p: u32) -> Self {
        let num: BigInt = x.numer() << p;
        Fixed { m: num.div_floor(x.denom()), p }
    }

    pub fn from_f64(x: f64, p: u32) -> Self {
        let r = BigRational::from_float(x).expect("finite float");
        Self::from_rational(&r, p)
    }

    pub fn raw(&self) -> &BigInt {
        &self.m
    }

    pub fn prec(&self) -> u32 {
        self.p
    }

    /// Exact dyadic rational represented by `self`.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.m.clone(), BigInt::one() << self.p)
    }

    pub fn with_prec(&self, p: u32) -> Self {
        let m = match p.cmp(&self.p) {
            Ordering::Equal => self.m.clone(),
            Ordering::Greater => &self.m << (p - self.p),
            Ordering::Less => &self.m >> (self.p - p),
        };
        Fixed { m, p }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.m.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Fixed { m: self.m.abs(), p: self.p }
    }

    pub fn neg(&self) -> Self {
        Fixed { m: -&self.m, p: self.p }
    }

    pub fn add(&self, o: &Fixed) -> Self {
        debug_assert_eq!(self.p, o.p);
        Fixed { m: &self.m + &o.m, p: self.p }
    }

    pub fn sub(&self, o: &Fixed) -> Self {
        debug_assert_eq!(self.p, o.p);
        Fixed { m: &self.m - &o.m, p: self.p }
    }

    pub fn mul(&self, o: &Fixed) -> Self {
        debug_assert_eq!(self.p, o.p);
        Fixed { m: (&self.m * &o.m) >> self.p, p: self.p }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Fixed { m: &self.m * k, p: self.p }
    }

    pub fn div(&self, o: &Fixed) -> Self {
        debug_assert_eq!(self.p, o.p);
        assert!(!o.m.is_zero(), "fixed-point division by zero");
        Fixed { m: (&self.m << self.p).div_floor(&o.m), p: self.p }
    }

    pub fn div_int(&self, k: &BigInt) -> Self {
        Fixed { m: self.m.div_floor(k), p: self.p }
    }

    pub fn shl(&self, s: u32) -> Self {
        Fixed { m: &self.m << s, p: self.p }
    }

    pub fn shr(&self, s: u32) -> Self {
        Fixed { m: &self.m >> s, p: self.p }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.m.is_negative(), "square root of a negative number");
        Fixed { m: (&self.m << self.p).sqrt(), p: self.p }
    }

    /// `log2 |x|` rounded down, or `None` for zero.
    pub fn ilog2(&self) -> Option<i64> {
        if self.m.is_zero() {
            None
        } else {
            Some(self.m.abs().bits() as i64 - 1 - self.p as i64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        let b = self.m.abs().bits() as i64;
        // Keep 64 significant bits, then scale.
        let shift = b - 64;
        let top = if shift > 0 { &self.m >> shift as u64 } else { self.m.clone() << (-shift) as u64 };
        let t = top.to_f64().unwrap();
        ldexp(t, shift - self.p as i64)
    }

    /// Decimal string with `digits` significant digits, `d.ddd…e±x`, rounded to nearest.
    pub fn to_decimal(&self, digits: usize) -> String {
        format_decimal(&self.to_rational(), digits)
    }

    pub fn cmp_value(&self, o: &Fixed) -> Ordering {
        debug_assert_eq!(self.p, o.p);
        self.m.cmp(&o.m)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(30))
    }
}

/// Rounded scientific decimal `d.ddd…e±x` of an exact rational.
pub fn format_decimal(x: &BigRational, digits: usize) -> String {
    assert!(digits >= 1);
    if x.is_zero() {
        return format!("{}e0", zero_mantissa(digits));
    }
    let neg = x.is_negative();
    let a = x.abs();
    // Estimate the decimal exponent, then correct.
    let mut e10 = estimate_log10(&a);
    let ten = BigInt::from(10);
    let scaled = |e: i64| -> BigInt {
        // round(a · 10^{digits−1−e})
        let s = digits as i64 - 1 - e;
        let v = if s >= 0 {
            &a * BigRational::from_integer(ten.pow(s as u32))
        } else {
            &a / BigRational::from_integer(ten.pow((-s) as u32))
        };
        round_half_even(&v)
    };
    let lo = ten.pow(digits as u32 - 1);
    let hi = ten.pow(digits as u32);
    let mut n = scaled(e10);
    loop {
        if n >= hi {
            e10 += 1;
            n = scaled(e10);
        } else if n < lo {
            e10 -= 1;
            n = scaled(e10);
        } else {
            break;
        }
    }
    let s = n.to_string();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&s[..1]);
    if digits > 1 {
        out.push('.');
        out.push_str(&s[1..]);
    }
    out.push('e');
    out.push_str(&e10.to_string());
    out
}

fn ldexp(t: f64, e: i64) -> f64 {
    let e = e.clamp(-2200, 2200);
    let half = (e / 2) as i32;
    t * 2f64.powi(half) * 2f64.powi(e as i32 - half)
}

fn zero_mantissa(digits: usize) -> String {
    if digits > 1 {
        format!("0.{}", "0".repeat(digits - 1))
    } else {
        "0".to_string()
    }
}

fn estimate_log10(a: &BigRational) -> i64 {
    let nb = a.numer().bits() as f64;
    let db = a.denom().bits() as f64;
    ((nb - db) * std::f64::consts::LOG10_2).floor() as i64
}

fn round_half_even(v: &BigRational) -> BigInt {
    let fl = v.floor();
    let frac = v - &fl;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let base = fl.to_integer();
    match frac.cmp(&half) {
        Ordering::Less => base,
        Ordering::Greater => base + 1,
        Ordering::Equal => {
            if base.is_even() {
                base
            } else {
                base + 1
            }
        }
    }
}

/// Parses a plain or scientific decimal (`-1.25`, `3e-4`, `7`) into an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let e = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if e >= 0 {
        BigRational::from_integer(n * ten.pow(e as u32))
    } else {
        BigRational::new(n, ten.pow((-e) as u32))
    };
    if neg {
        r = -r;
    }
    Some(r)
}
