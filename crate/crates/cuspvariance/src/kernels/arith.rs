use num_integer::Integer;

/// `S(m, n; c) = Σ_{a (c)^*} e((a m + ā n)/c)`.
///
/// Residues `a m + ā n mod c` are counted first and the cosines summed in
/// residue order, so the value does not depend on enumeration order; in
/// particular `S(m, n; c) == S(n, m; c)` bit for bit.
pub fn kloosterman(m: i64, n: i64, c: u64) -> f64 {
    assert!(c >= 1, "modulus must be positive");
    if c == 1 {
        return 1.0;
    }
    let ci = c as i64;
    let mm = m.rem_euclid(ci) as u64;
    let nn = n.rem_euclid(ci) as u64;
    let mut count = vec![0u32; c as usize];
    for a in 1..c {
        let Some(inv) = mod_inverse(a, c) else { continue };
        let r = ((a as u128 * mm as u128 + inv as u128 * nn as u128) % c as u128) as usize;
        count[r] += 1;
    }
    let step = std::f64::consts::TAU / c as f64;
    let mut s = super::sum::CompensatedSum::new();
    for (r, &k) in count.iter().enumerate() {
        if k != 0 {
            s.add(k as f64 * (step * r as f64).cos());
        }
    }
    s.value()
}

fn mod_inverse(a: u64, c: u64) -> Option<u64> {
    let e = (a as i64).extended_gcd(&(c as i64));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(c as i64) as u64)
}

/// Sum of divisors `σ_1(n)`.
pub fn tau1(n: u64) -> u64 {
    assert!(n >= 1, "tau1 needs n ≥ 1");
    let mut n = n;
    let mut total = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut pk = 1u64;
            let mut s = 1u64;
            while n % p == 0 {
                n /= p;
                pk *= p;
                s += pk;
            }
            total *= s;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        total *= n + 1;
    }
    total
}

/// Number of divisors.
pub fn num_divisors(n: u64) -> u64 {
    crate::qforms::factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `b_2(y) = B_2({y})/2` with `B_2(y) = y² − y + 1/6`.
pub fn b2(y: f64) -> f64 {
    let f = y - y.floor();
    0.5 * (f * f - f + 1.0 / 6.0)
}
