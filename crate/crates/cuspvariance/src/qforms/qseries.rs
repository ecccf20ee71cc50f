use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Truncated power series `Σ_{n ≤ N} a_n q^n` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<BigRational>,
}

impl QSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "a q-series needs at least the q^0 slot");
        QSeries { coeffs }
    }

    pub fn from_integers<I: Into<BigInt>>(coeffs: impl IntoIterator<Item = I>) -> Self {
        Self::new(coeffs.into_iter().map(|c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero(precision: usize) -> Self {
        QSeries { coeffs: vec![BigRational::zero(); precision + 1] }
    }

    pub fn one(precision: usize) -> Self {
        let mut s = Self::zero(precision);
        s.coeffs[0] = BigRational::one();
        s
    }

    /// Highest exponent `N` whose coefficient is known.
    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, value: BigRational) {
        self.coeffs[n] = value;
    }

    pub fn truncate(&self, precision: usize) -> Self {
        let n = precision.min(self.precision());
        QSeries { coeffs: self.coeffs[..=n].to_vec() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        QSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Integer coefficients; fails if any coefficient has a denominator.
    pub fn to_integers(&self) -> Result<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| {
                if c.is_integer() {
                    Ok(c.to_integer())
                } else {
                    Err(Error::InvalidArgument(format!("non-integral coefficient {c}")))
                }
            })
            .collect()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.precision());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }
}

/// Common denominator and the integer numerators over it.
fn clear_denominators(s: &QSeries, upto: usize) -> (BigInt, Vec<BigInt>) {
    let den = s.coeffs[..=upto]
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let nums = s.coeffs[..=upto]
        .iter()
        .map(|c| c.numer() * (&den / c.denom()))
        .collect();
    (den, nums)
}

fn convolve(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n + 1];
    // Skip zero coefficients on the left; cusp forms start late.
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

impl<'a> Mul<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        let n = self.precision().min(rhs.precision());
        let (da, na) = clear_denominators(self, n);
        let (db, nb) = clear_denominators(rhs, n);
        let den = da * db;
        let prod = convolve(&na, &nb, n);
        QSeries {
            coeffs: prod
                .into_iter()
                .map(|c| BigRational::new(c, den.clone()))
                .collect(),
        }
    }
}

impl<'a> Add<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        let n = self.precision().min(rhs.precision());
        QSeries { coeffs: (0..=n).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect() }
    }
}

impl<'a> Sub<&'a QSeries> for &'a QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        let n = self.precision().min(rhs.precision());
        QSeries { coeffs: (0..=n).map(|i| &self.coeffs[i] - &rhs.coeffs[i]).collect() }
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// `σ_r(n)` for every `n ≤ upto` by a divisor sieve.
pub(crate) fn sigma_table(r: u32, upto: usize) -> Vec<BigInt> {
    let mut t = vec![BigInt::zero(); upto + 1];
    for d in 1..=upto {
        let dr = BigInt::from(d).pow(r);
        let mut m = d;
        while m <= upto {
            t[m] += &dr;
            m += d;
        }
    }
    t
}

/// `E_4 = 1 + 240 Σ σ_3(n) q^n` or `E_6 = 1 − 504 Σ σ_5(n) q^n`.
pub fn eisenstein_q(weight: u32, precision: usize) -> Result<QSeries> {
    let (r, c) = match weight {
        4 => (3, 240i64),
        6 => (5, -504i64),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Eisenstein series only for weights 4 and 6, got {weight}"
            )))
        }
    };
    let sig = sigma_table(r, precision);
    let mut coeffs: Vec<BigInt> = sig.into_iter().map(|s| s * c).collect();
    coeffs[0] = BigInt::one();
    Ok(QSeries::from_integers(coeffs))
}

/// `Δ = (E_4³ − E_6²)/1728`.
pub fn delta_q(precision: usize) -> QSeries {
    let e4 = eisenstein_q(4, precision).expect("weight 4");
    let e6 = eisenstein_q(6, precision).expect("weight 6");
    let num = &e4.pow(3) - &e6.pow(2);
    num.scale(&BigRational::new(BigInt::one(), BigInt::from(1728)))
}

/// Dimension of `S_k(SL2(Z))`.
pub fn cusp_dimension(k: u32) -> usize {
    if k % 2 == 1 || k < 12 {
        return 0;
    }
    let base = (k / 12) as usize;
    if k % 12 == 2 {
        base - 1
    } else {
        base
    }
}

/// Echelonized integral basis `g_1..g_d` of `S_k` with `g_i = q^i + O(q^{d+1})`.
pub fn miller_basis(k: u32, precision: usize) -> Result<Vec<QSeries>> {
    if k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("odd weight {k}")));
    }
    let d = cusp_dimension(k);
    if d == 0 {
        return Ok(Vec::new());
    }
    if precision < d {
        return Err(Error::PrecisionTooSmall { have: precision, need: d });
    }
    let mut e = k % 12;
    if e == 2 {
        e += 12;
    }
    let e4 = eisenstein_q(4, precision)?;
    let e6 = eisenstein_q(6, precision)?;
    let tail = match e {
        0 => QSeries::one(precision),
        4 => e4.clone(),
        6 => e6.clone(),
        8 => e4.pow(2),
        10 => &e4 * &e6,
        14 => &e4.pow(2) * &e6,
        _ => unreachable!("k ≡ {e} mod 12 for even k"),
    };
    let delta = delta_q(precision);
    let e6sq = e6.pow(2);

    // Δ^i · (E_6²)^{d−i} · tail has leading term q^i.
    let mut gens: Vec<QSeries> = Vec::with_capacity(d);
    let mut dpow = delta.clone();
    let mut e6pows = vec![QSeries::one(precision)];
    for _ in 1..d {
        let next = e6pows.last().unwrap() * &e6sq;
        e6pows.push(next);
    }
    for i in 1..=d {
        let g = &(&dpow * &e6pows[d - i]) * &tail;
        gens.push(g);
        if i < d {
            dpow = &dpow * &delta;
        }
    }

    // Reduce from the bottom so each g_i is clean at q^{i+1..d}.
    for i in (0..d).rev() {
        for j in (i + 1)..d {
            let c = gens[i].coeff(j + 1).clone();
            if !c.is_zero() {
                let sub = gens[j].scale(&c);
                gens[i] = &gens[i] - &sub;
            }
        }
    }
    for (i, g) in gens.iter().enumerate() {
        debug_assert!(g.coeff(i + 1).is_one());
        debug_assert!((1..=d).all(|j| j == i + 1 || g.coeff(j).is_zero()));
        debug_assert!(g.coeff(0).is_zero());
    }
    Ok(gens)
}

/// Matrix of `T_m` on an echelon basis: `M[i][j]` is the `q^{j+1}` coefficient of `T_m g_{i+1}`,
/// i.e. `T_m g_i = Σ_j M[i][j] g_j`.
pub fn hecke_matrix(k: u32, basis: &[QSeries], m: usize) -> Result<Vec<Vec<BigRational>>> {
    let d = basis.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    let need = m * d;
    let have = basis[0].precision();
    if have < need {
        return Err(Error::PrecisionTooSmall { have, need });
    }
    let mut mat = vec![vec![BigRational::zero(); d]; d];
    for (i, g) in basis.iter().enumerate() {
        for (j, slot) in mat[i].iter_mut().enumerate() {
            *slot = hecke_coefficient(k, g, m, j + 1);
        }
    }
    Ok(mat)
}

/// `(T_m g)(n) = Σ_{e | (m, n)} e^{k−1} a(mn/e²)`.
pub fn hecke_coefficient(k: u32, g: &QSeries, m: usize, n: usize) -> BigRational {
    let gcd = m.gcd(&n);
    let mut acc = BigRational::zero();
    for e in 1..=gcd {
        if gcd % e == 0 {
            let w = BigInt::from(e).pow(k - 1);
            acc += g.coeff(m * n / (e * e)) * BigRational::from_integer(w);
        }
    }
    acc
}

/// Exact characteristic polynomial `det(xI − M)` of an integer matrix, coefficients low to high.
/// Faddeev–LeVerrier; the divisions are exact.
pub fn charpoly(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let d = m.len();
    let mut c = vec![BigInt::zero(); d + 1];
    c[d] = BigInt::one();
    let mut mk = vec![vec![BigInt::zero(); d]; d];
    for step in 1..=d {
        // M_k = A·M_{k−1} + c_{d−k+1} I
        let mut next = vec![vec![BigInt::zero(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut s = BigInt::zero();
                for (l, row) in mk.iter().enumerate() {
                    if !row[j].is_zero() && !m[i][l].is_zero() {
                        s += &m[i][l] * &row[j];
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &c[d - step + 1];
        }
        mk = next;
        let mut tr = BigInt::zero();
        for i in 0..d {
            for l in 0..d {
                tr += &m[i][l] * &mk[l][i];
            }
        }
        let (q, r) = (-tr).div_rem(&BigInt::from(step));
        debug_assert!(r.is_zero());
        c[d - step] = q;
    }
    c
}

pub(crate) fn bits(x: &BigInt) -> u64 {
    x.abs().bits()
}
