//! Hecke–Maass data files and the Maass-form values of `B_θ`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{f_theta_kernel, Regime, ThetaRegime};
use crate::error::{Error, Result};
use crate::kernels::{bessel_k_imag, integrate, tau1, Domain, QuadratureSpec, TestWeight};

const HEADER: &str = "cuspvariance-maass v1";
/// Beyond `2πy = 50` the K-Bessel factor is below `e^{−50}` and treated as 0.
const Y_MAX: f64 = 50.0 / (2.0 * PI);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaassFormData {
    pub t: f64,
    pub parity: Parity,
    lambda: Vec<f64>,
    pub source: String,
}

impl MaassFormData {
    /// Validates `λ(1) = 1` and the Hecke relations for `m, n ≤ 10` (as far as the data reaches).
    pub fn new(t: f64, parity: Parity, lambda: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::MaassFormat("no eigenvalues".into()));
        }
        if (lambda[0] - 1.0).abs() > 1e-12 {
            return Err(Error::MaassFormat(format!("λ(1) = {} ≠ 1", lambda[0])));
        }
        let mut lam = vec![0.0];
        lam.extend(lambda);
        let data = MaassFormData { t, parity, lambda: lam, source: source.into() };
        data.validate()?;
        Ok(data)
    }

    pub fn n_max(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn lambda(&self, n: usize) -> Option<f64> {
        (n >= 1).then(|| self.lambda.get(n).copied()).flatten()
    }

    fn validate(&self) -> Result<()> {
        let nm = self.n_max();
        for m in 1..=10usize {
            for n in 1..=10usize {
                if m * n > nm {
                    continue;
                }
                let g = num_integer::gcd(m, n);
                let rhs: f64 = (1..=g).filter(|d| g % d == 0).map(|d| self.lambda[m * n / (d * d)]).sum();
                let residual = (self.lambda[m] * self.lambda[n] - rhs).abs();
                if !(residual < 1e-6) {
                    return Err(Error::MaassHecke { m, n, residual });
                }
            }
        }
        Ok(())
    }
}

pub fn parse_maass_file(path: impl AsRef<Path>) -> Result<MaassFormData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_maass_str(&text, &path.display().to_string())
}

pub fn parse_maass_str(text: &str, source: &str) -> Result<MaassFormData> {
    let mut lines = text.lines().map(str::trim).enumerate().filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let bad = |i: usize, what: &str| Error::MaassFormat(format!("{source}:{}: {what}", i + 1));
    match lines.next() {
        Some((_, l)) if l == HEADER => {}
        Some((i, _)) => return Err(bad(i, "expected header `cuspvariance-maass v1`")),
        None => return Err(Error::MaassFormat(format!("{source}: empty file"))),
    }
    let (i, l) = lines.next().ok_or_else(|| Error::MaassFormat(format!("{source}: missing `t` line")))?;
    let t = l
        .strip_prefix("t ")
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite())
        .ok_or_else(|| bad(i, "expected `t <decimal>`"))?;
    let (i, l) = lines.next().ok_or_else(|| Error::MaassFormat(format!("{source}: missing parity line")))?;
    let parity = match l.strip_prefix("parity ").map(str::trim) {
        Some("even") => Parity::Even,
        Some("odd") => Parity::Odd,
        _ => return Err(bad(i, "expected `parity even|odd`")),
    };
    let mut lambda = Vec::new();
    for (i, l) in lines {
        let mut it = l.split_whitespace();
        let (Some(n), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad(i, "expected `n lambda`"));
        };
        let n: usize = n.parse().map_err(|_| bad(i, "bad index"))?;
        let v: f64 = v.parse().map_err(|_| bad(i, "bad eigenvalue"))?;
        if n != lambda.len() + 1 {
            return Err(bad(i, &format!("expected n = {}, found {n}", lambda.len() + 1)));
        }
        lambda.push(v);
    }
    MaassFormData::new(t, parity, lambda, source)
}

/// `I_θ^{s₁,s₂}(m, n) = ∫_{max(m,n)}^∞ K_{it₁}(2πy) K_{it₂}(2πy) f_{θ,m,n}(y) dy/y`
/// with `s_j = 1/2 + it_j`. For real `t_j` both factors are real.
pub fn i_theta(m: u64, n: u64, t1: f64, t2: f64, regime: &ThetaRegime) -> Result<Complex64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("i_theta needs m, n ≥ 1".into()));
    }
    if regime.regime == Regime::High {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lo = m.max(n) as f64;
    let mut hi = Y_MAX;
    if regime.regime == Regime::Critical {
        // 2π²y²(m²+n²) > 60 beyond this point
        hi = hi.min((60.0 / (2.0 * PI * PI * ((m * m + n * n) as f64))).sqrt());
    }
    if lo >= hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (mi, ni) = (m as i64, n as i64);
    let err = std::cell::Cell::new(None);
    let f = |y: f64| {
        let x = 2.0 * PI * y;
        match (bessel_k_imag(t1, x), bessel_k_imag(t2, x)) {
            (Ok(a), Ok(b)) => a * b * f_theta_kernel(regime, mi, ni, y) / y,
            (Err(e), _) | (_, Err(e)) => {
                err.set(Some(e));
                0.0
            }
        }
    };
    let r = integrate(f, Domain::Finite(lo, hi), &QuadratureSpec::gk(1e-300, 1e-12))?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(Complex64::new(r.value, 0.0))
}

fn need(phi: &MaassFormData, n: usize) -> Result<()> {
    if phi.n_max() < n {
        return Err(Error::MaassFormat(format!("{}: eigenvalues stop at n = {}, need {n}", phi.source, phi.n_max())));
    }
    Ok(())
}

/// Square partial sums `S_1..S_N` of
/// `4π Σ τ₁((m,n)) λ₁(m)λ₂(n) (mn)^{−1/2} I_θ(m, n)`; identically 0 unless both forms are even.
pub fn b_theta_maass(phi1: &MaassFormData, phi2: &MaassFormData, regime: &ThetaRegime, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("truncation N must be ≥ 1".into()));
    }
    need(phi1, n)?;
    need(phi2, n)?;
    if phi1.parity == Parity::Odd || phi2.parity == Parity::Odd {
        return Ok(vec![0.0; n]);
    }
    square_partial_sums(n, |a, b| {
        let i = i_theta(a as u64, b as u64, phi1.t, phi2.t, regime)?.re;
        let coeff = tau1(num_integer::gcd(a, b) as u64) as f64 * phi1.lambda[a] * phi2.lambda[b] / ((a * b) as f64).sqrt();
        Ok(4.0 * PI * coeff * i)
    })
}

/// Partial sums of `Σ τ₁((m,n)) λ(m)λ(n) (mn)^{−1/2} ∫ |K_{it}(2πy)|² w(y/m) w(y/n) dy/y`.
pub fn corollary_weighted(phi: &MaassFormData, w: &TestWeight, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("truncation N must be ≥ 1".into()));
    }
    need(phi, n)?;
    let Some((wa, wb)) = w.support() else { return Ok(vec![0.0; n]) };
    if wa < 1.0 {
        return Err(Error::Precondition(format!("weight support must lie in [1, ∞), starts at {wa}")));
    }
    square_partial_sums(n, |a, b| {
        let (af, bf) = (a as f64, b as f64);
        let lo = (wa * af).max(wa * bf);
        let hi = (wb * af).min(wb * bf).min(Y_MAX);
        if lo >= hi {
            return Ok(0.0);
        }
        let err = std::cell::Cell::new(None);
        let f = |y: f64| match bessel_k_imag(phi.t, 2.0 * PI * y) {
            Ok(k) => k * k * w.eval(y / af) * w.eval(y / bf) / y,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        };
        let r = integrate(f, Domain::Finite(lo, hi), &QuadratureSpec::gk(1e-300, 1e-12))?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        let coeff = tau1(num_integer::gcd(a, b) as u64) as f64 * phi.lambda[a] * phi.lambda[b] / (af * bf).sqrt();
        Ok(coeff * r.value)
    })
}

/// `S_N = Σ_{m,n ≤ N} term(m, n)`, accumulated shell by shell.
fn square_partial_sums(n: usize, mut term: impl FnMut(usize, usize) -> Result<f64>) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut s = crate::kernels::CompensatedSum::new();
    for big in 1..=n {
        for other in 1..big {
            s.add(term(big, other)?);
            s.add(term(other, big)?);
        }
        s.add(term(big, big)?);
        out.push(s.value());
    }
    Ok(out)
}

pub fn partial_sums_csv(sums: &[f64]) -> String {
    let mut out = String::from("N,partial_sum\n");
    for (i, s) in sums.iter().enumerate() {
        writeln!(out, "{},{:.16e}", i + 1, s).unwrap();
    }
    out
}
