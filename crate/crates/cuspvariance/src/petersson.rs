//! `L(1, sym² f)` and the two sides of the Petersson formula
//!
//! `(2π²/(k−1)) Σ_f λ_f(n₁)λ_f(n₂)/L(1, sym² f)
//!     = δ(n₁, n₂) + 2π(−1)^{k/2} Σ_c S(n₁, n₂; c)/c · J_{k−1}(4π√(n₁n₂)/c)`.
//!
//! `L(1, sym² f)` is obtained from the Petersson norm,
//! `L(1, sym² f) = (2π²/(k−1)) · (4π)^{k−1}/Γ(k−1) · ⟨f, f⟩`, integrating `y^k|f|²`
//! over the standard fundamental domain: the part `y ≥ 1` in closed form via the
//! regularized incomplete gamma function, the part below by a Gauss–Legendre grid
//! refined until two orders agree. The smoothed Dirichlet series is kept as a
//! diagnostic ([`l_sym2_smoothed`]); its convergence in `T` is too slow to be the
//! primary route at useful tolerances.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::kernels::quad::gauss_legendre;
use crate::kernels::{bessel_j, kloosterman, CompensatedSum};
use crate::qforms::{hecke_eigenforms, HeckeBasis, HeckeEigenform};

const ZETA2: f64 = PI * PI / 6.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Sym2Value {
    pub weight: u32,
    pub form_index: usize,
    pub value: f64,
    /// Resolution of the final evaluation (Gauss–Legendre order for the
    /// norm route, `T` for the smoothed series).
    pub smoothing: f64,
    /// `|value at smoothing − value at half the smoothing|`.
    pub gap: f64,
}

/// Largest `n` whose term matters in the norm integral on `y ≥ √3/2` (to `e^{−60}`).
pub fn sym2_nmax(k: u32) -> usize {
    let a = (k - 1) as f64;
    // (k−1)(ρ − 1 − ln ρ) = 60, ρ > 1
    let target = 60.0 / a;
    let mut rho = 2.0 + target;
    for _ in 0..100 {
        let g = rho - 1.0 - rho.ln() - target;
        let dg = 1.0 - 1.0 / rho;
        let step = g / dg;
        rho -= step;
        if step.abs() < 1e-14 * rho {
            break;
        }
    }
    let n = rho * a / (4.0 * PI * 0.75f64.sqrt());
    (n.ceil() as usize).max(2)
}

/// `L(1, sym² f)` to absolute accuracy `tol` via the Petersson norm.
pub fn l_sym2_at_1(f: &HeckeEigenform, tol: f64) -> Result<Sym2Value> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let k = f.weight();
    let nl = sym2_nmax(k);
    if f.n_max() < nl {
        return Err(Error::InsufficientCoefficients { k, have: f.n_max(), need: nl });
    }
    let a = (k - 1) as f64;
    let lam: Vec<f64> = (0..=nl).map(|n| if n == 0 { 0.0 } else { f.lambda_f64(n) }).collect();

    let mut upper = CompensatedSum::new();
    for n in 1..=nl {
        upper.add(lam[n] * lam[n] * gamma_ur(a, 4.0 * PI * n as f64));
    }
    let upper = upper.value();
    let pref = 2.0 * PI * PI / a;

    let mut order = 16 + nl;
    let mut prev = lower_region(&lam, a, order);
    for _ in 0..8 {
        order *= 2;
        let cur = lower_region(&lam, a, order);
        let gap = pref * (cur - prev).abs();
        if gap <= tol {
            return Ok(Sym2Value {
                weight: k,
                form_index: f.index(),
                value: pref * (upper + 2.0 * cur),
                smoothing: order as f64,
                gap,
            });
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!("L(1, sym² f) at weight {k}, form {}", f.index())))
}

/// `∫_0^{1/2} ∫_{√(1−x²)}^1 |Σ λ(n) c_n(y) e(nx)|² dy/y dx`,
/// `c_n(y)² = (4πny)^{k−1} e^{−4πny}/Γ(k−1)`.
fn lower_region(lam: &[f64], a: f64, order: usize) -> f64 {
    let (gx, gw) = gauss_legendre(order);
    let half_lg = 0.5 * ln_gamma(a);
    let nl = lam.len() - 1;
    let ln_n: Vec<f64> = (0..=nl).map(|n| (n.max(1) as f64).ln()).collect();
    let mut total = CompensatedSum::new();
    let mut cs = vec![(0.0, 0.0); nl + 1];
    for (xi, wi) in gx.iter().zip(&gw) {
        let x = 0.25 * (xi + 1.0);
        let wx = 0.25 * wi;
        for (n, slot) in cs.iter_mut().enumerate().skip(1) {
            let (s, c) = (2.0 * PI * n as f64 * x).sin_cos();
            *slot = (c, s);
        }
        let y0 = (1.0 - x * x).sqrt();
        let hy = 0.5 * (1.0 - y0);
        for (yj, wj) in gx.iter().zip(&gw) {
            let y = y0 + hy * (yj + 1.0);
            let base = 0.5 * a * (4.0 * PI * y).ln() - half_lg;
            let (mut re, mut im) = (0.0, 0.0);
            for n in 1..=nl {
                let lc = base + 0.5 * a * ln_n[n] - 2.0 * PI * n as f64 * y;
                if lc < -60.0 {
                    continue;
                }
                let t = lam[n] * lc.exp();
                re += t * cs[n].0;
                im += t * cs[n].1;
            }
            total.add(wx * hy * wj * (re * re + im * im) / y);
        }
    }
    total.value()
}

/// `ζ(2) Σ_n λ_f(n²) n⁻¹ e^{−n/T}`, summed until `e^{−n/T} < 10⁻¹⁸`.
pub fn l_sym2_smoothed(f: &HeckeEigenform, t: f64) -> Result<f64> {
    let cutoff = (t * 18.0 * 10f64.ln()).ceil() as u64;
    let mut s = CompensatedSum::new();
    for n in 1..=cutoff {
        s.add(f.lambda_extend_f64(n * n)? / n as f64 * (-(n as f64) / t).exp());
    }
    Ok(ZETA2 * s.value())
}

/// The smoothed series with `T` doubled from `t0` until successive values
/// differ by less than `tol`; at most 12 doublings.
pub fn l_sym2_smoothed_stable(f: &HeckeEigenform, t0: f64, tol: f64) -> Result<Sym2Value> {
    let mut t = t0;
    let mut prev = l_sym2_smoothed(f, t)?;
    for _ in 0..12 {
        t *= 2.0;
        let cur = l_sym2_smoothed(f, t)?;
        let gap = (cur - prev).abs();
        if gap < tol {
            return Ok(Sym2Value { weight: f.weight(), form_index: f.index(), value: cur, smoothing: t, gap });
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!(
        "smoothed sym² series at weight {} did not settle to {tol:e} by T = {t}",
        f.weight()
    )))
}

/// A weight's eigenbasis together with `L(1, sym² f)` for each form.
#[derive(Clone, Debug)]
pub struct WeightData {
    pub basis: HeckeBasis,
    pub sym2: Vec<Sym2Value>,
}

impl WeightData {
    pub fn weight(&self) -> u32 {
        self.basis.weight
    }

    /// Harmonic weights `2π²/((k−1) L(1, sym² f))`.
    pub fn harmonic_weights(&self) -> Vec<f64> {
        let a = (self.weight() - 1) as f64;
        self.sym2.iter().map(|s| 2.0 * PI * PI / (a * s.value)).collect()
    }
}

pub fn weight_data(k: u32, n_max: usize, tol: f64) -> Result<WeightData> {
    let basis = hecke_eigenforms(k, n_max.max(sym2_nmax(k)))?;
    weight_data_from_basis(basis, tol)
}

pub fn weight_data_from_basis(basis: HeckeBasis, tol: f64) -> Result<WeightData> {
    let sym2 = basis.forms.iter().map(|f| l_sym2_at_1(f, tol)).collect::<Result<Vec<_>>>()?;
    Ok(WeightData { basis, sym2 })
}

/// `(2π²/(k−1)) Σ_f λ_f(n₁)λ_f(n₂)/L(1, sym² f)`.
pub fn petersson_lhs(data: &WeightData, n1: usize, n2: usize) -> Result<f64> {
    let k = data.weight();
    let mut s = CompensatedSum::new();
    for (f, w) in data.basis.forms.iter().zip(data.harmonic_weights()) {
        let need = n1.max(n2);
        if f.n_max() < need {
            return Err(Error::InsufficientCoefficients { k, have: f.n_max(), need });
        }
        s.add(w * (f.lambda_f64(n1) * f.lambda_f64(n2)));
    }
    Ok(s.value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeterssonRhs {
    pub value: f64,
    /// Number of moduli `c` summed.
    pub c_truncation: u64,
    /// Certified bound on the omitted `c > C` terms.
    pub tail_bound: f64,
}

/// Bound on `2π Σ_{c>C} |S(n₁,n₂;c)|/c · |J_ν(X/c)|` from `|S| ≤ c` and
/// `|J_ν(x)| ≤ (x/2)^ν/ν!`: `2π (X/2)^ν/ν! · C^{1−ν}/(ν−1)`, as a natural log.
pub fn petersson_tail_log_bound(k: u32, n1: u64, n2: u64, c: u64) -> f64 {
    let nu = (k - 1) as f64;
    let half_x = 2.0 * PI * ((n1 * n2) as f64).sqrt();
    (2.0 * PI).ln() + nu * half_x.ln() - ln_gamma(nu + 1.0) + (1.0 - nu) * (c as f64).ln() - (nu - 1.0).ln()
}

pub fn petersson_rhs(k: u32, n1: u64, n2: u64, tail_tol: f64) -> Result<PeterssonRhs> {
    if k < 4 || k % 2 == 1 || n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(format!("petersson_rhs({k}, {n1}, {n2})")));
    }
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument("tail tolerance must be positive".into()));
    }
    let target = tail_tol.ln();
    let mut c_max = 1u64;
    while petersson_tail_log_bound(k, n1, n2, c_max) >= target {
        c_max = if c_max < 16 { c_max + 1 } else { c_max + c_max / 8 };
        if c_max > 1_000_000 {
            return Err(Error::NoConvergence(format!(
                "no truncation C ≤ 10⁶ certifies the Petersson tail for k = {k}, ({n1}, {n2})"
            )));
        }
    }
    // Tighten: smallest C that still certifies.
    let (mut lo, mut hi) = (1u64, c_max);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if petersson_tail_log_bound(k, n1, n2, mid) < target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let c_max = lo;
    let x = 4.0 * PI * ((n1 * n2) as f64).sqrt();
    let mut s = CompensatedSum::new();
    for c in 1..=c_max {
        let j = bessel_j(k - 1, x / c as f64)?;
        if j != 0.0 {
            s.add(kloosterman(n1 as i64, n2 as i64, c) / c as f64 * j);
        }
    }
    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let delta = if n1 == n2 { 1.0 } else { 0.0 };
    Ok(PeterssonRhs {
        value: delta + sign * 2.0 * PI * s.value(),
        c_truncation: c_max,
        tail_bound: petersson_tail_log_bound(k, n1, n2, c_max).exp(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeterssonRow {
    pub k: u32,
    pub n1: u64,
    pub n2: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub c_truncation: u64,
    /// Allowed discrepancy: `tol` plus the propagated `L`-value gaps.
    pub allowance: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PeterssonReport {
    pub rows: Vec<PeterssonRow>,
}

impl PeterssonReport {
    pub fn failures(&self) -> Vec<&PeterssonRow> {
        self.rows.iter().filter(|r| !(r.abs_diff <= r.allowance)).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,n1,n2,lhs,rhs,abs_diff,c_truncation\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{:.16e},{:.16e},{:.6e},{}", r.k, r.n1, r.n2, r.lhs, r.rhs, r.abs_diff, r.c_truncation)
                .unwrap();
        }
        out
    }
}

/// Both sides for every `k` in `weights` and `1 ≤ n₁ ≤ n₂ ≤ n_max`.
/// Weights are processed in parallel and reported in input order.
pub fn petersson_check(weights: &[u32], n_max: u64, tol: f64) -> Result<PeterssonReport> {
    if weights.iter().any(|&k| k < 12 || k % 2 == 1) {
        return Err(Error::InvalidArgument("weights must be even and ≥ 12".into()));
    }
    let per_k: Vec<Vec<PeterssonRow>> = weights
        .par_iter()
        .map(|&k| {
            let data = weight_data(k, n_max as usize, tol * 1e-3)?;
            petersson_rows(&data, n_max, tol)
        })
        .collect::<Result<_>>()?;
    Ok(PeterssonReport { rows: per_k.into_iter().flatten().collect() })
}

pub fn petersson_rows(data: &WeightData, n_max: u64, tol: f64) -> Result<Vec<PeterssonRow>> {
    let k = data.weight();
    let weights = data.harmonic_weights();
    let mut rows = Vec::new();
    for n1 in 1..=n_max {
        for n2 in n1..=n_max {
            let lhs = petersson_lhs(data, n1 as usize, n2 as usize)?;
            let rhs = petersson_rhs(k, n1, n2, tol * 1e-3)?;
            // dω/ω = −dL/L
            let gap_term: f64 = data
                .basis
                .forms
                .iter()
                .zip(&weights)
                .zip(&data.sym2)
                .map(|((f, w), s)| {
                    (w * f.lambda_f64(n1 as usize) * f.lambda_f64(n2 as usize)).abs() * s.gap / s.value
                })
                .sum();
            let abs_diff = (lhs - rhs.value).abs();
            rows.push(PeterssonRow {
                k,
                n1,
                n2,
                lhs,
                rhs: rhs.value,
                abs_diff,
                c_truncation: rhs.c_truncation,
                allowance: tol + rhs.tail_bound + gap_term,
            });
        }
    }
    Ok(rows)
}
