//! Shifted convolution sums, squeezed Poincaré masses and the weighted moment
//! sums over `k`, each paired with its predicted main term.
//!
//! Every experiment sums over even `k` with `u((k−1)/K) ≠ 0`; the per-weight
//! work runs in parallel and is reduced in ascending `k` with compensated
//! summation, so reports do not depend on the thread count.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::btheta::{b_theta_poincare, harmonic_mean, is_mean_zero, ThetaRegime};
use crate::error::{Error, Result};
use crate::kernels::{
    b2, divisors, integrate, integrate_pieces, tau1, weight_tilde, CompensatedSum, Domain, QuadratureSpec, TestWeight,
};
use crate::petersson::{weight_data, WeightData};
use crate::qforms::HeckeEigenform;

const ZETA2: f64 = PI * PI / 6.0;
/// `vol(PSL₂(Z)\H)`.
pub const VOL_M: f64 = PI / 3.0;

fn spec() -> QuadratureSpec {
    QuadratureSpec::gk(1e-300, 1e-12)
}

/// Squeezing `y ↦ y/H` at `H = (k−1)^θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeSpec {
    pub theta: f64,
}

impl SqueezeSpec {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!("θ = {theta} must be finite and ≥ 0")));
        }
        Ok(SqueezeSpec { theta })
    }

    pub fn h(&self, k: u32) -> f64 {
        ((k - 1) as f64).powf(self.theta)
    }
}

/// Hyperbolic area of `{y > H, |x| ≤ 1/2}` by quadrature (equals `1/H`).
pub fn squeezed_ball_volume(h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("H = {h} must be positive")));
    }
    // the x-integral over a unit interval contributes a factor 1
    Ok(integrate(|y| 1.0 / (y * y), Domain::Ray(h), &QuadratureSpec::tanh_sinh(1e-300, 1e-13))?.value)
}

/// `ν(M_H P_{V,0}) = (3/π)(1/H)∫V(y)y⁻²dy`; the nonzero modes integrate to 0.
pub fn nu_squeezed(v: &TestWeight, h: f64) -> Result<f64> {
    Ok(harmonic_mean(v)? / (VOL_M * h))
}

/// `P_{V,h}`, which on the cusp region `y > 1` is `V(y)e(hx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoincareObservable {
    pub v: TestWeight,
    pub h: i64,
}

impl PoincareObservable {
    pub fn new(v: TestWeight, h: i64) -> Result<Self> {
        if let Some((a, _)) = v.support() {
            if a < 1.0 {
                return Err(Error::Precondition(format!("Poincaré weight {} must live in y ≥ 1", v.describe())));
            }
        }
        Ok(PoincareObservable { v, h })
    }

    pub fn describe(&self) -> String {
        format!("P[{};h={}]", self.v.describe(), self.h)
    }

    /// Value at `x + iy` with `y > 1` (real and imaginary parts).
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let v = self.v.eval(y);
        let ph = 2.0 * PI * self.h as f64 * x;
        (v * ph.cos(), v * ph.sin())
    }
}

fn lam(f: &HeckeEigenform, n: u64) -> Result<f64> {
    f.lambda_extend_f64(n)
}

/// `A_f^W(X, h) = Σ_n λ(n)λ(n+h) W((n+h/2)/X)`.
pub fn shifted_conv_direct(f: &HeckeEigenform, w: &TestWeight, x: f64, h: u64) -> Result<f64> {
    let Some((a, b)) = w.support() else { return Ok(0.0) };
    let hh = h as f64 / 2.0;
    let lo = ((a * x - hh).ceil().max(1.0)) as u64;
    let hi = (b * x - hh).floor();
    if hi < lo as f64 {
        return Ok(0.0);
    }
    let mut s = CompensatedSum::new();
    for n in lo..=hi as u64 {
        let wv = w.eval((n as f64 + hh) / x);
        if wv != 0.0 {
            s.add(lam(f, n)? * lam(f, n + h)? * wv);
        }
    }
    Ok(s.value())
}

/// The same sum after the Hecke relations:
/// `Σ_{d|h} Σ_r λ(r(r+d)) W((h/d)(r+d/2)/X)` for `h ≥ 1`, `Σ_d Σ_r λ(r²) W(dr/X)` for `h = 0`.
pub fn shifted_conv_hecke(f: &HeckeEigenform, w: &TestWeight, x: f64, h: u64) -> Result<f64> {
    let Some((a, b)) = w.support() else { return Ok(0.0) };
    let mut s = CompensatedSum::new();
    if h == 0 {
        let dmax = (b * x).floor() as u64;
        for d in 1..=dmax {
            let rmax = (b * x / d as f64).floor() as u64;
            let rmin = ((a * x / d as f64).ceil() as u64).max(1);
            for r in rmin..=rmax {
                let wv = w.eval((d * r) as f64 / x);
                if wv != 0.0 {
                    s.add(lam(f, r * r)? * wv);
                }
            }
        }
        return Ok(s.value());
    }
    for d in divisors(h) {
        let e = (h / d) as f64;
        let hd = d as f64 / 2.0;
        let rmin = ((a * x / e - hd).ceil().max(1.0)) as u64;
        let rmax = (b * x / e - hd).floor();
        if rmax < rmin as f64 {
            continue;
        }
        for r in rmin..=rmax as u64 {
            let wv = w.eval(e * (r as f64 + hd) / x);
            if wv != 0.0 {
                s.add(lam(f, r * (r + d))? * wv);
            }
        }
    }
    Ok(s.value())
}

/// `B_{h₁,h₂}(W₁,W₂) = τ₁((h₁,h₂)) ∫ W₁(h₁y) W₂(h₂y) dy`.
pub fn blf_main_term(w1: &TestWeight, w2: &TestWeight, h1: u64, h2: u64) -> Result<f64> {
    if h1 == 0 || h2 == 0 {
        return Err(Error::InvalidArgument("shifts must be ≥ 1".into()));
    }
    let (Some((a1, b1)), Some((a2, b2_))) = (w1.support(), w2.support()) else { return Ok(0.0) };
    let lo = (a1 / h1 as f64).max(a2 / h2 as f64);
    let hi = (b1 / h1 as f64).min(b2_ / h2 as f64);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let r = integrate(|y| w1.eval(h1 as f64 * y) * w2.eval(h2 as f64 * y), Domain::Finite(lo, hi), &spec())?;
    Ok(tau1(num_integer::gcd(h1, h2)) as f64 * r.value)
}

/// A real number stored as `mantissa · e^{ln_scale}`, for masses far below the
/// `f64` range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }

    /// `ln |value|`, `−∞` for an exact zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.ln_scale
    }
}

/// Shift range `n ≥ max(1, 1−h)` so that both `n` and `n+h` are positive.
fn first_index(h: i64) -> u64 {
    (1 - h).max(1) as u64
}

/// `μ_f(M_H P_{V,h})` by unfolding:
/// `(2π²/((k−1)L)) Σ_n λ(n)λ(n+h) (4π)^{k−1}(n(n+h))^{(k−1)/2}/Γ(k−1) ∫ V(y/H) y^{k−2} e^{−2π(2n+h)y} dy`.
pub fn mu_poincare_exact(f: &HeckeEigenform, l_sym2: f64, p: &PoincareObservable, squeeze: &SqueezeSpec) -> Result<f64> {
    Ok(mu_poincare_exact_scaled(f, l_sym2, p, squeeze)?.value())
}

pub fn mu_poincare_exact_scaled(
    f: &HeckeEigenform,
    l_sym2: f64,
    p: &PoincareObservable,
    squeeze: &SqueezeSpec,
) -> Result<Scaled> {
    let zero = Scaled { mantissa: 0.0, ln_scale: 0.0 };
    let Some((a, b)) = p.v.support() else { return Ok(zero) };
    if !(l_sym2 > 0.0) {
        return Err(Error::InvalidArgument(format!("L(1, sym² f) = {l_sym2} must be positive")));
    }
    let k = f.weight();
    let km1 = (k - 1) as f64;
    let hq = squeeze.h(k);
    let (ylo, yhi) = (a * hq, b * hq);
    let h = p.h;
    let ln_pref = (2.0 * PI * PI / (km1 * l_sym2)).ln() + km1 * (4.0 * PI).ln() - ln_gamma(km1);
    // log of the n-th integrand without V
    let log_g = |n: f64, y: f64| {
        let c = 2.0 * PI * (2.0 * n + h as f64);
        ln_pref + 0.5 * km1 * (n * (n + h as f64)).ln() + (km1 - 1.0) * y.ln() - c * y
    };
    let n0 = first_index(h);
    // past n_turn the unweighted peak sits below the support and terms decay in n
    let n_turn = ((km1 - 1.0) / (4.0 * PI * ylo) + h.unsigned_abs() as f64).ceil() as u64;
    let mut terms: Vec<(f64, f64)> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut n = n0;
    loop {
        let nf = n as f64;
        let phi = |y: f64| p.v.ln_abs(y / hq).1 + log_g(nf, y);
        let (ym, lg) = log_peak(&phi, ylo, yhi);
        if n > n_turn && !(lg >= best - 60.0) {
            break;
        }
        if lg >= best - 60.0 {
            let r = integrate_pieces(
                |y| {
                    let (sg, lv) = p.v.ln_abs(y / hq);
                    if sg == 0.0 {
                        0.0
                    } else {
                        sg * (lv + log_g(nf, y) - lg).exp()
                    }
                },
                ylo,
                yhi,
                &[ym],
                &QuadratureSpec::gk(1e-300, 1e-10),
            )?;
            let ll = lam(f, n)? * lam(f, (n as i64 + h) as u64)?;
            if r.value != 0.0 && ll != 0.0 {
                terms.push((lg, ll * r.value));
                best = best.max(lg);
            }
        }
        n += 1;
    }
    if terms.is_empty() {
        return Ok(zero);
    }
    let mut s = CompensatedSum::new();
    for (lg, v) in &terms {
        if *lg >= best - 60.0 {
            s.add(v * (lg - best).exp());
        }
    }
    Ok(Scaled { mantissa: s.value(), ln_scale: best })
}

/// Maximiser and maximum of a log-integrand on `(lo, hi)`: a grid scan refined by
/// golden-section search around the best node.
fn log_peak(phi: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const GRID: usize = 400;
    let step = (hi - lo) / GRID as f64;
    let mut bi = 1;
    let mut bv = f64::NEG_INFINITY;
    for i in 1..GRID {
        let v = phi(lo + i as f64 * step);
        if v > bv {
            bv = v;
            bi = i;
        }
    }
    if bv == f64::NEG_INFINITY {
        return (0.5 * (lo + hi), bv);
    }
    let (mut a, mut b) = (lo + (bi - 1) as f64 * step, lo + (bi + 1) as f64 * step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if phi(c) >= phi(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let ym = 0.5 * (a + b);
    let v = phi(ym);
    if v >= bv {
        (ym, v)
    } else {
        (lo + bi as f64 * step, bv)
    }
}

/// `(2π²/((k−1)L)) Σ_n λ(n)λ(n+h) V((k−1)^{1−θ}/(4π(n+h/2))) (√(n(n+h))/(n+h/2))^{k−1}`.
pub fn mu_poincare_approx(f: &HeckeEigenform, l_sym2: f64, p: &PoincareObservable, squeeze: &SqueezeSpec) -> Result<f64> {
    let Some((a, b)) = p.v.support() else { return Ok(0.0) };
    let k = f.weight();
    let km1 = (k - 1) as f64;
    let x = km1 / squeeze.h(k);
    let h = p.h as f64;
    // n + h/2 ∈ [X/(4πb), X/(4πa)]
    let lo = ((x / (4.0 * PI * b) - h / 2.0).ceil().max(first_index(p.h) as f64)) as u64;
    let hi = (x / (4.0 * PI * a) - h / 2.0).floor();
    let mut s = CompensatedSum::new();
    if hi >= lo as f64 {
        for n in lo..=hi as u64 {
            let nf = n as f64;
            let mid = nf + h / 2.0;
            let vv = p.v.eval(x / (4.0 * PI * mid));
            if vv == 0.0 {
                continue;
            }
            let ratio = if p.h == 0 { 1.0 } else { ((nf * (nf + h)).sqrt() / mid).powf(km1) };
            s.add(lam(f, n)? * lam(f, (n as i64 + p.h) as u64)? * vv * ratio);
        }
    }
    Ok(2.0 * PI * PI / (km1 * l_sym2) * s.value())
}

/// Even weights `k ≥ 12` with `u((k−1)/K) ≠ 0`.
pub fn weights_in_range(big_k: f64, u: &TestWeight) -> Vec<u32> {
    let Some((a, b)) = u.support() else { return Vec::new() };
    let lo = (a * big_k + 1.0).floor().max(12.0) as u32;
    let hi = (b * big_k + 1.0).ceil() as u32;
    (lo..=hi).filter(|k| k % 2 == 0 && u.eval((k - 1) as f64 / big_k) != 0.0).collect()
}

/// Eigenbases and symmetric-square values for a set of weights, built once.
#[derive(Clone, Debug, Default)]
pub struct WeightSet {
    pub data: BTreeMap<u32, WeightData>,
}

/// Absolute tolerance used for `L(1, sym² f)` in the experiments.
pub const SYM2_TOL: f64 = 1e-10;

impl WeightSet {
    pub fn build(weights: &[u32], n_max: usize) -> Result<Self> {
        let built: Vec<Result<(u32, WeightData)>> =
            weights.par_iter().map(|&k| weight_data(k, n_max, SYM2_TOL).map(|d| (k, d))).collect();
        let mut data = BTreeMap::new();
        for r in built {
            let (k, d) = r?;
            data.insert(k, d);
        }
        Ok(WeightSet { data })
    }

    pub fn from_data(items: impl IntoIterator<Item = WeightData>) -> Self {
        WeightSet { data: items.into_iter().map(|d| (d.weight(), d)).collect() }
    }

    pub fn get(&self, k: u32) -> Result<&WeightData> {
        self.data.get(&k).ok_or_else(|| Error::Precondition(format!("weight {k} has not been built")))
    }
}

/// One weight's share of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct KContribution {
    pub k: u32,
    pub dim: usize,
    pub u_weight: f64,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    pub theta: f64,
    pub big_k: f64,
    pub obs1: String,
    pub obs2: String,
    pub empirical: f64,
    pub predicted: f64,
    pub per_k: Vec<KContribution>,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.17e}")
}

impl VarianceReport {
    /// `empirical/predicted`, absent when the prediction is 0.
    pub fn ratio(&self) -> Option<f64> {
        (self.predicted != 0.0).then(|| self.empirical / self.predicted)
    }

    pub const CSV_HEADER: &'static str = "theta,K,obs1,obs2,empirical,predicted,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.theta,
            self.big_k,
            self.obs1,
            self.obs2,
            fmt_f(self.empirical),
            fmt_f(self.predicted),
            self.ratio().map(fmt_f).unwrap_or_else(|| "NA".into())
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }

    pub fn per_k_csv(&self) -> String {
        let mut out = String::from("k,dim,u_weight,contribution\n");
        for c in &self.per_k {
            let _ = writeln!(out, "{},{},{},{}", c.k, c.dim, fmt_f(c.u_weight), fmt_f(c.contribution));
        }
        out
    }
}

/// Ordered parallel map over the weights followed by a compensated sum in `k` order.
fn sum_over_weights<F>(set: &WeightSet, big_k: f64, u: &TestWeight, per_weight: F) -> Result<(f64, Vec<KContribution>)>
where
    F: Fn(&WeightData) -> Result<f64> + Sync,
{
    let ks = weights_in_range(big_k, u);
    let parts: Vec<Result<KContribution>> = ks
        .par_iter()
        .map(|&k| {
            let data = set.get(k)?;
            let uw = u.eval((k - 1) as f64 / big_k);
            Ok(KContribution { k, dim: data.basis.dim(), u_weight: uw, contribution: uw * per_weight(data)? })
        })
        .collect();
    let per_k = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let total = per_k.iter().map(|c| c.contribution).collect::<CompensatedSum>().value();
    Ok((total, per_k))
}

/// `∫ u(y) y^s dy`.
pub fn u_moment(u: &TestWeight, s: f64) -> Result<f64> {
    let Some((a, b)) = u.support() else { return Ok(0.0) };
    Ok(integrate(|y| u.eval(y) * y.powf(s), Domain::Finite(a, b), &spec())?.value)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=4.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("θ = {theta} outside [0, 4]")));
    }
    Ok(())
}

/// Shifted-convolution variance: `Σ_k u((k−1)/K)(2π²/(k−1)) Σ_f A^{W₁}A^{W₂}/L(1, sym² f)` at
/// `X = (k−1)^{1−θ}` against `B_{h₁,h₂}(W₁,W₂)(K^{2−θ}/2)∫u y^{1−θ}`.
#[allow(clippy::too_many_arguments)]
pub fn qvthm_experiment(
    set: &WeightSet,
    big_k: f64,
    u: &TestWeight,
    theta: f64,
    w1: &TestWeight,
    h1: u64,
    w2: &TestWeight,
    h2: u64,
) -> Result<VarianceReport> {
    check_theta(theta)?;
    let (empirical, per_k) = sum_over_weights(set, big_k, u, |data| {
        let x = ((data.weight() - 1) as f64).powf(1.0 - theta);
        let mut s = CompensatedSum::new();
        for (f, w) in data.basis.forms.iter().zip(data.harmonic_weights()) {
            s.add(w * shifted_conv_direct(f, w1, x, h1)? * shifted_conv_direct(f, w2, x, h2)?);
        }
        Ok(s.value())
    })?;
    let predicted = blf_main_term(w1, w2, h1, h2)? * big_k.powf(2.0 - theta) / 2.0 * u_moment(u, 1.0 - theta)?;
    Ok(VarianceReport {
        theta,
        big_k,
        obs1: format!("A[{};h={h1}]", w1.describe()),
        obs2: format!("A[{};h={h2}]", w2.describe()),
        empirical,
        predicted,
        per_k,
    })
}

/// Predicted `B_θ(P₁,P₂)` for Poincaré observables (cuspidal pairs only; pairs
/// involving a zero mode fall back to the incomplete-Eisenstein form).
pub fn b_theta_pair(p1: &PoincareObservable, p2: &PoincareObservable, theta: f64) -> Result<f64> {
    match (p1.h, p2.h) {
        (0, 0) => crate::btheta::b_theta_eisenstein(&p1.v, &p2.v),
        (0, _) | (_, 0) => Ok(0.0),
        (a, b) => b_theta_poincare(&p1.v, a, &p2.v, b, &ThetaRegime::new(theta)?),
    }
}

/// `Σ_k u((k−1)/K) Σ_f L(1, sym² f) μ_f(M_H P₁) μ_f(M_H P₂)` against `B_θ(P₁,P₂)·∫u y^{−θ}·K^{1−θ}`.
pub fn variance_experiment(
    set: &WeightSet,
    big_k: f64,
    u: &TestWeight,
    theta: f64,
    p1: &PoincareObservable,
    p2: &PoincareObservable,
) -> Result<VarianceReport> {
    check_theta(theta)?;
    let squeeze = SqueezeSpec::new(theta)?;
    let (empirical, per_k) = sum_over_weights(set, big_k, u, |data| {
        let mut s = CompensatedSum::new();
        for (f, l) in data.basis.forms.iter().zip(&data.sym2) {
            let m1 = mu_poincare_exact(f, l.value, p1, &squeeze)?;
            let m2 = if p2 == p1 { m1 } else { mu_poincare_exact(f, l.value, p2, &squeeze)? };
            s.add(l.value * m1 * m2);
        }
        Ok(s.value())
    })?;
    let predicted = if theta > 0.0 && theta < 1.0 {
        b_theta_pair(p1, p2, theta)? * u_moment(u, -theta)? * big_k.powf(1.0 - theta)
    } else {
        0.0
    };
    Ok(VarianceReport { theta, big_k, obs1: p1.describe(), obs2: p2.describe(), empirical, predicted, per_k })
}

/// `Σ_k u((k−1)/K) Σ_f L(1, sym² f)` against `(ζ(2)²/12)(K²/2)∫u y dy`.
pub fn zeroth_moment(set: &WeightSet, big_k: f64, u: &TestWeight) -> Result<VarianceReport> {
    let (empirical, per_k) =
        sum_over_weights(set, big_k, u, |data| Ok(data.sym2.iter().map(|s| s.value).collect::<CompensatedSum>().value()))?;
    let predicted = ZETA2 * ZETA2 / 12.0 * big_k * big_k / 2.0 * u_moment(u, 1.0)?;
    Ok(VarianceReport { theta: 0.0, big_k, obs1: "1".into(), obs2: "1".into(), empirical, predicted, per_k })
}

/// `Σ_k u((k−1)/K) Σ_f L(1, sym² f) μ_f(M_H P_{V,0})` against
/// `ν(P_{V,0})(ζ(2)²/12)(K^{2−θ}/2)∫u y^{1−θ}`.
pub fn first_moment(set: &WeightSet, big_k: f64, u: &TestWeight, theta: f64, v: &TestWeight) -> Result<VarianceReport> {
    check_theta(theta)?;
    let squeeze = SqueezeSpec::new(theta)?;
    let p = PoincareObservable::new(v.clone(), 0)?;
    let (empirical, per_k) = sum_over_weights(set, big_k, u, |data| {
        let mut s = CompensatedSum::new();
        for (f, l) in data.basis.forms.iter().zip(&data.sym2) {
            s.add(l.value * mu_poincare_exact(f, l.value, &p, &squeeze)?);
        }
        Ok(s.value())
    })?;
    let nu = nu_squeezed(v, 1.0)?;
    let predicted = nu * ZETA2 * ZETA2 / 12.0 * big_k.powf(2.0 - theta) / 2.0 * u_moment(u, 1.0 - theta)?;
    Ok(VarianceReport { theta, big_k, obs1: p.describe(), obs2: "1".into(), empirical, predicted, per_k })
}

/// One form's squeezed mass next to the equidistributed value.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanckRow {
    pub k: u32,
    pub form_index: usize,
    pub mu_exact: f64,
    pub ln_abs_mu: f64,
    pub mu_approx: f64,
    pub nu: f64,
    pub ratio: f64,
    /// `log₁₀(|μ_f|/ν)`, finite even when the ratio underflows.
    pub log10_ratio: f64,
}

impl PlanckRow {
    pub const CSV_HEADER: &'static str = "k,form_index,mu_exact,log10_abs_mu,mu_approx,nu,ratio,log10_ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.k,
            self.form_index,
            fmt_f(self.mu_exact),
            fmt_f(self.ln_abs_mu / std::f64::consts::LN_10),
            fmt_f(self.mu_approx),
            fmt_f(self.nu),
            fmt_f(self.ratio),
            fmt_f(self.log10_ratio)
        )
    }
}

/// `μ_f(M_{(k−1)^θ} P_{V,0})`, `ν(M P_{V,0})` and `|μ_f|/ν` for every form of every listed weight.
pub fn planck_failure_probe(set: &WeightSet, weights: &[u32], theta: f64, v: &TestWeight) -> Result<Vec<PlanckRow>> {
    let squeeze = SqueezeSpec::new(theta)?;
    let p = PoincareObservable::new(v.clone(), 0)?;
    if is_mean_zero(v)? {
        return Err(Error::Precondition("planck probe needs ∫V y⁻² dy ≠ 0".into()));
    }
    let rows: Vec<Result<Vec<PlanckRow>>> = weights
        .par_iter()
        .map(|&k| {
            let data = set.get(k)?;
            let nu = nu_squeezed(v, squeeze.h(k))?;
            data.basis
                .forms
                .iter()
                .zip(&data.sym2)
                .map(|(f, l)| {
                    let m = mu_poincare_exact_scaled(f, l.value, &p, &squeeze)?;
                    let ln_abs_mu = m.ln_abs();
                    Ok(PlanckRow {
                        k,
                        form_index: f.index(),
                        mu_exact: m.value(),
                        ln_abs_mu,
                        mu_approx: mu_poincare_approx(f, l.value, &p, &squeeze)?,
                        nu,
                        ratio: (ln_abs_mu - nu.abs().ln()).exp(),
                        log10_ratio: (ln_abs_mu - nu.abs().ln()) / std::f64::consts::LN_10,
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerMaclaurin {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// `Σ_d V(X/(rd))` against `(X/r)∫V y⁻² dy − ∫ b₂(y) Ṽ(X/(ry)) y⁻² dy`.
pub fn euler_maclaurin_check(v: &TestWeight, x: f64, r: f64) -> Result<EulerMaclaurin> {
    euler_maclaurin_check_with(v, x, r, &QuadratureSpec::gk(1e-15, 1e-13))
}

pub fn euler_maclaurin_check_with(v: &TestWeight, x: f64, r: f64, spec: &QuadratureSpec) -> Result<EulerMaclaurin> {
    if !(x > 0.0 && r > 0.0) {
        return Err(Error::InvalidArgument("X and r must be positive".into()));
    }
    let vt = weight_tilde(v)?;
    let Some((a, b)) = v.support() else {
        return Ok(EulerMaclaurin { lhs: 0.0, rhs: 0.0, residual: 0.0 });
    };
    let c = x / r;
    let lhs = (1..=(c / a).floor() as u64).map(|d| v.eval(c / d as f64)).collect::<CompensatedSum>().value();
    let mean = integrate(|y| v.eval(y) / (y * y), Domain::Finite(a, b), spec)?.value;
    let (lo, hi) = (c / b, c / a);
    let breaks: Vec<f64> = (lo.floor() as i64 + 1..=hi.ceil() as i64).map(|n| n as f64).collect();
    let corr = integrate_pieces(|y| b2(y) * vt.eval(c / y) / (y * y), lo, hi, &breaks, spec)?.value;
    let rhs = c * mean - corr;
    Ok(EulerMaclaurin { lhs, rhs, residual: (lhs - rhs).abs() })
}
