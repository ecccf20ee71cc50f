//! The limiting Hermitian forms `B_θ`: Poincaré pairs, incomplete Eisenstein
//! pairs, general Fourier-mode observables, and truncated Maass forms.

mod maass;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{b2, integrate, integrate_pieces, tau1, weight_tilde, Domain, QuadratureSpec, TestWeight};

pub use maass::{
    b_theta_maass, corollary_weighted, i_theta, parse_maass_file, parse_maass_str, partial_sums_csv,
    MaassFormData, Parity,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Low,
    Critical,
    High,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaRegime {
    pub theta: f64,
    pub regime: Regime,
}

impl ThetaRegime {
    /// `θ ∈ (0, 1)`; the critical regime is exactly `θ = 1/2`.
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!("θ must lie in (0, 1), got {theta}")));
        }
        let regime = if theta < 0.5 {
            Regime::Low
        } else if theta == 0.5 {
            Regime::Critical
        } else {
            Regime::High
        };
        Ok(ThetaRegime { theta, regime })
    }
}

/// `f_{θ,m,n}(y)`: 1, `e^{−2π²y²(m²+n²)}` or 0.
pub fn f_theta_kernel(regime: &ThetaRegime, m: i64, n: i64, y: f64) -> f64 {
    match regime.regime {
        Regime::Low => 1.0,
        Regime::Critical => (-2.0 * PI * PI * y * y * ((m * m + n * n) as f64)).exp(),
        Regime::High => 0.0,
    }
}

fn tight() -> QuadratureSpec {
    QuadratureSpec::gk(1e-300, 1e-13)
}

/// `(π/4) τ₁((|h₁|,|h₂|)) ∫ V₁(y/|h₁|) V₂(y/|h₂|) f_{θ,h₁,h₂}(y) dy/y²`.
pub fn b_theta_poincare(v1: &TestWeight, h1: i64, v2: &TestWeight, h2: i64, regime: &ThetaRegime) -> Result<f64> {
    if h1 == 0 || h2 == 0 {
        return Err(Error::Precondition("b_theta_poincare needs h₁h₂ ≠ 0".into()));
    }
    if regime.regime == Regime::High {
        return Ok(0.0);
    }
    let (s1, s2) = (h1.unsigned_abs() as f64, h2.unsigned_abs() as f64);
    let (Some((a1, b1)), Some((a2, b2_))) = (v1.support(), v2.support()) else {
        return Ok(0.0);
    };
    let lo = (a1 * s1).max(a2 * s2);
    let hi = (b1 * s1).min(b2_ * s2);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let g = num_integer::gcd(h1.unsigned_abs(), h2.unsigned_abs());
    let r = integrate(
        |y| v1.eval(y / s1) * v2.eval(y / s2) * f_theta_kernel(regime, h1, h2, y) / (y * y),
        Domain::Finite(lo, hi),
        &tight(),
    )?;
    Ok(0.25 * PI * tau1(g) as f64 * r.value)
}

/// `∫ V(y) y⁻² dy`.
pub fn harmonic_mean(v: &TestWeight) -> Result<f64> {
    let Some((a, b)) = v.support() else { return Ok(0.0) };
    // absolute tolerance from the size of |V|, since mean-zero data integrate to ~0
    let scale = integrate(|y| v.eval(y).abs() / (y * y), Domain::Finite(a, b), &QuadratureSpec::gk(1e-300, 1e-10))?.value;
    let spec = QuadratureSpec::gk(1e-15 * scale, 1e-14);
    Ok(integrate(|y| v.eval(y) / (y * y), Domain::Finite(a, b), &spec)?.value)
}

/// Whether `|∫V y⁻² dy| ≤ 10⁻¹⁰ ∫|V| y⁻² dy`.
pub fn is_mean_zero(v: &TestWeight) -> Result<bool> {
    let Some((a, b)) = v.support() else { return Ok(true) };
    let m = harmonic_mean(v)?;
    let scale = integrate(|y| v.eval(y).abs() / (y * y), Domain::Finite(a, b), &QuadratureSpec::gk(1e-300, 1e-12))?.value;
    Ok(m.abs() <= 1e-10 * scale)
}

fn check_mean_zero(v: &TestWeight) -> Result<()> {
    if !is_mean_zero(v)? {
        return Err(Error::Precondition(format!(
            "zero-mode weight {} has ∫V y⁻² dy = {:e} ≠ 0",
            v.describe(),
            harmonic_mean(v)?
        )));
    }
    Ok(())
}

/// Quadrature settings for the incomplete-Eisenstein triple integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EisensteinSpec {
    pub inner: QuadratureSpec,
    pub outer: QuadratureSpec,
}

impl Default for EisensteinSpec {
    fn default() -> Self {
        EisensteinSpec { inner: QuadratureSpec::gk(1e-15, 1e-11), outer: QuadratureSpec::gk(1e-15, 1e-10) }
    }
}

/// `G(t) = ∫ b₂(y) Ṽ(t/y) dy/y²` with the integer kinks of `b₂` as breakpoints.
pub fn eisenstein_inner(vt: &TestWeight, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let Some((a, b)) = vt.support() else { return Ok(0.0) };
    let (lo, hi) = (t / b, t / a);
    let breaks: Vec<f64> = (lo.floor() as i64 + 1..=hi.ceil() as i64).map(|n| n as f64).collect();
    Ok(integrate_pieces(|y| b2(y) * vt.eval(t / y) / (y * y), lo, hi, &breaks, spec)?.value)
}

/// `(π/4) ∭ b₂(y₁)b₂(y₂) Ṽ₁(t/y₁) Ṽ₂(t/y₂) dy₁/y₁² dy₂/y₂² dt/t²` for mean-zero `V₁, V₂`.
/// The inner integrals vanish for `t` below the support of `V`, so the outer
/// integral starts there and stops once further unit pieces no longer contribute.
pub fn b_theta_eisenstein(v1: &TestWeight, v2: &TestWeight) -> Result<f64> {
    b_theta_eisenstein_with(v1, v2, &EisensteinSpec::default())
}

pub fn b_theta_eisenstein_with(v1: &TestWeight, v2: &TestWeight, spec: &EisensteinSpec) -> Result<f64> {
    if v1.is_zero() || v2.is_zero() {
        return Ok(0.0);
    }
    check_mean_zero(v1)?;
    check_mean_zero(v2)?;
    let t1 = weight_tilde(v1)?;
    let t2 = weight_tilde(v2)?;
    let (a1, _) = v1.support().unwrap();
    let (a2, _) = v2.support().unwrap();
    let start = a1.max(a2);
    let g = |t: f64| -> f64 {
        let x = eisenstein_inner(&t1, t, &spec.inner).unwrap_or(f64::NAN);
        let y = eisenstein_inner(&t2, t, &spec.inner).unwrap_or(f64::NAN);
        x * y / (t * t)
    };
    let mut total = crate::kernels::CompensatedSum::new();
    let mut quiet = 0;
    let mut t = start;
    while quiet < 4 {
        let piece = integrate(g, Domain::Finite(t, t + 1.0), &spec.outer)?;
        if !piece.value.is_finite() {
            return Err(Error::Quadrature { estimate: piece.value, error: piece.error });
        }
        total.add(piece.value);
        if piece.value.abs() <= 1e-14 * total.value().abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        t += 1.0;
        if t > start + 2000.0 {
            return Err(Error::NoConvergence("Eisenstein t-integral did not decay".into()));
        }
    }
    Ok(0.25 * PI * total.value())
}

/// `ψ(z) = Σ_m V_m(y) e(mx)`, each `V_m` a finite combination `Σ c_i W_i`
/// with `supp W_i ⊂ [1, ∞)`; zero-mode terms must have `∫ W y⁻² dy = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierObservable {
    modes: BTreeMap<i64, Vec<(Complex64, TestWeight)>>,
}

impl FourierObservable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(m: i64, v: TestWeight) -> Result<Self> {
        Self::new().with_mode(m, Complex64::new(1.0, 0.0), v)
    }

    pub fn with_mode(mut self, m: i64, c: Complex64, v: TestWeight) -> Result<Self> {
        if let Some((a, _)) = v.support() {
            if a < 1.0 {
                return Err(Error::Precondition(format!("mode {m}: support must lie in [1, ∞), starts at {a}")));
            }
        }
        if m == 0 {
            check_mean_zero(&v)?;
        }
        if !v.is_zero() && c != Complex64::new(0.0, 0.0) {
            self.modes.entry(m).or_default().push((c, v));
        }
        Ok(self)
    }

    pub fn modes(&self) -> &BTreeMap<i64, Vec<(Complex64, TestWeight)>> {
        &self.modes
    }

    pub fn has_zero_mode(&self) -> bool {
        self.modes.contains_key(&0)
    }

    pub fn is_cuspidal(&self) -> bool {
        !self.has_zero_mode()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(&m, terms)| (m, terms.iter().map(|(ci, v)| (ci * c, v.clone())).collect()))
            .collect();
        FourierObservable { modes }
    }

    pub fn add(&self, other: &FourierObservable) -> Self {
        let mut out = self.clone();
        for (&m, terms) in &other.modes {
            out.modes.entry(m).or_default().extend(terms.iter().cloned());
        }
        out
    }

    /// `V_m(y)` for one mode.
    pub fn mode_value(&self, m: i64, y: f64) -> Complex64 {
        self.modes
            .get(&m)
            .map(|terms| terms.iter().map(|(c, v)| c * v.eval(y)).sum())
            .unwrap_or_default()
    }
}

/// `B_θ(ψ₁, ψ₂)`: linear in `ψ₁`, conjugate-linear in `ψ₂`. Nonzero mode pairs
/// contribute [`b_theta_poincare`], zero-mode pairs [`b_theta_eisenstein`], mixed pairs nothing.
pub fn b_theta_general(psi1: &FourierObservable, psi2: &FourierObservable, regime: &ThetaRegime) -> Result<Complex64> {
    let mut re = crate::kernels::CompensatedSum::new();
    let mut im = crate::kernels::CompensatedSum::new();
    for (&m, t1) in &psi1.modes {
        for (&n, t2) in &psi2.modes {
            if (m == 0) != (n == 0) {
                continue;
            }
            for (c1, v1) in t1 {
                for (c2, v2) in t2 {
                    let b = if m == 0 { b_theta_eisenstein(v1, v2)? } else { b_theta_poincare(v1, m, v2, n, regime)? };
                    let z = c1 * c2.conj() * b;
                    re.add(z.re);
                    im.add(z.im);
                }
            }
        }
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// `(Σ_{j≤N} Σ_m |2πm|^{2j} ∫_1^∞ |V_m(y)|² y⁻² dy)^{1/2}` for cuspidal `ψ`.
pub fn sobolev_norm(psi: &FourierObservable, order: u32) -> Result<f64> {
    if psi.has_zero_mode() {
        return Err(Error::Precondition("Sobolev norm is defined here for cuspidal observables only".into()));
    }
    let mut total = 0.0;
    for (&m, terms) in &psi.modes {
        let lo = terms.iter().filter_map(|(_, v)| v.support()).map(|s| s.0).fold(f64::INFINITY, f64::min).max(1.0);
        let hi = terms.iter().filter_map(|(_, v)| v.support()).map(|s| s.1).fold(0.0, f64::max);
        if !(lo < hi) {
            continue;
        }
        let l2 = integrate(|y| psi.mode_value(m, y).norm_sqr() / (y * y), Domain::Finite(lo, hi), &tight())?.value;
        let w = (2.0 * PI * m as f64).powi(2);
        let mut pw = 1.0;
        for _ in 0..=order {
            total += pw * l2;
            pw *= w;
        }
    }
    Ok(total.sqrt())
}
