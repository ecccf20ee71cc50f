//! Smooth compactly supported test weights on `(0, ∞)`.
//!
//! The bump families are differentiated by propagating truncated Taylor series
//! (jets) through `exp(−1/((y−a)(b−y)))`, so any derivative order is available
//! in closed form, and `Ṽ = (V′y²)′` is just another jet transform.

use crate::error::{Error, Result};
use crate::kernels::quad::{integrate, Domain, QuadratureSpec};

#[derive(Clone, Debug, PartialEq)]
pub enum TestWeight {
    Zero,
    /// `exp(−1/((y−a)(b−y)))` on `(a, b)`.
    Bump { a: f64, b: f64 },
    /// `p(y)·exp(−1/((y−a)(b−y)))`, `p` given by coefficients low to high.
    PolyBump { a: f64, b: f64, coeffs: Vec<f64> },
    /// Piecewise-linear interpolation of `(xs, ys)`, zero outside `[xs₀, xs_last]`.
    Table { xs: Vec<f64>, ys: Vec<f64> },
    /// `y ↦ c·W(y/s)`.
    Scaled { inner: Box<TestWeight>, scale: f64, factor: f64 },
    /// `(W′(y)y²)′`.
    Tilde(Box<TestWeight>),
}

impl TestWeight {
    pub fn zero() -> Self {
        TestWeight::Zero
    }

    pub fn bump(a: f64, b: f64) -> Result<Self> {
        check_support(a, b)?;
        Ok(TestWeight::Bump { a, b })
    }

    pub fn poly_bump(a: f64, b: f64, coeffs: Vec<f64>) -> Result<Self> {
        check_support(a, b)?;
        Ok(TestWeight::PolyBump { a, b, coeffs })
    }

    pub fn table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidArgument("table weight needs ≥ 2 matching nodes".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || !(xs[0] > 0.0) {
            return Err(Error::InvalidArgument("table nodes must be positive and increasing".into()));
        }
        Ok(TestWeight::Table { xs, ys })
    }

    /// Piecewise-linear plateau: 0 at `a`, 1 on `[a+r, b−r]`, 0 at `b`.
    pub fn plateau(a: f64, b: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && a + 2.0 * r < b) {
            return Err(Error::InvalidArgument("plateau ramps overlap".into()));
        }
        Self::table(vec![a, a + r, b - r, b], vec![0.0, 1.0, 1.0, 0.0])
    }

    /// Bump times `y² − μy³` with `μ` chosen so that `∫ V(y) y⁻² dy = 0`.
    pub fn mean_zero_bump(a: f64, b: f64) -> Result<Self> {
        check_support(a, b)?;
        let w = TestWeight::Bump { a, b };
        let spec = QuadratureSpec::gk(1e-16, 1e-14);
        let m0 = integrate(|y| w.eval(y), Domain::Finite(a, b), &spec)?.value;
        let m1 = integrate(|y| y * w.eval(y), Domain::Finite(a, b), &spec)?.value;
        Ok(TestWeight::PolyBump { a, b, coeffs: vec![0.0, 0.0, 1.0, -m0 / m1] })
    }

    /// `y ↦ factor·W(y/scale)`.
    pub fn scaled(&self, scale: f64, factor: f64) -> Self {
        assert!(scale > 0.0);
        TestWeight::Scaled { inner: Box::new(self.clone()), scale, factor }
    }

    /// Compact label used in report files (no commas).
    pub fn describe(&self) -> String {
        match self {
            TestWeight::Zero => "zero".into(),
            TestWeight::Bump { a, b } => format!("bump[{a}:{b}]"),
            TestWeight::PolyBump { a, b, coeffs } => {
                let c: Vec<String> = coeffs.iter().map(|c| format!("{c}")).collect();
                format!("polybump[{a}:{b}|{}]", c.join(" "))
            }
            TestWeight::Table { xs, .. } => format!("table[{}:{}|{} nodes]", xs[0], xs[xs.len() - 1], xs.len()),
            TestWeight::Scaled { inner, scale, factor } => format!("{factor}*({})(y/{scale})", inner.describe()),
            TestWeight::Tilde(inner) => format!("tilde({})", inner.describe()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TestWeight::Zero => true,
            TestWeight::PolyBump { coeffs, .. } => coeffs.iter().all(|&c| c == 0.0),
            TestWeight::Table { ys, .. } => ys.iter().all(|&c| c == 0.0),
            TestWeight::Scaled { inner, factor, .. } => *factor == 0.0 || inner.is_zero(),
            TestWeight::Tilde(inner) => inner.is_zero(),
            TestWeight::Bump { .. } => false,
        }
    }

    /// Closed interval outside which the weight vanishes; `None` for the zero weight.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            TestWeight::Zero => None,
            TestWeight::Bump { a, b } | TestWeight::PolyBump { a, b, .. } => Some((*a, *b)),
            TestWeight::Table { xs, .. } => Some((xs[0], xs[xs.len() - 1])),
            TestWeight::Scaled { inner, scale, .. } => inner.support().map(|(a, b)| (a * scale, b * scale)),
            TestWeight::Tilde(inner) => inner.support(),
        }
    }

    pub fn has_closed_form(&self) -> bool {
        match self {
            TestWeight::Table { .. } => false,
            TestWeight::Scaled { inner, .. } | TestWeight::Tilde(inner) => inner.has_closed_form(),
            _ => true,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            TestWeight::Table { xs, ys } => table_eval(xs, ys, y),
            _ => self.jet(y, 0).map(|j| j[0]).unwrap_or(0.0),
        }
    }

    /// `(sign W(y), ln |W(y)|)`, accurate where `W(y)` itself underflows.
    pub fn ln_abs(&self, y: f64) -> (f64, f64) {
        let bump_log = |a: f64, b: f64| -1.0 / ((y - a) * (b - y));
        match self {
            TestWeight::Bump { a, b } if y > *a && y < *b => (1.0, bump_log(*a, *b)),
            TestWeight::PolyBump { a, b, coeffs } if y > *a && y < *b => {
                let p = coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c);
                (p.signum(), p.abs().ln() + bump_log(*a, *b))
            }
            TestWeight::Scaled { inner, scale, factor } => {
                let (s, l) = inner.ln_abs(y / scale);
                (s * factor.signum(), l + factor.abs().ln())
            }
            _ => {
                let v = self.eval(y);
                (v.signum(), v.abs().ln())
            }
        }
    }

    /// `W^{(order)}(y)`.
    pub fn derivative(&self, y: f64, order: usize) -> Result<f64> {
        if order == 0 {
            return Ok(self.eval(y));
        }
        let jet = self.jet(y, order)?;
        Ok(jet[order] * factorial(order))
    }

    pub fn d1(&self, y: f64) -> Result<f64> {
        self.derivative(y, 1)
    }

    pub fn d2(&self, y: f64) -> Result<f64> {
        self.derivative(y, 2)
    }

    /// Taylor coefficients `W^{(j)}(y)/j!`, `j = 0..=order`.
    pub fn jet(&self, y: f64, order: usize) -> Result<Vec<f64>> {
        match self {
            TestWeight::Zero => Ok(vec![0.0; order + 1]),
            TestWeight::Bump { a, b } => Ok(bump_jet(*a, *b, y, order)),
            TestWeight::PolyBump { a, b, coeffs } => {
                let bj = bump_jet(*a, *b, y, order);
                Ok(mul_series(&bj, &poly_jet(coeffs, y, order), order))
            }
            TestWeight::Table { xs, ys } => {
                if order >= 2 {
                    return Err(Error::TableWeight);
                }
                let mut j = vec![table_eval(xs, ys, y)];
                if order == 1 {
                    j.push(table_slope(xs, ys, y));
                }
                Ok(j)
            }
            TestWeight::Scaled { inner, scale, factor } => {
                let mut j = inner.jet(y / scale, order)?;
                let mut s = *factor;
                for c in j.iter_mut() {
                    *c *= s;
                    s /= scale;
                }
                Ok(j)
            }
            TestWeight::Tilde(inner) => {
                // Ṽ(y+ε) = d/dε [ V′(y+ε)·(y+ε)² ]
                let v = inner.jet(y, order + 2)?;
                let dv: Vec<f64> = (0..=order + 1).map(|i| (i + 1) as f64 * v[i + 1]).collect();
                let sq = [y * y, 2.0 * y, 1.0];
                let g = mul_series(&dv, &sq, order + 1);
                Ok((0..=order).map(|i| (i + 1) as f64 * g[i + 1]).collect())
            }
        }
    }
}

/// `Ṽ(y) = V″(y)y² + 2yV′(y)`, same support as `V`.
pub fn weight_tilde(v: &TestWeight) -> Result<TestWeight> {
    if !v.has_closed_form() {
        return Err(Error::TableWeight);
    }
    if v.is_zero() {
        return Ok(TestWeight::Zero);
    }
    Ok(TestWeight::Tilde(Box::new(v.clone())))
}

fn check_support(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("weight support must satisfy 0 < a < b, got [{a}, {b}]")));
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn mul_series(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (i, &ai) in a.iter().enumerate().take(order + 1) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Taylor coefficients of the polynomial `Σ c_i y^i` about `y`.
fn poly_jet(coeffs: &[f64], y: f64, order: usize) -> Vec<f64> {
    // Horner on series: p(y+ε) = (...(c_n (y+ε) + c_{n−1})(y+ε) + ...).
    let mut acc = vec![0.0; order + 1];
    for &c in coeffs.iter().rev() {
        let mut next = vec![0.0; order + 1];
        for i in 0..=order {
            next[i] += acc[i] * y;
            if i + 1 <= order {
                next[i + 1] += acc[i];
            }
        }
        next[0] += c;
        acc = next;
    }
    acc
}

fn bump_jet(a: f64, b: f64, y: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if !(y > a && y < b) {
        return out;
    }
    let u = y - a;
    let v = b - y;
    let q0 = u * v;
    if 1.0 / q0 > 745.0 {
        return out;
    }
    // q(ε) = uv + (v − u)ε − ε²; s = −1/q as a series.
    let q = [q0, v - u, -1.0];
    let mut r = vec![0.0; order + 1];
    r[0] = 1.0 / q0;
    for n in 1..=order {
        let mut s = 0.0;
        for j in 1..=n.min(2) {
            s += q[j] * r[n - j];
        }
        r[n] = -s / q0;
    }
    let s: Vec<f64> = r.iter().map(|x| -x).collect();
    out[0] = s[0].exp();
    for n in 1..=order {
        let mut acc = 0.0;
        for j in 1..=n {
            acc += j as f64 * s[j] * out[n - j];
        }
        out[n] = acc / n as f64;
    }
    out
}

fn table_eval(xs: &[f64], ys: &[f64], y: f64) -> f64 {
    if !(y >= xs[0] && y <= xs[xs.len() - 1]) {
        return 0.0;
    }
    let i = xs.partition_point(|&x| x <= y).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = (y - x0) / (x1 - x0);
    ys[i - 1] * (1.0 - w) + ys[i] * w
}

fn table_slope(xs: &[f64], ys: &[f64], y: f64) -> f64 {
    if !(y > xs[0] && y < xs[xs.len() - 1]) {
        return 0.0;
    }
    let i = xs.partition_point(|&x| x <= y).clamp(1, xs.len() - 1);
    (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])
}
