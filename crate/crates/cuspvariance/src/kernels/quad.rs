//! Adaptive Gauss–Kronrod (7/15) on finite intervals and the double-exponential
//! rule on rays `[a, ∞)`.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    GaussKronrod,
    /// Double-exponential substitution (tanh-sinh on intervals, exp-sinh on rays).
    TanhSinh,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth (GK) or level-halving count (tanh-sinh).
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { scheme: Scheme::GaussKronrod, abs_tol: 1e-13, rel_tol: 1e-11, max_depth: 40 }
    }
}

impl QuadratureSpec {
    pub fn gk(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec { scheme: Scheme::GaussKronrod, abs_tol, rel_tol, max_depth: 40 }
    }

    pub fn tanh_sinh(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec { scheme: Scheme::TanhSinh, abs_tol, rel_tol, max_depth: 12 }
    }

    /// Same scheme with both tolerances scaled by `f`.
    pub fn tightened(&self, f: f64) -> Self {
        QuadratureSpec { abs_tol: self.abs_tol * f, rel_tol: self.rel_tol * f, ..*self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }

    fn accepts(&self, value: f64, err: f64) -> bool {
        err <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// `[a, ∞)`
    Ray(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, domain: Domain, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    match (domain, spec.scheme) {
        (Domain::Finite(a, b), _) if a == b => Ok(QuadResult { value: 0.0, error: 0.0 }),
        (Domain::Finite(a, b), _) if a > b => {
            integrate(f, Domain::Finite(b, a), spec).map(|r| QuadResult { value: -r.value, ..r })
        }
        (Domain::Finite(a, b), Scheme::GaussKronrod) => gauss_kronrod(&f, a, b, spec),
        (Domain::Finite(a, b), Scheme::TanhSinh) => tanh_sinh(&f, a, b, spec),
        (Domain::Ray(a), Scheme::GaussKronrod) => {
            // x = a + s/(1−s), dx = ds/(1−s)²
            let g = |s: f64| {
                let om = 1.0 - s;
                let x = a + s / om;
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v / (om * om)
                }
            };
            gauss_kronrod(&g, 0.0, 1.0, spec)
        }
        (Domain::Ray(a), Scheme::TanhSinh) => exp_sinh(&f, a, spec),
    }
}

/// Integral over `[a, b]` split at the given interior breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = (pts.len() - 1).max(1) as f64;
    let piece_spec = QuadratureSpec { abs_tol: spec.abs_tol / n, ..*spec };
    let mut value = 0.0;
    let mut error = 0.0;
    for w in pts.windows(2) {
        let r = integrate(&f, Domain::Finite(w[0], w[1]), &piece_spec)?;
        value += r.value;
        error += r.error;
    }
    Ok(QuadResult { value, error })
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    let rk = rk * h;
    let rg = rg * h;
    (rk, (rk - rg).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.partial_cmp(&o.error).unwrap_or(Ordering::Equal)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    let (v, e) = gk15(f, a, b);
    if !v.is_finite() {
        return Err(Error::Quadrature { estimate: v, error: f64::INFINITY });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e, depth: 0 });
    let mut total = v;
    let mut err = e;
    let max_segments = 20_000;
    while !spec.accepts(total, err) {
        let seg = heap.pop().expect("nonempty");
        if seg.depth >= spec.max_depth || heap.len() > max_segments {
            heap.push(seg);
            let (value, error) = sum_heap(&heap);
            return Err(Error::Quadrature { estimate: value, error });
        }
        let m = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(f, seg.a, m);
        let (v2, e2) = gk15(f, m, seg.b);
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: m, value: v1, error: e1, depth: seg.depth + 1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, error: e2, depth: seg.depth + 1 });
        if heap.len() % 64 == 0 {
            // Re-sum to shed accumulated rounding in the running totals.
            let (tv, te) = sum_heap(&heap);
            total = tv;
            err = te;
        }
    }
    let (value, error) = sum_heap(&heap);
    Ok(QuadResult { value, error })
}

fn sum_heap(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let mut v = super::sum::CompensatedSum::new();
    let mut e = 0.0;
    for s in segs {
        v.add(s.value);
        e += s.error;
    }
    (v.value(), e)
}

fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    let c = 0.5 * (a + b);
    let h2 = 0.5 * (b - a);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |t: f64| -> f64 {
        let s = half_pi * t.sinh();
        let ch = s.cosh();
        let w = half_pi * t.cosh() / (ch * ch);
        // 1 − tanh(s) computed without cancellation.
        let omx = 1.0 / (s.exp() * ch);
        let x_hi = b - h2 * omx;
        let x_lo = a + h2 * omx;
        if w < 1e-300 {
            return 0.0;
        }
        let _ = c;
        h2 * w * (f(x_lo) + f(x_hi))
    };
    let tmax = 3.2;
    let mut h = 0.5f64;
    let mut sum = h2 * half_pi * f(c);
    let mut k = 1;
    while (k as f64) * h <= tmax {
        sum += term(k as f64 * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..spec.max_depth {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            sum += term(k as f64 * h);
            k += 2;
        }
        let cur = sum * h;
        let err = (cur - prev).abs();
        if spec.accepts(cur, err) {
            return Ok(QuadResult { value: cur, error: err });
        }
        prev = cur;
    }
    Err(Error::Quadrature { estimate: prev, error: f64::NAN })
}

fn exp_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    // x = a + exp(π/2 · sinh t), dx = π/2 cosh t · exp(π/2 sinh t) dt
    let term = |t: f64| -> f64 {
        let e = (half_pi * t.sinh()).exp();
        if e == 0.0 || !e.is_finite() {
            return 0.0;
        }
        let v = f(a + e);
        if v == 0.0 {
            0.0
        } else {
            v * half_pi * t.cosh() * e
        }
    };
    let (tmin, tmax) = (-4.5f64, 4.5f64);
    let mut h = 0.5f64;
    let mut sum = 0.0;
    let mut k = (tmin / h).ceil() as i64;
    while (k as f64) * h <= tmax {
        sum += term(k as f64 * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..spec.max_depth {
        h *= 0.5;
        let mut k = (tmin / h).ceil() as i64;
        if k % 2 == 0 {
            k += 1;
        }
        while (k as f64) * h <= tmax {
            sum += term(k as f64 * h);
            k += 2;
        }
        let cur = sum * h;
        let err = (cur - prev).abs();
        if !cur.is_finite() {
            break;
        }
        if spec.accepts(cur, err) {
            return Ok(QuadResult { value: cur, error: err });
        }
        prev = cur;
    }
    Err(Error::Quadrature { estimate: prev, error: f64::NAN })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on the three-term recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
