//! `J_ν(x)` for integer order and `K_{it}(x)` for real `t`.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const J_MAX_ORDER: u32 = 1_000_000;
const J_MAX_ARG: f64 = 1e8;

/// `J_ν(x)` for integer `ν ≥ 0`, `0 ≤ x ≤ 10⁸`.
///
/// Power series while the terms decrease from the start (`x² ≤ 4(ν+1)`),
/// Miller's backward recurrence up to `x ≤ max(30, 10ν)`, Hankel's expansion
/// beyond (directly at order `ν` once `x ≥ ν²`, otherwise at orders 0, 1 and then
/// the forward recurrence, which is stable for `ν ≪ x`).
pub fn bessel_j(nu: u32, x: f64) -> Result<f64> {
    if nu > J_MAX_ORDER || !(0.0..=J_MAX_ARG).contains(&x) || x.is_nan() {
        return Err(Error::InvalidArgument(format!("bessel_j outside domain: ν = {nu}, x = {x}")));
    }
    if x == 0.0 {
        return Ok(if nu == 0 { 1.0 } else { 0.0 });
    }
    let v = nu as f64;
    if x * x <= 4.0 * (v + 1.0) {
        return Ok(j_series(nu, x));
    }
    if x <= 30f64.max(10.0 * v) {
        return Ok(j_miller(nu, x));
    }
    if x >= v * v {
        return Ok(j_hankel(nu, x));
    }
    let (mut jm, mut j) = (j_hankel(0, x), j_hankel(1, x));
    for m in 1..nu {
        let next = (2.0 * m as f64 / x) * j - jm;
        jm = j;
        j = next;
    }
    Ok(j)
}

fn j_series(nu: u32, x: f64) -> f64 {
    let v = nu as f64;
    let log_t0 = v * (0.5 * x).ln() - ln_gamma(v + 1.0);
    if log_t0 < -745.0 {
        return 0.0;
    }
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + v));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * log_t0.exp()
}

fn j_miller(nu: u32, x: f64) -> f64 {
    let top = (nu as f64).max(x);
    let mut start = (top + 20.0 + 2.0 * (80.0 * top).sqrt()).ceil() as u64;
    start += start % 2;
    let mut jp = 0.0; // J_{j+1}
    let mut j = 1e-300; // J_j
    let mut norm = 0.0; // J_0 + 2 Σ J_{2m}
    let mut ans = 0.0;
    let two_over_x = 2.0 / x;
    let mut idx = start;
    while idx > 0 {
        let jm = idx as f64 * two_over_x * j - jp;
        jp = j;
        j = jm;
        idx -= 1;
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        if idx == nu as u64 {
            ans = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            ans *= 1e-250;
        }
    }
    norm += j;
    ans / norm
}

/// Hankel's large-argument expansion, truncated at the smallest term.
fn j_hankel(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0f64;
    let mut k = 1.0f64;
    loop {
        let next = t * (mu - (2.0 * k - 1.0).powi(2)) / (k * 8.0 * x);
        if next.abs() >= t.abs() || next == 0.0 {
            break;
        }
        t = next;
        match (k as u64) % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if t.abs() < 1e-17 {
            break;
        }
        k += 1.0;
    }
    // χ = x − (ν/2 + 1/4)π; expand so that x itself is reduced by libm.
    let phi = (0.5 * nu as f64 + 0.25) * std::f64::consts::PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// `K_{it}(x) = ∫_0^∞ e^{−x cosh u} cos(tu) du` for `|t| ≤ 100`, `10⁻⁶ ≤ x ≤ 50`;
/// `x > 50` returns exactly 0 (the value is below `e^{−50}`).
///
/// The contour is shifted to `u + iβ`, which turns the integral into
/// `∫_0^∞ e^{−x cos β cosh u − tβ} cos(tu − x sin β sinh u) du`; with `β` close to
/// `π/2` the `e^{−πt/2}` size of the result is carried by the prefactor rather
/// than by cancellation. The integrand is entire, so the trapezoid rule
/// converges geometrically.
pub fn bessel_k_imag(t: f64, x: f64) -> Result<f64> {
    if !(t.abs() <= 100.0) || !(x >= 1e-6) {
        return Err(Error::InvalidArgument(format!("bessel_k_imag outside domain: t = {t}, x = {x}")));
    }
    if x > 50.0 {
        return Ok(0.0);
    }
    let t = t.abs();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let delta = if t > 0.0 { (2.0 / t).clamp(0.05, 0.5) } else { 0.5 };
    let beta = if t < x { (t / x).asin().min(half_pi - delta) } else { half_pi - delta };
    let (sb, cb) = beta.sin_cos();
    let a = x * cb;
    let b = x * sb;
    // Truncate where the exponent has dropped 40 below the size of the answer.
    let need = 40.0 + t * (half_pi - beta).max(0.0) + 1.0;
    let u_max = (1.0 + need / a).acosh().max(1.0);
    let pre = -t * beta;
    let f = |u: f64| (-a * u.cosh() + pre).exp() * (t * u - b * u.sinh()).cos();

    let mut n = 32usize;
    let mut h = u_max / n as f64;
    let mut sum = 0.5 * f(0.0);
    let mut abs_sum = sum.abs();
    for i in 1..=n {
        let v = f(i as f64 * h);
        sum += v;
        abs_sum += v.abs();
    }
    let mut prev = sum * h;
    for _ in 0..16 {
        for i in (1..2 * n).step_by(2) {
            let v = f(i as f64 * h * 0.5);
            sum += v;
            abs_sum += v.abs();
        }
        n *= 2;
        h *= 0.5;
        let cur = sum * h;
        let scale = abs_sum * h;
        if n >= 256 && (cur - prev).abs() <= 1e-12 * scale {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!("K_(it)(x) trapezoid at t = {t}, x = {x}")))
}
