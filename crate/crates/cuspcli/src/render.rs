//! Point evaluation of `f(z) = Σ λ_f(n) n^{(k−1)/2} e(nz)`, heat grids of
//! `y^k|f(z)|²`, and the line-localization residual at `y_l = (k−1)/(4πl)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use cuspvariance::qforms::HeckeEigenform;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub const Y_MIN: f64 = 0.05;
/// Terms below `e^{−46} ≈ 10⁻²⁰` of the largest one are dropped.
const LN_CUTOFF: f64 = 46.0;

fn ln_term(k: u32, n: f64, y: f64) -> f64 {
    0.5 * (k - 1) as f64 * n.ln() - 2.0 * PI * n * y
}

/// Index past which every term of the series at height `y` is negligible,
/// including the geometric tail (`|λ(n)| ≤ d(n) ≤ 2√n`).
pub fn series_cutoff(k: u32, y: f64) -> usize {
    let peak = ((k - 1) as f64 / (4.0 * PI * y)).max(1.0);
    let top = ln_term(k, peak, y);
    let mut n = peak.ceil() as usize;
    loop {
        let nf = n as f64;
        let q = ln_term(k, nf + 1.0, y) - ln_term(k, nf, y);
        let tail = ln_term(k, nf, y) + (2.0 * nf.sqrt()).ln() - (1.0 - q.exp()).ln();
        if q < 0.0 && tail < top - LN_CUTOFF {
            return n;
        }
        n += 1;
    }
}

/// `e^{−M} f(z)` together with `M`, so that huge weights stay representable.
pub fn evaluate_form_scaled(f: &HeckeEigenform, x: f64, y: f64) -> CliResult<(Complex64, f64)> {
    if !(y >= Y_MIN) {
        return Err(CliError::Config(format!("evaluate_form needs y ≥ {Y_MIN}, got {y}")));
    }
    let k = f.weight();
    let cutoff = series_cutoff(k, y);
    let peak = ((k - 1) as f64 / (4.0 * PI * y)).max(1.0);
    let m = ln_term(k, peak.floor().max(1.0), y).max(ln_term(k, peak.ceil(), y));
    let mut re = cuspvariance::kernels::CompensatedSum::new();
    let mut im = cuspvariance::kernels::CompensatedSum::new();
    for n in 1..=cutoff {
        let nf = n as f64;
        let mag = (ln_term(k, nf, y) - m).exp();
        if mag == 0.0 {
            continue;
        }
        let lam = f.lambda_extend_f64(n as u64)?;
        // reduce n·x mod 1 before taking the phase
        let ph = 2.0 * PI * (nf * x).rem_euclid(1.0);
        re.add(lam * mag * ph.cos());
        im.add(lam * mag * ph.sin());
    }
    Ok((Complex64::new(re.value(), im.value()), m))
}

/// `f(z)`; overflows to infinity for very large weights (use [`ln_mass`]).
pub fn evaluate_form(f: &HeckeEigenform, x: f64, y: f64) -> CliResult<Complex64> {
    let (v, m) = evaluate_form_scaled(f, x, y)?;
    Ok(v * m.exp())
}

/// `ln(y^k |f(z)|²)`.
pub fn ln_mass(f: &HeckeEigenform, x: f64, y: f64) -> CliResult<f64> {
    let (v, m) = evaluate_form_scaled(f, x, y)?;
    Ok(f.weight() as f64 * y.ln() + 2.0 * (m + v.norm().ln()))
}

pub fn mass(f: &HeckeEigenform, x: f64, y: f64) -> CliResult<f64> {
    Ok(ln_mass(f, x, y)?.exp())
}

/// `|ln(mass(z)) − ln(mass(−1/z))|` at a point.
pub fn invariance_defect(f: &HeckeEigenform, x: f64, y: f64) -> CliResult<f64> {
    let r2 = x * x + y * y;
    let a = ln_mass(f, x, y)?;
    let b = ln_mass(f, -x / r2, y / r2)?;
    // relative agreement of the masses
    Ok((a - b).exp_m1().abs())
}

/// Worst relative disagreement of `y^k|f|²` at `z` and `−1/z` over `count`
/// seeded random points with both heights in `[y_lo, y_hi]`.
pub fn invariance_spot_check(f: &HeckeEigenform, count: usize, seed: u64, y_lo: f64, y_hi: f64) -> CliResult<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < count {
        let x = rng.gen_range(-0.5..0.5);
        let y = rng.gen_range(y_lo.max(Y_MIN)..y_hi);
        let y2 = y / (x * x + y * y);
        if y2 < y_lo.max(Y_MIN) {
            continue;
        }
        worst = worst.max(invariance_defect(f, x, y)?);
        done += 1;
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatGrid {
    pub weight: u32,
    pub form_index: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    /// `values[j][i] = y_j^k |f(x_i + i y_j)|²`, row `j` at height `y_j`.
    pub values: Vec<Vec<f64>>,
}

impl HeatGrid {
    /// `x_i = −1/2 + i/(nx−1)`, so the first and last columns are one period apart.
    pub fn x(&self, i: usize) -> f64 {
        -0.5 + i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        if self.ny == 1 {
            self.y_min
        } else {
            self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value\n");
        for (j, row) in self.values.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:.17e}", self.x(i), self.y(j), v);
            }
        }
        out
    }

    /// ASCII PGM (P2), top row at `y_max`, gray levels from `log(1 + v/median)`.
    pub fn to_pgm(&self) -> String {
        let mut all: Vec<f64> = self.values.iter().flatten().copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = all[all.len() / 2];
        let median = if median > 0.0 { median } else { all.iter().copied().find(|&v| v > 0.0).unwrap_or(1.0) };
        let comp = |v: f64| (v / median).ln_1p();
        let lo = comp(all[0]);
        let hi = comp(all[all.len() - 1]);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut out = format!(
            "P2\n# y^k|f|^2 k={} form={} y=[{},{}] log(1+v/median)\n{} {}\n65535\n",
            self.weight, self.form_index, self.y_min, self.y_max, self.nx, self.ny
        );
        for row in self.values.iter().rev() {
            let px: Vec<String> = row.iter().map(|&v| (((comp(v) - lo) / span) * 65535.0).round().to_string()).collect();
            out.push_str(&px.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Relative x-variation `var_x(v)/mean_x(v)²` along a horizontal line.
pub fn row_variation(f: &HeckeEigenform, y: f64, nx: usize) -> CliResult<f64> {
    let lm: Vec<f64> = (0..nx).map(|i| ln_mass(f, -0.5 + i as f64 / nx as f64, y)).collect::<CliResult<_>>()?;
    // normalize before exponentiating so that large weights do not overflow
    let top = lm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v: Vec<f64> = lm.iter().map(|l| (l - top).exp()).collect();
    let mean = v.iter().sum::<f64>() / nx as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nx as f64;
    Ok(var / (mean * mean))
}

pub fn heatmap(f: &HeckeEigenform, y_min: f64, y_max: f64, nx: usize, ny: usize) -> CliResult<HeatGrid> {
    if nx < 2 || ny < 1 || !(y_min >= Y_MIN) || !(y_max >= y_min) {
        return Err(CliError::Config(format!("heat grid needs nx ≥ 2, ny ≥ 1, {Y_MIN} ≤ y_min ≤ y_max")));
    }
    let mut grid = HeatGrid { weight: f.weight(), form_index: f.index(), y_min, y_max, nx, ny, values: Vec::new() };
    let rows: Vec<CliResult<Vec<f64>>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = grid.y(j);
            (0..nx)
                .map(|i| {
                    let v = mass(f, grid.x(i), y)?;
                    if !v.is_finite() {
                        return Err(CliError::Check(format!("y^k|f|² overflows at weight {}", f.weight())));
                    }
                    Ok(v)
                })
                .collect()
        })
        .collect();
    grid.values = rows.into_iter().collect::<CliResult<_>>()?;
    Ok(grid)
}

/// The line-localization normalizer: `(e/l)^{(k−1)/2}` by default, `(e/l)^{k−1}` for the literal reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalizer {
    HalfExponent,
    FullExponent,
}

impl Normalizer {
    pub fn ln(&self, k: u32, l: u64) -> f64 {
        let e = match self {
            Normalizer::HalfExponent => 0.5 * (k - 1) as f64,
            Normalizer::FullExponent => (k - 1) as f64,
        };
        e * (1.0 - (l as f64).ln())
    }
}

pub const GS_GRID: usize = 256;

pub fn ghosh_sarnak_l_max(k: u32) -> f64 {
    let a = (k - 1) as f64;
    (a / a.ln()).sqrt()
}

/// `sup_x |N_{k,l} f(x + i y_l) − λ_f(l) e(lx)|` over a 256-point grid.
pub fn ghosh_sarnak_residual(f: &HeckeEigenform, l: u64, norm: Normalizer) -> CliResult<f64> {
    let k = f.weight();
    if l == 0 || l as f64 > ghosh_sarnak_l_max(k) {
        return Err(CliError::Config(format!(
            "l = {l} outside 1 ≤ l ≤ √((k−1)/log(k−1)) = {:.3} at k = {k}",
            ghosh_sarnak_l_max(k)
        )));
    }
    let y = (k - 1) as f64 / (4.0 * PI * l as f64);
    let lam_l = f.lambda_extend_f64(l)?;
    let ln_n = norm.ln(k, l);
    let mut worst: f64 = 0.0;
    for j in 0..GS_GRID {
        let x = j as f64 / GS_GRID as f64;
        let (v, m) = evaluate_form_scaled(f, x, y)?;
        let scaled = v * (m + ln_n).exp();
        let ph = 2.0 * PI * (l as f64 * x).rem_euclid(1.0);
        let main = Complex64::new(ph.cos(), ph.sin()) * lam_l;
        worst = worst.max((scaled - main).norm());
    }
    Ok(worst)
}
