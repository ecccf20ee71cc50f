//! End-to-end acceptance suite: one PASS/FAIL line per criterion, then a
//! single assertion that all of them passed.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use cuspcli::render::{ghosh_sarnak_residual, invariance_spot_check, row_variation, series_cutoff, Normalizer};
use cuspvariance::btheta::{b_theta_maass, parse_maass_file, ThetaRegime};
use cuspvariance::kernels::TestWeight;
use cuspvariance::petersson::{petersson_check, weight_data};
use cuspvariance::qforms::{exact_hecke_residual, hecke_eigenforms, miller_basis};
use cuspvariance::variance::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn bump() -> TestWeight {
    TestWeight::bump(1.0, 2.0).unwrap()
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn c1_hecke_relations() -> (bool, String) {
    let t = Instant::now();
    let f = hecke_eigenforms(12, 2500).unwrap().forms.remove(0);
    let mut bad = Vec::new();
    for m in 1..=50 {
        for n in 1..=50 {
            match exact_hecke_residual(&f, m, n) {
                Some(r) if r.is_zero() => {}
                _ => bad.push((m, n)),
            }
        }
    }
    let el = t.elapsed();
    (bad.is_empty() && el < Duration::from_secs(60), format!("nonzero residuals {}, {:.1}s", bad.len(), el.as_secs_f64()))
}

/// q ∏ (1 − q^n)^24, one factor (1 − q^n) at a time.
fn delta_product(precision: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); precision + 1];
    p[1] = BigInt::one();
    for n in 1..precision {
        for _ in 0..24 {
            for i in (n..=precision).rev() {
                let t = p[i - n].clone();
                p[i] -= t;
            }
        }
    }
    p
}

fn c2_tau_oracle() -> (bool, String) {
    let d = miller_basis(12, 100).unwrap();
    let oracle = delta_product(100);
    let bad = (1..=100).filter(|&n| d[0].coeff(n) != &BigRational::from_integer(oracle[n].clone())).count();
    (bad == 0 && d.len() == 1, format!("mismatches {bad} of 100"))
}

fn c3_petersson() -> (bool, String) {
    let t = Instant::now();
    let ks: Vec<u32> = (12..=40).step_by(2).collect();
    let rep = petersson_check(&ks, 5, 1e-6).unwrap();
    let worst = rep.rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    let el = t.elapsed();
    (
        rep.passed() && rep.rows.len() == ks.len() * 15 && el < Duration::from_secs(300),
        format!("{} rows, max |LHS−RHS| {worst:.2e}, {:.1}s", rep.rows.len(), el.as_secs_f64()),
    )
}

fn c4_dual_formulas() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let data = [weight_data(12, 120, 1e-12).unwrap(), weight_data(24, 120, 1e-12).unwrap()];
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let d = &data[case % 2];
        let f = &d.basis.forms[rng.gen_range(0..d.basis.dim())];
        let a = rng.gen_range(0.5..2.0);
        let w = TestWeight::bump(a, a + rng.gen_range(0.5..2.0)).unwrap();
        let x = rng.gen_range(3.0..25.0);
        let h = rng.gen_range(1..13u64);
        let direct = shifted_conv_direct(f, &w, x, h).unwrap();
        let hecke = shifted_conv_hecke(f, &w, x, h).unwrap();
        worst = worst.max((direct - hecke).abs() / direct.abs().max(f64::MIN_POSITIVE));
    }
    (worst <= 1e-10, format!("max relative difference {worst:.2e}"))
}

fn c5_mass_gap() -> (bool, String) {
    let sq = SqueezeSpec::new(0.4).unwrap();
    let p = PoincareObservable::new(bump(), 1).unwrap();
    let gap = |k: u32| {
        let d = weight_data(k, 120, 1e-12).unwrap();
        d.basis
            .forms
            .iter()
            .zip(&d.sym2)
            .map(|(f, s)| {
                let e = mu_poincare_exact(f, s.value, &p, &sq).unwrap();
                let a = mu_poincare_approx(f, s.value, &p, &sq).unwrap();
                (e - a).abs() / e.abs()
            })
            .fold(0.0, f64::max)
    };
    let (g50, g200) = (gap(50), gap(200));
    (g200 * 2.0 <= g50, format!("relative gap k=50 {g50:.3e}, k=200 {g200:.3e}"))
}

fn c6_planck() -> (bool, String) {
    let ks = [50, 200];
    let set = WeightSet::build(&ks, 40).unwrap();
    let rows = planck_failure_probe(&set, &ks, 1.0, &bump()).unwrap();
    let worst = |k| rows.iter().filter(|r| r.k == k).map(|r| r.log10_ratio).fold(f64::NEG_INFINITY, f64::max);
    let drop = worst(50) - worst(200);
    let rows2 = planck_failure_probe(&set, &ks, 2.0, &bump()).unwrap();
    let zero = rows2.iter().all(|r| r.mu_approx == 0.0);
    (drop >= 4f64.log10() && zero, format!("log10 drop {drop:.1} (need ≥ {:.3}), θ=2 approx all zero: {zero}", 4f64.log10()))
}

fn c7_phase_transition() -> (bool, String) {
    let p = PoincareObservable::new(bump(), 1).unwrap();
    let low: Vec<f64> = [0.1, 0.3, 0.49].iter().map(|&t| b_theta_pair(&p, &p, t).unwrap()).collect();
    let spread = low.iter().map(|b| (b - low[0]).abs()).fold(0.0, f64::max);
    let high: Vec<f64> = [0.51, 0.9].iter().map(|&t| b_theta_pair(&p, &p, t).unwrap()).collect();
    let e = PoincareObservable::new(TestWeight::mean_zero_bump(1.0, 2.0).unwrap(), 0).unwrap();
    let eis: Vec<f64> = [0.1, 0.3, 0.49, 0.51, 0.9].iter().map(|&t| b_theta_pair(&e, &e, t).unwrap()).collect();
    let espread = eis.iter().map(|b| (b - eis[0]).abs()).fold(0.0, f64::max);
    (
        spread <= 1e-10 && high.iter().all(|&b| b == 0.0) && espread <= 1e-10 && low[0] != 0.0,
        format!("low-regime spread {spread:.1e}, high {high:?}, Eisenstein spread {espread:.1e}"),
    )
}

fn c8_zeroth_moment() -> (bool, String) {
    let t = Instant::now();
    let u = bump();
    let ratios: Vec<f64> = [32.0, 64.0, 128.0]
        .iter()
        .map(|&k| {
            let set = WeightSet::build(&weights_in_range(k, &u), 60).unwrap();
            zeroth_moment(&set, k, &u).unwrap().ratio().unwrap()
        })
        .collect();
    let d: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    let el = t.elapsed();
    (
        d[1] < d[0] && d[2] < d[1] && el < Duration::from_secs(1800),
        format!("ratios {:.4} {:.4} {:.4}, {:.1}s", ratios[0], ratios[1], ratios[2], el.as_secs_f64()),
    )
}

fn c9_variance_sign() -> (bool, String) {
    let u = bump();
    let p = PoincareObservable::new(bump(), 1).unwrap();
    let mut nonneg = true;
    let mut scaled = [0.0; 2];
    for big_k in [32.0, 64.0, 128.0] {
        let set = WeightSet::build(&weights_in_range(big_k, &u), 60).unwrap();
        for (i, th) in [0.3, 0.7].into_iter().enumerate() {
            let r = variance_experiment(&set, big_k, &u, th, &p, &p).unwrap();
            nonneg &= r.empirical >= 0.0;
            if big_k == 128.0 {
                scaled[i] = r.empirical / big_k.powf(1.0 - th);
            }
        }
    }
    (
        nonneg && scaled[1] < 0.5 * scaled[0],
        format!("all sums ≥ 0: {nonneg}; K=128 empirical/K^(1−θ): θ=0.3 {:.3e}, θ=0.7 {:.3e}", scaled[0], scaled[1]),
    )
}

fn c10_euler_maclaurin() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for x in [20.0, 50.0, 200.0] {
        for r in [1.0, 2.0, 5.0] {
            worst = worst.max(euler_maclaurin_check(&bump(), x, r).unwrap().residual);
        }
    }
    (worst < 1e-8, format!("max residual {worst:.2e}"))
}

fn c11_maass() -> (bool, String) {
    let even = parse_maass_file(data_dir().join("maass_even_r13.78.txt")).unwrap();
    let odd = parse_maass_file(data_dir().join("maass_odd_r9.53.txt")).unwrap();
    let reg = ThetaRegime::new(0.3).unwrap();
    let s = b_theta_maass(&even, &even, &reg, 20).unwrap();
    let (s1, sn) = (s[0], *s.last().unwrap());
    let o = b_theta_maass(&odd, &odd, &reg, 20).unwrap();
    let odd_zero = o.iter().all(|&x| x == 0.0);
    (sn >= -1e-3 * s1.abs() && odd_zero && s.len() == 20, format!("S_1 {s1:.3e}, S_20 {sn:.3e}, odd all zero: {odd_zero}"))
}

fn c12_render() -> (bool, String) {
    let f12 = hecke_eigenforms(12, series_cutoff(12, 0.5)).unwrap().forms.remove(0);
    let inv = invariance_spot_check(&f12, 10, 12, 0.5, 3.0).unwrap();
    let mut worst = f64::INFINITY;
    let mut at = (0, 0);
    for k in [40u32, 48, 60, 80, 100] {
        let b = hecke_eigenforms(k, series_cutoff(k, 1.1)).unwrap();
        let y2 = (k - 1) as f64 / (4.0 * PI * 2.0);
        for f in &b.forms {
            let factor = row_variation(f, 1.1, 256).unwrap() / row_variation(f, y2, 256).unwrap();
            if factor < worst {
                worst = factor;
                at = (k, f.index());
            }
        }
    }
    (
        inv <= 1e-8 && worst >= 10.0,
        format!("invariance defect {inv:.1e}; smallest row-variation factor {worst:.3} at k={} form {}", at.0, at.1),
    )
}

fn c13_ghosh_sarnak() -> (bool, String) {
    let res = |k: u32| {
        let y = (k - 1) as f64 / (8.0 * PI);
        let b = hecke_eigenforms(k, series_cutoff(k, y)).unwrap();
        b.forms.iter().map(|f| ghosh_sarnak_residual(f, 2, Normalizer::HalfExponent).unwrap()).fold(0.0, f64::max)
    };
    let (r50, r200) = (res(50), res(200));
    (r200 < r50, format!("max residual k=50 {r50:.3e}, k=200 {r200:.3e}"))
}

fn c14_determinism() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.txt");
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let st = Command::new(env!("CARGO_BIN_EXE_cuspcli"))
            .args(["variance", "--theta", "0.3", "--K", "64", "--threads", threads])
            .arg("--out")
            .arg(&out)
            .arg("--cache")
            .arg(&cache)
            .output()
            .unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        (std::fs::read(out.join("variance.csv")).unwrap(), std::fs::read(out.join("variance_per_k.csv")).unwrap())
    };
    let a = run("1", "one");
    let b = run("8", "eight");
    (a == b && !a.0.is_empty(), format!("variance.csv {} bytes, identical: {}", a.0.len(), a == b))
}

#[test]
fn acceptance_criteria() {
    type Check = fn() -> (bool, String);
    let checks: [(u32, &str, Check); 14] = [
        (1, "exact Hecke relations k=12", c1_hecke_relations),
        (2, "tau coefficients vs product expansion", c2_tau_oracle),
        (3, "Petersson identity k in [12,40]", c3_petersson),
        (4, "dual shifted-convolution formulas", c4_dual_formulas),
        (5, "exact vs approximate mass gap", c5_mass_gap),
        (6, "Planck-scale failure", c6_planck),
        (7, "B_theta phase transition", c7_phase_transition),
        (8, "zeroth-moment trend", c8_zeroth_moment),
        (9, "variance sign and regime", c9_variance_sign),
        (10, "Euler-Maclaurin identity", c10_euler_maclaurin),
        (11, "Maass partial sums", c11_maass),
        (12, "mass invariance and row variation", c12_render),
        (13, "line-localization residual decay", c13_ghosh_sarnak),
        (14, "thread-count determinism", c14_determinism),
    ];
    let mut verdicts = Vec::new();
    for (id, name, f) in checks {
        let (pass, detail) = f();
        let v = Verdict { id, name, pass, detail };
        println!("criterion {:>2} {} — {}: {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
        verdicts.push(v);
    }
    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!("acceptance: {} of {} passed", verdicts.len() - failed.len(), verdicts.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
