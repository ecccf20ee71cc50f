use std::f64::consts::PI;
use std::path::PathBuf;

use cuspvariance::btheta::*;
use cuspvariance::kernels::{bessel_k_imag, integrate, Domain, QuadratureSpec, TestWeight};
use cuspvariance::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn even_form() -> MaassFormData {
    parse_maass_file(data_file("maass_even_r13.78.txt")).unwrap()
}

fn reg(t: f64) -> ThetaRegime {
    ThetaRegime::new(t).unwrap()
}

fn bump() -> TestWeight {
    TestWeight::bump(1.0, 2.0).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn regimes_and_kernel() {
    assert_eq!(reg(0.3).regime, Regime::Low);
    assert_eq!(reg(0.5).regime, Regime::Critical);
    assert_eq!(reg(0.7).regime, Regime::High);
    assert!(ThetaRegime::new(0.0).is_err() && ThetaRegime::new(1.0).is_err());
    assert_eq!(f_theta_kernel(&reg(0.3), 3, 4, 2.5), 1.0);
    assert_eq!(f_theta_kernel(&reg(0.7), 3, 4, 2.5), 0.0);
    assert_eq!(f_theta_kernel(&reg(0.5), 1, 1, 0.0), 1.0);
    let y: f64 = 0.3;
    assert!((f_theta_kernel(&reg(0.5), 1, 2, y) - (-2.0 * PI * PI * y * y * 5.0).exp()).abs() < 1e-16);
}

#[test]
fn poincare_form_values() {
    let v = bump();
    assert_eq!(b_theta_poincare(&v, 1, &v, 1, &reg(0.7)).unwrap(), 0.0);
    let lo = b_theta_poincare(&v, 1, &v, 1, &reg(0.3)).unwrap();
    let oracle = integrate(|y| v.eval(y).powi(2) / (y * y), Domain::Finite(1.0, 2.0), &QuadratureSpec::gk(1e-300, 1e-14))
        .unwrap()
        .value;
    assert!(lo > 0.0);
    assert!((lo - PI / 4.0 * oracle).abs() < 1e-12 * lo);
    assert_eq!(lo, b_theta_poincare(&v, 1, &v, 1, &reg(0.2)).unwrap());
    assert_eq!(lo, b_theta_poincare(&v, 1, &v, 1, &reg(0.45)).unwrap());
    assert!(matches!(b_theta_poincare(&v, 0, &v, 1, &reg(0.3)), Err(Error::Precondition(_))));
    // τ₁((2,4)) = 3 and the sign of h is irrelevant
    let w = TestWeight::bump(1.0, 3.0).unwrap();
    let p = b_theta_poincare(&w, 2, &w, -4, &reg(0.3)).unwrap();
    let q = integrate(|y| w.eval(y / 2.0) * w.eval(y / 4.0) / (y * y), Domain::Finite(4.0, 6.0), &QuadratureSpec::gk(1e-300, 1e-14))
        .unwrap()
        .value;
    assert!((p - PI / 4.0 * 3.0 * q).abs() < 1e-12 * p.abs());
}

#[test]
fn phase_transition_for_cuspidal_pairs() {
    let v1 = bump();
    let v2 = TestWeight::poly_bump(1.2, 3.0, vec![1.0, -0.3]).unwrap();
    for (h1, h2) in [(1, 1), (1, 2), (2, -3)] {
        let low: Vec<f64> = [0.1, 0.3, 0.49].iter().map(|&t| b_theta_poincare(&v1, h1, &v2, h2, &reg(t)).unwrap()).collect();
        assert!((low[0] - low[1]).abs() <= 1e-10 && (low[0] - low[2]).abs() <= 1e-10);
        for t in [0.51, 0.7, 0.9] {
            assert_eq!(b_theta_poincare(&v1, h1, &v2, h2, &reg(t)).unwrap(), 0.0);
        }
    }
    // nonnegative integrand: the critical value sits strictly between
    let low = b_theta_poincare(&v1, 1, &v1, 1, &reg(0.3)).unwrap();
    let crit = b_theta_poincare(&v1, 1, &v1, 1, &reg(0.5)).unwrap();
    assert!(crit > 0.0 && crit < low, "{crit} {low}");
}

#[test]
fn eisenstein_pair_values() {
    let v = TestWeight::mean_zero_bump(1.0, 2.0).unwrap();
    assert_eq!(b_theta_eisenstein(&v, &TestWeight::zero()).unwrap(), 0.0);
    let base = b_theta_eisenstein(&v, &v).unwrap();
    assert!(base > 0.0, "{base}");
    let fine = EisensteinSpec { inner: QuadratureSpec::gk(1e-16, 1e-12), outer: QuadratureSpec::gk(1e-16, 1e-11) };
    let b2 = b_theta_eisenstein_with(&v, &v, &fine).unwrap();
    assert!((base - b2).abs() <= 1e-6 * base.abs());
    // precondition: mean-zero data only
    assert!(matches!(b_theta_eisenstein(&bump(), &v), Err(Error::Precondition(_))));
    // identical across every regime, via the general form
    let psi = FourierObservable::single(0, v.clone()).unwrap();
    let vals: Vec<Complex64> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&t| b_theta_general(&psi, &psi, &reg(t)).unwrap()).collect();
    for z in &vals {
        assert!((z - vals[0]).norm() <= 1e-10);
    }
}

#[test]
fn eisenstein_inner_vanishes_for_small_t() {
    let vt = cuspvariance::kernels::weight_tilde(&TestWeight::mean_zero_bump(1.0, 2.0).unwrap()).unwrap();
    // t below the support: y ranges in (0, 1) where b₂ is a polynomial and the integral is exact 0
    let g = eisenstein_inner(&vt, 0.8, &QuadratureSpec::gk(1e-18, 1e-12)).unwrap();
    assert!(g.abs() < 1e-12, "{g}");
}

#[test]
fn general_form_reductions_and_orthogonality() {
    let v = bump();
    let single = FourierObservable::single(2, v.clone()).unwrap();
    let direct = b_theta_poincare(&v, 2, &v, 2, &reg(0.3)).unwrap();
    assert_eq!(b_theta_general(&single, &single, &reg(0.3)).unwrap(), c(direct, 0.0));
    let eis = FourierObservable::single(0, TestWeight::mean_zero_bump(1.0, 2.0).unwrap()).unwrap();
    for t in [0.2, 0.5, 0.8] {
        assert_eq!(b_theta_general(&single, &eis, &reg(t)).unwrap(), c(0.0, 0.0));
        assert_eq!(b_theta_general(&eis, &single, &reg(t)).unwrap(), c(0.0, 0.0));
    }
    // zero-mode data must be mean-zero
    assert!(FourierObservable::single(0, bump()).is_err());
    assert!(FourierObservable::single(1, TestWeight::bump(0.5, 2.0).unwrap()).is_err());
}

fn random_observable(rng: &mut ChaCha8Rng) -> FourierObservable {
    let mut psi = FourierObservable::new();
    for _ in 0..rng.gen_range(1..4) {
        let m = [-3i64, -2, -1, 1, 2, 3][rng.gen_range(0..6)];
        let a = rng.gen_range(1.0..2.0);
        let b = a + rng.gen_range(0.5..2.0);
        let w = TestWeight::poly_bump(a, b, vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).unwrap();
        psi = psi.with_mode(m, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), w).unwrap();
    }
    psi
}

#[test]
fn conjugate_symmetry_and_sesquilinearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let r = reg(0.3);
    for _ in 0..8 {
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        let d = random_observable(&mut rng);
        let ab = b_theta_general(&a, &b, &r).unwrap();
        let ba = b_theta_general(&b, &a, &r).unwrap();
        assert!((ab - ba.conj()).norm() <= 1e-10 * (1.0 + ab.norm()));
        let (s, t) = (c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        let lhs = b_theta_general(&a.scale(s).add(&d.scale(t)), &b, &r).unwrap();
        let rhs = s * ab + t * b_theta_general(&d, &b, &r).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        let lhs = b_theta_general(&b, &a.scale(s).add(&d.scale(t)), &r).unwrap();
        let rhs = s.conj() * ba + t.conj() * b_theta_general(&b, &d, &r).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }
}

#[test]
fn continuity_ratio_is_bounded_on_a_random_battery() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        let num = b_theta_general(&a, &b, &reg(0.3)).unwrap().norm();
        let den = sobolev_norm(&a, 1).unwrap() * sobolev_norm(&b, 1).unwrap();
        worst = worst.max(num / den);
    }
    eprintln!("max |B|/(‖ψ₁‖‖ψ₂‖) = {worst:e}");
    assert!(worst.is_finite() && worst < 10.0);
}

#[test]
fn sobolev_norm_basics() {
    assert_eq!(sobolev_norm(&FourierObservable::new(), 3).unwrap(), 0.0);
    let v = bump();
    let psi = FourierObservable::single(3, v.clone()).unwrap();
    let l2 = integrate(|y| v.eval(y).powi(2) / (y * y), Domain::Finite(1.0, 2.0), &QuadratureSpec::gk(1e-300, 1e-14)).unwrap().value;
    assert!((sobolev_norm(&psi, 0).unwrap() - l2.sqrt()).abs() < 1e-12 * l2.sqrt());
    let mut prev = 0.0;
    for n in 0..5 {
        let s = sobolev_norm(&psi, n).unwrap();
        assert!(s >= prev);
        prev = s;
    }
    let eis = FourierObservable::single(0, TestWeight::mean_zero_bump(1.0, 2.0).unwrap()).unwrap();
    assert!(sobolev_norm(&eis, 1).is_err());
}

#[test]
fn maass_sample_files_are_hecke_valid() {
    let even = even_form();
    assert_eq!(even.parity, Parity::Even);
    assert_eq!(even.lambda(1), Some(1.0));
    assert!((even.t - 13.779751351890738).abs() < 1e-9);
    assert!(even.n_max() >= 100);
    let odd = parse_maass_file(data_file("maass_odd_r9.53.txt")).unwrap();
    assert_eq!(odd.parity, Parity::Odd);
}

fn sample_text(lambda: &[f64]) -> String {
    let mut s = String::from("cuspvariance-maass v1\nt 13.7797513518907\nparity even\n");
    for (i, l) in lambda.iter().enumerate() {
        s.push_str(&format!("{} {l}\n", i + 1));
    }
    s
}

#[test]
fn maass_parse_errors() {
    let good = even_form();
    let lam: Vec<f64> = (1..=12).map(|n| good.lambda(n).unwrap()).collect();
    assert!(parse_maass_str(&sample_text(&lam), "ok").is_ok());
    let mut bad = lam.clone();
    bad[5] += 1e-3; // λ(6)
    match parse_maass_str(&sample_text(&bad), "bad") {
        Err(Error::MaassHecke { m, n, .. }) => assert_eq!((m.min(n), m.max(n)), (2, 3)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_maass_str(&sample_text(&[]), "empty"), Err(Error::MaassFormat(_))));
    assert!(matches!(parse_maass_str("", "blank"), Err(Error::MaassFormat(_))));
    assert!(parse_maass_str("cuspvariance-maass v2\nt 1\nparity even\n1 1\n", "hdr").is_err());
    assert!(parse_maass_str("cuspvariance-maass v1\nt 1\nparity both\n1 1\n", "par").is_err());
    assert!(parse_maass_str("cuspvariance-maass v1\nt 1\nparity even\n2 1\n", "idx").is_err());
    assert!(parse_maass_str("cuspvariance-maass v1\nt 1\nparity even\n1 1.5\n", "norm").is_err());
    assert!(parse_maass_file(data_file("does-not-exist.txt")).is_err());
}

#[test]
fn i_theta_values() {
    let t = 9.534;
    assert_eq!(i_theta(1, 1, t, t, &reg(0.7)).unwrap(), c(0.0, 0.0));
    let v = i_theta(1, 1, t, t, &reg(0.3)).unwrap();
    assert!(v.re > 0.0 && v.im.abs() < 1e-12);
    // oracle: direct quadrature of K² on [1, 50/2π]
    let oracle = integrate(
        |y| bessel_k_imag(t, 2.0 * PI * y).unwrap().powi(2) / y,
        Domain::Finite(1.0, 50.0 / (2.0 * PI)),
        &QuadratureSpec::gk(1e-300, 1e-13),
    )
    .unwrap()
    .value;
    assert!((v.re - oracle).abs() < 1e-9 * oracle, "{} {}", v.re, oracle);
    let crit = i_theta(1, 1, t, t, &reg(0.5)).unwrap();
    assert!(crit.re > 0.0 && crit.re < v.re);
    // conjugate symmetry
    for (m, n) in [(1, 2), (2, 3)] {
        let a = i_theta(m, n, 9.534, 13.78, &reg(0.3)).unwrap();
        let b = i_theta(n, m, 13.78, 9.534, &reg(0.3)).unwrap();
        assert!((a - b.conj()).norm() <= 1e-10 * (1.0 + a.norm()));
    }
}

#[test]
fn maass_partial_sums() {
    let even = even_form();
    let odd = parse_maass_file(data_file("maass_odd_r9.53.txt")).unwrap();
    let r = reg(0.3);
    let one = b_theta_maass(&even, &even, &r, 1).unwrap();
    let i11 = i_theta(1, 1, even.t, even.t, &r).unwrap().re;
    assert!((one[0] - 4.0 * PI * i11).abs() < 1e-14 * one[0].abs());
    assert!(b_theta_maass(&even, &odd, &r, 5).unwrap().iter().all(|&s| s == 0.0));
    assert!(b_theta_maass(&odd, &odd, &r, 5).unwrap().iter().all(|&s| s == 0.0));
    let sums = b_theta_maass(&even, &even, &r, 20).unwrap();
    assert_eq!(sums.len(), 20);
    assert!(sums[19] >= -1e-3 * sums[0].abs(), "{sums:?}");
    let csv = partial_sums_csv(&sums);
    assert!(csv.starts_with("N,partial_sum\n1,"));
    assert!(matches!(b_theta_maass(&even, &even, &r, 500), Err(Error::MaassFormat(_))));
}

#[test]
fn weighted_corollary_sums() {
    let even = even_form();
    let w = TestWeight::plateau(1.0, 6.0, 0.25).unwrap();
    let s = corollary_weighted(&even, &w, 1).unwrap();
    assert!(s[0] > 0.0);
    // weight supported far out: K-Bessel factor negligible, early sums vanish
    let far = TestWeight::bump(20.0, 30.0).unwrap();
    assert!(corollary_weighted(&even, &far, 3).unwrap().iter().all(|&x| x == 0.0));
    // a wide plateau ≈ 1 on [1, T] approaches the θ-free (low regime) value/4π
    let target = b_theta_maass(&even, &even, &reg(0.3), 4).unwrap()[3] / (4.0 * PI);
    let near = corollary_weighted(&even, &TestWeight::plateau(1.0, 2.0, 0.1).unwrap(), 4).unwrap()[3];
    let wide = corollary_weighted(&even, &TestWeight::plateau(1.0, 8.0, 0.01).unwrap(), 4).unwrap()[3];
    assert!((wide - target).abs() < (near - target).abs(), "{near} {wide} {target}");
    assert!(corollary_weighted(&even, &TestWeight::bump(0.5, 2.0).unwrap(), 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn low_regime_is_theta_independent(t1 in 0.05f64..0.5, t2 in 0.05f64..0.5, h in 1i64..4) {
        let v = bump();
        let a = b_theta_poincare(&v, h, &v, h, &reg(t1)).unwrap();
        let b = b_theta_poincare(&v, h, &v, h, &reg(t2)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn high_regime_vanishes(t in 0.5001f64..0.999, h1 in 1i64..5, h2 in 1i64..5) {
        let v = bump();
        prop_assert_eq!(b_theta_poincare(&v, h1, &v, h2, &reg(t)).unwrap(), 0.0);
    }
}
