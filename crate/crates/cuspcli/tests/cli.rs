use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use cuspcli::cache::{self, EigenCache};
use cuspcli::config::{expand_args, parse_config, parse_weight, parse_weights};
use cuspcli::render::*;
use cuspvariance::qforms::{hecke_eigenforms, HeckeEigenform};
use num_complex::Complex64;
use proptest::prelude::*;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspcli"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove(cache::ENV_VAR)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn form(k: u32, idx: usize, n_max: usize) -> HeckeEigenform {
    hecke_eigenforms(k, n_max).unwrap().forms.remove(idx)
}

#[test]
fn forms_writes_weight_twelve_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["forms", "--weight", "12", "--nmax", "100"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join(cache::DEFAULT_NAME)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(cache::MAGIC));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    assert_eq!(rows[0], "12,0,1,1.00000000000000000000000000000e0,1/1");
    assert!(rows[1].ends_with(",-24/1"));
    assert!(rows[99].starts_with("12,0,100,"));
}

#[test]
fn petersson_passes_and_tight_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["petersson", "--weights", "12:40", "--nmax", "5", "--tol", "1e-6"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("petersson.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 15 * 15);
    let o = bin(&["petersson", "--weights", "12:16", "--nmax", "3", "--tol", "1e-30"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error kind=check code=1"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["forms", "--weight", "12", "--bogus", "1"][..],
        &["variance", "--theta", "5"],
        &["variance", "--u", "triangle:1:2"],
        &["ghosh-sarnak", "--weights", "12", "--l", "3"],
        &["petersson", "--weights", "13"],
        &["forms", "--weight", "12", "--threads", "0"],
        &["nosuchcommand"],
    ] {
        let o = bin(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        assert!(err.starts_with("error kind=config code=2 msg=\""), "{err}");
        assert_eq!(err.trim_end().lines().count(), 1);
    }
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# forms run\nweight = 16\nnmax = 7\n").unwrap();
    let o = bin(&["forms", "--config", cfg.to_str().unwrap(), "--nmax", "9"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("forms_k16.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);

    let args: Vec<std::ffi::OsString> =
        ["cuspcli", "forms", "--config", cfg.to_str().unwrap(), "--nmax", "9"].iter().map(Into::into).collect();
    let ex: Vec<String> = expand_args(args).unwrap().into_iter().map(|s| s.into_string().unwrap()).collect();
    assert_eq!(ex, ["cuspcli", "forms", "--weight", "16", "--nmax", "7", "--nmax", "9"]);
    assert!(parse_config("no equals sign").is_err());
    assert_eq!(parse_config("y_min = 0.5 # low\n").unwrap(), vec![("y-min".to_string(), "0.5".to_string())]);
}

#[test]
fn cache_env_var_and_warm_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let cpath = dir.path().join("env-cache.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_cuspcli"))
        .args(["forms", "--weight", "24", "--nmax", "20", "--out"])
        .arg(dir.path())
        .env(cache::ENV_VAR, &cpath)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(cpath.exists() && !dir.path().join(cache::DEFAULT_NAME).exists());
    let before = std::fs::read_to_string(&cpath).unwrap();
    // a shorter request is served from the cache and leaves it untouched
    let o = Command::new(env!("CARGO_BIN_EXE_cuspcli"))
        .args(["forms", "--weight", "24", "--nmax", "10", "--out"])
        .arg(dir.path())
        .env(cache::ENV_VAR, &cpath)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&cpath).unwrap(), before);
    assert_eq!(cache::resolve_path(Some(Path::new("x")), Path::new("out")), Path::new("x"));
}

#[test]
fn cache_round_trip_is_exact() {
    let mut c = EigenCache::new();
    c.ensure(&[12, 24, 36], |_| 30).unwrap();
    let text = c.to_text();
    let back = EigenCache::parse(&text).unwrap();
    assert_eq!(back.to_text(), text);
    assert_eq!(back.weights(), vec![12, 24, 36]);
    let (a, b) = (c.get(36).unwrap(), back.get(36).unwrap());
    for (f, g) in a.forms.iter().zip(&b.forms) {
        for n in 1..=30 {
            assert_eq!(f.lambda(n), g.lambda(n));
        }
    }
    assert!(back.get(12).unwrap().forms[0].has_exact());
    assert!(!back.get(24).unwrap().forms[0].has_exact());
    // rows must be sorted and start at n = 1
    let swapped = text.replacen("12,0,1,", "12,0,2,", 1);
    assert!(EigenCache::parse(&swapped).is_err());
    assert!(EigenCache::parse("not a cache\n").is_err());
}

#[test]
fn weight_and_list_parsers() {
    assert!(parse_weight("bump:1:2").is_ok());
    assert!(parse_weight("meanzero:1:2").is_ok());
    assert!(parse_weight("plateau:1:2:0.2").is_ok());
    assert!(parse_weight("zero").unwrap().is_zero());
    for bad in ["bump:1", "bump:2:1", "hat:1:2", "bump:a:2"] {
        assert!(parse_weight(bad).is_err(), "{bad}");
    }
    assert_eq!(parse_weights("12:20").unwrap(), vec![12, 14, 16, 18, 20]);
    assert_eq!(parse_weights("200,50,50").unwrap(), vec![50, 200]);
    assert!(parse_weights("10:14").is_err());
}

/// Plain summation with a fixed number of terms, for comparison.
fn series_oracle(f: &HeckeEigenform, x: f64, y: f64, terms: usize) -> Complex64 {
    let k = f.weight() as f64;
    (1..=terms)
        .map(|n| {
            let nf = n as f64;
            let mag = f.lambda_extend_f64(n as u64).unwrap() * (0.5 * (k - 1.0) * nf.ln() - 2.0 * PI * nf * y).exp();
            Complex64::from_polar(mag, 2.0 * PI * nf * x)
        })
        .sum()
}

#[test]
fn evaluate_form_basics() {
    let f = form(12, 0, 400);
    assert!(evaluate_form(&f, 0.1, 0.04).is_err());
    for (x, y) in [(0.1, 0.3), (-0.37, 0.8), (0.25, 1.7)] {
        let a = evaluate_form(&f, x, y).unwrap();
        let b = evaluate_form(&f, x + 1.0, y).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm(), "periodicity at ({x},{y})");
        let cut = series_cutoff(12, y);
        let extra = series_oracle(&f, x, y, cut + 20);
        assert!((a - extra).norm() <= 1e-12 * a.norm(), "truncation at ({x},{y})");
    }
    // Δ(i/… ) check against the product formula at one point
    let q = (-2.0 * PI * 0.9f64).exp();
    let prod: f64 = q * (1..200).map(|n| (1.0 - q.powi(n)).powi(24)).product::<f64>();
    let v = evaluate_form(&f, 0.0, 0.9).unwrap();
    assert!((v.re - prod).abs() <= 1e-13 * prod && v.im.abs() <= 1e-13 * prod);
    // high up the first term dominates
    let y = 6.0;
    let ratio = evaluate_form(&f, 0.3, y).unwrap().norm() / (-2.0 * PI * y).exp();
    assert!((ratio - 1.0).abs() < 1e-10, "{ratio}");
}

#[test]
fn mass_is_modular_invariant() {
    let f = form(12, 0, 400);
    assert!(invariance_spot_check(&f, 10, 7, 0.3, 3.0).unwrap() <= 1e-8);
    let g = form(40, 2, 400);
    assert!(invariance_spot_check(&g, 10, 8, 0.5, 3.0).unwrap() <= 1e-8);
    // huge weights stay finite in log form
    let h = form(300, 0, 200);
    assert!(ln_mass(&h, 0.1, 20.0).unwrap().is_finite());
}

#[test]
fn heat_grid_shape_sign_and_wraparound() {
    let f = form(40, 0, 300);
    let g = heatmap(&f, 0.6, 4.0, 33, 9).unwrap();
    assert_eq!((g.values.len(), g.values[0].len()), (9, 33));
    assert!(g.values.iter().flatten().all(|&v| v >= 0.0 && v.is_finite()));
    for row in &g.values {
        let (a, b) = (row[0], row[32]);
        assert!((a - b).abs() <= 1e-10 * a.max(b), "{a} {b}");
    }
    let pgm = g.to_pgm();
    let mut lines = pgm.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next(), Some("33 9"));
    assert_eq!(lines.next(), Some("65535"));
    let px: Vec<u32> = lines.flat_map(|l| l.split(' ').map(|p| p.parse::<u32>().unwrap())).collect();
    assert_eq!(px.len(), 33 * 9);
    assert!(px.iter().all(|&p| p <= 65535) && px.contains(&0) && px.contains(&65535));
    assert_eq!(g.to_csv().lines().count(), 1 + 33 * 9);
    assert!(heatmap(&f, 0.01, 1.0, 4, 4).is_err());
}

#[test]
fn heatmap_command_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["heatmap", "--weight", "24", "--form", "1", "--nx", "16", "--ny", "8"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("heatmap_k24_f1.pgm").exists());
    assert!(dir.path().join("heatmap_k24_f1.csv").exists());
    let o = bin(&["heatmap", "--weight", "24", "--form", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn line_localization() {
    let f = form(12, 0, 200);
    let r = ghosh_sarnak_residual(&f, 1, Normalizer::HalfExponent).unwrap();
    assert!(r.is_finite() && r > 0.0);
    assert!(ghosh_sarnak_residual(&f, 3, Normalizer::HalfExponent).is_err());
    assert!(ghosh_sarnak_residual(&f, 0, Normalizer::HalfExponent).is_err());
    // the n = l term alone: n^{(k−1)/2} e^{−2πn y_l} (e/l)^{(k−1)/2} = 1
    for (k, l) in [(50u32, 2u64), (200, 3)] {
        let y = (k - 1) as f64 / (4.0 * PI * l as f64);
        let lt = 0.5 * (k - 1) as f64 * (l as f64).ln() - 2.0 * PI * l as f64 * y;
        assert!((lt + Normalizer::HalfExponent.ln(k, l)).abs() < 1e-12);
    }
    let a = form(50, 0, 100);
    let b = form(200, 0, 100);
    let ra = ghosh_sarnak_residual(&a, 2, Normalizer::HalfExponent).unwrap();
    let rb = ghosh_sarnak_residual(&b, 2, Normalizer::HalfExponent).unwrap();
    assert!(rb < ra, "{ra} {rb}");
    // the literal (e/l)^{k−1} normalizer does not localize
    assert!(ghosh_sarnak_residual(&b, 2, Normalizer::FullExponent).unwrap() > 1.0);
}

#[test]
fn experiment_commands_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let o = bin(args, d);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    };
    run(&["qvthm", "--K", "32"]);
    run(&["moments", "--K", "32"]);
    run(&["btheta"]);
    run(&["btheta", "--v1", "meanzero:1:2", "--v2", "meanzero:1:2", "--h1", "0", "--h2", "0", "--thetas", "0.3,0.7"]);
    run(&["planck-failure", "--weights", "50,100"]);
    run(&["ghosh-sarnak", "--weights", "50", "--l", "2"]);
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/maass_even_r13.78.txt");
    run(&["maass", "--phi1", data.to_str().unwrap()]);
    for (name, header) in [
        ("qvthm.csv", "theta,K,obs1,obs2,empirical,predicted,ratio"),
        ("moments.csv", "theta,K,obs1,obs2,empirical,predicted,ratio"),
        ("btheta.csv", "theta,obs1,obs2,value"),
        ("planck_failure.csv", "k,form_index,mu_exact,log10_abs_mu,mu_approx,nu,ratio,log10_ratio"),
    ] {
        let csv = std::fs::read_to_string(d.join(name)).unwrap();
        assert_eq!(csv.lines().next(), Some(header), "{name}");
    }
    assert_eq!(std::fs::read_to_string(d.join("moments.csv")).unwrap().lines().count(), 3);
    let gs = std::fs::read_to_string(d.join("ghosh_sarnak.csv")).unwrap();
    assert!(gs.starts_with("# N = (e/l)^((k-1)/2)") && gs.contains("(e/l)^(k-1)"));
    assert_eq!(std::fs::read_to_string(d.join("maass.csv")).unwrap().lines().count(), 21);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_is_periodic(x in -0.5f64..0.5, y in 0.2f64..3.0) {
        let f = form(16, 0, 300);
        let a = evaluate_form(&f, x, y).unwrap();
        let b = evaluate_form(&f, x + 3.0, y).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn cache_decimal_round_trip(k in (6u32..20).prop_map(|h| 2 * h)) {
        let b = hecke_eigenforms(k, 12).unwrap();
        for f in &b.forms {
            let g = cache::round_trip(f).unwrap();
            let h = cache::round_trip(&g).unwrap();
            for n in 1..=12 {
                let s = f.lambda(n).unwrap().to_decimal(cache::DIGITS);
                prop_assert_eq!(&s, &g.lambda(n).unwrap().to_decimal(cache::DIGITS));
                prop_assert_eq!(g.lambda(n), h.lambda(n));
            }
        }
    }
}
