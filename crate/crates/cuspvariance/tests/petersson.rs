use std::f64::consts::PI;

use cuspvariance::petersson::*;
use cuspvariance::qforms::hecke_eigenforms;

fn data(k: u32) -> WeightData {
    weight_data(k, 20, 1e-12).unwrap()
}

#[test]
fn lhs_instantiations_at_weight_12() {
    let d = data(12);
    let l = d.sym2[0].value;
    let base = 2.0 * PI * PI / 11.0 / l;
    assert!((petersson_lhs(&d, 1, 1).unwrap() - base).abs() < 1e-15);
    let lam2 = -24.0 / 2f64.powf(5.5);
    assert!((petersson_lhs(&d, 2, 1).unwrap() - lam2 * base).abs() < 1e-14);
}

#[test]
fn lhs_at_weight_24_sums_two_reciprocals() {
    let d = data(24);
    assert_eq!(d.basis.dim(), 2);
    let want = 2.0 * PI * PI / 23.0 * (1.0 / d.sym2[0].value + 1.0 / d.sym2[1].value);
    assert!((petersson_lhs(&d, 1, 1).unwrap() - want).abs() < 1e-14);
}

#[test]
fn lhs_is_exactly_symmetric() {
    let d = data(36);
    for n1 in 1..=6 {
        for n2 in 1..=6 {
            assert_eq!(petersson_lhs(&d, n1, n2).unwrap(), petersson_lhs(&d, n2, n1).unwrap());
        }
    }
}

#[test]
fn rhs_symmetry_and_delta_dominance() {
    for (n1, n2) in [(1, 2), (2, 5), (3, 4)] {
        let a = petersson_rhs(30, n1, n2, 1e-12).unwrap();
        let b = petersson_rhs(30, n2, n1, 1e-12).unwrap();
        assert_eq!(a.value, b.value);
    }
    // 4π√(n₁n₂) ≈ 12.6 against order 199
    let same = petersson_rhs(200, 1, 1, 1e-15).unwrap();
    assert!((same.value - 1.0).abs() < 1e-15 && same.tail_bound < 1e-15);
    let diff = petersson_rhs(200, 1, 2, 1e-15).unwrap();
    assert!(diff.value.abs() < 1e-15);
}

#[test]
fn tail_bound_is_certified_and_decreasing() {
    let r = petersson_rhs(12, 5, 5, 1e-9).unwrap();
    assert!(r.tail_bound < 1e-9);
    let c = r.c_truncation;
    assert!(petersson_tail_log_bound(12, 5, 5, c) < petersson_tail_log_bound(12, 5, 5, c - 1));
    // bound dominates the actual next terms
    let more = petersson_rhs(12, 5, 5, 1e-13).unwrap();
    assert!((more.value - r.value).abs() <= r.tail_bound);
}

#[test]
fn identity_at_weight_12_n1() {
    let rep = petersson_check(&[12], 1, 1e-6).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert!(rep.passed(), "{}", rep.to_csv());
}

#[test]
fn identity_over_weights_12_to_40() {
    let ks: Vec<u32> = (12..=40).step_by(2).collect();
    let rep = petersson_check(&ks, 5, 1e-6).unwrap();
    assert_eq!(rep.rows.len(), ks.len() * 15);
    assert!(rep.passed(), "{:?}", rep.failures());
    let csv = rep.to_csv();
    assert!(csv.starts_with("k,n1,n2,lhs,rhs,abs_diff,c_truncation\n"));
    assert_eq!(csv.lines().count(), 1 + rep.rows.len());
}

#[test]
fn empty_weight_range_passes() {
    let rep = petersson_check(&[], 5, 1e-6).unwrap();
    assert!(rep.rows.is_empty() && rep.passed());
}

#[test]
fn rejects_odd_or_small_weights() {
    assert!(petersson_check(&[13], 2, 1e-6).is_err());
    assert!(petersson_check(&[10], 2, 1e-6).is_err());
}

#[test]
fn sym2_values_positive_with_small_gaps() {
    for k in [12, 24, 50, 100] {
        let d = weight_data(k, 10, 1e-10).unwrap();
        for s in &d.sym2 {
            assert!(s.value > 0.0);
            assert!(s.gap < 1e-10, "k={k} gap {}", s.gap);
        }
    }
}

#[test]
fn smoothed_series_settles_toward_norm_value_at_weight_12() {
    let basis = hecke_eigenforms(12, 1400).unwrap();
    let f = &basis.forms[0];
    let exact = l_sym2_at_1(f, 1e-12).unwrap().value;
    let vals: Vec<f64> = [4.0, 8.0, 16.0, 32.0].iter().map(|&t| l_sym2_smoothed(f, t).unwrap()).collect();
    for v in &vals {
        assert!(*v > 0.0);
    }
    let errs: Vec<f64> = vals.iter().map(|v| (v - exact).abs()).collect();
    eprintln!("smoothed errors {errs:?}");
    assert!(errs[3] < errs[0], "{errs:?}");
}

#[test]
fn harmonic_weights_sum_close_to_one_for_large_k() {
    // Petersson at n₁ = n₂ = 1 with negligible Kloosterman part
    let d = weight_data(100, 4, 1e-12).unwrap();
    let s: f64 = d.harmonic_weights().iter().sum();
    assert!((s - 1.0).abs() < 1e-10, "{s}");
}
