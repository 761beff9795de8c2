use proptest::prelude::*;
use zeta_chaos::covariance_kernel::psi_n;
use zeta_chaos::critical_chain::*;
use zeta_chaos::primes::build_prime_table;
use zeta_chaos::stats::{mean_se, zero_mean_cov};

#[test]
fn reference_field_moments() {
    let t = 2.0;
    let s = ReferenceSampler::new(t, 65).unwrap();
    let draws: Vec<Vec<f64>> = (0..10_000).map(|i| s.sample(17, i).values).collect();
    // x = 1/2 is grid point 32; x = 1/4 and 3/4 are 16 and 48
    let mid: Vec<f64> = draws.iter().map(|d| d[32] * d[32]).collect();
    let v = mean_se(&mid);
    assert!((v.mean - 0.5 * (1.0 + t)).abs() <= 3.0 * v.se, "{v:?}");
    let a: Vec<f64> = draws.iter().map(|d| d[16]).collect();
    let b: Vec<f64> = draws.iter().map(|d| d[48]).collect();
    let c = zero_mean_cov(&a, &b);
    let want = -0.5 * 0.5f64.ln();
    assert!(0.5 > (-t as f64).exp());
    assert!((c.mean - want).abs() <= 3.0 * c.se, "{c:?} vs {want}");
}

#[test]
fn reference_variance_at_small_t() {
    for t in [1e-3, 1e-6] {
        assert!((reference_covariance(t, 0.4, 0.4).unwrap() - 0.5).abs() <= t);
    }
}

#[test]
fn gn1_tracks_prime_kernel() {
    let n = 10_000;
    let table = build_prime_table(n).unwrap();
    let c1 = ChainCovariance::new(Stage::GN1, n).unwrap();
    let gap = (0..100)
        .map(|k| {
            let u = k as f64 / 99.0;
            (c1.cov(u).unwrap() - psi_n(u, &table, n).unwrap()).abs()
        })
        .fold(0.0f64, f64::max);
    assert!(gap.is_finite() && gap < 0.5, "gap {gap}");
}

#[test]
fn js1_report_shape() {
    let r = js1_conditions(&[1_000, 10_000, 100_000], 200).unwrap();
    let sups: Vec<f64> = r.iter().map(|x| x.sup_diff).collect();
    let ratio = sups.iter().cloned().fold(f64::MIN, f64::max) / sups.iter().cloned().fold(f64::MAX, f64::min);
    assert!(ratio < 3.0);
    for x in &r {
        assert!(x.offdiag.iter().all(|o| *o <= x.sup_diff));
    }
    assert!(js1_conditions(&[1_000], 100).is_err());
}

#[test]
fn stage_gaps_bounded_in_n() {
    let a = stage_gaps(1_000, 50).unwrap();
    let b = stage_gaps(10_000, 50).unwrap();
    for (x, y) in [(a.gn1_gn2, b.gn1_gn2), (a.gn2_gn3, b.gn2_gn3), (a.gn3_gn4, b.gn3_gn4)] {
        assert!(y < 2.0 * x + 1e-3, "{x} -> {y}");
    }
}

#[test]
fn gn4_variance_is_half_integral_of_c_hat() {
    let n = 5_000;
    let c4 = ChainCovariance::new(Stage::GN4, n).unwrap();
    // trapezoid oracle on a fine grid
    let m = 200_000;
    let h = (c4.b - c4.a) / m as f64;
    let f = |s: f64| 2.0 * zeta_chaos::special::si(s) / s;
    let mut acc = 0.5 * (f(c4.a) + f(c4.b));
    for k in 1..m {
        acc += f(c4.a + k as f64 * h);
    }
    let want = acc * h / (2.0 * std::f64::consts::PI);
    assert!((c4.cov(0.0).unwrap() - want).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reference_covariance_is_psd(t in 0.01f64..5.0, m in 8usize..120) {
        let s = ReferenceSampler::new(t, m).unwrap();
        prop_assert!(s.clipped_mass <= 1e-6 * s.trace);
    }

    #[test]
    fn reference_branches_meet(t in 0.01f64..8.0) {
        let d = (-t).exp();
        let inner = 0.5 * (1.0 + t - t.exp() * d);
        let outer = -0.5 * d.ln();
        prop_assert!((inner - outer).abs() < 1e-12);
    }
}
