use proptest::prelude::*;
use zeta_chaos::coupling::*;
use zeta_chaos::primes::{build_prime_table, PrimeTable};
use zeta_chaos::rng::{stream_id, StreamKind, StreamRng};
use zeta_chaos::stats::line_fit;

fn table() -> PrimeTable {
    build_prime_table(11_100).unwrap()
}

#[test]
fn profile_is_one_at_origin_and_bounded() {
    let t = table();
    let law = block_char_profile(&t, 10_000..10_064).unwrap();
    assert_eq!(law.rho[0] > 0.0, true);
    let amps = block_amplitudes(&t, 10_000..10_064).unwrap();
    assert_eq!(block_phi(&amps, 0.0), 1.0);
    assert!(law.phi.iter().all(|p| p.abs() <= 1.0));
    // amplitudes normalize the block to unit covariance per coordinate
    let s: f64 = amps.iter().map(|a| 0.5 * a * a).sum();
    assert!((s - 1.0).abs() < 1e-13);
}

#[test]
fn monte_carlo_characteristic_function_n64() {
    let t = table();
    let range = 10_000..10_064;
    let amps = block_amplitudes(&t, range.clone()).unwrap();
    for rho in [0.5, 1.0, 2.0] {
        let mc = empirical_char(&t, range.clone(), rho, 100_000, 5);
        let phi = block_phi(&amps, rho);
        assert!((mc.mean - phi).abs() <= 3.0 * mc.se, "rho {rho}: {} vs {phi}", mc.mean);
    }
}

#[test]
fn coupling_with_itself_keeps_every_draw() {
    let grid = PlanarGrid::default();
    let t = table();
    let cp = BlockCoupler::new(&t, 10_000..10_064, grid).unwrap();
    let same = diagonal_coupling(grid, &cp.coupling.mu, &cp.coupling.mu).unwrap();
    assert!(same.is_degenerate());
    assert_eq!(same.cost(), 0.0);
    let mut rng = StreamRng::new(3, stream_id(StreamKind::Auxiliary, 0));
    for i in 0..1000 {
        let cell = (i * 7919) % grid.len();
        assert_eq!(same.partner(cell, &mut rng), None);
    }
}

#[test]
fn gaussian_vs_n64_chain_and_marginals() {
    let t = table();
    let cfg = AuditConfig { seed: 11, ..AuditConfig::default() };
    let a = audit_block(&t, 64, &cfg).unwrap();
    assert!(a.coupled);
    assert!(a.coupling_cost + 3.0 * a.empirical_se >= a.empirical_w1);
    assert!(a.w1_bound + a.grid_allowance >= a.coupling_cost);
    assert!(a.ordering_chain);
    assert!(a.ks_v1 < a.ks_critical && a.ks_v2 < a.ks_critical);
    assert!(a.marginal_error < 1e-12);
    assert!(a.mass_defect < 1e-6);
}

#[test]
fn rates_decrease_with_block_size() {
    let t = table();
    let cfg = AuditConfig { seed: 12, ..AuditConfig::default() };
    let rows: Vec<CouplingAudit> = [16, 64, 256, 1024].iter().map(|&n| audit_block(&t, n, &cfg).unwrap()).collect();
    let mean: Vec<f64> = rows.iter().map(|a| a.mean_abs_v).collect();
    assert!(mean.windows(2).all(|w| w[1] < w[0]), "{mean:?}");
    let l1: Vec<f64> = rows[..3].iter().map(|a| a.fourier_l1).collect();
    assert!(l1.windows(2).all(|w| w[1] < w[0]));
    let x: Vec<f64> = [16f64, 64.0, 256.0].iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = l1.iter().map(|v| v.ln()).collect();
    let slope = line_fit(&x, &y).slope;
    assert!((-1.5..=-0.7).contains(&slope), "Fourier L1 slope {slope}");
}

#[test]
fn blocks_below_four_primes_are_uncoupled() {
    let t = table();
    let row = audit_block(&t, 2, &AuditConfig::default()).unwrap();
    assert!(!row.coupled && !row.ordering_chain);
    let s = couple_block(&t, 1, 10_000..10_003, PlanarGrid::default(), 1, 0).unwrap();
    assert!(!s.coupled && s.v.is_some());
    assert!(matches!(
        density_from_radial(&block_char_profile_on(&[1.0], vec![0.5], vec![1.0]), 1.0, 0.1),
        Err(zeta_chaos::Error::TailNotDecayed { .. })
    ));
}

#[test]
fn coupled_block_scale_matches_block_variance() {
    let t = table();
    let s = couple_block(&t, 1, 10_000..10_016, PlanarGrid::default(), 9, 4).unwrap();
    let b2: f64 = t.primes()[10_000..10_016].iter().map(|&p| 0.5 / p as f64).sum();
    assert!((s.b * s.b - b2).abs() <= 1e-12 * b2);
    assert!(s.coupled);
}

fn measure(cells: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, cells * cells).prop_filter_map("non-zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_coupling_properties(mu in measure(6), nu in measure(6)) {
        let grid = PlanarGrid { half_width: 1.5, cells: 6 };
        let c = diagonal_coupling(grid, &mu, &nu).unwrap();
        let (row, col) = c.marginal_errors();
        prop_assert!(row < 1e-12 && col < 1e-12);
        let cost = c.cost();
        // W1 lower bound from the 1-Lipschitz test functions x and y
        let mean = |m: &[f64]| (0..grid.len()).fold((0.0, 0.0), |acc, i| {
            let (x, y) = grid.center(i);
            (acc.0 + m[i] * x, acc.1 + m[i] * y)
        });
        let (a, b) = (mean(&mu), mean(&nu));
        prop_assert!(cost + 1e-12 >= (a.0 - b.0).abs().max((a.1 - b.1).abs()));
        // moved mass tv/2 travels at most the grid diameter
        prop_assert!(cost <= 0.5 * c.tv * 3.0 * 2f64.sqrt() + 1e-12);
        let back = diagonal_coupling(grid, &nu, &mu).unwrap().cost();
        prop_assert!((cost - back).abs() <= 1e-12 * (1.0 + cost));
        let bound = w1_upper_bound_min(&grid, &mu, &nu, (0.0, 0.0)).1;
        prop_assert!(bound >= 0.0);
    }
}
