use num_complex::Complex64;
use proptest::prelude::*;
use zeta_chaos::chaos_measure::{chaos_boxes, grid_for_level, ChaosParams, Normalization};
use zeta_chaos::covariance_kernel::psi_n;
use zeta_chaos::field_engine::{build_block_schedule, eval_field, sample_phases_n};
use zeta_chaos::primes::build_prime_table;
use zeta_chaos::trig_sum::{direct_sum, rotation_sum};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_matches_direct(
        terms in prop::collection::vec((0.0f64..12.0, -1.0f64..1.0, -1.0f64..1.0), 1..40),
        x0 in -2.0f64..2.0,
        dx in 1e-4f64..0.05,
    ) {
        let freqs: Vec<f64> = terms.iter().map(|t| t.0).collect();
        let amps: Vec<Complex64> = terms.iter().map(|t| Complex64::new(t.1, t.2)).collect();
        let m = 300;
        let fast = rotation_sum(&freqs, &amps, x0, dx, m);
        for k in (0..m).step_by(37) {
            let want = direct_sum(&freqs, &amps, x0 + k as f64 * dx);
            prop_assert!((fast[k] - want).abs() < 1e-10, "k {} {} vs {}", k, fast[k], want);
        }
    }

    #[test]
    fn psi_is_even_and_peaks_at_zero(u in 0.0f64..50.0, n in 1usize..500) {
        let t = build_prime_table(500).unwrap();
        let (a, b) = (psi_n(u, &t, n).unwrap(), psi_n(-u, &t, n).unwrap());
        prop_assert_eq!(a, b);
        prop_assert!(a <= psi_n(0.0, &t, n).unwrap() + 1e-15);
    }

    #[test]
    fn coarsening_keeps_total_mass(seed in 0u64..1000, beta in 0.2f64..2.0, level in 1usize..6) {
        let t = build_prime_table(200).unwrap();
        let ph = sample_phases_n(200, seed, 0);
        let f = eval_field(&t, &ph, 200, grid_for_level(level)).unwrap();
        let p = ChaosParams::new(&t, beta, 200, Normalization::ExactBessel).unwrap();
        let b = chaos_boxes(&f, &p, level).unwrap();
        let c = b.coarsen().unwrap();
        prop_assert_eq!(c.masses.len() * 2, b.masses.len());
        prop_assert!((c.total() - b.total()).abs() <= 1e-13 * b.total());
        prop_assert!(b.masses.iter().all(|m| *m > 0.0));
    }

    #[test]
    fn block_schedule_gaps(alpha in 0.05f64..0.399) {
        let t = build_prime_table(20_000).unwrap();
        let s = build_block_schedule(alpha, &t).unwrap();
        prop_assert_eq!(s.cuts[0], 1);
        prop_assert!(s.cuts.windows(2).all(|w| w[1] >= w[0] + 2));
        prop_assert!(*s.cuts.last().unwrap() <= t.count() + 1);
        prop_assert_eq!(s.valid.len() + 1, s.cuts.len());
    }
}
