use proptest::prelude::*;
use snh_core::analysis::{mass_energy, omega_range_check, pohozaev_report, IDENTITY_TOLERANCE};
use snh_core::problem::ProblemSpec;
use snh_core::shooting::{classify, find_excited_state, find_ground_state, ClassKind, DEFAULT_C_TOL};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ground_states_are_consistent(d in 6u32..=12, log_b in -2.0f64..2.0) {
        let b = 10f64.powf(log_b);
        let spec = ProblemSpec::regular(d).unwrap();
        let res = find_ground_state(b, &spec, DEFAULT_C_TOL).unwrap();

        prop_assert_eq!(res.profile.node_count, 0);
        prop_assert!(res.profile.samples.iter().all(|s| s.f > 0.0));
        prop_assert!(omega_range_check(&res).pass, "omega = {}", res.omega);
        let report = pohozaev_report(&res).unwrap();
        prop_assert!(report.passes(IDENTITY_TOLERANCE), "{:?}", report.residuals);
        prop_assert!(mass_energy(&res).unwrap().mass > 0.0);

        // c* separates the two behaviours
        let step = 1e-6 * res.c_star.abs().max(1.0);
        let below = classify(b, res.c_star - step, 0, &spec).unwrap().kind;
        let above = classify(b, res.c_star + step, 0, &spec).unwrap().kind;
        prop_assert!(below != above);
        prop_assert!(below != ClassKind::Decays && above != ClassKind::Decays);
    }

    #[test]
    fn node_ladder_orders_frequencies(d in 6u32..=9, log_b in -1.0f64..1.0) {
        let b = 10f64.powf(log_b);
        let spec = ProblemSpec::regular(d).unwrap();
        let ladder: Vec<_> = (0..3)
            .map(|n| find_excited_state(b, n, &spec, DEFAULT_C_TOL).unwrap())
            .collect();
        for (n, res) in ladder.iter().enumerate() {
            prop_assert_eq!(res.profile.node_count, n);
        }
        prop_assert!(ladder.windows(2).all(|w| w[1].omega > w[0].omega && w[1].c_star > w[0].c_star));
    }
}
