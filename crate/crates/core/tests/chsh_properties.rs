use std::f64::consts::PI;

use jbell_core::chsh::{chsh_gamma, chsh_gamma_analytic_corrected, ChshSetting};
use jbell_core::evolution::{evolve_closed_form, BlochDirection};
use jbell_core::linalg::tensor;
use jbell_core::model::TwoQubitParams;
use jbell_core::{PureState, C64};
use proptest::prelude::*;

fn qubit() -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2)
        .prop_map(|v| v.into_iter().map(|(r, i)| C64::new(r, i)).collect::<Vec<_>>())
        .prop_filter("non-zero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6)
        .prop_map(|v| PureState::normalized(v).unwrap())
}

fn direction() -> impl Strategy<Value = BlochDirection> {
    (0.0..2.0 * PI, -PI..PI).prop_map(|(t, p)| BlochDirection::new(t, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn product_states_obey_the_local_bound(a in qubit(), b in qubit(), n in direction(), np in direction()) {
        let psi = tensor(&a, &b).unwrap();
        let g = chsh_gamma(&psi, &ChshSetting::new(n, np)).unwrap().gamma;
        prop_assert!((-1.0 - 1e-12..=1e-12).contains(&g), "gamma {}", g);
    }

    #[test]
    fn corrected_closed_form_matches_pipeline(
        b in -5.0..5.0f64, j in -5.0..5.0f64, t in 0.0..20.0f64,
        theta in 0.0..2.0 * PI, phi1 in -PI..PI, phi2 in -PI..PI,
    ) {
        let p = TwoQubitParams::new(b, j).unwrap();
        let pipeline = chsh_gamma(&evolve_closed_form(&p, t), &ChshSetting::symmetric(theta, phi1, phi2)).unwrap().gamma;
        let closed = chsh_gamma_analytic_corrected(&p, t, theta, phi1, phi2);
        prop_assert!((pipeline - closed).abs() <= 1e-9);
    }
}

proptest! {
    #[test]
    fn gamma_ignores_global_phase(b in -2.0..2.0f64, j in -2.0..2.0f64, t in 0.0..10.0f64,
                                  n in direction(), np in direction(), g in -PI..PI) {
        let psi = evolve_closed_form(&TwoQubitParams::new(b, j).unwrap(), t);
        let s = ChshSetting::new(n, np);
        let x = chsh_gamma(&psi, &s).unwrap().gamma;
        let y = chsh_gamma(&psi.with_global_phase(g), &s).unwrap().gamma;
        prop_assert!((x - y).abs() <= 1e-14);
    }
}
