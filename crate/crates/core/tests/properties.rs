use diffmix_core::colehopf::{ch_forward, ch_inverse};
use diffmix_core::flows::{burgers_flow, heat_propagate};
use diffmix_core::grid::{make_grid, quadrature};
use diffmix_core::io::{field_table, parse_field};
use diffmix_core::norms::{l1_norm, linf_norm};
use diffmix_core::profiles::{f_star, BurgersParams};
use diffmix_core::renorm::{coercivity_grid, heat_contraction, rl_properties_check};
use diffmix_core::Field;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cole_hopf_round_trip(a in 0.05f64..8.0) {
        let grid = make_grid(40.0, 1024).unwrap();
        let f = f_star(&BurgersParams::from_amplitude(a).unwrap(), &grid);
        let back = ch_inverse(&ch_forward(&f).unwrap()).unwrap();
        let err = f.zip_with(&back, |x, y| x - y).unwrap().max_abs();
        prop_assert!(err <= 1e-10, "A={a}: {err:e}");
    }

    #[test]
    fn profile_mass_is_phase_offset(phi in 0.1f64..4.0) {
        let grid = make_grid(40.0, 1024).unwrap();
        let p = BurgersParams::from_phase_offset(phi).unwrap();
        let f = f_star(&p, &grid);
        prop_assert!((quadrature(&f) - phi).abs() < 1e-10);
        prop_assert!((p.amplitude() - phi.exp_m1()).abs() < 1e-12 * p.amplitude().max(1.0));
    }

    #[test]
    fn burgers_flow_conserves_mass_and_decays(a in 0.1f64..5.0, t in 1.5f64..16.0) {
        let grid = make_grid(40.0, 1024).unwrap();
        let b0 = f_star(&BurgersParams::from_amplitude(a).unwrap(), &grid);
        let r = burgers_flow(&b0, t).unwrap();
        prop_assert!(r.mass_drift() < 1e-9);
        // uniform decay bound sqrt(t) |b(t)|_inf <= |b0|_1 e^{|b0|_1}
        let m = l1_norm(&b0);
        prop_assert!(t.sqrt() * linf_norm(&r.field) <= m * m.exp());
    }

    #[test]
    fn heat_contraction_is_one_over_l(scale in 2.0f64..8.0) {
        let grid = coercivity_grid(scale).unwrap();
        let g = Field::from_fn(&grid, |x| -x / 2.0 * (-x * x / 4.0).exp());
        let r = heat_contraction(&g, scale).unwrap();
        prop_assert!((r - 1.0 / scale).abs() < 1e-8, "L={scale}: {r}");
    }

    #[test]
    fn rescaling_bound_and_commutation(scale in 2.0f64..6.0, c in -1.0f64..1.0) {
        let grid = make_grid(40.0, 1024).unwrap();
        let f = Field::from_fn(&grid, |x| (-(x - c) * (x - c) / 4.0).exp());
        let r = rl_properties_check(&f, scale).unwrap();
        prop_assert!(r.bound_holds(), "{r:?}");
        prop_assert!(r.commutation_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn heat_semigroup_property(s1 in 0.1f64..3.0, s2 in 0.1f64..3.0) {
        let grid = make_grid(40.0, 1024).unwrap();
        let f = Field::from_fn(&grid, |x| (1.0 + x) * (-x * x).exp());
        let two = heat_propagate(&heat_propagate(&f, s1), s2);
        let one = heat_propagate(&f, s1 + s2);
        prop_assert!(two.zip_with(&one, |x, y| x - y).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip(amp in -3.0f64..3.0, t in 0.0f64..10.0) {
        let grid = make_grid(16.0, 128).unwrap();
        let f = Field::from_fn(&grid, |x| amp * (x / 3.0).sin() * (-x * x / 8.0).exp()).with_time(t);
        let g = parse_field(&field_table(&f).to_csv().unwrap()).unwrap();
        prop_assert_eq!(g.values(), f.values());
        prop_assert_eq!(g.time(), t);
    }
}
