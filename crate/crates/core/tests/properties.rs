use levy_fpe::{
    count_modes, drift_flow, increment_scale, Density, DriftScheme, DriftSpec, GeneratorMatrix, Grid, JumpStencil,
    NoiseSpec,
};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (0.5f64..12.0, 2usize..60).prop_map(|(l, k)| Grid::new(l, 2 * k + 1).unwrap())
}

fn density_strategy() -> impl Strategy<Value = Density> {
    grid_strategy().prop_flat_map(|g| {
        prop::collection::vec(0.0f64..10.0, g.len()).prop_map(move |mut v| {
            v[g.center_index()] += 1.0;
            Density::new(g, v).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(d in density_strategy()) {
        let once = d.normalize().unwrap();
        prop_assert!((once.mass() - 1.0).abs() < 1e-12);
        let twice = once.normalize().unwrap();
        prop_assert_eq!(twice.values(), once.values());
    }

    #[test]
    fn mass_is_linear(d in density_strategy(), c in 0.01f64..100.0) {
        let scaled = Density::new(*d.grid(), d.values().iter().map(|v| c * v).collect()).unwrap();
        prop_assert!((scaled.mass() - c * d.mass()).abs() <= 1e-12 * scaled.mass());
    }

    #[test]
    fn reflection_is_an_involution(d in density_strategy()) {
        let back = d.reflect().reflect();
        prop_assert_eq!(back.values(), d.values());
        prop_assert!((d.reflect().mass() - d.mass()).abs() <= 1e-14 * d.mass());
    }

    #[test]
    fn jump_matrix_is_symmetric_and_dissipative(
        alpha in 0.05f64..1.995,
        g in grid_strategy(),
        v in prop::collection::vec(-1.0f64..1.0, 121),
    ) {
        let s = JumpStencil::build(&g, alpha).unwrap();
        let n = g.len();
        let j = s.to_dense();
        for r in 0..n {
            for c in 0..r {
                prop_assert_eq!(j[r * n + c], j[c * n + r]);
            }
        }
        let v = &v[..n];
        let jv = s.apply_values(v, 0.0);
        let quad: f64 = v.iter().zip(&jv).map(|(a, b)| a * b).sum();
        let scale: f64 = v.iter().map(|x| x * x).sum::<f64>() * s.diagonal().abs();
        prop_assert!(quad <= 1e-10 * scale, "vᵀJv = {quad}");
    }

    #[test]
    fn closed_generator_conserves_mass(
        b in -20.0f64..20.0,
        alpha in 0.1f64..1.99,
        epsilon in 0.01f64..3.0,
        upwind in any::<bool>(),
    ) {
        let g = Grid::new(4.0, 81).unwrap();
        let scheme = if upwind { DriftScheme::Upwind } else { DriftScheme::Central };
        let m = GeneratorMatrix::assemble(
            &g,
            DriftSpec::new(b).unwrap(),
            NoiseSpec::stable(alpha, epsilon).unwrap(),
            scheme,
        )
        .unwrap();
        let p: Vec<f64> = g.nodes().iter().map(|x| (-x * x).exp()).collect();
        let rate: f64 = m.apply_closed(&p).iter().sum();
        let size: f64 = m.apply_open(&p).iter().map(|x| x.abs()).sum();
        prop_assert!(rate.abs() <= 1e-11 * size.max(1.0));
    }

    #[test]
    fn modality_is_invariant_under_rescaling_and_reflection(d in density_strategy(), c in 0.01f64..100.0) {
        let base = count_modes(&d.normalize().unwrap(), 0.01).modality;
        let scaled = Density::new(*d.grid(), d.values().iter().map(|v| c * v).collect()).unwrap();
        prop_assert_eq!(count_modes(&scaled.normalize().unwrap(), 0.01).modality, base);
        prop_assert_eq!(count_modes(&d.reflect().normalize().unwrap(), 0.01).modality, base);
    }

    #[test]
    fn raising_prominence_never_adds_modes(d in density_strategy(), a in 0.001f64..0.99, b in 0.001f64..0.99) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(count_modes(&d, hi).modality <= count_modes(&d, lo).modality);
    }

    #[test]
    fn modes_are_symmetric_for_symmetric_densities(d in density_strategy()) {
        let n = d.grid().len();
        let v = d.values();
        let sym: Vec<f64> = (0..n).map(|i| v[i] + v[n - 1 - i]).collect();
        let s = Density::new(*d.grid(), sym).unwrap();
        let m = count_modes(&s, 0.01);
        for (x, y) in m.mode_locations.iter().zip(m.mode_locations.iter().rev()) {
            prop_assert!((x + y).abs() <= d.grid().spacing());
        }
    }

    #[test]
    fn increment_scale_is_homogeneous(alpha in 0.05f64..1.99, eps in 0.01f64..5.0, dt in 1e-5f64..1.0) {
        let s = increment_scale(alpha, eps, dt).unwrap();
        let s2 = increment_scale(alpha, eps, 2.0 * dt).unwrap();
        prop_assert!((s2 / s - 2f64.powf(1.0 / alpha)).abs() < 1e-12 * s2 / s);
        let e2 = increment_scale(alpha, 2.0 * eps, dt).unwrap();
        prop_assert!((e2 / s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn drift_flow_is_a_semigroup(b in -10.0f64..10.0, x in -50.0f64..50.0, h1 in 0.0f64..0.5, h2 in 0.0f64..0.5) {
        let two = drift_flow(b, drift_flow(b, x, h1), h2);
        let one = drift_flow(b, x, h1 + h2);
        prop_assert!((two - one).abs() <= 1e-10 * one.abs().max(1.0));
    }
}
