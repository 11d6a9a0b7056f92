use proptest::prelude::*;

use conereg::morrey::{
    ball_energies, chaining_modulus, cone_graph, fit_holder_exponent, geometric_radii, morrey_constant, square_grid,
    ChainingParams,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rescaling_graph_rescales_energies(s in 0.1f64..10.0, alpha in 0.3f64..1.0) {
        let cg = cone_graph(2, 0.01, 1.0).unwrap();
        let f = cg.sample(|r, t| r.powf(alpha) * (t / 2.0).cos());
        let radii = geometric_radii(0.02, 0.4, 6);
        let base = ball_energies(&f, &cg.graph, &radii, &[cg.apex]).unwrap();
        let big = cg.graph.scaled(s, 2);
        let scaled_radii: Vec<f64> = radii.iter().map(|r| r * s).collect();
        let rep = ball_energies(&f, &big, &scaled_radii, &[cg.apex]).unwrap();
        for (a, b) in base.energies.iter().zip(&rep.energies) {
            prop_assert!((b.normalized - a.normalized / (s * s)).abs() <= 1e-9 * a.normalized.abs().max(1e-300));
        }
        let fa = fit_holder_exponent(&base).unwrap();
        let fb = fit_holder_exponent(&rep).unwrap();
        prop_assert!((fa.alpha_power - fb.alpha_power).abs() < 1e-9);
    }

    #[test]
    fn chaining_bound_holds_under_morrey_hypothesis(alpha in 0.2f64..1.0, beta in 1usize..4, phase in 0.0f64..6.0) {
        let (h, eta, a) = (0.02, 1.0, 2.0);
        let cg = cone_graph(beta, h, eta).unwrap();
        let f = cg.sample(|r, t| r.powf(alpha) * (t / beta as f64 + phase).cos());
        let centers = vec![cg.apex, 11, 257];
        let radii: Vec<f64> = std::iter::successors(Some(a * eta / (2.0 * a)), |r| Some(r * 0.5))
            .take_while(|&r| r >= 0.25 * a * h)
            .collect();
        let lambda = morrey_constant(&f, &cg.graph, alpha, &centers, &radii).unwrap() * (1.0 + 1e-9);
        let rep = chaining_modulus(&f, &cg.graph, &ChainingParams {
            alpha, lambda, eta, a_dilation: a, centers, scales: None,
        }).unwrap();
        prop_assert!(rep.ratio <= 1.0, "{rep:?}");
    }
}

#[test]
fn distance_is_a_metric_on_grids() {
    let g = square_grid(9, 0.5).unwrap();
    let d: Vec<Vec<f64>> = (0..g.len()).map(|v| g.distances_from(v, f64::INFINITY)).collect();
    for x in 0..g.len() {
        assert_eq!(d[x][x], 0.0);
        for y in 0..g.len() {
            assert!((d[x][y] - d[y][x]).abs() < 1e-12);
            for z in (0..g.len()).step_by(7) {
                assert!(d[x][z] <= d[x][y] + d[y][z] + 1e-12);
            }
        }
    }
}
