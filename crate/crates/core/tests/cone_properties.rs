use std::f64::consts::PI;

use proptest::prelude::*;

use conereg::cone::{
    bilinear_form, dtn_perturbed, solve_schrodinger, ConeConfig, ConeGrid, Field, MetricPerturbation, Potential,
    PotentialProfile,
};
use conereg::exponents::PotentialExponent;
use conereg::linalg::SymTridiagonal;
use conereg::links::{link_spectrum, LinkModel};

fn scene(l: f64, lambda: f64, v: f64, nodes: usize) -> ConeGrid {
    let mut c = ConeConfig::new(LinkModel::circle(l), 2, 0.5);
    c.radial_nodes = nodes;
    c.modes = 6;
    if lambda > 0.0 {
        c.perturbation = Some(MetricPerturbation::conformal(lambda, 0.5));
    }
    c.potential = Some(Potential {
        profile: PotentialProfile::Lorentzian { amplitude: v, scale: 0.3 },
        p: PotentialExponent::Infinite,
    });
    c.build().unwrap()
}

/// Minimize the per-mode form over interior values with the boundary value
/// fixed, by conjugate gradients using only matrix-vector products.
fn cg_extension(op: &SymTridiagonal, trace: f64) -> Vec<f64> {
    let n = op.len();
    let interior_grad = |x: &[f64]| -> Vec<f64> {
        let mut full = x.to_vec();
        full.push(trace);
        let mut g = op.apply(&full);
        g.truncate(n - 1);
        g
    };
    let hess = |p: &[f64]| -> Vec<f64> {
        let mut full = p.to_vec();
        full.push(0.0);
        let mut g = op.apply(&full);
        g.truncate(n - 1);
        g
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n - 1];
    let mut r: Vec<f64> = interior_grad(&x).iter().map(|g| -g).collect();
    let mut p = r.clone();
    let r0 = dot(&r, &r).sqrt();
    let mut rr = dot(&r, &r);
    for _ in 0..20 * n {
        if rr.sqrt() <= 1e-15 * r0 {
            break;
        }
        let hp = hess(&p);
        let step = rr / dot(&p, &hp);
        for i in 0..n - 1 {
            x[i] += step * p[i];
            r[i] -= step * hp[i];
        }
        let rr_new = dot(&r, &r);
        for i in 0..n - 1 {
            p[i] = r[i] + (rr_new / rr) * p[i];
        }
        rr = rr_new;
    }
    x.push(trace);
    x
}

#[test]
fn dtn_eigenvalues_match_direct_minimization() {
    for g in [scene(4.0 * PI, 0.1, 0.0, 128), scene(3.0 * PI, 0.2, -2.0, 128), scene(2.0 * PI, 0.0, 1.5, 128)] {
        let rep = dtn_perturbed(&g).unwrap();
        let scale = 1.0 / g.boundary_measure().sqrt();
        let mut rayleigh: Vec<f64> = (0..g.modes())
            .map(|j| {
                let op = g.operator(j);
                let u = cg_extension(op, scale);
                op.bilinear(&u, &u)
            })
            .collect();
        rayleigh.sort_by(f64::total_cmp);
        for (a, b) in rep.eigenvalues.iter().zip(&rayleigh) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!(rep.symmetry_defect <= 1e-10);
    }
}

#[test]
fn random_competitors_never_beat_min_max_values() {
    let g = scene(4.0 * PI, 0.1, -1.0, 96);
    let rep = dtn_perturbed(&g).unwrap();
    let scale = 1.0 / g.boundary_measure().sqrt();
    // Diagonal in the mode basis for radial data: sort modes by their value.
    let diag: Vec<f64> = (0..g.modes()).map(|j| rep.matrix[j][j]).collect();
    let mut order: Vec<usize> = (0..g.modes()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for k in 0..g.modes() {
        for _ in 0..20 {
            // Trace orthogonal to the k lowest eigenvectors; arbitrary interior.
            let mut trace = vec![0.0; g.modes()];
            for &j in &order[k..] {
                trace[j] = next() * scale;
            }
            let norm2: f64 = trace.iter().map(|t| (t / scale).powi(2)).sum();
            let mut w = solve_schrodinger(&g, &trace).unwrap();
            let rows = w.values.len();
            for row in w.values.iter_mut().take(rows - 1) {
                for v in row.iter_mut() {
                    *v += 0.1 * next();
                }
            }
            let q = bilinear_form(&g, &w, &w) / norm2;
            assert!(q >= rep.eigenvalues[k] - 1e-10, "k={k}: {q} < {}", rep.eigenvalues[k]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solve_minimizes_energy(
        lambda in 0.0f64..0.3,
        v in -3.0f64..1.0,
        trace in prop::collection::vec(-1.0f64..1.0, 1..6),
        bumps in prop::collection::vec(-1.0f64..1.0, 64),
        amp in 1e-6f64..1.0,
    ) {
        let g = scene(4.0 * PI, lambda, v, 64);
        let u = solve_schrodinger(&g, &trace).unwrap();
        let q_u = bilinear_form(&g, &u, &u);
        let rows = u.values.len();
        let mut w: Field = u.clone();
        for (i, row) in w.values.iter_mut().enumerate().take(rows - 1) {
            for (j, x) in row.iter_mut().enumerate() {
                *x += amp * bumps[(i * 7 + j) % bumps.len()];
            }
        }
        let q_w = bilinear_form(&g, &w, &w);
        prop_assert!(q_w >= q_u - 1e-10 * q_u.abs().max(1.0), "{q_w} < {q_u}");
    }

    #[test]
    fn dtn_is_self_adjoint(lambda in 0.0f64..0.5, v in -3.0f64..1.5, l in 1.0f64..8.0) {
        let g = scene(l * PI, lambda, v, 64);
        let rep = dtn_perturbed(&g).unwrap();
        prop_assert!(rep.symmetry_defect <= 1e-10);
    }

    #[test]
    fn spectrum_matches_indicial_relation(l in 0.5f64..20.0, d in 1usize..5) {
        for (link, n) in [(LinkModel::circle(l), 2usize), (LinkModel::sphere(d), d + 1)] {
            let s = link_spectrum(&link, n, 12).unwrap();
            for (lam, nu) in s.lambdas.iter().zip(&s.nus) {
                let back = nu * (n as f64 - 2.0 + nu);
                prop_assert!((lam - back).abs() <= 1e-12 * lam.abs().max(1.0));
            }
        }
    }
}
