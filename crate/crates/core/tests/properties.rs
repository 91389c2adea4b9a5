use gdm::analysis::{step_sum_identities, weak_metric_moments, DEFAULT_FAMILY_SIZE};
use gdm::checks::{commutation_defect, shipped_instances, shipped_pairs};
use gdm::gd::{dual_seminorm, DofField};
use proptest::prelude::*;

fn moments() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, DEFAULT_FAMILY_SIZE)
}

fn step_family() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64, f64)> {
    (1usize..20).prop_flat_map(|n| {
        (
            -2.0f64..2.0,
            prop::collection::vec(0.01f64..1.5, n),
            prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..3.0], n),
            0.01f64..4.0,
            -3.0f64..3.0,
        )
            .prop_map(|(t0, steps, a, tau, s)| {
                let nodes = std::iter::once(t0)
                    .chain(steps.iter().scan(t0, |t, d| {
                        *t += d;
                        Some(*t)
                    }))
                    .collect();
                (nodes, a, tau, s)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weak_metric_axioms(u in moments(), v in moments(), w in moments()) {
        let uv = weak_metric_moments(&u, &v);
        prop_assert!((uv - weak_metric_moments(&v, &u)).abs() <= 1e-12);
        prop_assert!(weak_metric_moments(&u, &w) <= uv + weak_metric_moments(&v, &w) + 1e-12);
        prop_assert!(uv <= 2.0 - 2f64.powi(1 - DEFAULT_FAMILY_SIZE as i32));
        prop_assert_eq!(weak_metric_moments(&u, &u), 0.0);
    }

    #[test]
    fn step_sums((nodes, a, tau, s) in step_family()) {
        let r = step_sum_identities(&nodes, &a, tau, s).unwrap();
        prop_assert!((r.lhs1 - r.rhs1).abs() <= 1e-12 * r.rhs1.max(1e-300), "{:?}", r);
        prop_assert!(r.lhs2 <= r.rhs2 + 1e-12, "{:?}", r);
    }

    #[test]
    fn entropy_is_convex(k in 0usize..4, z1 in -8.0f64..8.0, z2 in -8.0f64..8.0) {
        let pair = &shipped_pairs()[k];
        let b = |z: f64| pair.big_b(z).unwrap();
        let mid = b(0.5 * (z1 + z2));
        prop_assert!(mid <= 0.5 * (b(z1) + b(z2)) + 1e-10 * (1.0 + mid.abs()));
        prop_assert!(b(z1) >= 0.0);
    }

    #[test]
    fn pseudo_inverse_is_a_closest_root(k in 0usize..4, s in -8.0f64..8.0) {
        let pair = &shipped_pairs()[k];
        let y = pair.beta(s);
        let r = pair.beta_r(y).unwrap();
        prop_assert!((pair.beta(r) - y).abs() <= 1e-12 * (1.0 + y.abs()));
        prop_assert!(r.abs() <= s.abs() + 1e-12);
    }

    #[test]
    fn nu_sign_and_bound(k in 0usize..4, s in -8.0f64..8.0) {
        let pair = &shipped_pairs()[k];
        let nu = pair.nu(s);
        prop_assert!(nu * s >= 0.0);
        prop_assert!(nu.abs() <= pair.l_beta * pair.zeta(s).abs() + 1e-12);
        prop_assert!(nu.abs() <= pair.l_zeta * pair.beta(s).abs() + 1e-12);
    }

    #[test]
    fn reconstruction_commutes(inst in 0usize..2, k in 0usize..4, which in 0usize..3, seed in prop::collection::vec(-4.0f64..4.0, 9)) {
        let gd = &shipped_instances()[inst];
        let pair = &shipped_pairs()[k];
        let u = DofField::from_fn(gd.dof_count(), |i, _| seed[i % seed.len()] * (1.0 + 0.1 * i as f64));
        let d = match which {
            0 => commutation_defect(gd, &u, |s| pair.beta(s)),
            1 => commutation_defect(gd, &u, |s| pair.zeta(s)),
            _ => commutation_defect(gd, &u, |s| pair.nu(s)),
        };
        prop_assert_eq!(d, 0.0);
    }

    #[test]
    fn dual_seminorm_homogeneity_and_hoelder(inst in 0usize..2, lambda in -5.0f64..5.0, seed in prop::collection::vec(-1.0f64..1.0, 9)) {
        let gd = &shipped_instances()[inst];
        let w = DofField::from_fn(gd.dof_count(), |i, _| seed[i % seed.len()] + 0.05 * i as f64);
        let z = DofField::from_fn(gd.dof_count(), |i, _| seed[(i + 3) % seed.len()] - 0.02 * i as f64);
        let base = dual_seminorm(gd, &w).unwrap();
        let scaled = dual_seminorm(gd, &(&w * lambda)).unwrap();
        prop_assert!((scaled - lambda.abs() * base).abs() <= 1e-9 * (1.0 + base * lambda.abs()));
        let pairing = gd.l2_pairing(&w, &z).abs();
        prop_assert!(pairing <= base * gd.gradient_norm(&z, gd.p()) * (1.0 + 1e-9) + 1e-14);
    }
}

#[test]
fn p_four_dual_seminorm_homogeneity() {
    let gd = shipped_instances()[0].with_p(4.0);
    let w = DofField::from_fn(gd.dof_count(), |i, _| (i as f64 * 0.7).sin());
    let base = dual_seminorm(&gd, &w).unwrap();
    for lambda in [-3.0, 0.5, 2.0] {
        let v = dual_seminorm(&gd, &(&w * lambda)).unwrap();
        assert!((v - lambda.abs() * base).abs() <= 1e-6 * base * lambda.abs());
    }
}
