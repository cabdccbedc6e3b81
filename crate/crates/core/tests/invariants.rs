use proptest::prelude::*;

use redspec::dynamics::period_action;
use redspec::groups::{GroupKind, GroupModel, IrreducibleCharacter};
use redspec::hamiltonian::{HamiltonianModel, Potential};
use redspec::quantum::{count_in_window, GridPolicy, SectorQuery, Spectrum};
use redspec::reduction::{embed, reduced_volume, to_reduced_chart, ReducedPoint, OMEGA0_TOL};

fn spectrum(group: GroupKind, n: i64, h: f64, pot: Potential, hi: f64) -> Spectrum {
    SectorQuery::new(group, n, h, pot).spectrum(0.0, hi, &GridPolicy::default()).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn larger_potential_raises_every_level(
        h in 0.05f64..0.1,
        lambda in 0.0f64..1.0,
        dl in 0.05f64..0.5,
        n in 0i64..3,
    ) {
        let low = spectrum(GroupKind::So2Planar, n, h, Potential::anharmonic(lambda), 3.0);
        let high = spectrum(GroupKind::So2Planar, n, h, Potential::anharmonic(lambda + dl), 3.0);
        prop_assert!(high.len() <= low.len());
        for k in 0..high.len() {
            let slack = low.errors[k] + high.errors[k];
            prop_assert!(high.eigenvalues[k] + slack >= low.eigenvalues[k]);
        }
    }

    #[test]
    fn opposite_planar_sectors_are_isospectral(h in 0.04f64..0.1, n in 1i64..4, lambda in 0.0f64..1.0) {
        let pot = Potential::anharmonic(lambda);
        let plus = spectrum(GroupKind::So2Planar, n, h, pot, 2.5);
        let minus = spectrum(GroupKind::So2Planar, -n, h, pot, 2.5);
        prop_assert_eq!(plus.eigenvalues, minus.eigenvalues);
    }

    #[test]
    fn centrifugal_barrier_orders_sectors(h in 0.04f64..0.1, n in 0i64..3) {
        let pot = Potential::anharmonic(0.5);
        let inner = spectrum(GroupKind::So3, n, h, pot, 2.5);
        let outer = spectrum(GroupKind::So3, n + 1, h, pot, 2.5);
        for (a, b) in inner.eigenvalues.iter().zip(&outer.eigenvalues) {
            prop_assert!(b > a);
        }
    }

    #[test]
    fn counting_is_additive_over_windows(h in 0.02f64..0.08, split in 1.1f64..1.9) {
        let s = spectrum(GroupKind::So2Planar, 0, h, Potential::anharmonic(1.0), 2.5);
        let whole = count_in_window(&s, 1.0, 2.0);
        let parts = (count_in_window(&s, 1.0, split), count_in_window(&s, split, 2.0));
        if let (Ok(w), (Ok(a), Ok(b))) = (whole, parts) {
            prop_assert_eq!(w, a + b);
        }
    }

    #[test]
    fn characters_are_orthonormal(n in 0i64..5, m in 0i64..5, order in 2u32..7) {
        for kind in [GroupKind::So2Planar, GroupKind::So3, GroupKind::Cyclic(order)] {
            let group = GroupModel::new(kind);
            let a = IrreducibleCharacter::new(kind, n).unwrap();
            let b = IrreducibleCharacter::new(kind, m).unwrap();
            let inner = group.haar_average(|t| a.value(t) * b.conj_value(t)).unwrap();
            let expected = if a == b { 1.0 } else { 0.0 };
            prop_assert!((inner.re - expected).abs() < 1e-8 && inner.im.abs() < 1e-8, "{kind} {n} {m}: {inner}");
        }
    }

    #[test]
    fn so3_degree_is_character_at_identity(n in 0i64..20) {
        let chi = IrreducibleCharacter::new(GroupKind::So3, n).unwrap();
        prop_assert_eq!(chi.degree(), (2 * n + 1) as usize);
        prop_assert!((chi.value(0.0).re - chi.degree() as f64).abs() < 1e-9);
    }

    #[test]
    fn cyclic_sectors_repeat_with_the_order(order in 2u32..9, n in -20i64..20) {
        let kind = GroupKind::Cyclic(order);
        let a = IrreducibleCharacter::new(kind, n).unwrap();
        let b = IrreducibleCharacter::new(kind, n + order as i64).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn chart_embedding_round_trips(
        r in 0.05f64..3.0,
        p in -3.0f64..3.0,
        a in 0.0f64..std::f64::consts::TAU,
        b in 0.1f64..3.0,
        axial in any::<bool>(),
    ) {
        let (kind, u) = if axial {
            (GroupKind::So2Axial, vec![a.cos(), a.sin()])
        } else if b > 1.5 {
            (GroupKind::So3, vec![b.sin() * a.cos(), b.sin() * a.sin(), b.cos()])
        } else {
            (GroupKind::So2Planar, vec![a.cos(), a.sin()])
        };
        let group = GroupModel::new(kind);
        let w = ReducedPoint { r, p, vertical: axial.then_some((b - 1.0, 0.5 * p)) };
        let back = to_reduced_chart(&group, &embed(&group, &w, &u), OMEGA0_TOL).unwrap();
        prop_assert!((back.r - r).abs() < 1e-12 && (back.p - p).abs() < 1e-12);
        prop_assert_eq!(back.vertical.is_some(), axial);
    }

    #[test]
    fn reduced_volume_grows_with_the_window(e1 in 0.2f64..1.0, d1 in 0.1f64..1.0, d2 in 0.1f64..1.0) {
        let group = GroupModel::new(GroupKind::So2Planar);
        let model = HamiltonianModel::for_group(GroupKind::So2Planar, Potential::anharmonic(1.0));
        let inner = reduced_volume(&group, &model, e1, e1 + d1).unwrap();
        let outer = reduced_volume(&group, &model, e1, e1 + d1 + d2).unwrap();
        prop_assert!(outer.value > inner.value);
    }

    #[test]
    fn energy_offset_shifts_levels_and_keeps_periods(h in 0.04f64..0.1, c in -0.5f64..0.5) {
        let pot = Potential::anharmonic(1.0);
        let base = spectrum(GroupKind::So2Planar, 0, h, pot, 2.0);
        let shifted = SectorQuery::new(GroupKind::So2Planar, 0, h, pot.shifted(c))
            .spectrum(c, 2.0 + c, &GridPolicy::default())
            .unwrap();
        for (a, b) in base.eigenvalues.iter().zip(&shifted.eigenvalues) {
            prop_assert!((b - a - c).abs() < 1e-8);
        }
        let m0 = HamiltonianModel::for_group(GroupKind::So2Planar, pot);
        let m1 = HamiltonianModel::for_group(GroupKind::So2Planar, pot.shifted(c));
        let (t0, s0) = period_action(&m0, 1.5).unwrap();
        let (t1, s1) = period_action(&m1, 1.5 + c).unwrap();
        prop_assert!((t0 - t1).abs() < 1e-9 && (s0 - s1).abs() < 1e-9);
    }
}
