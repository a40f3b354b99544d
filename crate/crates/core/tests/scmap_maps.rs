use polysle::driving::from_driver_fn;
use polysle::geometry::CornerPosition;
use polysle::scmap::{corner_trajectory, polygon_snapshot};
use polysle::verify::turning_and_straightness;
use polysle::{Complex64 as C, CorrectedMap, DriverOptions, PrevertexConfig, QuadratureSettings, ScFamily};
use proptest::prelude::*;

fn family(cfg: &PrevertexConfig) -> ScFamily {
    ScFamily::new(cfg.betas(), QuadratureSettings::default()).unwrap()
}

#[test]
fn square_snapshot_has_four_corners() {
    let cfg = PrevertexConfig::new(vec![-2.0, -1.0, 1.0, 2.0], vec![0.5; 4], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.01, 1e-3, |_| 0.0, &DriverOptions::default()).unwrap();
    let snap = polygon_snapshot(&path, &family(&cfg), 0).unwrap();
    assert!(snap.closed && snap.planar);
    assert_eq!(snap.finite_positions().len(), 4);
    assert!((snap.turning_sum() - 2.0).abs() < 1e-15);
    let p = snap.finite_positions();
    let sides: Vec<f64> = (0..4).map(|k| (p[(k + 1) % 4] - p[k]).norm()).collect();
    // a rectangle: opposite sides agree and the diagonals are equal
    assert!((sides[0] - sides[2]).abs() < 1e-8, "{sides:?}");
    assert!((sides[1] - sides[3]).abs() < 1e-8, "{sides:?}");
    assert!(((p[2] - p[0]).norm() - (p[3] - p[1]).norm()).abs() < 1e-8);
}

#[test]
fn flat_snapshot_is_the_prevertices() {
    let cfg = PrevertexConfig::new(vec![-1.0, 0.5, 3.0], vec![0.0; 3], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.05, 1e-3, |t| 0.3 * t, &DriverOptions::default()).unwrap();
    let fam = family(&cfg);
    for index in [0, 20, 50] {
        let snap = polygon_snapshot(&path, &fam, index).unwrap();
        for (corner, zk) in snap.corners.iter().zip(&path.states[index].z) {
            match corner.position {
                CornerPosition::Finite(p) => assert!((p - C::new(*zk, 0.0)).norm() < 1e-14),
                CornerPosition::AtInfinity => panic!("finite corner expected"),
            }
        }
    }
}

#[test]
fn corners_at_infinity_are_marked() {
    let cfg = PrevertexConfig::new(vec![-1.0, 1.0], vec![1.0, 1.0], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.01, 1e-3, |_| 0.0, &DriverOptions::default()).unwrap();
    let snap = polygon_snapshot(&path, &family(&cfg), 3).unwrap();
    assert!(snap.corners.iter().all(|c| c.position == CornerPosition::AtInfinity));
    assert!(corner_trajectory(&path, &family(&cfg), 0).is_err());
}

#[test]
fn flat_corner_velocity_is_loewner_speed() {
    let cfg = PrevertexConfig::new(vec![-1.0, 2.0], vec![0.0, 0.0], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.1, 1e-3, |t| (4.0 * t).sin() * 0.2, &DriverOptions::default()).unwrap();
    let fam = family(&cfg);
    for l in 0..2 {
        let traj = corner_trajectory(&path, &fam, l).unwrap();
        for v in &traj.velocities {
            let i = path.index_of_time(v.time).unwrap();
            let s = &path.states[i];
            let exact = 2.0 / (s.z[l] - s.w);
            assert!((v.velocity - C::new(exact, 0.0)).norm() < 1e-8 * exact.abs(), "{v:?}");
        }
    }
}

#[test]
fn mirror_corners_move_symmetrically() {
    let cfg = PrevertexConfig::new(vec![-1.0, 1.0], vec![1.0 / 3.0, 1.0 / 3.0], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.1, 1e-3, |_| 0.0, &DriverOptions::default()).unwrap();
    let fam = family(&cfg);
    let phase = fam.evaluator(cfg.prevertices()).base_phase().conj();
    let left = corner_trajectory(&path, &fam, 0).unwrap();
    let right = corner_trajectory(&path, &fam, 1).unwrap();
    assert!(!left.velocities.is_empty());
    for (a, b) in left.velocities.iter().zip(&right.velocities) {
        // reflection in the perpendicular bisector of the base side
        let (u, v) = (a.velocity * phase, b.velocity * phase);
        assert!((u + v.conj()).norm() < 1e-9 * u.norm(), "{u} {v}");
        assert!(u.norm() > 1e-3);
    }
}

#[test]
fn generic_corner_quotients_converge() {
    let cfg = PrevertexConfig::new(vec![-1.5, -0.5, 1.0], vec![0.25, 0.25, 0.5], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.1, 1e-3, |t| 0.2 * (5.0 * t).sin(), &DriverOptions::default()).unwrap();
    let fam = family(&cfg);
    for l in 0..3 {
        for v in corner_trajectory(&path, &fam, l).unwrap().velocities {
            let e_h = (v.quotients[1] - v.quotients[2]).norm();
            let e_2h = (v.quotients[0] - v.quotients[1]).norm();
            assert!((e_2h / e_h - 4.0).abs() < 0.1, "{v:?}");
            assert!(v.relative_change < 1e-3);
        }
    }
}

#[test]
fn flat_corrected_map_is_identity() {
    let cfg = PrevertexConfig::new(vec![-1.0, 1.0], vec![0.0, 0.0], 3.0).unwrap();
    let path = polysle::driving::simulate_driver(&cfg, 0.05, 1e-3, 8).unwrap();
    let fam = family(&cfg);
    for s in path.states.iter().step_by(7) {
        let map = CorrectedMap {
            evaluator: fam.evaluator(&s.z),
            correction: s.correction,
        };
        for z in [C::new(0.2, 0.3), C::new(s.w, 0.0), C::new(-3.0, 1.0)] {
            assert!((map.eval(z).unwrap() - z).norm() < 1e-14);
        }
    }
}

#[test]
fn snapshot_after_collision_is_refused() {
    let cfg = PrevertexConfig::new(vec![-1.0, 0.1], vec![0.5, 0.5], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.1, 1e-3, |t| 3.0 * t, &DriverOptions::default()).unwrap();
    assert!(path.sigma.is_some());
    let last = path.states.len() - 1;
    assert!(polygon_snapshot(&path, &family(&cfg), last).is_err());
    assert!(polygon_snapshot(&path, &family(&cfg), last + 5).is_err());
}

fn sorted_config(raw: &[f64], betas: &[f64]) -> Option<PrevertexConfig> {
    let mut z: Vec<f64> = raw.to_vec();
    z.sort_by(f64::total_cmp);
    if z.windows(2).any(|w| w[1] - w[0] < 0.2) || z.iter().any(|v| v.abs() < 0.2) {
        return None;
    }
    if z[0] > 0.0 || z[z.len() - 1] < 0.0 {
        return None;
    }
    PrevertexConfig::new(z, betas.to_vec(), 2.0).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sides_are_straight_and_turn_by_beta(
        raw in proptest::collection::vec(-4.0f64..4.0, 3),
        betas in proptest::collection::vec(-0.9f64..0.9, 3),
    ) {
        if let Some(cfg) = sorted_config(&raw, &betas) {
            let fam = family(&cfg);
            let (straight, turning) = turning_and_straightness(&fam.evaluator(cfg.prevertices())).unwrap();
            prop_assert!(straight <= 1e-8, "{}", straight);
            prop_assert!(turning <= 1e-6, "{}", turning);
        }
    }

    #[test]
    fn log_derivative_matches_finite_difference(
        x in -3.0f64..3.0, y in 0.3f64..3.0,
        betas in proptest::collection::vec(-0.9f64..0.9, 2),
    ) {
        let cfg = PrevertexConfig::new(vec![-1.0, 1.5], betas, 2.0).unwrap();
        let fam = family(&cfg);
        let ev = fam.evaluator(cfg.prevertices());
        let z = C::new(x, y);
        let h = 1e-5;
        let fd = ((ev.sc_deriv(z + h).unwrap() / ev.sc_deriv(z - h).unwrap()).ln()) / (2.0 * h);
        let exact = ev.sc_log_deriv_sum(z).unwrap();
        prop_assert!((fd - exact).norm() <= 1e-8 * exact.norm().max(1.0));
    }
}
