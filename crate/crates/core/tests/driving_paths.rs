use polysle::driving::{
    collision_time, from_driver_fn, rescale_to_rho_time, simulate_driver, simulate_driver_with,
    simulate_metric_driver, step_driver,
};
use polysle::noise::{brownian_path, ReplayNoise, SeededNoise};
use polysle::{Complex64 as C, DriverOptions, DrivingPath, DrivingState, PrevertexConfig, TimeParam};
use proptest::prelude::*;

fn state(w: f64, z: &[f64]) -> DrivingState {
    DrivingState {
        t: 0.0,
        w,
        z: z.to_vec(),
        correction: C::new(0.0, 0.0),
        clock: 0.0,
    }
}

#[test]
fn single_step_by_hand() {
    let cfg = PrevertexConfig::from_rhos(vec![2.0], &[1.0], 2.0).unwrap();
    let next = step_driver(&state(0.0, &[2.0]), &cfg, 0.01, 0.0, 0.1).unwrap();
    assert!((next.w + 0.005).abs() < 1e-15);
    assert!((next.z[0] - 2.01).abs() < 1e-15);
    assert_eq!(next.t, 0.01);

    let sym = PrevertexConfig::new(vec![-1.0, 1.0], vec![0.3, 0.3], 3.0).unwrap();
    let next = step_driver(&state(0.0, &[-1.0, 1.0]), &sym, 0.01, 0.0, 0.1).unwrap();
    assert_eq!(next.w, 0.0);

    let flat = PrevertexConfig::new(vec![-1.0, 1.0], vec![0.0, 0.0], 3.0).unwrap();
    let next = step_driver(&state(0.2, &[-1.0, 1.0]), &flat, 0.01, 0.07, 0.1).unwrap();
    assert_eq!(next.w, 0.2 + 3.0f64.sqrt() * 0.07);

    assert!(step_driver(&state(0.95, &[-1.0, 1.0]), &flat, 0.01, 0.0, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_rho_is_scaled_brownian_motion(seed in any::<u64>(), kappa in 0.5f64..8.0, z1 in 0.5f64..3.0) {
        let cfg = PrevertexConfig::new(vec![-z1, 2.0 * z1], vec![0.0, 0.0], kappa).unwrap();
        let path = simulate_driver(&cfg, 0.05, 1e-3, seed).unwrap();
        let raw = brownian_path(seed, 1e-3, path.len() - 1);
        for (s, b) in path.states.iter().zip(&raw) {
            prop_assert_eq!(s.w, kappa.sqrt() * b);
        }
    }
}

#[test]
fn force_points_keep_their_side() {
    let cfg = PrevertexConfig::new(vec![-1.0, -0.4, 0.8], vec![0.4, -0.3, 0.6], 3.0).unwrap();
    for seed in 0..40 {
        let path = simulate_driver(&cfg, 0.3, 1e-3, seed).unwrap();
        let sigma = path.sigma.unwrap_or(f64::INFINITY);
        for s in path.states.iter().filter(|s| s.t < sigma) {
            assert!(s.z[0] < s.w && s.z[1] < s.w && s.z[2] > s.w, "seed {seed} t {}", s.t);
        }
    }
}

#[test]
fn clock_increases_before_collision() {
    let cfg = PrevertexConfig::new(vec![-1.0, 1.0], vec![0.5, 0.5], 4.0).unwrap();
    let path = simulate_driver(&cfg, 0.05, 1e-3, 11).unwrap();
    assert!(path.states.windows(2).all(|p| p[1].clock > p[0].clock));
}

#[test]
fn strong_order_at_least_one_half() {
    let cfg = PrevertexConfig::new(vec![-2.0, 2.0], vec![0.5, -0.25], 1.0).unwrap();
    let opts = DriverOptions {
        track_correction: false,
        collision_tol: Some(0.05),
        ..DriverOptions::default()
    };
    let (t_end, coarse): (f64, f64) = (0.2, 1e-2);
    let levels = [1usize, 2, 4];
    let mut errors = vec![0.0; levels.len()];
    let mut used = 0;
    for seed in 0..40u64 {
        let fine_steps = (t_end / coarse).round() as usize * 16;
        let mut rng = SeededNoise::new(seed);
        let fine: Vec<f64> = (0..fine_steps)
            .map(|k| polysle::noise::BrownianSource::step_normal(&mut rng, k as u64))
            .collect();
        let run = |refine: usize| -> DrivingPath {
            let group = 16 / refine;
            let normals: Vec<f64> = fine
                .chunks(group)
                .map(|c| c.iter().sum::<f64>() / (group as f64).sqrt())
                .collect();
            let dt = coarse / refine as f64;
            simulate_driver_with(&cfg, t_end, dt, seed, &mut ReplayNoise::new(&normals, seed), &opts).unwrap()
        };
        let reference = run(16);
        let paths: Vec<DrivingPath> = levels.iter().map(|&r| run(r)).collect();
        if reference.sigma.is_some() || paths.iter().any(|p| p.sigma.is_some()) {
            continue;
        }
        used += 1;
        let w_ref = reference.states.last().unwrap().w;
        for (e, p) in errors.iter_mut().zip(&paths) {
            *e += (p.states.last().unwrap().w - w_ref).abs();
        }
    }
    assert!(used >= 30);
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(order >= 0.5, "{errors:?}");
    }
}

#[test]
fn collision_time_of_constructed_paths() {
    let far = PrevertexConfig::new(vec![100.0], vec![0.0], 2.0).unwrap();
    let path = simulate_driver(&far, 0.1, 1e-3, 3).unwrap();
    assert_eq!(collision_time(&path), None);

    let mut states: Vec<DrivingState> = (0..20)
        .map(|k| DrivingState {
            t: k as f64 * 0.1,
            ..state(0.0, &[1.0])
        })
        .collect();
    for s in states.iter_mut().skip(13) {
        s.z[0] = 0.0;
    }
    let constructed = DrivingPath {
        config: None,
        kappa: 2.0,
        states,
        sigma: None,
        seed: 0,
        dt: 0.1,
        collision_tol: 1e-3,
        time_param: TimeParam::Capacity,
        tracks_correction: false,
    };
    assert_eq!(collision_time(&constructed), Some(1.3));
}

fn sigma_sample(dt: f64, seeds: std::ops::Range<u64>) -> Vec<f64> {
    let cfg = PrevertexConfig::new(vec![1.0], vec![0.0], 8.0).unwrap();
    let opts = DriverOptions {
        track_correction: false,
        collision_tol: Some(0.02),
        ..DriverOptions::default()
    };
    let mut out: Vec<f64> = seeds
        .map(|s| {
            simulate_driver_with(&cfg, 3.0, dt, s, &mut SeededNoise::new(s), &opts)
                .unwrap()
                .sigma
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn collision_law_survives_refinement() {
    let coarse = sigma_sample(1e-3, 0..400);
    let fine = sigma_sample(1e-4, 1000..1400);
    let finite = coarse.iter().filter(|s| s.is_finite()).count();
    assert!(finite > 150, "{finite}");
    // two-sample Kolmogorov–Smirnov at the 1% level
    let mut ks: f64 = 0.0;
    for &x in coarse.iter().chain(&fine).filter(|x| x.is_finite()) {
        let fa = coarse.partition_point(|&v| v <= x) as f64 / coarse.len() as f64;
        let fb = fine.partition_point(|&v| v <= x) as f64 / fine.len() as f64;
        ks = ks.max((fa - fb).abs());
    }
    assert!(ks < 1.63 * (2.0 / 400.0f64).sqrt(), "KS {ks}");
}

#[test]
fn flat_metric_is_brownian_with_rescaled_time() {
    let cfg = PrevertexConfig::new(vec![-5.0, 5.0], vec![0.0, 0.0], 2.0).unwrap();
    let mut stats = polysle::verify::EnsembleStats::new();
    for seed in 0..2000 {
        let path = simulate_metric_driver(&cfg, 0.2, 1e-3, seed, 1.0).unwrap();
        let resc = rescale_to_rho_time(&path).unwrap();
        assert!((resc.end_time() - 0.1).abs() < 1e-12);
        stats.push(resc.driver_at(0.1).unwrap().powi(2));
    }
    // Var W at capacity time t is κ t
    assert!((stats.mean - 0.2).abs() < 3.0 * stats.se(), "{} ± {}", stats.mean, stats.se());
}

#[test]
fn deterministic_driver_path_tracks_force_points() {
    let cfg = PrevertexConfig::new(vec![-1.0, 2.0], vec![0.5, 0.5], 2.0).unwrap();
    let path = from_driver_fn(&cfg, 0.1, 1e-3, |_| 0.0, &DriverOptions::default()).unwrap();
    let last = path.states.last().unwrap();
    // with W ≡ 0, Z² grows by 4t
    assert!((last.z[0] + (1.0f64 + 0.4).sqrt()).abs() < 1e-10);
    assert!((last.z[1] - (4.0f64 + 0.4).sqrt()).abs() < 1e-10);
}
