//! Seeded Brownian increments with a fixed stream layout.
//!
//! Stream 0 of a ChaCha8 generator seeded from the 64-bit seed yields one
//! standard normal per nominal step, in step order. When a nominal step is
//! refined, the extra normals for the Brownian bridge come from stream
//! `step + 1` of the same seed, consumed in depth-first order of the
//! refinement tree. Refining one step therefore never shifts the increments
//! of any other step.

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Source of standard normal draws for a driver simulation.
pub trait BrownianSource {
    /// Normal draw for nominal step `step`; steps are requested in order.
    fn step_normal(&mut self, step: u64) -> f64;
    /// Normal draw used to split the increment of nominal step `step`.
    fn bridge_normal(&mut self, step: u64) -> f64;
}

pub struct SeededNoise {
    seed: u64,
    main: ChaCha8Rng,
    bridge: ChaCha8Rng,
    bridge_step: Option<u64>,
}

impl SeededNoise {
    pub fn new(seed: u64) -> Self {
        SeededNoise {
            seed,
            main: ChaCha8Rng::seed_from_u64(seed),
            bridge: ChaCha8Rng::seed_from_u64(seed),
            bridge_step: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl BrownianSource for SeededNoise {
    fn step_normal(&mut self, _step: u64) -> f64 {
        self.main.sample(StandardNormal)
    }

    fn bridge_normal(&mut self, step: u64) -> f64 {
        if self.bridge_step != Some(step) {
            self.bridge.set_stream(step.wrapping_add(1));
            self.bridge.set_word_pos(0);
            self.bridge_step = Some(step);
        }
        self.bridge.sample(StandardNormal)
    }
}

/// Raw Brownian path `B_0 = 0, B_{k+1} = B_k + √dt ξ_k` on `steps` nominal
/// steps, using the same draws a driver simulation with this seed uses.
pub fn brownian_path(seed: u64, dt: f64, steps: usize) -> Vec<f64> {
    let mut noise = SeededNoise::new(seed);
    let root = dt.sqrt();
    let mut path = Vec::with_capacity(steps + 1);
    let mut b = 0.0;
    path.push(b);
    for k in 0..steps {
        b += root * noise.step_normal(k as u64);
        path.push(b);
    }
    path
}

/// Replays a fixed list of standard normals, one per nominal step. Bridge
/// draws come from a seeded generator.
pub struct ReplayNoise<'a> {
    normals: &'a [f64],
    bridge: SeededNoise,
}

impl<'a> ReplayNoise<'a> {
    pub fn new(normals: &'a [f64], bridge_seed: u64) -> Self {
        ReplayNoise {
            normals,
            bridge: SeededNoise::new(bridge_seed),
        }
    }
}

impl BrownianSource for ReplayNoise<'_> {
    fn step_normal(&mut self, step: u64) -> f64 {
        self.normals.get(step as usize).copied().unwrap_or(0.0)
    }

    fn bridge_normal(&mut self, step: u64) -> f64 {
        self.bridge.bridge_normal(step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let a = brownian_path(42, 1e-3, 100);
        let b = brownian_path(42, 1e-3, 100);
        assert_eq!(a, b);
        assert_ne!(a, brownian_path(43, 1e-3, 100));
    }

    #[test]
    fn bridge_draws_do_not_disturb_the_main_stream() {
        let mut plain = SeededNoise::new(7);
        let mut mixed = SeededNoise::new(7);
        for step in 0..50u64 {
            if step % 7 == 3 {
                for _ in 0..5 {
                    mixed.bridge_normal(step);
                }
            }
            assert_eq!(plain.step_normal(step).to_bits(), mixed.step_normal(step).to_bits());
        }
    }

    #[test]
    fn bridge_streams_are_per_step() {
        let mut a = SeededNoise::new(11);
        let mut b = SeededNoise::new(11);
        let x = a.bridge_normal(5);
        b.bridge_normal(2);
        assert_eq!(x.to_bits(), b.bridge_normal(5).to_bits());
    }

    #[test]
    fn increments_look_standard_normal() {
        let path = brownian_path(1, 1.0, 20_000);
        let n = 20_000.0;
        let incs: Vec<f64> = path.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = incs.iter().sum::<f64>() / n;
        let var = incs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
    }
}
