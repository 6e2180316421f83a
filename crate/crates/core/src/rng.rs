//! Reproducible random streams.
//!
//! Every independent unit of work (a Monte-Carlo trial, an optimizer restart, a
//! conjecture sample) draws from its own ChaCha8 stream selected by `(seed, index)`,
//! so results do not depend on how the work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream number `index` under the base `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard normal variates by the Box–Muller transform. Each pair of uniforms yields
/// two variates; the second is cached for the next call.
#[derive(Debug, Default, Clone)]
pub struct BoxMuller {
    spare: Option<f64>,
}

impl BoxMuller {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Uniform point in the interior of the simplex `{x >= 0, sum x = total}` restricted to
/// `len` coordinates (normalized exponential draws).
pub fn simplex_point<R: Rng + ?Sized>(rng: &mut R, len: usize, total: f64) -> Vec<f64> {
    let draws: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|d| total * d / sum).collect()
}
