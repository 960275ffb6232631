//! Monte-Carlo overlap volume, independent of the algebraic predicates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Shape;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapEstimate {
    pub volume: f64,
    pub std_err: f64,
    pub hits: u64,
    pub samples: u64,
}

impl OverlapEstimate {
    /// Estimate exceeds `k` standard errors above zero.
    pub fn significant(&self, k: f64) -> bool {
        self.volume > k * self.std_err
    }
}

/// Unbiased estimate of `vol(a ∩ b)` from `n_samples` uniform points in the
/// axis-aligned bounding box of `a`.
pub fn overlap_oracle(a: &Shape, b: &Shape, n_samples: u64, seed: u64) -> OverlapEstimate {
    let n_samples = n_samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = a.center();
    let e = a.aabb_half_extent();
    let box_volume = 8.0 * e.x * e.y * e.z;
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let p = crate::geom::Vec3::new(
            c.x + e.x * rng.random_range(-1.0..1.0),
            c.y + e.y * rng.random_range(-1.0..1.0),
            c.z + e.z * rng.random_range(-1.0..1.0),
        );
        if a.contains(p) && b.contains(p) {
            hits += 1;
        }
    }
    let n = n_samples as f64;
    let p = hits as f64 / n;
    OverlapEstimate {
        volume: p * box_volume,
        std_err: (p * (1.0 - p) / n).sqrt() * box_volume,
        hits,
        samples: n_samples,
    }
}
