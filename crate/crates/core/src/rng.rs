//! Seeded randomness. All stochastic code draws from [`SimRng`] so that a
//! seed reproduces a run bit-for-bit on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geom::{Vec3, EPS};

/// ChaCha with 8 rounds: portable, counter-based, cheap.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the unit sphere (normalized Gaussian triple).
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let g = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = g.try_normalize() {
            return u;
        }
    }
}

/// Uniform direction orthogonal to the unit vector `axis`.
pub fn unit_orthogonal<R: Rng + ?Sized>(rng: &mut R, axis: Vec3) -> Vec3 {
    loop {
        let g = unit_vector(rng);
        let p = g - axis * g.dot(axis);
        if p.norm() > EPS.sqrt() {
            return p / p.norm();
        }
    }
}

/// Uniform point of `[0, 1)^3`.
pub fn unit_cube_point<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    Vec3::new(rng.random(), rng.random(), rng.random())
}
