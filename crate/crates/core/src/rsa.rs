//! Random sequential adsorption.
//!
//! Inclusions are drawn one at a time (uniform center in the cell, uniform
//! axis direction) and kept only if they intersect nothing placed before,
//! periodic images included. A phase gives up when one object exhausts its
//! attempt cap or the whole run exceeds its time budget.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geom::{Cylinder, Shape, Sphere};
use crate::periodic::PeriodicSet;
use crate::rng::{rng_from_seed, unit_cube_point, unit_vector, SimRng};
use crate::sample::{GenConfig, Provenance, RveSample, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Sphere,
    Cylinder,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Sphere => "sphere",
            Phase::Cylinder => "cylinder",
        }
    }
}

/// Placement order of `n_s` spheres and `n_c` cylinders under `strategy`.
pub fn schedule(strategy: Strategy, n_s: usize, n_c: usize) -> Vec<Phase> {
    let mut out = Vec::with_capacity(n_s + n_c);
    match strategy {
        Strategy::CylindersFirst => {
            out.extend(std::iter::repeat_n(Phase::Cylinder, n_c));
            out.extend(std::iter::repeat_n(Phase::Sphere, n_s));
        }
        Strategy::SpheresFirst => {
            out.extend(std::iter::repeat_n(Phase::Sphere, n_s));
            out.extend(std::iter::repeat_n(Phase::Cylinder, n_c));
        }
        Strategy::Interleaved => {
            let (mut s, mut c) = (0usize, 0usize);
            while s + c < n_s + n_c {
                // Compare c / n_c with s / n_s without dividing; ties go to cylinders.
                let take_cyl = c < n_c && (s == n_s || c * n_s <= s * n_c);
                if take_cyl {
                    c += 1;
                    out.push(Phase::Cylinder);
                } else {
                    s += 1;
                    out.push(Phase::Sphere);
                }
            }
        }
    }
    out
}

/// Random candidate of the requested phase.
pub fn draw_sphere(rng: &mut SimRng, radius: f64) -> Sphere {
    Sphere {
        center: unit_cube_point(rng),
        radius,
    }
}

pub fn draw_cylinder(rng: &mut SimRng, radius: f64, half_length: f64) -> Cylinder {
    let center = unit_cube_point(rng);
    let half_axis = unit_vector(rng) * half_length;
    Cylinder {
        center,
        radius,
        half_axis,
    }
}

/// Run RSA for `config`. The result satisfies the exact-fraction and
/// non-intersection invariants or is a [`Error::Stagnation`].
pub fn generate(config: &GenConfig) -> Result<RveSample> {
    let (r_s, r_c) = config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let start = Instant::now();
    let mut placed = PeriodicSet::new(Vec::with_capacity(config.n_s + config.n_c));
    let mut spheres = Vec::with_capacity(config.n_s);
    let mut cylinders = Vec::with_capacity(config.n_c);

    let stagnation = |spheres: &Vec<Sphere>, cylinders: &Vec<Cylinder>, phase: Phase, reason| {
        Error::Stagnation {
            placed_spheres: spheres.len(),
            placed_cylinders: cylinders.len(),
            target_spheres: config.n_s,
            target_cylinders: config.n_c,
            stuck_on: phase.name(),
            reason,
        }
    };

    for phase in schedule(config.strategy, config.n_s, config.n_c) {
        let mut attempts = 0u64;
        loop {
            if attempts >= config.max_attempts_per_object {
                return Err(stagnation(
                    &spheres,
                    &cylinders,
                    phase,
                    "attempt cap reached",
                ));
            }
            // The clock is polled sparsely; it is the costliest call here.
            if attempts.is_multiple_of(256) && start.elapsed().as_secs_f64() > config.time_budget {
                return Err(stagnation(
                    &spheres,
                    &cylinders,
                    phase,
                    "time budget exceeded",
                ));
            }
            attempts += 1;
            let shape = match phase {
                Phase::Sphere => Shape::Sphere(draw_sphere(&mut rng, r_s.expect("validated"))),
                Phase::Cylinder => {
                    let r = r_c.expect("validated");
                    Shape::Cylinder(draw_cylinder(&mut rng, r, config.aspect_ratio * r))
                }
            };
            if placed.intersects_any(&shape) {
                continue;
            }
            match shape {
                Shape::Sphere(s) => spheres.push(s),
                Shape::Cylinder(c) => cylinders.push(c),
            }
            placed.push(shape);
            break;
        }
    }

    let mut sample = RveSample::new(spheres, cylinders, Provenance::Rsa, config.seed);
    sample.config = Some(config.clone());
    Ok(sample)
}
