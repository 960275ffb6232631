//! Time-driven relaxation of an overlapping configuration.
//!
//! Inclusions are unit-mass rigid bodies pushed apart by the contact forces
//! of [`crate::forces`]. Cylinders are thin rods for rotation: moment of
//! inertia `|l|^2 / 6` about any axis orthogonal to `l`, no spin about `l`.
//! Velocities are damped by `beta + gamma_ber + gamma_nh`.
//!
//! Invariants kept by every step: centers in `[0, 1)^3`, half-axis lengths
//! equal to their initial values, angular velocities orthogonal to the axes.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};
use crate::forces::ForceSet;
use crate::geom::Vec3;
use crate::periodic::wrap_point;
use crate::rng::{rng_from_seed, unit_cube_point, unit_vector, SimRng};
use crate::rsa::{schedule, Phase};
use crate::sample::{GenConfig, Provenance, RveSample};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub e_pot: f64,
    pub e_kin: f64,
    pub force_scale: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    VelocityVerlet,
    Trapezoid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MdParams {
    /// Time step; `None` picks `0.05 * min radius`.
    pub dt: Option<f64>,
    /// Viscous damping coefficient at unit force prefactor; the applied
    /// coefficient is `beta * sqrt(force_scale)`, which keeps the damping
    /// ratio of a contact fixed under rescaling.
    pub beta: f64,
    pub alpha_ber: f64,
    pub alpha_nh: f64,
    /// Target kinetic energy `N k_B T / 2` of both thermostats.
    pub target_kinetic: f64,
    /// Absolute stop threshold on the potential energy; `None` uses
    /// `e_stop_rel * E_pot(0)`.
    pub e_stop: Option<f64>,
    pub e_stop_rel: f64,
    /// Consecutive sub-threshold steps before the verification sweep.
    pub stop_window: usize,
    /// Constant force added along every contact force, as a fraction of the
    /// smallest radius, so overlaps end in a gap rather than decaying
    /// towards tangency.
    pub skin: f64,
    pub rescale: bool,
    pub rescale_factor: f64,
    /// Ceiling of the force prefactor, in units of `1 / dt^2`.
    pub max_scale_dt2: f64,
    pub max_steps: usize,
    /// Switch Nosé–Hoover on while the potential energy stagnates.
    pub nh_enabled: bool,
    pub nh_window: usize,
    pub nh_tolerance: f64,
    pub nh_duration: usize,
    pub integrator: Integrator,
    /// Wall-clock cap in seconds (`None`: unlimited).
    pub time_budget: Option<f64>,
    /// Fan the contact sweep out over the rayon pool. Results do not depend
    /// on it: contacts are collected and reduced in a fixed order.
    pub parallel: bool,
}

impl Default for MdParams {
    fn default() -> Self {
        MdParams {
            dt: None,
            beta: 4.0,
            alpha_ber: 0.1,
            alpha_nh: 0.1,
            target_kinetic: 0.0,
            e_stop: None,
            e_stop_rel: 1e-6,
            stop_window: 10,
            skin: 1e-3,
            rescale: true,
            rescale_factor: 2.0,
            max_scale_dt2: 0.5,
            max_steps: 1_000_000,
            nh_enabled: true,
            nh_window: 200,
            nh_tolerance: 1e-3,
            nh_duration: 500,
            integrator: Integrator::VelocityVerlet,
            time_budget: None,
            parallel: false,
        }
    }
}

impl MdParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let nonneg = [
            self.beta,
            self.skin,
            self.alpha_ber,
            self.alpha_nh,
            self.target_kinetic,
            self.nh_tolerance,
        ];
        if nonneg.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(ConfigError::new(
                "damping, thermostat gains and target must be finite and >= 0",
            ));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(ConfigError::new("dt must be positive"));
            }
        }
        if let Some(e) = self.e_stop {
            if !(e.is_finite() && e > 0.0) {
                return Err(ConfigError::new("e_stop must be positive"));
            }
        }
        if !(self.e_stop_rel > 0.0) || !(self.rescale_factor > 1.0) || !(self.max_scale_dt2 > 0.0) {
            return Err(ConfigError::new(
                "e_stop_rel, max_scale_dt2 must be > 0 and rescale_factor > 1",
            ));
        }
        if self.stop_window == 0 || self.max_steps == 0 {
            return Err(ConfigError::new(
                "stop_window and max_steps must be positive",
            ));
        }
        Ok(())
    }
}

/// `N = 3 n_s + 5 n_c`: rods have no spin about their axis.
pub fn degrees_of_freedom(n_s: usize, n_c: usize) -> usize {
    3 * n_s + 5 * n_c
}

pub fn gamma_berendsen(e_kin: f64, params: &MdParams) -> f64 {
    params.alpha_ber * (e_kin - params.target_kinetic)
}

/// Explicit Euler step of the Nosé–Hoover friction; identically zero when
/// the thermostat is off.
pub fn step_gamma_nh(gamma: f64, e_kin: f64, params: &MdParams, active: bool, dt: f64) -> f64 {
    if !active {
        return 0.0;
    }
    gamma + dt * params.alpha_nh * (e_kin - params.target_kinetic)
}

#[derive(Clone, Debug)]
pub struct MdState {
    pub sample: RveSample,
    /// Linear velocities, global order (spheres, then cylinders).
    pub velocity: Vec<Vec3>,
    /// Angular velocities of the cylinders.
    pub omega: Vec<Vec3>,
    pub gamma_nh: f64,
    pub force_scale: f64,
    pub step_count: usize,
    pub trace: Vec<TraceRow>,
    half_lengths: Vec<f64>,
    rng: SimRng,
    nh_left: usize,
    scale_ref: f64,
    forces: Option<ForceSet>,
}

impl MdState {
    pub fn new(sample: RveSample, seed: u64) -> Self {
        let n = sample.len();
        let nc = sample.cylinders.len();
        let half_lengths = sample.cylinders.iter().map(|c| c.half_length()).collect();
        let mut sample = sample;
        for s in &mut sample.spheres {
            s.center = wrap_point(s.center);
        }
        for c in &mut sample.cylinders {
            c.center = wrap_point(c.center);
        }
        MdState {
            sample,
            velocity: vec![Vec3::ZERO; n],
            omega: vec![Vec3::ZERO; nc],
            gamma_nh: 0.0,
            force_scale: 1.0,
            step_count: 0,
            trace: Vec::new(),
            half_lengths,
            rng: rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15),
            nh_left: 0,
            scale_ref: f64::NAN,
            forces: None,
        }
    }

    pub fn n_spheres(&self) -> usize {
        self.sample.spheres.len()
    }

    pub fn degrees_of_freedom(&self) -> usize {
        degrees_of_freedom(self.sample.spheres.len(), self.sample.cylinders.len())
    }

    pub fn min_radius(&self) -> f64 {
        self.sample
            .spheres
            .iter()
            .map(|s| s.radius)
            .chain(self.sample.cylinders.iter().map(|c| c.radius))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn nh_active(&self) -> bool {
        self.nh_left > 0
    }

    /// Potential energy of the current configuration (unscaled forces).
    pub fn potential_energy(&mut self, params: &MdParams) -> f64 {
        self.ensure_forces(params);
        self.forces.as_ref().map_or(0.0, |f| f.potential_energy)
    }

    pub fn contact_count(&mut self, params: &MdParams) -> usize {
        self.ensure_forces(params);
        self.forces.as_ref().map_or(0, |f| f.n_contacts())
    }

    fn ensure_forces(&mut self, params: &MdParams) {
        if self.forces.is_none() {
            self.forces = Some(self.compute_forces(params));
        }
    }

    fn compute_forces(&mut self, params: &MdParams) -> ForceSet {
        let set = self.sample.periodic_set();
        let contacts = if params.parallel {
            set.all_contacts_par()
        } else {
            set.all_contacts()
        };
        let skin = params.skin * self.min_radius();
        set.forces_with_skin(&contacts, &mut self.rng, skin)
    }

    /// Linear and angular accelerations from a force set.
    fn accelerations(&self, fs: &ForceSet) -> (Vec<Vec3>, Vec<Vec3>) {
        let ns = self.n_spheres();
        let lin = fs
            .total_force
            .iter()
            .map(|&f| f * self.force_scale)
            .collect();
        let ang = self
            .sample
            .cylinders
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let u = c.axis_unit();
                let tau = fs.total_torque[ns + k];
                let tau = tau - u * tau.dot(u);
                tau * (self.force_scale * 6.0 / (self.half_lengths[k] * self.half_lengths[k]))
            })
            .collect();
        (lin, ang)
    }

    /// Advance positions by `dt` with velocities `v` and angular velocities `w`.
    fn drift(&mut self, v: &[Vec3], w: &[Vec3], dt: f64) {
        let ns = self.n_spheres();
        for (s, &vi) in self.sample.spheres.iter_mut().zip(v) {
            s.center = wrap_point(s.center + vi * dt);
        }
        for (k, c) in self.sample.cylinders.iter_mut().enumerate() {
            c.center = wrap_point(c.center + v[ns + k] * dt);
            let axis = c.half_axis.rotated(w[k] * dt);
            c.half_axis = axis.try_normalize().unwrap_or(c.axis_unit()) * self.half_lengths[k];
        }
        self.forces = None;
    }

    /// Drop the spin component of every angular velocity.
    fn project_omega(&mut self) {
        for (w, c) in self.omega.iter_mut().zip(&self.sample.cylinders) {
            let u = c.axis_unit();
            *w -= u * w.dot(u);
        }
    }

    fn is_finite(&self) -> bool {
        self.velocity
            .iter()
            .chain(&self.omega)
            .all(|v| v.is_finite())
            && self.sample.spheres.iter().all(|s| s.center.is_finite())
            && self
                .sample
                .cylinders
                .iter()
                .all(|c| c.center.is_finite() && c.half_axis.is_finite())
            && self.gamma_nh.is_finite()
    }
}

/// `sum v^2 / 2 + sum (|l|^2 / 6) w^2 / 2` with unit masses.
pub fn kinetic_energy(state: &MdState) -> f64 {
    let lin: f64 = state.velocity.iter().map(|v| 0.5 * v.norm_squared()).sum();
    let rot: f64 = state
        .omega
        .iter()
        .zip(&state.half_lengths)
        .map(|(w, h)| 0.5 * (h * h / 6.0) * w.norm_squared())
        .sum();
    lin + rot
}

/// Overlapping start: RSA sampling without rejection.
pub fn init_overlapping(config: &GenConfig) -> Result<MdState> {
    let (r_s, r_c) = config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let mut spheres = Vec::with_capacity(config.n_s);
    let mut cylinders = Vec::with_capacity(config.n_c);
    for phase in schedule(config.strategy, config.n_s, config.n_c) {
        match phase {
            Phase::Sphere => spheres.push(crate::geom::Sphere {
                center: unit_cube_point(&mut rng),
                radius: r_s.expect("validated"),
            }),
            Phase::Cylinder => {
                let r = r_c.expect("validated");
                let center = unit_cube_point(&mut rng);
                let half_axis = unit_vector(&mut rng) * (config.aspect_ratio * r);
                cylinders.push(crate::geom::Cylinder {
                    center,
                    radius: r,
                    half_axis,
                });
            }
        }
    }
    let mut sample = RveSample::new(spheres, cylinders, Provenance::Md, config.seed);
    sample.config = Some(config.clone());
    Ok(MdState::new(sample, config.seed))
}

pub fn default_dt(state: &MdState) -> f64 {
    let r = state.min_radius();
    if r.is_finite() {
        0.05 * r
    } else {
        1e-3
    }
}

/// One integration step with time step `dt`.
pub fn md_step(state: &mut MdState, params: &MdParams, dt: f64) -> Result<()> {
    state.ensure_forces(params);
    let fs = state.forces.take().expect("forces computed");
    let e_kin = kinetic_energy(state);
    let e_pot = fs.potential_energy;

    let nh_active = params.nh_enabled && state.nh_left > 0;
    state.gamma_nh = step_gamma_nh(state.gamma_nh, e_kin, params, nh_active, dt);
    let gamma =
        params.beta * state.force_scale.sqrt() + gamma_berendsen(e_kin, params) + state.gamma_nh;

    let (a0, al0) = state.accelerations(&fs);
    match params.integrator {
        Integrator::VelocityVerlet => {
            let half = 0.5 * dt;
            let v_half: Vec<Vec3> = state
                .velocity
                .iter()
                .zip(&a0)
                .map(|(&v, &a)| v + (a - v * gamma) * half)
                .collect();
            let w_half: Vec<Vec3> = state
                .omega
                .iter()
                .zip(&al0)
                .map(|(&w, &a)| w + (a - w * gamma) * half)
                .collect();
            state.drift(&v_half, &w_half, dt);
            let fs1 = state.compute_forces(params);
            let (a1, al1) = state.accelerations(&fs1);
            let denom = 1.0 + half * gamma;
            state.velocity = v_half
                .iter()
                .zip(&a1)
                .map(|(&v, &a)| (v + a * half) / denom)
                .collect();
            state.omega = w_half
                .iter()
                .zip(&al1)
                .map(|(&w, &a)| (w + a * half) / denom)
                .collect();
            state.forces = Some(fs1);
        }
        Integrator::Trapezoid => {
            let v0 = state.velocity.clone();
            let w0 = state.omega.clone();
            let dv0: Vec<Vec3> = v0.iter().zip(&a0).map(|(&v, &a)| a - v * gamma).collect();
            let dw0: Vec<Vec3> = w0.iter().zip(&al0).map(|(&w, &a)| a - w * gamma).collect();
            let saved = state.sample.clone();
            // Predictor.
            let vp: Vec<Vec3> = v0.iter().zip(&dv0).map(|(&v, &d)| v + d * dt).collect();
            let wp: Vec<Vec3> = w0.iter().zip(&dw0).map(|(&w, &d)| w + d * dt).collect();
            state.drift(&v0, &w0, dt);
            let fs1 = state.compute_forces(params);
            let (a1, al1) = state.accelerations(&fs1);
            // Corrector from the saved configuration.
            state.sample = saved;
            let v_avg: Vec<Vec3> = v0.iter().zip(&vp).map(|(&a, &b)| (a + b) * 0.5).collect();
            let w_avg: Vec<Vec3> = w0.iter().zip(&wp).map(|(&a, &b)| (a + b) * 0.5).collect();
            state.drift(&v_avg, &w_avg, dt);
            state.velocity = v0
                .iter()
                .zip(dv0.iter().zip(vp.iter().zip(&a1)))
                .map(|(&v, (&d0, (&p, &a)))| v + (d0 + (a - p * gamma)) * (0.5 * dt))
                .collect();
            state.omega = w0
                .iter()
                .zip(dw0.iter().zip(wp.iter().zip(&al1)))
                .map(|(&w, (&d0, (&p, &a)))| w + (d0 + (a - p * gamma)) * (0.5 * dt))
                .collect();
        }
    }
    state.project_omega();
    state.step_count += 1;
    if !state.is_finite() {
        return Err(Error::BlowUp {
            step: state.step_count,
            dt,
        });
    }

    state.trace.push(TraceRow {
        step: state.step_count,
        e_pot,
        e_kin,
        force_scale: state.force_scale,
    });

    // Nosé–Hoover bookkeeping: a stagnating energy triggers a burst.
    if state.nh_left > 0 {
        state.nh_left -= 1;
        if state.nh_left == 0 {
            state.gamma_nh = 0.0;
        }
    } else if params.nh_enabled && state.trace.len() > params.nh_window && e_pot > 0.0 {
        let past = state.trace[state.trace.len() - 1 - params.nh_window].e_pot;
        if past > 0.0 && ((past - e_pot) / past).abs() < params.nh_tolerance {
            state.nh_left = params.nh_duration;
        }
    }

    // Force rescaling once the energy has halved since the previous rescale.
    if params.rescale && e_pot > 0.0 {
        if state.scale_ref.is_nan() {
            state.scale_ref = e_pot;
        } else if e_pot <= 0.5 * state.scale_ref {
            let cap = params.max_scale_dt2 / (dt * dt);
            state.force_scale = (state.force_scale * params.rescale_factor).min(cap.max(1.0));
            state.scale_ref = e_pot;
        }
    }
    Ok(())
}

/// Outcome details of a successful relaxation.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxReport {
    pub steps: usize,
    pub dt: f64,
    pub e_stop: f64,
    pub initial_energy: f64,
}

/// Integrate until the configuration is free of contacts.
pub fn relax(state: &mut MdState, params: &MdParams) -> Result<RelaxReport> {
    params.validate()?;
    let start = Instant::now();
    let mut dt = params.dt.unwrap_or_else(|| default_dt(state));
    let initial_energy = state.potential_energy(params);
    let mut e_stop = params.e_stop.unwrap_or(params.e_stop_rel * initial_energy);
    let mut below = 0usize;
    let mut halvings = 0;

    loop {
        let e = state.potential_energy(params);
        if e == 0.0 || e < e_stop {
            below += 1;
        } else {
            below = 0;
        }
        if e == 0.0 || below >= params.stop_window {
            if !state.sample.periodic_set().has_contacts() {
                state.sample.provenance = Provenance::Md;
                return Ok(RelaxReport {
                    steps: state.step_count,
                    dt,
                    e_stop,
                    initial_energy,
                });
            }
            e_stop *= 0.1;
            below = 0;
        }
        let over_time = params
            .time_budget
            .is_some_and(|t| start.elapsed().as_secs_f64() > t);
        if state.step_count >= params.max_steps || over_time {
            return Err(Error::NonConvergence {
                steps: state.step_count,
                last_energy: e,
                contacts: state.contact_count(params),
                trace: std::mem::take(&mut state.trace),
            });
        }
        // The trace is kept out of the checkpoint; it only grows.
        let trace = std::mem::take(&mut state.trace);
        let checkpoint = state.clone();
        let trace_len = trace.len();
        state.trace = trace;
        if let Err(err) = md_step(state, params, dt) {
            if matches!(err, Error::BlowUp { .. }) && halvings < 20 {
                let mut trace = std::mem::take(&mut state.trace);
                trace.truncate(trace_len);
                *state = checkpoint;
                state.trace = trace;
                dt *= 0.5;
                halvings += 1;
                continue;
            }
            return Err(err);
        }
    }
}

/// Write the energy trace as CSV (`step,e_pot,e_kin,force_scale`).
pub fn write_trace<W: std::io::Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
