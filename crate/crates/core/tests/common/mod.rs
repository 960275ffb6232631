//! Shared pairwise relaxation fixtures.

#![allow(dead_code)]

use rvegen_core::geom::{Cylinder, Sphere, Vec3};
use rvegen_core::intersect::ContactKind;
use rvegen_core::md::{relax, MdParams, MdState};
use rvegen_core::sample::{Provenance, RveSample};

pub fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

pub fn sphere(c: Vec3, r: f64) -> Sphere {
    Sphere::new(c, r).unwrap()
}

pub fn cylinder(c: Vec3, r: f64, half_axis: Vec3) -> Cylinder {
    Cylinder::new(c, r, half_axis).unwrap()
}

/// Qualitative outcome required after relaxation.
#[derive(Clone, Copy, Debug)]
pub enum Expect {
    /// Sphere centers stay on the line `y = z = 0.5`.
    StayOnLine,
    /// Every cylinder keeps its axis direction.
    NoTurn,
    /// Cylinder `i` turns by more than 1e-3 rad.
    Turns(usize),
    /// Cylinder `i` turns, cylinder `j` keeps its axis.
    OnlyTurns(usize, usize),
    /// Both cylinders turn.
    BothTurn,
    /// Only the zero-contact requirement.
    Separates,
}

pub struct Fixture {
    pub name: &'static str,
    pub sample: RveSample,
    /// Kinds the initial configuration must contain.
    pub initial_kinds: Vec<ContactKind>,
    pub expect: Expect,
}

fn fixture(
    name: &'static str,
    spheres: Vec<Sphere>,
    cylinders: Vec<Cylinder>,
    kinds: &[ContactKind],
    expect: Expect,
) -> Fixture {
    Fixture {
        name,
        sample: RveSample::new(spheres, cylinders, Provenance::Manual, 0),
        initial_kinds: kinds.to_vec(),
        expect,
    }
}

pub fn fixtures() -> Vec<Fixture> {
    use ContactKind::*;
    let c = v(0.5, 0.5, 0.5);
    let z_cyl = cylinder(c, 0.05, v(0.0, 0.0, 0.15));
    vec![
        fixture(
            "two spheres",
            vec![
                sphere(v(0.42, 0.5, 0.5), 0.1),
                sphere(v(0.6, 0.5, 0.5), 0.1),
            ],
            vec![],
            &[SS],
            Expect::StayOnLine,
        ),
        fixture(
            "sphere beside cylinder, symmetric",
            vec![sphere(v(0.62, 0.5, 0.5), 0.1)],
            vec![z_cyl],
            &[SC2],
            Expect::NoTurn,
        ),
        fixture(
            "sphere beside cylinder, off-center",
            vec![sphere(v(0.62, 0.5, 0.58), 0.1)],
            vec![z_cyl],
            &[SC2],
            Expect::Turns(0),
        ),
        fixture(
            "sphere over base, on axis",
            vec![sphere(v(0.5, 0.5, 0.63), 0.1)],
            vec![z_cyl],
            &[SC2],
            Expect::Separates,
        ),
        fixture(
            "sphere on base face",
            vec![sphere(v(0.52, 0.5, 0.7), 0.06)],
            vec![cylinder(c, 0.08, v(0.0, 0.0, 0.15))],
            &[SC3],
            Expect::Separates,
        ),
        fixture(
            "sphere on base rim",
            vec![sphere(v(0.59, 0.5, 0.69), 0.07)],
            vec![z_cyl],
            &[SC4],
            Expect::Separates,
        ),
        fixture(
            "crossed cylinders, symmetric",
            vec![],
            vec![
                cylinder(v(0.5, 0.5, 0.45), 0.06, v(0.15, 0.0, 0.0)),
                cylinder(v(0.5, 0.5, 0.55), 0.06, v(0.0, 0.15, 0.0)),
            ],
            &[CC1],
            Expect::NoTurn,
        ),
        fixture(
            "crossed cylinders, one off-center",
            vec![],
            vec![
                cylinder(v(0.5, 0.5, 0.45), 0.06, v(0.15, 0.0, 0.0)),
                cylinder(v(0.5, 0.58, 0.55), 0.06, v(0.0, 0.15, 0.0)),
            ],
            &[CC1],
            Expect::OnlyTurns(1, 0),
        ),
        fixture(
            "crossed cylinders, both off-center",
            vec![],
            vec![
                cylinder(v(0.5, 0.5, 0.45), 0.06, v(0.15, 0.0, 0.0)),
                cylinder(v(0.58, 0.58, 0.55), 0.06, v(0.0, 0.15, 0.0)),
            ],
            &[CC1],
            Expect::BothTurn,
        ),
        fixture(
            "base against side, coplanar axes",
            vec![],
            vec![z_cyl, cylinder(v(0.69, 0.5, 0.55), 0.05, v(0.15, 0.0, 0.0))],
            &[CD1],
            Expect::Separates,
        ),
        fixture(
            "parallel axes, staggered",
            vec![],
            vec![z_cyl, cylinder(v(0.58, 0.5, 0.62), 0.05, v(0.0, 0.0, 0.15))],
            &[CC1],
            Expect::Separates,
        ),
        fixture(
            "base against side, skew axes",
            vec![],
            vec![
                z_cyl,
                cylinder(v(0.69, 0.52, 0.55), 0.05, v(0.15, 0.0, 0.0)),
            ],
            &[CD1],
            Expect::Separates,
        ),
        fixture(
            "base against side, tilted",
            vec![],
            vec![
                z_cyl,
                cylinder(
                    v(0.5, 0.5, 0.5)
                        + v(1.0, 0.3, 0.2).try_normalize().unwrap() * 0.19
                        + v(0.0, 0.0, 0.05),
                    0.05,
                    v(1.0, 0.3, 0.2).try_normalize().unwrap() * 0.15,
                ),
            ],
            &[CD1],
            Expect::Separates,
        ),
        fixture(
            "bases crossing",
            vec![],
            vec![z_cyl, cylinder(v(0.69, 0.5, 0.65), 0.05, v(0.15, 0.0, 0.0))],
            &[],
            Expect::Separates,
        ),
        fixture(
            "axes crossing inside",
            vec![],
            vec![z_cyl, cylinder(v(0.5, 0.5, 0.52), 0.05, v(0.15, 0.0, 0.0))],
            &[CC1],
            Expect::Separates,
        ),
    ]
}

pub fn angle(a: Vec3, b: Vec3) -> f64 {
    let a = a.try_normalize().unwrap();
    let b = b.try_normalize().unwrap();
    a.cross(b).norm().atan2(a.dot(b))
}

pub struct FixtureOutcome {
    pub name: &'static str,
    pub kinds_ok: bool,
    pub relaxed: bool,
    pub steps: usize,
    pub predicate_ok: bool,
    pub detail: String,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.kinds_ok && self.relaxed && self.predicate_ok
    }
}

const TURN: f64 = 1e-3;
const KEEP: f64 = 1e-6;

pub fn run_fixture(f: &Fixture) -> FixtureOutcome {
    let initial_kinds: Vec<ContactKind> = f
        .sample
        .periodic_set()
        .all_contacts()
        .iter()
        .map(|c| c.kind())
        .collect();
    let kinds_ok =
        !initial_kinds.is_empty() && f.initial_kinds.iter().all(|k| initial_kinds.contains(k));
    let mut st = MdState::new(f.sample.clone(), 1);
    let params = MdParams {
        max_steps: 100_000,
        ..MdParams::default()
    };
    let result = relax(&mut st, &params);
    let relaxed = result.is_ok() && !st.sample.periodic_set().has_contacts();
    let turn = |i: usize| {
        angle(
            f.sample.cylinders[i].half_axis,
            st.sample.cylinders[i].half_axis,
        )
    };
    let turns: Vec<f64> = (0..f.sample.cylinders.len()).map(turn).collect();
    let predicate_ok = match f.expect {
        Expect::StayOnLine => st
            .sample
            .spheres
            .iter()
            .all(|s| (s.center.y - 0.5).abs() <= KEEP && (s.center.z - 0.5).abs() <= KEEP),
        Expect::NoTurn => turns.iter().all(|&t| t <= KEEP),
        Expect::Turns(i) => turns[i] > TURN,
        Expect::OnlyTurns(i, j) => turns[i] > TURN && turns[j] <= KEEP,
        Expect::BothTurn => turns.iter().all(|&t| t > TURN),
        Expect::Separates => true,
    };
    FixtureOutcome {
        name: f.name,
        kinds_ok,
        relaxed,
        steps: st.step_count,
        predicate_ok,
        detail: format!(
            "initial {initial_kinds:?}, turns {turns:?}, result {:?}",
            result.map(|r| r.steps).map_err(|e| e.to_string())
        ),
    }
}
