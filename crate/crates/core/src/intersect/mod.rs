//! Algebraic intersection detection and classification for spheres,
//! flat-capped cylinders and disks.
//!
//! Every routine reports not only whether two shapes overlap but which
//! surfaces are involved (the [`ContactKind`]) together with the scalars
//! and points the contact force law needs. Touching shapes (equality of
//! distances) are not in contact.
//!
//! Cylinder pairs are resolved through the skew-axis argument: either the
//! feet of the common perpendicular lie inside both cylinders (curved faces
//! cross, [`ContactKind::CC1`]) or a base disk of one cylinder meets the other
//! cylinder, which is decided by [`cylinder_disk`] and [`disk_disk`].

mod oracle;

pub use oracle::{overlap_oracle, OverlapEstimate};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geom::{cylinder_bases, BaseEnd, Cylinder, Disk, Shape, Sphere, Vec3, EPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactKind {
    SS,
    SC1,
    SC2,
    SC3,
    SC4,
    CC1,
    CD1,
    CD2,
    CD3,
    D1,
    D2,
}

impl ContactKind {
    pub const ALL: [ContactKind; 11] = [
        ContactKind::SS,
        ContactKind::SC1,
        ContactKind::SC2,
        ContactKind::SC3,
        ContactKind::SC4,
        ContactKind::CC1,
        ContactKind::CD1,
        ContactKind::CD2,
        ContactKind::CD3,
        ContactKind::D1,
        ContactKind::D2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ContactKind::SS => "ss",
            ContactKind::SC1 => "sc1",
            ContactKind::SC2 => "sc2",
            ContactKind::SC3 => "sc3",
            ContactKind::SC4 => "sc4",
            ContactKind::CC1 => "cc1",
            ContactKind::CD1 => "cd1",
            ContactKind::CD2 => "cd2",
            ContactKind::CD3 => "cd3",
            ContactKind::D1 => "d1",
            ContactKind::D2 => "d2",
        }
    }
}

impl fmt::Display for ContactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContactKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ContactKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown contact kind {s:?}"))
    }
}

/// Participant of a pairwise routine, in argument order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }
}

/// Geometric record of one classified contact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contact {
    pub kind: ContactKind,
    pub detail: ContactDetail,
}

/// Per-family payload. Shapes are stored by value so the force law needs
/// nothing beyond the contact itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContactDetail {
    SphereSphere {
        first: Sphere,
        second: Sphere,
        distance: f64,
    },
    /// `x`: signed abscissa of the sphere center along the axis; `l`: its
    /// distance to the axis line.
    SphereCylinder {
        sphere: Sphere,
        cylinder: Cylinder,
        x: f64,
        l: f64,
    },
    CylinderCylinder {
        first: Cylinder,
        second: Cylinder,
        rho: f64,
        t1: f64,
        t2: f64,
        pt1: Vec3,
        pt2: Vec3,
        /// Unit common normal of the axes (non-parallel case) or the shared
        /// axis direction (parallel case).
        normal: Vec3,
        parallel: bool,
    },
    /// `a`: axis/plane piercing point (axial parameter `t`, `None` when the
    /// axis is parallel to the disk plane), `pt_c`: disk point tested against
    /// the cylinder, `b`: its projection on the axis at abscissa `x`.
    CylinderDisk {
        cylinder: Cylinder,
        disk: Disk,
        /// Which participant of the enclosing call is the cylinder.
        cylinder_side: Side,
        disk_base: Option<BaseEnd>,
        a: Option<Vec3>,
        t: Option<f64>,
        pt_c: Vec3,
        b: Vec3,
        x: f64,
    },
    DiskDisk {
        first: Disk,
        second: Disk,
        first_base: Option<BaseEnd>,
        second_base: Option<BaseEnd>,
        pt: Vec3,
    },
}

impl Contact {
    /// Overlap depth along the force direction where the family has a natural one.
    pub fn depth(&self) -> Option<f64> {
        match self.detail {
            ContactDetail::SphereSphere {
                first,
                second,
                distance,
            } => Some(first.radius + second.radius - distance),
            ContactDetail::CylinderCylinder {
                first, second, rho, ..
            } if self.kind == ContactKind::CC1 => Some(first.radius + second.radius - rho),
            _ => None,
        }
    }

    /// Swap participant roles, so that a record produced for `(a, b)` reads
    /// as produced for `(b, a)`. Sphere/cylinder contacts keep the sphere as
    /// first participant and are returned unchanged.
    pub fn swapped(self) -> Contact {
        let detail = match self.detail {
            ContactDetail::SphereSphere {
                first,
                second,
                distance,
            } => ContactDetail::SphereSphere {
                first: second,
                second: first,
                distance,
            },
            d @ ContactDetail::SphereCylinder { .. } => d,
            ContactDetail::CylinderCylinder {
                first,
                second,
                rho,
                t1,
                t2,
                pt1,
                pt2,
                normal,
                parallel,
            } => ContactDetail::CylinderCylinder {
                first: second,
                second: first,
                rho,
                t1: t2,
                t2: t1,
                pt1: pt2,
                pt2: pt1,
                normal: -normal,
                parallel,
            },
            mut d @ ContactDetail::CylinderDisk { .. } => {
                if let ContactDetail::CylinderDisk { cylinder_side, .. } = &mut d {
                    *cylinder_side = cylinder_side.other();
                }
                d
            }
            ContactDetail::DiskDisk {
                first,
                second,
                first_base,
                second_base,
                pt,
            } => ContactDetail::DiskDisk {
                first: second,
                second: first,
                first_base: second_base,
                second_base: first_base,
                pt,
            },
        };
        let kind = match (self.kind, self.detail) {
            (ContactKind::D1, ContactDetail::DiskDisk { .. }) => ContactKind::D2,
            (ContactKind::D2, ContactDetail::DiskDisk { .. }) => ContactKind::D1,
            (k, _) => k,
        };
        Contact { kind, detail }
    }
}

/// Sphere/sphere: contact iff the center distance is below the radius sum.
pub fn sphere_sphere(s1: &Sphere, s2: &Sphere) -> Option<Contact> {
    let d = (s1.center - s2.center).norm();
    if d < s1.radius + s2.radius {
        Some(Contact {
            kind: ContactKind::SS,
            detail: ContactDetail::SphereSphere {
                first: *s1,
                second: *s2,
                distance: d,
            },
        })
    } else {
        None
    }
}

/// Sphere/cylinder classification.
///
/// The cylinder-inside-sphere case (`sc1`, cylinder center strictly inside
/// the sphere) is tested first; the remaining branches follow the abscissa
/// `X` of the sphere center: beside the curved face (`sc2`), beyond a cap
/// (`sc3` when the center is inside the infinite cylinder, `sc4` otherwise),
/// or out of reach.
pub fn sphere_cylinder(s: &Sphere, c: &Cylinder) -> Option<Contact> {
    let d = s.center - c.center;
    let h = c.half_length();
    let x = d.dot(c.half_axis) / h;
    let dist2 = d.norm_squared();
    let l = (dist2 - x * x).max(0.0).sqrt();
    let rs = s.radius;
    let rc = c.radius;
    let ax = x.abs();

    let kind = if dist2 < rs * rs {
        ContactKind::SC1
    } else if ax >= h + rs {
        return None;
    } else if ax < h {
        if l < rs + rc {
            ContactKind::SC2
        } else {
            return None;
        }
    } else {
        let reach = (rs * rs - (ax - h) * (ax - h)).max(0.0).sqrt();
        if l < reach + rc {
            if l < rc {
                ContactKind::SC3
            } else {
                ContactKind::SC4
            }
        } else {
            return None;
        }
    };
    Some(Contact {
        kind,
        detail: ContactDetail::SphereCylinder {
            sphere: *s,
            cylinder: *c,
            x,
            l,
        },
    })
}

/// Disk/disk in non-parallel planes.
///
/// `pt` is the foot of the first center on the planes' common line. When it
/// lies strictly inside both disks the contact is reported there; otherwise
/// the two chords cut by the line are intersected and `pt` moves to the
/// middle of their overlap. Parallel planes give no contact (coplanar disks
/// only touch).
pub fn disk_disk(d1: &Disk, d2: &Disk) -> Option<Contact> {
    disk_disk_tagged(d1, d2, None, None)
}

fn disk_disk_tagged(
    d1: &Disk,
    d2: &Disk,
    b1: Option<BaseEnd>,
    b2: Option<BaseEnd>,
) -> Option<Contact> {
    let n = d1.normal.cross(d2.normal);
    let nn = n.norm();
    if nn < EPS {
        return None;
    }
    let v = n.cross(d1.normal);
    let t = (d2.center - d1.center).dot(d2.normal) / v.dot(d2.normal);
    let foot = d1.center + v * t;

    let r1 = d1.radius;
    let r2 = d2.radius;
    let q1 = (foot - d1.center).norm_squared();
    let q2 = (foot - d2.center).norm_squared();

    let pt = if q1 < r1 * r1 && q2 < r2 * r2 {
        foot
    } else {
        if q1 >= r1 * r1 {
            return None;
        }
        // Chord of disk 1 is [-w1, w1] around the foot, chord of disk 2 is
        // [s2 - w2, s2 + w2].
        let e = n / nn;
        let w1 = (r1 * r1 - q1).sqrt();
        let s2 = (d2.center - foot).dot(e);
        let off2 = (d2.center - foot - e * s2).norm_squared();
        if off2 >= r2 * r2 {
            return None;
        }
        let w2 = (r2 * r2 - off2).sqrt();
        let lo = (-w1).max(s2 - w2);
        let hi = w1.min(s2 + w2);
        if lo >= hi {
            return None;
        }
        foot + e * (0.5 * (lo + hi))
    };

    let m1 = r1 * r1 - (pt - d1.center).norm_squared();
    let m2 = r2 * r2 - (pt - d2.center).norm_squared();
    let kind = if m1 > m2 {
        ContactKind::D1
    } else {
        ContactKind::D2
    };
    Some(Contact {
        kind,
        detail: ContactDetail::DiskDisk {
            first: *d1,
            second: *d2,
            first_base: b1,
            second_base: b2,
            pt,
        },
    })
}

/// Disk against the curved face / interior of a cylinder.
///
/// Reports `cd1` (a rim point of the disk enters the cylinder while the axis
/// misses the disk), `cd2` (the axis pierces the disk and its nearest rim
/// point is inside the cylinder) or `cd3` (the axis segment pierces the
/// disk). Contacts where the disk only meets a base of the cylinder are left
/// to [`disk_disk`].
pub fn cylinder_disk(c: &Cylinder, d: &Disk) -> Option<Contact> {
    cylinder_disk_tagged(c, d, Side::First, None)
}

fn cylinder_disk_tagged(
    c: &Cylinder,
    d: &Disk,
    side: Side,
    base: Option<BaseEnd>,
) -> Option<Contact> {
    let h = c.half_length();
    let u = c.half_axis / h;
    let rc = c.radius;
    let rd = d.radius;

    // Cheap rejection: no disk point is within r_c of the axis segment.
    let s0 = (d.center - c.center).dot(u).clamp(-h, h);
    if (d.center - (c.center + u * s0)).norm() >= rd + rc {
        return None;
    }

    let make = |kind, a, t, pt_c: Vec3, x: f64| Contact {
        kind,
        detail: ContactDetail::CylinderDisk {
            cylinder: *c,
            disk: *d,
            cylinder_side: side,
            disk_base: base,
            a,
            t,
            pt_c,
            b: c.center + u * x,
            x,
        },
    };

    let nl = d.normal.dot(c.half_axis);
    if nl.abs() < EPS * h {
        return cylinder_disk_parallel(c, d, u, h)
            .map(|(pt_c, x)| make(ContactKind::CD1, None, None, pt_c, x));
    }

    let t = d.normal.dot(d.center - c.center) / nl;
    let a = c.center + c.half_axis * t;
    let to_a = a - d.center;
    let da = to_a.norm();
    let dir = to_a
        .try_normalize()
        .unwrap_or_else(|| d.normal.any_orthogonal());
    let pt_c = d.center + dir * rd;
    let x = (pt_c - c.center).dot(u);
    let b = c.center + u * x;
    let radial = (b - pt_c).norm();

    if x.abs() < h && radial < rc {
        if da > rd {
            return Some(make(ContactKind::CD1, Some(a), Some(t), pt_c, x));
        }
        if da < rd {
            return Some(make(ContactKind::CD2, Some(a), Some(t), pt_c, x));
        }
    }
    if da < rd && t.abs() < 1.0 {
        return Some(make(ContactKind::CD3, Some(a), Some(t), pt_c, x));
    }
    rim_point_inside(c, d, u, h).map(|(p, xp)| {
        let kind = if da < rd {
            ContactKind::CD2
        } else {
            ContactKind::CD1
        };
        make(kind, Some(a), Some(t), p, xp)
    })
}

/// Axis parallel to the disk plane: the disk point closest to the axis
/// segment is tested against the curved face. Returns `(pt_c, x)`.
fn cylinder_disk_parallel(c: &Cylinder, d: &Disk, u: Vec3, h: f64) -> Option<(Vec3, f64)> {
    let s = (d.center - c.center).dot(u).clamp(-h, h);
    let q = c.center + u * s;
    // Project the axis point into the disk plane.
    let q_plane = q - d.normal * (q - d.center).dot(d.normal);
    let w = q_plane - d.center;
    let wn = w.norm();
    let pt_c = if wn <= d.radius {
        q_plane
    } else {
        d.center + w * (d.radius / wn)
    };
    let x = (pt_c - c.center).dot(u);
    if x.abs() >= h {
        return None;
    }
    let radial = (pt_c - (c.center + u * x)).norm();
    (radial < c.radius).then_some((pt_c, x))
}

/// Search the disk rim for a point strictly inside the cylinder, minimizing
/// `max(radial / r_c, |axial| / h)` over the rim angle.
fn rim_point_inside(c: &Cylinder, d: &Disk, u: Vec3, h: f64) -> Option<(Vec3, f64)> {
    const SAMPLES: usize = 64;
    let e1 = d.normal.any_orthogonal();
    let e2 = d.normal.cross(e1);
    let rel = d.center - c.center;
    let rc = c.radius;
    let score = |psi: f64| -> (f64, Vec3, f64) {
        let (s, co) = psi.sin_cos();
        let q = rel + (e1 * co + e2 * s) * d.radius;
        let x = q.dot(u);
        let radial = (q.norm_squared() - x * x).max(0.0).sqrt();
        ((radial / rc).max(x.abs() / h), q, x)
    };

    let step = std::f64::consts::TAU / SAMPLES as f64;
    let vals: Vec<f64> = (0..SAMPLES).map(|i| score(i as f64 * step).0).collect();
    let mut best: Option<(f64, Vec3, f64)> = None;
    for i in 0..SAMPLES {
        let prev = vals[(i + SAMPLES - 1) % SAMPLES];
        let next = vals[(i + 1) % SAMPLES];
        if vals[i] > prev || vals[i] > next {
            continue;
        }
        // Golden-section refinement on the bracketing cell pair.
        let (mut lo, mut hi) = ((i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
        let g = 0.618_033_988_749_894_9;
        let mut m1 = hi - g * (hi - lo);
        let mut m2 = lo + g * (hi - lo);
        let mut f1 = score(m1).0;
        let mut f2 = score(m2).0;
        for _ in 0..48 {
            if f1 < f2 {
                hi = m2;
                m2 = m1;
                f2 = f1;
                m1 = hi - g * (hi - lo);
                f1 = score(m1).0;
            } else {
                lo = m1;
                m1 = m2;
                f1 = f2;
                m2 = lo + g * (hi - lo);
                f2 = score(m2).0;
            }
        }
        let cand = score(0.5 * (lo + hi));
        let cand = if vals[i] < cand.0 {
            score(i as f64 * step)
        } else {
            cand
        };
        if best.is_none_or(|b| cand.0 < b.0) {
            best = Some(cand);
        }
    }
    let (f, q, x) = best?;
    (f < 1.0).then(|| (c.center + q, x))
}

/// Cylinder/cylinder: every simultaneous contact between the two bodies.
pub fn cylinder_cylinder(c1: &Cylinder, c2: &Cylinder) -> Vec<Contact> {
    let mut out = Vec::new();
    cylinder_cylinder_into(c1, c2, false, &mut out);
    out
}

fn cylinder_cylinder_into(c1: &Cylinder, c2: &Cylinder, first_only: bool, out: &mut Vec<Contact>) {
    let h1 = c1.half_length();
    let h2 = c2.half_length();
    let u1 = c1.half_axis / h1;
    let u2 = c2.half_axis / h2;
    let rsum = c1.radius + c2.radius;

    let cr = u1.cross(u2);
    let sin = cr.norm();
    if sin < EPS {
        let d = c2.center - c1.center;
        let s = d.dot(u1);
        let lateral = d - u1 * s;
        let rho = lateral.norm();
        if rho >= rsum {
            return;
        }
        let lo = (-h1).max(s - h2);
        let hi = h1.min(s + h2);
        if lo >= hi {
            return;
        }
        let mid = 0.5 * (lo + hi);
        let pt1 = c1.center + u1 * mid;
        let pt2 = pt1 + lateral;
        out.push(Contact {
            kind: ContactKind::CC1,
            detail: ContactDetail::CylinderCylinder {
                first: *c1,
                second: *c2,
                rho,
                t1: mid / h1,
                t2: (pt2 - c2.center).dot(c2.half_axis) / (h2 * h2),
                pt1,
                pt2,
                normal: u1,
                parallel: true,
            },
        });
        if first_only {
            return;
        }
        base_contacts(c1, c2, first_only, false, out);
        return;
    }

    let n = cr / sin;
    let rho = (c1.center - c2.center).dot(n).abs();
    if rho >= rsum {
        return;
    }
    let n1 = n.cross(c1.half_axis);
    let n2 = n.cross(c2.half_axis);
    let t1 = (c2.center - c1.center).dot(n2) / c1.half_axis.dot(n2);
    let t2 = (c1.center - c2.center).dot(n1) / c2.half_axis.dot(n1);
    if t1.abs() <= 1.0 && t2.abs() <= 1.0 {
        let pt1 = c1.center + c1.half_axis * t1;
        let pt2 = c2.center + c2.half_axis * t2;
        // Orient the normal from the second axis towards the first.
        let normal = if (pt1 - pt2).dot(n) < 0.0 { -n } else { n };
        out.push(Contact {
            kind: ContactKind::CC1,
            detail: ContactDetail::CylinderCylinder {
                first: *c1,
                second: *c2,
                rho,
                t1,
                t2,
                pt1,
                pt2,
                normal,
                parallel: false,
            },
        });
        return;
    }
    base_contacts(c1, c2, first_only, true, out);
}

fn base_contacts(
    c1: &Cylinder,
    c2: &Cylinder,
    first_only: bool,
    with_disk_pairs: bool,
    out: &mut Vec<Contact>,
) {
    let (t1, b1) = cylinder_bases(c1);
    let (t2, b2) = cylinder_bases(c2);
    let ends = [(BaseEnd::Top, t1, t2), (BaseEnd::Bottom, b1, b2)];
    for (end, _, disk2) in ends {
        if let Some(k) = cylinder_disk_tagged(c1, &disk2, Side::First, Some(end)) {
            out.push(k);
            if first_only {
                return;
            }
        }
    }
    for (end, disk1, _) in ends {
        if let Some(k) = cylinder_disk_tagged(c2, &disk1, Side::Second, Some(end)) {
            out.push(k);
            if first_only {
                return;
            }
        }
    }
    if !with_disk_pairs {
        return;
    }
    for (e1, disk1, _) in ends {
        for (e2, _, disk2) in ends {
            if let Some(k) = disk_disk_tagged(&disk1, &disk2, Some(e1), Some(e2)) {
                out.push(k);
                if first_only {
                    return;
                }
            }
        }
    }
}

/// All contacts between two inclusions. Sphere/cylinder pairs are
/// normalized so that the sphere is the first participant of the detail
/// record, whatever the argument order.
pub fn shape_contacts(a: &Shape, b: &Shape) -> Vec<Contact> {
    match (a, b) {
        (Shape::Sphere(s1), Shape::Sphere(s2)) => sphere_sphere(s1, s2).into_iter().collect(),
        (Shape::Sphere(s), Shape::Cylinder(c)) | (Shape::Cylinder(c), Shape::Sphere(s)) => {
            sphere_cylinder(s, c).into_iter().collect()
        }
        (Shape::Cylinder(c1), Shape::Cylinder(c2)) => cylinder_cylinder(c1, c2),
    }
}

/// Boolean fast path: stops at the first contact found.
pub fn any_intersection(a: &Shape, b: &Shape) -> bool {
    let reach = a.bounding_radius() + b.bounding_radius();
    if (a.center() - b.center()).norm_squared() >= reach * reach {
        return false;
    }
    match (a, b) {
        (Shape::Sphere(s1), Shape::Sphere(s2)) => sphere_sphere(s1, s2).is_some(),
        (Shape::Sphere(s), Shape::Cylinder(c)) | (Shape::Cylinder(c), Shape::Sphere(s)) => {
            sphere_cylinder(s, c).is_some()
        }
        (Shape::Cylinder(c1), Shape::Cylinder(c2)) => {
            let mut out = Vec::new();
            cylinder_cylinder_into(c1, c2, true, &mut out);
            !out.is_empty()
        }
    }
}
