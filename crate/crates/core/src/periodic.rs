//! Unit-cube periodic domain.
//!
//! Each inclusion carries the set of lattice shifts whose image may reach
//! into the cell. Pairs are tested against the relative shifts obtained from
//! the two sets, so an object crossing a face or corner interacts through
//! every copy, and each `(pair, shift)` combination is visited once.

use rand::Rng;

use crate::forces::{force_for_contact, ForceSet};
use crate::geom::{Shape, Vec3};
use crate::intersect::{any_intersection, shape_contacts, Contact, ContactKind};

pub const DOMAIN_EDGE: f64 = 1.0;

pub type Shift = [i8; 3];

fn shift_vec(s: Shift) -> Vec3 {
    Vec3::new(s[0] as f64, s[1] as f64, s[2] as f64)
}

/// Lattice shifts `s` such that the bounding sphere of the image at
/// `center + s` overlaps the closed unit cube. Always contains `[0, 0, 0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryAttr {
    shifts: Vec<Shift>,
}

impl BoundaryAttr {
    pub fn shifts(&self) -> &[Shift] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn crosses_boundary(&self) -> bool {
        self.shifts.len() > 1
    }
}

/// Squared distance from `p` to the closed unit cube.
fn dist2_to_cell(p: Vec3) -> f64 {
    let d = |x: f64| {
        if x < 0.0 {
            -x
        } else if x > DOMAIN_EDGE {
            x - DOMAIN_EDGE
        } else {
            0.0
        }
    };
    let (a, b, c) = (d(p.x), d(p.y), d(p.z));
    a * a + b * b + c * c
}

pub fn boundary_attr(shape: &Shape) -> BoundaryAttr {
    let c = shape.center();
    let r = shape.bounding_radius();
    let mut shifts = vec![[0, 0, 0]];
    for sx in -1i8..=1 {
        for sy in -1i8..=1 {
            for sz in -1i8..=1 {
                let s = [sx, sy, sz];
                if s == [0, 0, 0] {
                    continue;
                }
                if dist2_to_cell(c + shift_vec(s)) < r * r {
                    shifts.push(s);
                }
            }
        }
    }
    BoundaryAttr { shifts }
}

/// Wrap a point into `[0, 1)^3`.
pub fn wrap_point(p: Vec3) -> Vec3 {
    let w = |x: f64| {
        let y = x - x.floor();
        // `x - floor(x)` rounds to 1.0 for tiny negative x.
        if y >= DOMAIN_EDGE {
            0.0
        } else {
            y
        }
    };
    Vec3::new(w(p.x), w(p.y), w(p.z))
}

/// Relative shifts (applied to `b`) under which the images of `a` and `b`
/// may interact, deduplicated and filtered by bounding-sphere distance.
pub fn relative_shifts(
    a: &Shape,
    attr_a: &BoundaryAttr,
    b: &Shape,
    attr_b: &BoundaryAttr,
) -> Vec<Shift> {
    let reach = a.bounding_radius() + b.bounding_radius();
    let d = b.center() - a.center();
    let mut out: Vec<Shift> = Vec::new();
    for sa in attr_a.shifts() {
        for sb in attr_b.shifts() {
            let s = [sb[0] - sa[0], sb[1] - sa[1], sb[2] - sa[2]];
            if s.iter().any(|c| c.abs() > 1) || out.contains(&s) {
                continue;
            }
            if (d + shift_vec(s)).norm_squared() < reach * reach {
                out.push(s);
            }
        }
    }
    out
}

/// Self-image shifts worth testing: one of each `{s, -s}` pair, only when
/// the inclusion is large enough to reach its own translate.
fn self_shifts(a: &Shape) -> Vec<Shift> {
    let reach = 2.0 * a.bounding_radius();
    let mut out = Vec::new();
    if reach <= DOMAIN_EDGE {
        return out;
    }
    for sx in -1i8..=1 {
        for sy in -1i8..=1 {
            for sz in -1i8..=1 {
                let s = [sx, sy, sz];
                let first_nonzero = s.iter().find(|&&c| c != 0);
                if first_nonzero == Some(&1) && shift_vec(s).norm_squared() < reach * reach {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// One contact between inclusions `first` and `second` (global indices),
/// with `second` taken at its image `shift`. The contact detail is oriented
/// so that its leading participant is `first`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairContact {
    pub first: usize,
    pub second: usize,
    pub shift: Shift,
    pub contact: Contact,
}

impl PairContact {
    pub fn kind(&self) -> ContactKind {
        self.contact.kind
    }
}

/// Periodic inclusion set with cached boundary attributes.
#[derive(Clone, Debug)]
pub struct PeriodicSet {
    pub shapes: Vec<Shape>,
    pub attrs: Vec<BoundaryAttr>,
}

impl PeriodicSet {
    pub fn new(shapes: Vec<Shape>) -> Self {
        let attrs = shapes.iter().map(boundary_attr).collect();
        PeriodicSet { shapes, attrs }
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn refresh(&mut self) {
        for (a, s) in self.attrs.iter_mut().zip(&self.shapes) {
            *a = boundary_attr(s);
        }
    }

    pub fn push(&mut self, shape: Shape) {
        self.attrs.push(boundary_attr(&shape));
        self.shapes.push(shape);
    }

    /// Whether `candidate` intersects any member or its own periodic image.
    pub fn intersects_any(&self, candidate: &Shape) -> bool {
        let attr = boundary_attr(candidate);
        if self_shifts(candidate)
            .iter()
            .any(|&s| any_intersection(candidate, &candidate.translated(shift_vec(s))))
        {
            return true;
        }
        self.shapes.iter().zip(&self.attrs).any(|(other, oattr)| {
            relative_shifts(candidate, &attr, other, oattr)
                .into_iter()
                .any(|s| any_intersection(candidate, &other.translated(shift_vec(s))))
        })
    }

    /// All contacts of the pair `(i, j)`, `i <= j`, over every image.
    pub fn pair_contacts(&self, i: usize, j: usize, out: &mut Vec<PairContact>) {
        let a = &self.shapes[i];
        let shifts = if i == j {
            self_shifts(a)
        } else {
            relative_shifts(a, &self.attrs[i], &self.shapes[j], &self.attrs[j])
        };
        for s in shifts {
            let b = self.shapes[j].translated(shift_vec(s));
            let lead_is_a = leads(a, &b);
            for contact in shape_contacts(a, &b) {
                out.push(if lead_is_a {
                    PairContact {
                        first: i,
                        second: j,
                        shift: s,
                        contact,
                    }
                } else {
                    PairContact {
                        first: j,
                        second: i,
                        shift: [-s[0], -s[1], -s[2]],
                        contact,
                    }
                });
            }
        }
    }

    /// Every contact in the configuration, in a fixed pair order.
    pub fn all_contacts(&self) -> Vec<PairContact> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i..self.len() {
                self.pair_contacts(i, j, &mut out);
            }
        }
        out
    }

    /// Parallel variant of [`Self::all_contacts`]; same order.
    pub fn all_contacts_par(&self) -> Vec<PairContact> {
        use rayon::prelude::*;
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                for j in i..self.len() {
                    self.pair_contacts(i, j, &mut out);
                }
                out
            })
            .flatten_iter()
            .collect()
    }

    pub fn has_contacts(&self) -> bool {
        (0..self.len()).any(|i| {
            let a = &self.shapes[i];
            if self_shifts(a)
                .iter()
                .any(|&s| any_intersection(a, &a.translated(shift_vec(s))))
            {
                return true;
            }
            (i + 1..self.len()).any(|j| {
                relative_shifts(a, &self.attrs[i], &self.shapes[j], &self.attrs[j])
                    .into_iter()
                    .any(|s| any_intersection(a, &self.shapes[j].translated(shift_vec(s))))
            })
        })
    }

    /// Force set of a contact list; the leading participant sits in the
    /// cell, the other at its image.
    pub fn forces<R: Rng + ?Sized>(&self, contacts: &[PairContact], rng: &mut R) -> ForceSet {
        self.forces_with_skin(contacts, rng, 0.0)
    }

    /// As [`Self::forces`], each nonzero force lengthened by `skin` along
    /// its direction. The potential energy ignores the skin.
    pub fn forces_with_skin<R: Rng + ?Sized>(
        &self,
        contacts: &[PairContact],
        rng: &mut R,
        skin: f64,
    ) -> ForceSet {
        let mut fs = ForceSet::new(self.len());
        for pc in contacts {
            let mut cf = force_for_contact(&pc.contact, rng);
            fs.potential_energy += cf.force.norm_squared();
            if let Some(dir) = cf.force.try_normalize() {
                cf.force += dir * skin;
            }
            let c1 = self.shapes[pc.first].center();
            let c2 = self.shapes[pc.second].center() + shift_vec(pc.shift);
            fs.push_pair_force(cf, pc.first, c1, pc.second, c2);
        }
        fs
    }
}

/// Whether `a` is the leading participant of `shape_contacts(a, b)` records.
pub fn leads(a: &Shape, b: &Shape) -> bool {
    !matches!((a, b), (Shape::Cylinder(_), Shape::Sphere(_)))
}

/// Contacts of `a` against `b` over all periodic images.
pub fn periodic_contacts(a: &Shape, b: &Shape) -> Vec<Contact> {
    let (ta, tb) = (boundary_attr(a), boundary_attr(b));
    relative_shifts(a, &ta, b, &tb)
        .into_iter()
        .flat_map(|s| shape_contacts(a, &b.translated(shift_vec(s))))
        .collect()
}
