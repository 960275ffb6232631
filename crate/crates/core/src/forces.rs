//! Linear-elastic repulsion for every contact kind.
//!
//! A contact yields one force acting on the *leading* participant of its
//! detail record (the sphere for sphere/cylinder records, the first shape
//! otherwise) and the opposite force on the other one, both applied at the
//! same point. Magnitudes are proportional to the overlap depth measured
//! along the force direction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::intersect::{Contact, ContactDetail, ContactKind, Side};
use crate::rng::{unit_orthogonal, unit_vector};

/// Force on the leading participant; the reaction is `-force` at `point`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactForce {
    pub force: Vec3,
    pub point: Vec3,
}

/// A force bound to an inclusion (global index: spheres first, then cylinders).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppliedForce {
    pub force: Vec3,
    pub point: Vec3,
    pub on_object: usize,
}

/// Forces of a whole configuration with per-inclusion resultants.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForceSet {
    pub entries: Vec<AppliedForce>,
    /// Sum of squared force norms, one term per action/reaction pair.
    pub potential_energy: f64,
    pub total_force: Vec<Vec3>,
    /// Moment about the inclusion center; zero for spheres.
    pub total_torque: Vec<Vec3>,
}

impl ForceSet {
    pub fn new(n_objects: usize) -> Self {
        ForceSet {
            entries: Vec::new(),
            potential_energy: 0.0,
            total_force: vec![Vec3::ZERO; n_objects],
            total_torque: vec![Vec3::ZERO; n_objects],
        }
    }

    pub fn n_contacts(&self) -> usize {
        self.entries.len() / 2
    }

    /// Record one contact between `first` (centered at `first_center` in the
    /// frame of the contact) and `second`.
    pub fn push_pair(
        &mut self,
        cf: ContactForce,
        first: usize,
        first_center: Vec3,
        second: usize,
        second_center: Vec3,
    ) {
        self.potential_energy += cf.force.norm_squared();
        self.push_pair_force(cf, first, first_center, second, second_center);
    }

    /// As [`Self::push_pair`] without touching the potential energy.
    pub fn push_pair_force(
        &mut self,
        cf: ContactForce,
        first: usize,
        first_center: Vec3,
        second: usize,
        second_center: Vec3,
    ) {
        let f = cf.force;
        self.total_force[first] += f;
        self.total_force[second] -= f;
        self.total_torque[first] += (cf.point - first_center).cross(f);
        self.total_torque[second] -= (cf.point - second_center).cross(f);
        self.entries.push(AppliedForce {
            force: f,
            point: cf.point,
            on_object: first,
        });
        self.entries.push(AppliedForce {
            force: -f,
            point: cf.point,
            on_object: second,
        });
    }
}

fn direction_or_random<R: Rng + ?Sized>(v: Vec3, rng: &mut R) -> Vec3 {
    v.try_normalize().unwrap_or_else(|| unit_vector(rng))
}

fn direction_or_orthogonal<R: Rng + ?Sized>(v: Vec3, axis: Vec3, rng: &mut R) -> Vec3 {
    v.try_normalize()
        .unwrap_or_else(|| unit_orthogonal(rng, axis))
}

/// Force law for one contact. `rng` only feeds directions of degenerate
/// (zero-separation) configurations.
pub fn force_for_contact<R: Rng + ?Sized>(contact: &Contact, rng: &mut R) -> ContactForce {
    match contact.detail {
        ContactDetail::SphereSphere {
            first,
            second,
            distance,
        } => {
            let dir = direction_or_random(first.center - second.center, rng);
            ContactForce {
                force: dir * (first.radius + second.radius - distance),
                point: (first.center + second.center) * 0.5,
            }
        }
        ContactDetail::SphereCylinder {
            sphere,
            cylinder,
            x,
            l,
        } => {
            let on_cyl = sphere_cylinder_force(contact.kind, &sphere, &cylinder, x, l, rng);
            ContactForce {
                force: -on_cyl.force,
                point: on_cyl.point,
            }
        }
        ContactDetail::CylinderCylinder {
            first,
            second,
            rho,
            pt1,
            pt2,
            normal,
            parallel,
            ..
        } => {
            let dir = if parallel {
                direction_or_orthogonal(pt1 - pt2, normal, rng)
            } else {
                normal
            };
            ContactForce {
                force: dir * (first.radius + second.radius - rho),
                point: (pt1 + pt2) * 0.5,
            }
        }
        ContactDetail::CylinderDisk {
            cylinder,
            disk,
            cylinder_side,
            a,
            pt_c,
            b,
            ..
        } => {
            let u = cylinder.axis_unit();
            let rc = cylinder.radius;
            let delta = (b - pt_c).norm();
            let (force, point) = match contact.kind {
                ContactKind::CD1 => (
                    direction_or_orthogonal(b - pt_c, u, rng) * (rc - delta),
                    pt_c,
                ),
                ContactKind::CD2 => {
                    let fallback = a.map(|a| a - disk.center).unwrap_or(Vec3::ZERO);
                    let dir = (pt_c - b)
                        .try_normalize()
                        .unwrap_or_else(|| direction_or_orthogonal(fallback, u, rng));
                    (dir * (2.0 * rc - delta), pt_c)
                }
                _ => {
                    let dir = direction_or_random(cylinder.center - disk.center, rng);
                    (dir * (2.0 * rc), a.unwrap_or(pt_c))
                }
            };
            let force = if cylinder_side == Side::First {
                force
            } else {
                -force
            };
            ContactForce { force, point }
        }
        ContactDetail::DiskDisk {
            first, second, pt, ..
        } => {
            let force = if contact.kind == ContactKind::D1 {
                first.normal * -(second.radius - (pt - second.center).norm())
            } else {
                second.normal * (first.radius - (pt - first.center).norm())
            };
            ContactForce { force, point: pt }
        }
    }
}

/// Force on the cylinder of a sphere/cylinder contact.
fn sphere_cylinder_force<R: Rng + ?Sized>(
    kind: ContactKind,
    s: &crate::geom::Sphere,
    c: &crate::geom::Cylinder,
    x: f64,
    l: f64,
    rng: &mut R,
) -> ContactForce {
    let u = c.axis_unit();
    let h = c.half_length();
    let foot = c.center + u * x;
    // Unit radial direction from the axis towards the sphere center.
    let outward = direction_or_orthogonal(s.center - foot, u, rng);
    match kind {
        ContactKind::SC1 => ContactForce {
            force: direction_or_random(c.center - s.center, rng) * (2.0 * h),
            point: c.center,
        },
        ContactKind::SC2 => {
            let m = ((s.radius + c.radius).powi(2) - l * l).max(0.0).sqrt();
            ContactForce {
                force: outward * -m,
                point: s.center + outward * (s.radius - m),
            }
        }
        ContactKind::SC3 => {
            let sign = if x < 0.0 { -1.0 } else { 1.0 };
            ContactForce {
                force: u * (-(h + s.radius - x.abs()) * sign),
                point: s.center,
            }
        }
        _ => {
            let reach = (s.radius * s.radius - (x.abs() - h).powi(2))
                .max(0.0)
                .sqrt();
            ContactForce {
                force: outward * -(reach + c.radius - l),
                point: foot + outward * c.radius,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Cylinder, Disk, Shape, Sphere};
    use crate::intersect::{
        cylinder_cylinder, disk_disk, shape_contacts, sphere_cylinder, sphere_sphere,
    };
    use crate::rng::rng_from_seed;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn sphere_pair_pushes_apart() {
        let a = Sphere::new(v(0.0, 0.0, 0.0), 1.0).unwrap();
        let b = Sphere::new(v(1.5, 0.0, 0.0), 1.0).unwrap();
        let cf = force_for_contact(&sphere_sphere(&a, &b).unwrap(), &mut rng_from_seed(0));
        assert!((cf.force - v(-0.5, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cc1_example() {
        let c1 = Cylinder::new(v(0.0, 0.0, 0.0), 0.5, v(0.0, 0.0, 1.0)).unwrap();
        let c2 = Cylinder::new(v(0.8, 0.0, 0.0), 0.5, v(0.0, 1.0, 0.0)).unwrap();
        let k = cylinder_cylinder(&c1, &c2)[0];
        let cf = force_for_contact(&k, &mut rng_from_seed(0));
        assert!((cf.force - v(-0.2, 0.0, 0.0)).norm() < 1e-12);
        assert!((cf.point - v(0.4, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sc2_magnitude() {
        let s = Sphere::new(v(2.0, 0.0, 0.0), 1.0).unwrap();
        let c = Cylinder::new(v(0.0, 0.0, 0.0), 1.5, v(0.0, 0.0, 2.0)).unwrap();
        let k = sphere_cylinder(&s, &c).unwrap();
        assert_eq!(k.kind, ContactKind::SC2);
        let cf = force_for_contact(&k, &mut rng_from_seed(0));
        assert!((cf.force.norm() - 1.5).abs() < 1e-12);
        // On the sphere: away from the axis.
        assert!(cf.force.x > 0.0);
    }

    #[test]
    fn sc3_pushes_along_axis() {
        let c = Cylinder::new(v(0.0, 0.0, 0.0), 1.0, v(0.0, 0.0, 2.0)).unwrap();
        let s = Sphere::new(v(0.0, 0.0, 2.5), 1.0).unwrap();
        let cf = force_for_contact(&sphere_cylinder(&s, &c).unwrap(), &mut rng_from_seed(0));
        assert!((cf.force - v(0.0, 0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn disk_pair_forces_follow_normals() {
        let d1 = Disk::new(v(0.0, 0.0, 0.0), 1.0, v(0.0, 0.0, 1.0)).unwrap();
        let d2 = Disk::new(v(0.5, 0.0, 0.0), 1.0, v(1.0, 0.0, 0.0)).unwrap();
        let k = disk_disk(&d1, &d2).unwrap();
        assert_eq!(k.kind, ContactKind::D2);
        let cf = force_for_contact(&k, &mut rng_from_seed(0));
        // Second owner is pushed against its own normal by r1 - |pt - p1| = 0.5.
        assert!((cf.force - v(0.5, 0.0, 0.0)).norm() < 1e-12);
        let swapped = force_for_contact(&k.swapped(), &mut rng_from_seed(0));
        assert!((swapped.force + cf.force).norm() < 1e-12);
    }

    #[test]
    fn energy_counts_pairs_once() {
        let mut fs = ForceSet::new(3);
        let p = ContactForce {
            force: v(0.5, 0.0, 0.0),
            point: Vec3::ZERO,
        };
        let q = ContactForce {
            force: v(0.0, 0.2, 0.0),
            point: Vec3::ZERO,
        };
        fs.push_pair(p, 0, Vec3::ZERO, 1, Vec3::X);
        fs.push_pair(q, 1, Vec3::X, 2, Vec3::Y);
        assert!((fs.potential_energy - 0.29).abs() < 1e-15);
        let net = fs.total_force.iter().fold(Vec3::ZERO, |a, &b| a + b);
        assert!(net.norm() < 1e-15);
        assert_eq!(fs.n_contacts(), 2);
    }

    #[test]
    fn coincident_spheres_get_a_seeded_direction() {
        let a = Sphere::new(v(0.3, 0.3, 0.3), 0.1).unwrap();
        let k = sphere_sphere(&a, &a).unwrap();
        let f1 = force_for_contact(&k, &mut rng_from_seed(9));
        let f2 = force_for_contact(&k, &mut rng_from_seed(9));
        assert_eq!(f1, f2);
        assert!((f1.force.norm() - 0.2).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point(span: f64) -> impl Strategy<Value = Vec3> {
            (-span..span, -span..span, -span..span).prop_map(|(x, y, z)| Vec3::new(x, y, z))
        }

        fn shape() -> impl Strategy<Value = Shape> {
            prop_oneof![
                (point(0.3), 0.05..0.3f64)
                    .prop_map(|(c, r)| Shape::Sphere(Sphere::new(c, r).unwrap())),
                (point(0.3), 0.05..0.25f64, point(1.0), 1.0..4.0f64)
                    .prop_filter("axis", |(_, _, d, _)| d.norm() > 0.1)
                    .prop_map(|(c, r, d, a)| Shape::Cylinder(
                        Cylinder::new(c, r, d / d.norm() * (a * r)).unwrap()
                    )),
            ]
        }

        proptest! {
            #[test]
            fn forces_are_finite_and_repulsive_on_centers(a in shape(), b in shape()) {
                let mut rng = rng_from_seed(1);
                let lead_is_a = !matches!((a, b), (Shape::Cylinder(_), Shape::Sphere(_)));
                let (pa, pb) = if lead_is_a { (a.center(), b.center()) } else { (b.center(), a.center()) };
                for k in shape_contacts(&a, &b) {
                    let cf = force_for_contact(&k, &mut rng);
                    prop_assert!(cf.force.is_finite() && cf.point.is_finite());
                    let sep = pa - pb;
                    if sep.norm() > 1e-6 && matches!(k.kind, ContactKind::SS | ContactKind::SC1 | ContactKind::SC2 | ContactKind::SC3 | ContactKind::SC4 | ContactKind::CC1) {
                        prop_assert!(cf.force.dot(sep) >= 0.0, "{:?}", k.kind);
                    }
                }
            }
        }
    }
}
