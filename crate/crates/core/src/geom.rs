//! Vector algebra and the primitive shapes shared by every other module.
//!
//! All lengths are expressed in units of the RVE edge (the periodic cell is
//! the unit cube).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

/// A vector is treated as null below this norm.
pub const EPS: f64 = 1e-10;

/// Real 3-vector. Serialized as `[x, y, z]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    pub const X: Vec3 = Vec3 {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: Vec3 = Vec3 {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Checked constructor: rejects NaN and infinite components.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self, GeomError> {
        let v = Vec3::new(x, y, z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeomError::NonFinite)
        }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector, or `None` when the norm is below [`EPS`].
    #[inline]
    pub fn try_normalize(self) -> Option<Vec3> {
        let n = self.norm();
        if n < EPS {
            None
        } else {
            Some(self / n)
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn map(self, f: impl Fn(f64) -> f64) -> Vec3 {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("Vec3 component index {i} out of range"),
        }
    }

    /// Some unit vector orthogonal to `self` (which must be non-null).
    pub fn any_orthogonal(self) -> Vec3 {
        let a = if self.x.abs() <= self.y.abs() && self.x.abs() <= self.z.abs() {
            Vec3::X
        } else if self.y.abs() <= self.z.abs() {
            Vec3::Y
        } else {
            Vec3::Z
        };
        self.cross(a).try_normalize().unwrap_or(Vec3::X)
    }

    /// Rotate `self` by the rotation vector `rot` (axis * angle), Rodrigues' formula.
    pub fn rotated(self, rot: Vec3) -> Vec3 {
        let angle = rot.norm();
        if angle < 1e-300 {
            return self;
        }
        let k = rot / angle;
        let (s, c) = angle.sin_cos();
        self * c + k.cross(self) * s + k * (k.dot(self) * (1.0 - c))
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[inline]
pub fn dot(u: Vec3, v: Vec3) -> f64 {
    u.dot(v)
}

#[inline]
pub fn cross(u: Vec3, v: Vec3) -> Vec3 {
    u.cross(v)
}

#[inline]
pub fn norm(u: Vec3) -> f64 {
    u.norm()
}

/// Sphere `S(p_s, r_s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Result<Self, GeomError> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if radius <= 0.0 {
            return Err(GeomError::NonPositiveRadius(radius));
        }
        Ok(Sphere { center, radius })
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }

    /// Radius of the smallest ball around the center containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        self.radius
    }

    /// Whether the sphere is smaller than the unit cell (`2 r < 1`).
    pub fn fits_unit_cell(&self) -> bool {
        2.0 * self.radius < 1.0
    }

    pub fn translated(&self, by: Vec3) -> Sphere {
        Sphere {
            center: self.center + by,
            ..*self
        }
    }
}

/// Flat-capped cylinder `C(p_c, r_c, l_c)`; `half_axis` carries both the axis
/// direction and the half-length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub center: Vec3,
    pub radius: f64,
    pub half_axis: Vec3,
}

impl Cylinder {
    pub fn new(center: Vec3, radius: f64, half_axis: Vec3) -> Result<Self, GeomError> {
        if !center.is_finite() || !radius.is_finite() || !half_axis.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if radius <= 0.0 {
            return Err(GeomError::NonPositiveRadius(radius));
        }
        if half_axis.norm() < EPS {
            return Err(GeomError::NullAxis);
        }
        Ok(Cylinder {
            center,
            radius,
            half_axis,
        })
    }

    #[inline]
    pub fn half_length(&self) -> f64 {
        self.half_axis.norm()
    }

    #[inline]
    pub fn axis_unit(&self) -> Vec3 {
        self.half_axis / self.half_length()
    }

    /// `a = |l_c| / r_c`.
    pub fn aspect_ratio(&self) -> f64 {
        self.half_length() / self.radius
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * 2.0 * self.half_length()
    }

    pub fn bounding_radius(&self) -> f64 {
        (self.radius * self.radius + self.half_axis.norm_squared()).sqrt()
    }

    /// Whether the cylinder is shorter than the unit cell (`2 |l_c| < 1`).
    pub fn fits_unit_cell(&self) -> bool {
        2.0 * self.half_length() < 1.0 && 2.0 * self.radius < 1.0
    }

    pub fn translated(&self, by: Vec3) -> Cylinder {
        Cylinder {
            center: self.center + by,
            ..*self
        }
    }
}

/// Planar disk `D(p_d, r_d, n_d)` with unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec3,
    pub radius: f64,
    pub normal: Vec3,
}

impl Disk {
    /// Normalizes `normal`; fails for a null normal.
    pub fn new(center: Vec3, radius: f64, normal: Vec3) -> Result<Self, GeomError> {
        if !center.is_finite() || !radius.is_finite() || !normal.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if radius <= 0.0 {
            return Err(GeomError::NonPositiveRadius(radius));
        }
        let normal = normal.try_normalize().ok_or(GeomError::NullAxis)?;
        Ok(Disk {
            center,
            radius,
            normal,
        })
    }
}

/// Which base of a cylinder a disk came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseEnd {
    /// Base at `center + half_axis`, outward normal along `+half_axis`.
    Top,
    /// Base at `center - half_axis`, outward normal along `-half_axis`.
    Bottom,
}

/// The two base disks of a cylinder, `(top, bottom)`.
pub fn cylinder_bases(c: &Cylinder) -> (Disk, Disk) {
    let n = c.axis_unit();
    (
        Disk {
            center: c.center + c.half_axis,
            radius: c.radius,
            normal: n,
        },
        Disk {
            center: c.center - c.half_axis,
            radius: c.radius,
            normal: -n,
        },
    )
}

/// Either kind of inclusion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Sphere(Sphere),
    Cylinder(Cylinder),
}

impl Shape {
    pub fn center(&self) -> Vec3 {
        match self {
            Shape::Sphere(s) => s.center,
            Shape::Cylinder(c) => c.center,
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Sphere(s) => s.bounding_radius(),
            Shape::Cylinder(c) => c.bounding_radius(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Shape::Sphere(s) => s.volume(),
            Shape::Cylinder(c) => c.volume(),
        }
    }

    pub fn translated(&self, by: Vec3) -> Shape {
        match self {
            Shape::Sphere(s) => Shape::Sphere(s.translated(by)),
            Shape::Cylinder(c) => Shape::Cylinder(c.translated(by)),
        }
    }

    /// Closed-set membership (no periodic wrap).
    #[inline]
    pub fn contains(&self, p: Vec3) -> bool {
        match self {
            Shape::Sphere(s) => (p - s.center).norm_squared() <= s.radius * s.radius,
            Shape::Cylinder(c) => {
                let d = p - c.center;
                let h = c.half_length();
                let x = d.dot(c.half_axis) / h;
                if x.abs() > h {
                    return false;
                }
                d.norm_squared() - x * x <= c.radius * c.radius
            }
        }
    }

    /// Half-extents of the axis-aligned bounding box.
    pub fn aabb_half_extent(&self) -> Vec3 {
        match self {
            Shape::Sphere(s) => Vec3::new(s.radius, s.radius, s.radius),
            Shape::Cylinder(c) => {
                let u = c.axis_unit();
                let h = c.half_length();
                u.map(|ui| h * ui.abs() + c.radius * (1.0 - ui * ui).max(0.0).sqrt())
            }
        }
    }
}

impl From<Sphere> for Shape {
    fn from(s: Sphere) -> Self {
        Shape::Sphere(s)
    }
}

impl From<Cylinder> for Shape {
    fn from(c: Cylinder) -> Self {
        Shape::Cylinder(c)
    }
}
