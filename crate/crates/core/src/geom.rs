//! Coordinate-free 3D primitives and the ray math the rest of the crate uses.
//!
//! Convention: right-handed, +Y up. The canonical forward axis of every pose
//! (head, controller, camera, window) is local −Z and its up axis is local +Y.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Rays never report hits closer than this, so a ray emitted from a surface
/// does not immediately re-hit it.
pub const SELF_HIT_EPSILON: f64 = 1e-9;

/// `|dot|` of two ray directions above this counts as parallel.
pub const PARALLEL_CUTOFF: f64 = 1.0 - 1e-12;

/// Quaternions read from documents within this distance of unit norm are
/// renormalized; anything further off is rejected.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);
    /// Canonical forward axis (local −Z).
    pub const FORWARD: Vec3 = Vec3::new(0.0, 0.0, -1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).length()
    }

    /// Unit vector in the same direction, or `None` for a (near-)zero vector.
    pub fn try_normalize(self) -> Option<Vec3> {
        let len = self.length();
        if len > 1e-300 && len.is_finite() {
            Some(self / len)
        } else {
            None
        }
    }

    pub fn normalize(self) -> Vec3 {
        self.try_normalize()
            .expect("cannot normalize a zero-length vector")
    }

    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis out of range: {axis}"),
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Serialize for Vec3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec3::from_array(<[f64; 3]>::deserialize(d)?);
        if !v.is_finite() {
            return Err(D::Error::custom("vector components must be finite"));
        }
        Ok(v)
    }
}

/// Rotation stored as a unit quaternion `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes `(w, x, y, z)`; `None` for a zero or non-finite input.
    pub fn new_normalize(w: f64, x: f64, y: f64, z: f64) -> Option<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 1e-300) {
            return None;
        }
        Some(Self {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Accepts a document quaternion, renormalizing when its norm is within
    /// [`QUATERNION_NORM_TOLERANCE`] of one. Returns the offending norm otherwise.
    pub fn from_wxyz_checked(q: [f64; 4]) -> Result<Self, f64> {
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !n.is_finite() || (n - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
            return Err(n);
        }
        Self::new_normalize(q[0], q[1], q[2], q[3]).ok_or(n)
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = (angle * 0.5).sin_cos();
        Self::new_normalize(c, a.x * s, a.y * s, a.z * s).expect("finite axis-angle")
    }

    /// Rotation about +Y; positive yaw turns the forward axis toward −X (left).
    pub fn from_yaw(yaw: f64) -> Self {
        Self::from_axis_angle(Vec3::Y, yaw)
    }

    /// Yaw about world +Y followed by pitch about the yawed +X axis.
    /// Positive pitch tilts forward toward +Y.
    pub fn from_yaw_pitch(yaw: f64, pitch: f64) -> Self {
        Self::from_yaw(yaw) * Self::from_axis_angle(Vec3::X, pitch)
    }

    /// Orientation whose forward (−Z) axis points along `forward`, with its up
    /// axis as close to `up` as possible. `None` if `forward` is degenerate or
    /// parallel to `up`.
    pub fn look_rotation(forward: Vec3, up: Vec3) -> Option<Self> {
        let back = (-forward).try_normalize()?;
        let right = up.cross(back).try_normalize()?;
        let true_up = back.cross(right);
        Some(Self::from_basis(right, true_up, back))
    }

    /// Quaternion from an orthonormal right-handed basis given as the images
    /// of the local X, Y and Z axes.
    pub fn from_basis(x_axis: Vec3, y_axis: Vec3, z_axis: Vec3) -> Self {
        let (m00, m01, m02) = (x_axis.x, y_axis.x, z_axis.x);
        let (m10, m11, m12) = (x_axis.y, y_axis.y, z_axis.y);
        let (m20, m21, m22) = (x_axis.z, y_axis.z, z_axis.z);
        let trace = m00 + m11 + m22;
        let (w, x, y, z) = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            (0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s)
        } else if m00 > m11 && m00 > m22 {
            let s = (1.0 + m00 - m11 - m22).sqrt() * 2.0;
            ((m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s)
        } else if m11 > m22 {
            let s = (1.0 + m11 - m00 - m22).sqrt() * 2.0;
            ((m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s)
        } else {
            let s = (1.0 + m22 - m00 - m11).sqrt() * 2.0;
            ((m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s)
        };
        Self::new_normalize(w, x, y, z).expect("orthonormal basis")
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn to_wxyz(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn inverse(self) -> Self {
        self.conjugate()
    }

    pub fn rotate(self, v: Vec3) -> Vec3 {
        let q = Vec3::new(self.x, self.y, self.z);
        let t = q.cross(v) * 2.0;
        v + t * self.w + q.cross(t)
    }

    pub fn forward(self) -> Vec3 {
        self.rotate(Vec3::FORWARD)
    }

    pub fn up(self) -> Vec3 {
        self.rotate(Vec3::Y)
    }

    pub fn right(self) -> Vec3 {
        self.rotate(Vec3::X)
    }

    /// Heading-only part of this rotation: the yaw about +Y that keeps the
    /// horizontal projection of forward. Pitch and roll are dropped.
    pub fn yaw_only(self) -> Self {
        let f = self.forward();
        let mut h = Vec3::new(f.x, 0.0, f.z);
        if h.length() < 1e-9 {
            // Looking straight up or down: the head's up axis carries the heading.
            let u = self.up();
            h = if f.y < 0.0 { u } else { -u };
            h.y = 0.0;
        }
        let yaw = (-h.x).atan2(-h.z);
        Self::from_yaw(yaw)
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, o: UnitQuaternion) -> UnitQuaternion {
        let (a, b) = (self, o);
        UnitQuaternion {
            w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        }
    }
}

impl Serialize for UnitQuaternion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_wxyz().serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitQuaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = <[f64; 4]>::deserialize(d)?;
        UnitQuaternion::from_wxyz_checked(raw).map_err(|n| {
            D::Error::custom(format!("orientation quaternion has norm {n}, expected 1"))
        })
    }
}

/// Whether [`Pose::apply`] treats its argument as a location or a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorKind {
    Point,
    Direction,
}

/// Rigid placement: maps the local frame into the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: Vec3::ZERO,
        orientation: UnitQuaternion::IDENTITY,
    };

    pub fn new(position: Vec3, orientation: UnitQuaternion) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn from_position(position: Vec3) -> Self {
        Self::new(position, UnitQuaternion::IDENTITY)
    }

    pub fn apply(&self, v: Vec3, kind: VectorKind) -> Vec3 {
        match kind {
            VectorKind::Point => self.orientation.rotate(v) + self.position,
            VectorKind::Direction => self.orientation.rotate(v),
        }
    }

    pub fn apply_inverse(&self, v: Vec3, kind: VectorKind) -> Vec3 {
        let inv = self.orientation.inverse();
        match kind {
            VectorKind::Point => inv.rotate(v - self.position),
            VectorKind::Direction => inv.rotate(v),
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.apply(p, VectorKind::Point)
    }

    pub fn transform_direction(&self, d: Vec3) -> Vec3 {
        self.apply(d, VectorKind::Direction)
    }

    /// `self ∘ local`: places a pose expressed in this pose's frame into the
    /// parent frame.
    pub fn compose(&self, local: &Pose) -> Pose {
        Pose {
            position: self.transform_point(local.position),
            orientation: self.orientation * local.orientation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: -inv.rotate(self.position),
            orientation: inv,
        }
    }

    pub fn forward(&self) -> Vec3 {
        self.orientation.forward()
    }

    pub fn up(&self) -> Vec3 {
        self.orientation.up()
    }

    pub fn right(&self) -> Vec3 {
        self.orientation.right()
    }

    /// Ray from this pose's position along its forward axis.
    pub fn forward_ray(&self) -> Ray {
        Ray::new(self.position, self.forward())
    }
}

/// Free-function form of [`Pose::apply`].
pub fn pose_apply(p: &Pose, v: Vec3, kind: VectorKind) -> Vec3 {
    p.apply(v, kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`. Panics on a zero direction.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    /// Ray from `from` through `to`; `None` when the points coincide.
    pub fn through(from: Vec3, to: Vec3) -> Option<Self> {
        Some(Self {
            origin: from,
            direction: (to - from).try_normalize()?,
        })
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    Box {
        center: Vec3,
        half_extents: Vec3,
        #[serde(default)]
        orientation: UnitQuaternion,
    },
    /// Flat rectangle in the local XY plane of `pose`; its normal is local +Z.
    Quad {
        pose: Pose,
        half_width: f64,
        half_height: f64,
    },
}

impl Shape {
    /// The first size parameter that is not strictly positive, if any.
    pub fn non_positive_dimension(&self) -> Option<(&'static str, f64)> {
        let check = |name: &'static str, v: f64| (!(v > 0.0 && v.is_finite())).then_some((name, v));
        match *self {
            Shape::Sphere { radius, .. } => check("radius", radius),
            Shape::Box { half_extents, .. } => check("half_extents.x", half_extents.x)
                .or_else(|| check("half_extents.y", half_extents.y))
                .or_else(|| check("half_extents.z", half_extents.z)),
            Shape::Quad {
                half_width,
                half_height,
                ..
            } => check("half_width", half_width).or_else(|| check("half_height", half_height)),
        }
    }

    /// True when `p` is inside the solid or within `margin` of its surface.
    /// Quads have no interior and only count points within `margin` of them.
    pub fn contains(&self, p: Vec3, margin: f64) -> bool {
        match *self {
            Shape::Sphere { center, radius } => p.distance(center) <= radius + margin,
            Shape::Box {
                center,
                half_extents,
                orientation,
            } => {
                let local = orientation.inverse().rotate(p - center).abs();
                local.x <= half_extents.x + margin
                    && local.y <= half_extents.y + margin
                    && local.z <= half_extents.z + margin
            }
            Shape::Quad {
                pose,
                half_width,
                half_height,
            } => {
                let local = pose.apply_inverse(p, VectorKind::Point);
                local.z.abs() <= margin
                    && local.x.abs() <= half_width + margin
                    && local.y.abs() <= half_height + margin
            }
        }
    }

    /// World-space axis-aligned bounds `(min, max)`.
    pub fn aabb(&self) -> (Vec3, Vec3) {
        match *self {
            Shape::Sphere { center, radius } => {
                let r = Vec3::new(radius, radius, radius);
                (center - r, center + r)
            }
            Shape::Box {
                center,
                half_extents,
                orientation,
            } => {
                let ext = orientation.rotate(Vec3::X * half_extents.x).abs()
                    + orientation.rotate(Vec3::Y * half_extents.y).abs()
                    + orientation.rotate(Vec3::Z * half_extents.z).abs();
                (center - ext, center + ext)
            }
            Shape::Quad {
                pose,
                half_width,
                half_height,
            } => {
                let ext = pose.right().abs() * half_width + pose.up().abs() * half_height;
                (pose.position - ext, pose.position + ext)
            }
        }
    }
}

/// Where a ray meets a shape's surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub t: f64,
    pub point: Vec3,
    /// Outward normal for solids; for quads, the side facing the ray.
    pub normal: Vec3,
    /// Quad-local coordinates normalized by the half extents, in `[-1, 1]²`.
    pub uv: Option<(f64, f64)>,
}

/// Smallest `t > SELF_HIT_EPSILON` at which `r` meets the surface of `s`.
pub fn intersect(r: &Ray, s: &Shape) -> Option<SurfaceHit> {
    match *s {
        Shape::Sphere { center, radius } => intersect_sphere(r, center, radius),
        Shape::Box {
            center,
            half_extents,
            orientation,
        } => intersect_box(r, center, half_extents, orientation),
        Shape::Quad {
            pose,
            half_width,
            half_height,
        } => intersect_quad(r, &pose, half_width, half_height),
    }
}

fn intersect_sphere(r: &Ray, center: Vec3, radius: f64) -> Option<SurfaceHit> {
    let oc = r.origin - center;
    let b = oc.dot(r.direction);
    let c = oc.length_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    // Numerically stable root pair.
    let q = -b - b.signum() * disc.sqrt();
    let (mut t0, mut t1) = if q != 0.0 { (q, c / q) } else { (0.0, 0.0) };
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let t = [t0, t1].into_iter().find(|&t| t > SELF_HIT_EPSILON)?;
    let point = r.at(t);
    Some(SurfaceHit {
        t,
        point,
        normal: ((point - center) / radius).normalize(),
        uv: None,
    })
}

fn intersect_box(
    r: &Ray,
    center: Vec3,
    half: Vec3,
    orientation: UnitQuaternion,
) -> Option<SurfaceHit> {
    let inv = orientation.inverse();
    let o = inv.rotate(r.origin - center);
    let d = inv.rotate(r.direction);
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut near_axis = (0usize, 0.0f64);
    let mut far_axis = (0usize, 0.0f64);
    for axis in 0..3 {
        let (oa, da, ha) = (o.component(axis), d.component(axis), half.component(axis));
        if da == 0.0 {
            if oa.abs() > ha {
                return None;
            }
            continue;
        }
        let (mut t0, mut t1) = ((-ha - oa) / da, (ha - oa) / da);
        // Entering through the face whose outward normal opposes the ray.
        let (mut s0, mut s1) = (-1.0, 1.0);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
            std::mem::swap(&mut s0, &mut s1);
        }
        if t0 > t_near {
            t_near = t0;
            near_axis = (axis, s0);
        }
        if t1 < t_far {
            t_far = t1;
            far_axis = (axis, s1);
        }
        if t_near > t_far {
            return None;
        }
    }
    let (t, (axis, sign)) = if t_near > SELF_HIT_EPSILON {
        (t_near, near_axis)
    } else if t_far > SELF_HIT_EPSILON {
        (t_far, far_axis)
    } else {
        return None;
    };
    let mut local_normal = Vec3::ZERO;
    match axis {
        0 => local_normal.x = sign,
        1 => local_normal.y = sign,
        _ => local_normal.z = sign,
    }
    Some(SurfaceHit {
        t,
        point: r.at(t),
        normal: orientation.rotate(local_normal),
        uv: None,
    })
}

fn intersect_quad(r: &Ray, pose: &Pose, half_width: f64, half_height: f64) -> Option<SurfaceHit> {
    let n = pose.orientation.rotate(Vec3::Z);
    let denom = n.dot(r.direction);
    if denom.abs() < 1e-15 {
        return None;
    }
    let t = n.dot(pose.position - r.origin) / denom;
    if !(t > SELF_HIT_EPSILON) {
        return None;
    }
    let point = r.at(t);
    let local = pose.apply_inverse(point, VectorKind::Point);
    if local.x.abs() > half_width || local.y.abs() > half_height {
        return None;
    }
    Some(SurfaceHit {
        t,
        point,
        normal: if denom < 0.0 { n } else { -n },
        uv: Some((local.x / half_width, local.y / half_height)),
    })
}

/// Parameters of the mutually closest points of two half-lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestApproach {
    pub t_a: f64,
    pub t_b: f64,
    pub distance: f64,
}

/// Closest approach of two rays restricted to `t ≥ 0` on both.
/// `None` when the rays are parallel.
pub fn closest_approach(a: &Ray, b: &Ray) -> Option<ClosestApproach> {
    // Solve in a canonical argument order so swapping the inputs swaps the
    // outputs bit-for-bit.
    if ray_key(b) < ray_key(a) {
        return closest_approach_ordered(b, a).map(|c| ClosestApproach {
            t_a: c.t_b,
            t_b: c.t_a,
            distance: c.distance,
        });
    }
    closest_approach_ordered(a, b)
}

fn ray_key(r: &Ray) -> [u64; 6] {
    let f = |v: f64| {
        // Total order over the bit patterns, with -0.0 == 0.0.
        let v = if v == 0.0 { 0.0 } else { v };
        let bits = v.to_bits();
        if bits >> 63 == 1 {
            !bits
        } else {
            bits | (1 << 63)
        }
    };
    [
        f(r.origin.x),
        f(r.origin.y),
        f(r.origin.z),
        f(r.direction.x),
        f(r.direction.y),
        f(r.direction.z),
    ]
}

fn closest_approach_ordered(a: &Ray, b: &Ray) -> Option<ClosestApproach> {
    let da = a.direction;
    let db = b.direction;
    let cos = da.dot(db);
    if cos.abs() > PARALLEL_CUTOFF {
        return None;
    }
    let r = a.origin - b.origin;
    let c = da.dot(r);
    let f = db.dot(r);
    let denom = 1.0 - cos * cos;

    let mut t_a = (cos * f - c) / denom;
    if t_a < 0.0 {
        t_a = 0.0;
    }
    let mut t_b = cos * t_a + f;
    if t_b < 0.0 {
        t_b = 0.0;
        t_a = (-c).max(0.0);
    }
    let distance = (a.at(t_a) - b.at(t_b)).length();
    Some(ClosestApproach { t_a, t_b, distance })
}
