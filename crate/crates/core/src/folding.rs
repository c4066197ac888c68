//! The folding-ray technique: crossing detection, fold cameras, the
//! head-locked viewport window, remapping rays through the window, fold-chain
//! maintenance, selection and teleport destinations.
//!
//! Once a chain holds at least one fold, both controller rays act only through
//! the window. The dominant ray is remapped through the window's image: the
//! window point `(u, v)` becomes the pinhole ray of the fold camera. The
//! secondary ray passes through the window as through a portal: the segment
//! beyond the window is carried rigidly from the head's frame into the fold
//! camera's frame. Because the camera shares the head's orientation, that
//! portal transform is a pure translation by `camera − head`. The portal ray
//! starts away from the camera centre, so it can cross the pinhole ray in
//! front of the camera and place the next fold.

use std::f64::consts::FRAC_PI_3;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{closest_approach, intersect, Pose, Ray, Shape, UnitQuaternion, Vec3};
use crate::scene::{Hand, Hit, ObjectId, Scene};

/// Distance from the head to the viewport window.
pub const WINDOW_DISTANCE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Crossing threshold between the two rays, meters.
    pub epsilon: f64,
    pub dominant_hand: Hand,
    pub max_folds: usize,
    /// Fold camera vertical field of view, radians.
    pub fov: f64,
    pub window_half_size: f64,
    /// Fold camera displacement along the head's forward axis, meters.
    pub camera_offset: f64,
    pub near_plane: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            dominant_hand: Hand::Right,
            max_folds: 8,
            fov: FRAC_PI_3,
            window_half_size: 0.5,
            camera_offset: 0.0,
            near_plane: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field} must be positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("fov must lie in (0, π), got {0}")]
    FovOutOfRange(f64),
    #[error("camera_offset must be finite and non-negative, got {0}")]
    BadCameraOffset(f64),
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::NotPositive { field, value })
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("max_folds", self.max_folds as f64)?;
        positive("fov", self.fov)?;
        positive("window_half_size", self.window_half_size)?;
        positive("near_plane", self.near_plane)?;
        if self.fov >= std::f64::consts::PI {
            return Err(ConfigError::FovOutOfRange(self.fov));
        }
        if !(self.camera_offset >= 0.0 && self.camera_offset.is_finite()) {
            return Err(ConfigError::BadCameraOffset(self.camera_offset));
        }
        Ok(())
    }
}

/// A committed crossing point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldPoint {
    pub position: Vec3,
    pub created_head_orientation: UnitQuaternion,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoldError {
    #[error("fold chain is full ({max} folds)")]
    ChainFull { max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldChain {
    folds: Vec<FoldPoint>,
    max: usize,
}

impl FoldChain {
    pub fn new(max: usize) -> Self {
        Self {
            folds: Vec::new(),
            max,
        }
    }

    pub fn folds(&self) -> &[FoldPoint] {
        &self.folds
    }

    pub fn last(&self) -> Option<&FoldPoint> {
        self.folds.last()
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn max(&self) -> usize {
        self.max
    }

    pub fn push(&mut self, fold: FoldPoint) -> Result<(), FoldError> {
        if self.folds.len() >= self.max {
            return Err(FoldError::ChainFull { max: self.max });
        }
        self.folds.push(fold);
        Ok(())
    }

    pub fn pop(&mut self) -> Option<FoldPoint> {
        self.folds.pop()
    }

    pub fn clear(&mut self) {
        self.folds.clear();
    }
}

/// Appends a fold at `point`, recording the head orientation at creation.
pub fn create_fold(chain: &FoldChain, point: Vec3, head: &Pose) -> Result<FoldChain, FoldError> {
    let mut next = chain.clone();
    next.push(FoldPoint {
        position: point,
        created_head_orientation: head.orientation,
    })?;
    Ok(next)
}

/// Removes the most recent fold; no-op on an empty chain.
pub fn pop_fold(chain: &FoldChain) -> FoldChain {
    let mut next = chain.clone();
    next.pop();
    next
}

/// The head-locked square screen showing the current fold camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViewportWindow {
    pub center: Vec3,
    /// Same as the head's orientation: the quad's +Z normal faces the head.
    pub orientation: UnitQuaternion,
    pub half_size: f64,
    pub distance: f64,
}

impl ViewportWindow {
    pub fn pose(&self) -> Pose {
        Pose::new(self.center, self.orientation)
    }

    pub fn normal(&self) -> Vec3 {
        self.orientation.rotate(Vec3::Z)
    }

    pub fn quad(&self) -> Shape {
        Shape::Quad {
            pose: self.pose(),
            half_width: self.half_size,
            half_height: self.half_size,
        }
    }

    /// Where `ray` pierces the window, with normalized window coordinates.
    pub fn pierce(&self, ray: &Ray) -> Option<(Vec3, (f64, f64))> {
        let hit = intersect(ray, &self.quad())?;
        Some((hit.point, hit.uv.expect("quads report uv")))
    }
}

/// Window for a head pose: 1.5 m along the head's forward axis, facing back
/// at the head, sharing the head's up axis.
pub fn window_pose(head: &Pose, config: &Config) -> ViewportWindow {
    ViewportWindow {
        center: head.position + head.forward() * WINDOW_DISTANCE,
        orientation: head.orientation,
        half_size: config.window_half_size,
        distance: WINDOW_DISTANCE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldCamera {
    pub pose: Pose,
    pub vertical_fov: f64,
    pub aspect: f64,
    pub near: f64,
}

impl FoldCamera {
    fn tan_half_fov(&self) -> f64 {
        (self.vertical_fov * 0.5).tan()
    }

    /// Window coordinates of a world point, or `None` when the point is not
    /// in front of the near plane. The result may fall outside `[-1, 1]²`.
    pub fn project(&self, world: Vec3) -> Option<(f64, f64)> {
        let local = self
            .pose
            .apply_inverse(world, crate::geom::VectorKind::Point);
        let depth = -local.z;
        if !(depth > self.near) {
            return None;
        }
        let t = self.tan_half_fov();
        Some((local.x / (depth * t * self.aspect), local.y / (depth * t)))
    }

    /// True when `world` is in front of the near plane and inside the frustum.
    pub fn sees(&self, world: Vec3) -> bool {
        self.project(world)
            .is_some_and(|(u, v)| u.abs() <= 1.0 && v.abs() <= 1.0)
    }
}

/// Camera at the last fold, oriented exactly as the head is now.
pub fn fold_camera(chain: &FoldChain, head: &Pose, config: &Config) -> Option<FoldCamera> {
    let fold = chain.last()?;
    let position = if config.camera_offset == 0.0 {
        fold.position
    } else {
        fold.position + head.forward() * config.camera_offset
    };
    Some(FoldCamera {
        pose: Pose::new(position, head.orientation),
        vertical_fov: config.fov,
        aspect: 1.0,
        near: config.near_plane,
    })
}

/// Pinhole ray through window coordinates `(u, v)`.
pub fn uv_to_camera_ray(u: f64, v: f64, cam: &FoldCamera) -> Ray {
    let t = cam.tan_half_fov();
    let local = Vec3::new(u * t * cam.aspect, v * t, -1.0).normalize();
    Ray {
        origin: cam.pose.position,
        direction: cam.pose.transform_direction(local).normalize(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Remap {
    pub effective: Ray,
    pub window_uv: (f64, f64),
    /// Where the physical ray pierced the window.
    pub window_point: Vec3,
}

/// Dominant-ray remap: the window point becomes the fold camera's pinhole ray.
/// `None` when the chain is empty or the physical ray misses the window.
pub fn remap_through_window(
    physical: &Ray,
    head: &Pose,
    chain: &FoldChain,
    config: &Config,
) -> Option<Remap> {
    let cam = fold_camera(chain, head, config)?;
    let (window_point, (u, v)) = window_pose(head, config).pierce(physical)?;
    Some(Remap {
        effective: uv_to_camera_ray(u, v, &cam),
        window_uv: (u, v),
        window_point,
    })
}

/// Secondary-ray remap: the part of the physical ray beyond the window, moved
/// rigidly from the head frame into the fold camera frame. `None` when the
/// chain is empty or the ray misses the window.
pub fn portal_through_window(
    physical: &Ray,
    head: &Pose,
    chain: &FoldChain,
    config: &Config,
) -> Option<Remap> {
    let cam = fold_camera(chain, head, config)?;
    let (window_point, window_uv) = window_pose(head, config).pierce(physical)?;
    let portal = cam.pose.compose(&head.inverse());
    Some(Remap {
        effective: Ray::new(
            portal.transform_point(window_point),
            portal.transform_direction(physical.direction),
        ),
        window_uv,
        window_point,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub point: Vec3,
    pub t_main: f64,
    pub distance: f64,
}

/// Point on `main` closest to `secondary`, when the rays pass within `epsilon`
/// of each other in front of both origins.
pub fn crossing_point(main: &Ray, secondary: &Ray, epsilon: f64) -> Option<Crossing> {
    let c = closest_approach(main, secondary)?;
    (c.distance <= epsilon && c.t_a > 0.0 && c.t_b > 0.0).then(|| Crossing {
        point: main.at(c.t_a),
        t_main: c.t_a,
        distance: c.distance,
    })
}

/// World-frame head and controller rays for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rig {
    pub head: Pose,
    pub left: Ray,
    pub right: Ray,
}

impl Rig {
    pub fn ray(&self, hand: Hand) -> &Ray {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }

    pub fn dominant(&self, config: &Config) -> &Ray {
        self.ray(config.dominant_hand)
    }

    pub fn secondary(&self, config: &Config) -> &Ray {
        self.ray(config.dominant_hand.other())
    }
}

/// The ray that actually meets the scene: the dominant controller ray with no
/// folds, otherwise its remap through the window (absent if it misses).
pub fn effective_main_ray(rig: &Rig, chain: &FoldChain, config: &Config) -> Option<Ray> {
    let physical = rig.dominant(config);
    if chain.is_empty() {
        Some(*physical)
    } else {
        remap_through_window(physical, &rig.head, chain, config).map(|r| r.effective)
    }
}

/// Secondary counterpart of [`effective_main_ray`].
pub fn effective_secondary_ray(rig: &Rig, chain: &FoldChain, config: &Config) -> Option<Ray> {
    let physical = rig.secondary(config);
    if chain.is_empty() {
        Some(*physical)
    } else {
        portal_through_window(physical, &rig.head, chain, config).map(|r| r.effective)
    }
}

/// Crossing of the two effective rays, kept only if it lies on the visible
/// part of the main ray (not beyond its first hit).
pub fn current_crossing(
    scene: &Scene,
    rig: &Rig,
    chain: &FoldChain,
    config: &Config,
) -> Option<Crossing> {
    let main = effective_main_ray(rig, chain, config)?;
    let secondary = effective_secondary_ray(rig, chain, config)?;
    let crossing = crossing_point(&main, &secondary, config.epsilon)?;
    match scene.raycast_first(&main, f64::INFINITY) {
        Some(hit) if hit.t < crossing.t_main => None,
        _ => Some(crossing),
    }
}

/// First hit of the effective main ray, whatever its role.
pub fn main_ray_hit(scene: &Scene, rig: &Rig, chain: &FoldChain, config: &Config) -> Option<Hit> {
    let ray = effective_main_ray(rig, chain, config)?;
    scene.raycast_first(&ray, f64::INFINITY)
}

/// Id of the target the effective main ray strikes first, if the first thing
/// it strikes is a target.
pub fn select_target(
    scene: &Scene,
    rig: &Rig,
    chain: &FoldChain,
    config: &Config,
) -> Option<ObjectId> {
    let hit = main_ray_hit(scene, rig, chain, config)?;
    scene
        .object(hit.object_id)
        .filter(|o| o.is_selectable())
        .map(|o| o.id)
}

/// Offset from a teleport surface along its normal.
pub const TELEPORT_LIFT: f64 = 1e-3;

/// Landing pose where the effective main ray first meets any object, facing
/// the head's current heading.
pub fn teleport_destination(
    scene: &Scene,
    rig: &Rig,
    chain: &FoldChain,
    config: &Config,
) -> Option<Pose> {
    let hit = main_ray_hit(scene, rig, chain, config)?;
    Some(Pose::new(
        hit.point + hit.normal * TELEPORT_LIFT,
        rig.head.orientation.yaw_only(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn cfg() -> Config {
        Config::default()
    }

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).length() <= tol
    }

    fn chain_at(p: Vec3) -> FoldChain {
        create_fold(&FoldChain::new(8), p, &Pose::IDENTITY).unwrap()
    }

    #[test]
    fn config_rejects_non_positive_values() {
        assert!(cfg().validate().is_ok());
        let mut c = cfg();
        c.epsilon = 0.0;
        assert_eq!(
            c.validate(),
            Err(ConfigError::NotPositive {
                field: "epsilon",
                value: 0.0
            })
        );
        let mut c = cfg();
        c.max_folds = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.fov = 4.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.camera_offset = -0.1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn crossing_sits_on_main_ray() {
        let main = Ray::new(Vec3::ZERO, Vec3::X);
        let secondary = Ray::new(Vec3::new(1.0, -1.0, 0.0), Vec3::Y);
        let c = crossing_point(&main, &secondary, 0.05).unwrap();
        assert_eq!(c.point, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(c.t_main, 1.0);

        // Skew by 0.2: main lies at z = 0, secondary at z = 0.2.
        let skew = Ray::new(Vec3::new(1.0, -1.0, 0.2), Vec3::Y);
        assert!(crossing_point(&main, &skew, 0.05).is_none());
        let near = Ray::new(Vec3::new(1.0, -1.0, 0.03), Vec3::Y);
        let c = crossing_point(&main, &near, 0.05).unwrap();
        assert!(close(c.point, Vec3::new(1.0, 0.0, 0.0), 1e-15));
    }

    #[test]
    fn crossing_needs_both_rays_in_front() {
        // Rays meeting at the main ray's origin only.
        let main = Ray::new(Vec3::ZERO, Vec3::X);
        let secondary = Ray::new(Vec3::new(0.0, -1.0, 0.0), Vec3::Y);
        assert!(crossing_point(&main, &secondary, 0.05).is_none());
    }

    #[test]
    fn window_examples() {
        let w = window_pose(&Pose::IDENTITY, &cfg());
        assert_eq!(w.center, Vec3::new(0.0, 0.0, -1.5));
        assert_eq!(w.normal(), Vec3::Z);

        let moved = window_pose(&Pose::from_position(Vec3::X), &cfg());
        assert_eq!(moved.center, Vec3::new(1.0, 0.0, -1.5));

        let yawed = window_pose(
            &Pose::new(Vec3::ZERO, UnitQuaternion::from_yaw(FRAC_PI_2)),
            &cfg(),
        );
        assert!(close(yawed.center, Vec3::new(-1.5, 0.0, 0.0), 1e-12));
    }

    #[test]
    fn principal_and_edge_camera_rays() {
        let cam =
            fold_camera(&chain_at(Vec3::new(1.0, 2.0, 3.0)), &Pose::IDENTITY, &cfg()).unwrap();
        let r = uv_to_camera_ray(0.0, 0.0, &cam);
        assert_eq!(r.origin, Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(r.direction, Vec3::FORWARD);

        let edge = uv_to_camera_ray(1.0, 0.0, &cam).direction;
        // Closed form: normalize(tan 30°, 0, −1) = (sin 30°, 0, −cos 30°).
        assert!(close(
            edge,
            Vec3::new(FRAC_PI_6.sin(), 0.0, -FRAC_PI_6.cos()),
            1e-15
        ));
    }

    #[test]
    fn camera_follows_fold_and_head() {
        let p = Vec3::new(0.3, 2.0, -4.0);
        let head = Pose::new(
            Vec3::new(0.0, 1.0, 0.0),
            UnitQuaternion::from_yaw_pitch(0.4, -0.2),
        );
        let cam = fold_camera(&chain_at(p), &head, &cfg()).unwrap();
        assert_eq!(cam.pose.position, p);
        assert_eq!(cam.pose.orientation, head.orientation);

        let mut offset = cfg();
        offset.camera_offset = 0.5;
        let cam = fold_camera(&chain_at(p), &head, &offset).unwrap();
        assert!(close(cam.pose.position, p + head.forward() * 0.5, 1e-15));
    }

    #[test]
    fn remap_through_window_center_is_camera_forward() {
        let fold = Vec3::new(0.0, 2.5, -2.5);
        let chain = chain_at(fold);
        let physical = Ray::new(Vec3::new(0.0, 0.0, 0.0), Vec3::FORWARD);
        let remap = remap_through_window(&physical, &Pose::IDENTITY, &chain, &cfg()).unwrap();
        assert_eq!(remap.window_uv, (0.0, 0.0));
        assert_eq!(remap.effective.origin, fold);
        assert_eq!(remap.effective.direction, Vec3::FORWARD);

        let away = Ray::new(Vec3::ZERO, Vec3::new(0.0, 1.0, -1.0));
        assert!(remap_through_window(&away, &Pose::IDENTITY, &chain, &cfg()).is_none());
        assert!(
            remap_through_window(&physical, &Pose::IDENTITY, &FoldChain::new(8), &cfg()).is_none()
        );
    }

    #[test]
    fn portal_translates_secondary_ray() {
        let fold = Vec3::new(2.0, 0.0, -3.0);
        let head = Pose::new(Vec3::new(0.0, 1.0, 0.0), UnitQuaternion::from_yaw(0.3));
        let physical = Ray::through(
            Vec3::new(-0.2, 0.75, -0.3),
            head.position + head.forward() * 3.0,
        )
        .unwrap();
        let remap = portal_through_window(&physical, &head, &chain_at(fold), &cfg()).unwrap();
        assert!(close(remap.effective.direction, physical.direction, 1e-12));
        assert!(close(
            remap.effective.origin,
            remap.window_point + (fold - head.position),
            1e-12
        ));
    }

    #[test]
    fn chain_limits_and_pop() {
        let mut chain = FoldChain::new(2);
        for i in 0..2 {
            chain = create_fold(&chain, Vec3::X * i as f64, &Pose::IDENTITY).unwrap();
        }
        assert_eq!(
            create_fold(&chain, Vec3::Z, &Pose::IDENTITY),
            Err(FoldError::ChainFull { max: 2 })
        );
        let popped = pop_fold(&chain);
        assert_eq!(popped.len(), 1);
        assert_eq!(popped.folds()[0].position, Vec3::ZERO);
        let empty = pop_fold(&pop_fold(&popped));
        assert!(empty.is_empty());

        let f1 = create_fold(&FoldChain::new(8), Vec3::X, &Pose::IDENTITY).unwrap();
        let f2 = create_fold(&pop_fold(&f1), Vec3::Y, &Pose::IDENTITY).unwrap();
        assert_eq!(f2.len(), 1);
        assert_eq!(f2.folds()[0].position, Vec3::Y);
    }

    #[test]
    fn effective_ray_identity_without_folds() {
        let rig = Rig {
            head: Pose::IDENTITY,
            left: Ray::new(Vec3::new(-0.2, 0.0, 0.0), Vec3::FORWARD),
            right: Ray::new(Vec3::new(0.2, 0.0, 0.0), Vec3::new(0.1, 0.0, -1.0)),
        };
        assert_eq!(
            effective_main_ray(&rig, &FoldChain::new(8), &cfg()),
            Some(rig.right)
        );
        let mut left = cfg();
        left.dominant_hand = Hand::Left;
        assert_eq!(
            effective_main_ray(&rig, &FoldChain::new(8), &left),
            Some(rig.left)
        );
    }
}
