//! Helpers for scripting input traces: aim controllers at world points,
//! through the window, or at the window image of a world point.

use crate::folding::{fold_camera, window_pose, Config, FoldChain};
use crate::geom::{Pose, UnitQuaternion, Vec3};
use crate::scene::{Hand, Scene};
use crate::session::{Buttons, InputFrame};

/// Orientation whose forward axis points from `from` toward `to`.
pub fn aim(from: Vec3, to: Vec3) -> UnitQuaternion {
    let dir = to - from;
    UnitQuaternion::look_rotation(dir, Vec3::Y)
        .or_else(|| UnitQuaternion::look_rotation(dir, Vec3::Z))
        .expect("aim points must differ")
}

/// Head orientation looking along `dir` with no roll.
pub fn head_looking(dir: Vec3) -> UnitQuaternion {
    UnitQuaternion::look_rotation(dir, Vec3::Y).expect("non-vertical look direction")
}

/// Builds frames for one scene, tracking the user origin so that aim points
/// can be given in world coordinates.
#[derive(Debug, Clone)]
pub struct TraceBuilder<'a> {
    scene: &'a Scene,
    config: Config,
    user_origin: Pose,
    /// Head pose in tracking space.
    head: Pose,
    next_seq: u64,
    frames: Vec<InputFrame>,
}

impl<'a> TraceBuilder<'a> {
    pub fn new(scene: &'a Scene, config: Config) -> Self {
        Self {
            scene,
            config,
            user_origin: *scene.spawn(),
            head: Pose::IDENTITY,
            next_seq: 1,
            frames: Vec::new(),
        }
    }

    pub fn frames(&self) -> &[InputFrame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<InputFrame> {
        self.frames
    }

    /// Mirrors the session's teleport: the tracking origin moves to `position`.
    pub fn set_origin_position(&mut self, position: Vec3) {
        self.user_origin.position = position;
    }

    pub fn user_origin(&self) -> &Pose {
        &self.user_origin
    }

    /// Sets the tracking-space head orientation (position unchanged).
    pub fn look(&mut self, orientation: UnitQuaternion) -> &mut Self {
        self.head.orientation = orientation;
        self
    }

    /// Points the head along a world direction.
    pub fn look_along(&mut self, world_dir: Vec3) -> &mut Self {
        let local = self.user_origin.inverse().transform_direction(world_dir);
        self.look(head_looking(local))
    }

    pub fn set_head_position(&mut self, position: Vec3) -> &mut Self {
        self.head.position = position;
        self
    }

    pub fn head_world(&self) -> Pose {
        self.user_origin.compose(&self.head)
    }

    /// Tracking-space controller position: the scene's hand offset carried by
    /// the head's heading (the body turns with the head, not its pitch).
    fn hand_local_position(&self, hand: Hand) -> Vec3 {
        let body = Pose::new(self.head.position, self.head.orientation.yaw_only());
        body.transform_point(self.scene.hand_offsets().get(hand).position)
    }

    pub fn hand_world_position(&self, hand: Hand) -> Vec3 {
        self.user_origin
            .transform_point(self.hand_local_position(hand))
    }

    fn hand_aimed_at(&self, hand: Hand, world_target: Vec3) -> Pose {
        let from = self.hand_local_position(hand);
        let to = self.user_origin.inverse().transform_point(world_target);
        Pose::new(from, aim(from, to))
    }

    /// World point at the window coordinates `(u, v)` for the current head.
    pub fn window_point(&self, u: f64, v: f64) -> Vec3 {
        let w = window_pose(&self.head_world(), &self.config);
        w.pose()
            .transform_point(Vec3::new(u * w.half_size, v * w.half_size, 0.0))
    }

    /// World point where the dominant ray must cross the window to send the
    /// remapped ray through `world_target`, given the chain's last fold.
    pub fn window_point_for(&self, chain: &FoldChain, world_target: Vec3) -> Option<Vec3> {
        let cam = fold_camera(chain, &self.head_world(), &self.config)?;
        let (u, v) = cam.project(world_target)?;
        (u.abs() <= 1.0 && v.abs() <= 1.0).then(|| self.window_point(u, v))
    }

    /// Aim point for the secondary ray so that its portal continuation passes
    /// through `world_target` from the chain's last fold.
    pub fn portal_aim_for(&self, chain: &FoldChain, world_target: Vec3) -> Option<Vec3> {
        let head = self.head_world();
        let cam = fold_camera(chain, &head, &self.config)?;
        Some(head.transform_point(cam.pose.inverse().transform_point(world_target)))
    }

    /// Appends a frame with both controllers aimed at world points.
    pub fn push_aimed(&mut self, left_at: Vec3, right_at: Vec3, buttons: Buttons) -> InputFrame {
        let frame = InputFrame {
            seq: self.next_seq,
            head: self.head,
            left: self.hand_aimed_at(Hand::Left, left_at),
            right: self.hand_aimed_at(Hand::Right, right_at),
            buttons,
        };
        self.next_seq += 1;
        self.frames.push(frame);
        frame
    }

    /// Appends a frame aiming the dominant controller at `main_at` and the
    /// other at `secondary_at`.
    pub fn push_dominant(
        &mut self,
        main_at: Vec3,
        secondary_at: Vec3,
        buttons: Buttons,
    ) -> InputFrame {
        match self.config.dominant_hand {
            Hand::Right => self.push_aimed(secondary_at, main_at, buttons),
            Hand::Left => self.push_aimed(main_at, secondary_at, buttons),
        }
    }

    /// Appends a frame with explicit tracking-space controller poses.
    pub fn push_raw(&mut self, left: Pose, right: Pose, buttons: Buttons) -> InputFrame {
        let frame = InputFrame {
            seq: self.next_seq,
            head: self.head,
            left,
            right,
            buttons,
        };
        self.next_seq += 1;
        self.frames.push(frame);
        frame
    }

    /// Tracking-space pose of a controller pointing along a world direction.
    pub fn hand_pointing(&self, hand: Hand, world_dir: Vec3) -> Pose {
        let from = self.hand_local_position(hand);
        let dir = self.user_origin.inverse().transform_direction(world_dir);
        Pose::new(from, aim(from, from + dir))
    }
}

pub fn press_primary() -> Buttons {
    Buttons {
        primary: true,
        ..Buttons::NONE
    }
}

pub fn press_trigger() -> Buttons {
    Buttons {
        trigger: true,
        ..Buttons::NONE
    }
}

pub fn press_teleport() -> Buttons {
    Buttons {
        teleport: true,
        ..Buttons::NONE
    }
}

pub fn press_pop() -> Buttons {
    Buttons {
        pop: true,
        ..Buttons::NONE
    }
}
