//! Immutable world model: occluders, selectable targets and neutral props,
//! with first-hit ray queries, segment visibility and a content digest.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geom::{intersect, Pose, Ray, Shape, UnitQuaternion, Vec3};

/// Segments shorter than their length minus this are considered blocked.
pub const SEGMENT_CLEARANCE: f64 = 1e-6;

/// Hits closer together than this along a ray count as a tie.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u64);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Occluder,
    Target,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub role: Role,
    pub label: String,
    pub shape: Shape,
}

impl SceneObject {
    pub fn is_selectable(&self) -> bool {
        self.role == Role::Target
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hand {
    Left,
    Right,
}

impl Hand {
    pub fn other(self) -> Hand {
        match self {
            Hand::Left => Hand::Right,
            Hand::Right => Hand::Left,
        }
    }
}

/// Controller placements relative to the head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandOffsets {
    pub left: Pose,
    pub right: Pose,
}

impl Default for HandOffsets {
    fn default() -> Self {
        Self {
            left: Pose::from_position(Vec3::new(-0.20, -0.25, -0.30)),
            right: Pose::from_position(Vec3::new(0.20, -0.25, -0.30)),
        }
    }
}

impl HandOffsets {
    pub fn get(&self, hand: Hand) -> &Pose {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }
}

/// First object struck by a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub object_id: ObjectId,
    pub t: f64,
    pub point: Vec3,
    pub normal: Vec3,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene document is not valid UTF-8: {0}")]
    Utf8(#[from] std::str::Utf8Error),
    #[error("scene parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid object {id}: {message}")]
    InvalidObject { id: ObjectId, message: String },
    #[error("invalid {field}: {message}")]
    InvalidField { field: String, message: String },
}

impl From<serde_json::Error> for SceneError {
    fn from(e: serde_json::Error) -> Self {
        SceneError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// A loaded scene. There is no mutable access once constructed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scene {
    spawn: Pose,
    hand_offsets: HandOffsets,
    objects: Vec<SceneObject>,
}

impl Scene {
    /// Validates and builds a scene. Objects are stored in ascending id order.
    pub fn new(
        spawn: Pose,
        hand_offsets: HandOffsets,
        mut objects: Vec<SceneObject>,
    ) -> Result<Self, SceneError> {
        objects.sort_by_key(|o| o.id);
        for pair in objects.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(SceneError::InvalidObject {
                    id: pair[0].id,
                    message: "duplicate id".into(),
                });
            }
        }
        for o in &objects {
            if let Some((name, value)) = o.shape.non_positive_dimension() {
                return Err(SceneError::InvalidObject {
                    id: o.id,
                    message: format!("{name} must be strictly positive, got {value}"),
                });
            }
        }
        Ok(Self {
            spawn,
            hand_offsets,
            objects,
        })
    }

    pub fn spawn(&self) -> &Pose {
        &self.spawn
    }

    pub fn hand_offsets(&self) -> &HandOffsets {
        &self.hand_offsets
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn object(&self, id: ObjectId) -> Option<&SceneObject> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn targets(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.iter().filter(|o| o.is_selectable())
    }

    /// World position of a controller while the head stands at spawn.
    pub fn spawn_hand_position(&self, hand: Hand) -> Vec3 {
        self.spawn
            .transform_point(self.hand_offsets.get(hand).position)
    }

    /// Axis-aligned bounds of all objects, `None` for an empty scene.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        self.objects
            .iter()
            .map(|o| o.shape.aabb())
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    pub fn raycast_first(&self, ray: &Ray, t_max: f64) -> Option<Hit> {
        self.raycast_first_excluding(ray, t_max, &BTreeSet::new())
    }

    /// Minimal-t hit with `t < t_max`, skipping ignored ids. Ties within
    /// 1e-12 go to the lower id.
    pub fn raycast_first_excluding(
        &self,
        ray: &Ray,
        t_max: f64,
        ignore: &BTreeSet<ObjectId>,
    ) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        // Objects are id-sorted, so a later hit only wins if strictly closer.
        for o in self.objects.iter().filter(|o| !ignore.contains(&o.id)) {
            let Some(h) = intersect(ray, &o.shape) else {
                continue;
            };
            if !(h.t < t_max) {
                continue;
            }
            if best.is_none_or(|b| h.t < b.t - TIE_EPSILON) {
                best = Some(Hit {
                    object_id: o.id,
                    t: h.t,
                    point: h.point,
                    normal: h.normal,
                });
            }
        }
        best
    }

    /// True when nothing (other than ignored objects) blocks the segment `p → q`.
    pub fn segment_visible(&self, p: Vec3, q: Vec3, ignore: &BTreeSet<ObjectId>) -> bool {
        let Some(ray) = Ray::through(p, q) else {
            return true;
        };
        let len = p.distance(q);
        let reach = len - SEGMENT_CLEARANCE;
        if reach <= 0.0 {
            return true;
        }
        if self.raycast_first_excluding(&ray, reach, ignore).is_none() {
            // Cast from both ends: a segment starting on a surface may graze it
            // one way and not the other.
            let back = Ray::through(q, p).expect("distinct endpoints");
            return self.raycast_first_excluding(&back, reach, ignore).is_none();
        }
        false
    }

    /// True when `p` lies inside (or within `margin` of) any object.
    pub fn point_in_any_object(&self, p: Vec3, margin: f64) -> bool {
        self.objects.iter().any(|o| o.shape.contains(p, margin))
    }

    /// Canonical serialization: compact JSON, objects in id order, floats in
    /// shortest round-trip form.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scene serializes")
    }

    /// Hex SHA-256 of [`Scene::canonical_json`].
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

pub fn load_scene(bytes: &[u8]) -> Result<Scene, SceneError> {
    let text = std::str::from_utf8(bytes)?;
    let doc: document::SceneDoc = serde_json::from_str(text)?;
    doc.into_scene()
}

/// On-disk layout. Orientations are read raw so that bad quaternions can be
/// reported against the object that carries them.
mod document {
    use super::*;

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct SceneDoc {
        spawn: PoseDoc,
        #[serde(default)]
        hand_offsets: Option<HandsDoc>,
        objects: Vec<ObjectDoc>,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct PoseDoc {
        position: Vec3,
        #[serde(default = "identity")]
        orientation: [f64; 4],
    }

    fn identity() -> [f64; 4] {
        [1.0, 0.0, 0.0, 0.0]
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct HandsDoc {
        left: PoseDoc,
        right: PoseDoc,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ObjectDoc {
        id: u64,
        role: Role,
        #[serde(default)]
        label: String,
        shape: ShapeDoc,
    }

    #[derive(Deserialize)]
    #[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
    enum ShapeDoc {
        Sphere {
            center: Vec3,
            radius: f64,
        },
        Box {
            center: Vec3,
            half_extents: Vec3,
            #[serde(default = "identity")]
            orientation: [f64; 4],
        },
        Quad {
            pose: PoseDoc,
            half_width: f64,
            half_height: f64,
        },
    }

    fn quaternion(
        raw: [f64; 4],
        what: impl Fn(String) -> SceneError,
    ) -> Result<UnitQuaternion, SceneError> {
        UnitQuaternion::from_wxyz_checked(raw)
            .map_err(|n| what(format!("orientation has norm {n}, expected 1 (±1e-3)")))
    }

    impl PoseDoc {
        fn into_pose(self, what: impl Fn(String) -> SceneError) -> Result<Pose, SceneError> {
            Ok(Pose::new(
                self.position,
                quaternion(self.orientation, what)?,
            ))
        }
    }

    fn field(name: &'static str) -> impl Fn(String) -> SceneError {
        move |message| SceneError::InvalidField {
            field: name.to_string(),
            message,
        }
    }

    impl SceneDoc {
        pub fn into_scene(self) -> Result<Scene, SceneError> {
            let spawn = self.spawn.into_pose(field("spawn"))?;
            let hand_offsets = match self.hand_offsets {
                Some(h) => HandOffsets {
                    left: h.left.into_pose(field("hand_offsets.left"))?,
                    right: h.right.into_pose(field("hand_offsets.right"))?,
                },
                None => HandOffsets::default(),
            };
            let objects = self
                .objects
                .into_iter()
                .map(ObjectDoc::into_object)
                .collect::<Result<Vec<_>, _>>()?;
            Scene::new(spawn, hand_offsets, objects)
        }
    }

    impl ObjectDoc {
        fn into_object(self) -> Result<SceneObject, SceneError> {
            let id = ObjectId(self.id);
            let what = |message| SceneError::InvalidObject { id, message };
            let shape = match self.shape {
                ShapeDoc::Sphere { center, radius } => Shape::Sphere { center, radius },
                ShapeDoc::Box {
                    center,
                    half_extents,
                    orientation,
                } => Shape::Box {
                    center,
                    half_extents,
                    orientation: quaternion(orientation, what)?,
                },
                ShapeDoc::Quad {
                    pose,
                    half_width,
                    half_height,
                } => Shape::Quad {
                    pose: pose.into_pose(what)?,
                    half_width,
                    half_height,
                },
            };
            Ok(SceneObject {
                id,
                role: self.role,
                label: self.label,
                shape,
            })
        }
    }
}

/// Scenes shipped with the crate.
pub mod bundled {
    use super::{load_scene, Scene};

    pub const WALL_ROOM: &str = include_str!("../assets/scenes/wall_room.json");
    pub const OPEN_ROOM: &str = include_str!("../assets/scenes/open_room.json");
    pub const U_MAZE: &str = include_str!("../assets/scenes/u_maze.json");
    pub const FOUR_MARKERS: &str = include_str!("../assets/scenes/four_markers.json");

    /// `(name, document)` for every bundled scene.
    pub const ALL: [(&str, &str); 4] = [
        ("wall_room", WALL_ROOM),
        ("open_room", OPEN_ROOM),
        ("u_maze", U_MAZE),
        ("four_markers", FOUR_MARKERS),
    ];

    pub fn by_name(name: &str) -> Option<Scene> {
        ALL.iter()
            .find(|(n, _)| *n == name)
            .map(|(_, doc)| load_scene(doc.as_bytes()).expect("bundled scene is valid"))
    }

    pub fn wall_room() -> Scene {
        by_name("wall_room").unwrap()
    }
}
