//! Folding-ray selection engine.
//!
//! A user crosses two controller rays to place a fold point, looks through a
//! head-locked window showing the scene from that point, and keeps folding or
//! selects through the window. Everything here is deterministic and
//! independent of any renderer.

// Negated float comparisons are used to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod authoring;
pub mod folding;
pub mod geom;
pub mod reach;
pub mod scene;
pub mod session;

pub use folding::{Config, FoldChain};
pub use geom::{Pose, Ray, Shape, UnitQuaternion, Vec3};
pub use scene::{load_scene, ObjectId, Role, Scene};
pub use session::{EventRecord, InputFrame, InteractionEvent, RenderState, Session};
