//! Frame-by-frame interaction state machine.
//!
//! Controller and head poses in an [`InputFrame`] are in tracking space; the
//! session places them in the world through `user_origin`, which only a
//! teleport moves.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folding::{
    self, current_crossing, effective_main_ray, effective_secondary_ray, fold_camera, window_pose,
    Config, ConfigError, FoldCamera, FoldChain, Rig, ViewportWindow,
};
use crate::geom::{Pose, Ray, Vec3};
use crate::scene::{Hand, ObjectId, Scene};

/// Length at which unobstructed rays are drawn.
pub const RAY_RENDER_CAP: f64 = 100.0;

/// Edge-triggered buttons: each is true only on the frame it was pressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Buttons {
    pub trigger: bool,
    pub primary: bool,
    pub pop: bool,
    pub teleport: bool,
}

impl Buttons {
    pub const NONE: Buttons = Buttons {
        trigger: false,
        primary: false,
        pop: false,
        teleport: false,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputFrame {
    pub seq: u64,
    pub head: Pose,
    pub left: Pose,
    pub right: Pose,
    #[serde(default)]
    pub buttons: Buttons,
}

impl InputFrame {
    pub fn hand(&self, hand: Hand) -> &Pose {
        match hand {
            Hand::Left => &self.left,
            Hand::Right => &self.right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum InteractionEvent {
    FoldCreated { position: Vec3 },
    FoldPopped,
    SelectionMade { object_id: ObjectId },
    SelectionAttemptFailed,
    Teleported { pose: Pose },
}

/// An event stamped with the frame that produced it. Serializes as one
/// event-log line: `{"seq":…,"event":"…",…payload}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    #[serde(flatten)]
    pub event: InteractionEvent,
}

impl EventRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowView {
    pub window: ViewportWindow,
    pub camera: FoldCamera,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderState {
    pub seq: u64,
    pub main_polyline: Vec<Vec3>,
    pub secondary_polyline: Vec<Vec3>,
    pub crossing_indicator: Option<Vec3>,
    pub window: Option<WindowView>,
    pub hovered: Option<ObjectId>,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("frame seq {got} does not follow previous seq {last}")]
    OutOfOrder { last: u64, got: u64 },
}

/// Per-frame quantities derived from the rig and the current chain.
struct Derived {
    main: Option<Ray>,
    secondary: Option<Ray>,
    crossing: Option<folding::Crossing>,
}

#[derive(Debug, Clone)]
pub struct Session {
    scene: Arc<Scene>,
    config: Config,
    user_origin: Pose,
    chain: FoldChain,
    last_seq: Option<u64>,
}

impl Session {
    pub fn new(scene: Arc<Scene>, config: Config) -> Result<Self, SessionError> {
        config.validate()?;
        Ok(Self {
            user_origin: *scene.spawn(),
            chain: FoldChain::new(config.max_folds),
            scene,
            config,
            last_seq: None,
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn user_origin(&self) -> &Pose {
        &self.user_origin
    }

    pub fn chain(&self) -> &FoldChain {
        &self.chain
    }

    /// Places the frame's tracking-space poses in the world.
    pub fn rig(&self, frame: &InputFrame) -> Rig {
        let o = &self.user_origin;
        Rig {
            head: o.compose(&frame.head),
            left: o.compose(&frame.left).forward_ray(),
            right: o.compose(&frame.right).forward_ray(),
        }
    }

    fn derive(&self, rig: &Rig) -> Derived {
        Derived {
            main: effective_main_ray(rig, &self.chain, &self.config),
            secondary: effective_secondary_ray(rig, &self.chain, &self.config),
            crossing: current_crossing(&self.scene, rig, &self.chain, &self.config),
        }
    }

    /// Advances one frame. Buttons resolve in the order pop, primary, trigger,
    /// teleport; only the highest-priority pressed button acts.
    pub fn step(
        &mut self,
        frame: &InputFrame,
    ) -> Result<(RenderState, Vec<EventRecord>), SessionError> {
        if let Some(last) = self.last_seq {
            if frame.seq <= last {
                return Err(SessionError::OutOfOrder {
                    last,
                    got: frame.seq,
                });
            }
        }
        self.last_seq = Some(frame.seq);

        let rig = self.rig(frame);
        let before = self.derive(&rig);
        let mut events = Vec::new();
        let mut emit = |event| {
            events.push(EventRecord {
                seq: frame.seq,
                event,
            })
        };

        let b = frame.buttons;
        if b.pop {
            if self.chain.pop().is_some() {
                emit(InteractionEvent::FoldPopped);
            }
        } else if b.primary {
            if let Some(c) = before.crossing {
                match folding::create_fold(&self.chain, c.point, &rig.head) {
                    Ok(next) => {
                        self.chain = next;
                        emit(InteractionEvent::FoldCreated { position: c.point });
                    }
                    Err(e) => log::debug!("frame {}: {e}", frame.seq),
                }
            }
        } else if b.trigger {
            match folding::select_target(&self.scene, &rig, &self.chain, &self.config) {
                Some(object_id) => emit(InteractionEvent::SelectionMade { object_id }),
                None => emit(InteractionEvent::SelectionAttemptFailed),
            }
        } else if b.teleport {
            if let Some(dest) =
                folding::teleport_destination(&self.scene, &rig, &self.chain, &self.config)
            {
                // The tracking origin moves to the landing point. Its
                // orientation is kept so the user's heading does not jump.
                self.user_origin.position = dest.position;
                self.chain.clear();
                emit(InteractionEvent::Teleported { pose: dest });
            }
        }

        let changed = !events.is_empty();
        let (rig, derived) = if changed {
            let rig = self.rig(frame);
            let d = self.derive(&rig);
            (rig, d)
        } else {
            (rig, before)
        };
        Ok((self.render(&rig, &derived, frame.seq), events))
    }

    fn render(&self, rig: &Rig, d: &Derived, seq: u64) -> RenderState {
        let folds: Vec<Vec3> = self.chain.folds().iter().map(|f| f.position).collect();
        let polyline = |physical: &Ray, effective: Option<Ray>| -> Vec<Vec3> {
            let mut pts = vec![physical.origin];
            match effective {
                Some(ray) => {
                    pts.extend(folds.iter().copied());
                    pts.push(self.ray_end(&ray));
                }
                // Misses the window: inert, drawn straight.
                None => pts.push(physical.at(RAY_RENDER_CAP)),
            }
            pts
        };
        let window = fold_camera(&self.chain, &rig.head, &self.config).map(|camera| WindowView {
            window: window_pose(&rig.head, &self.config),
            camera,
        });
        RenderState {
            seq,
            main_polyline: polyline(rig.dominant(&self.config), d.main),
            secondary_polyline: polyline(rig.secondary(&self.config), d.secondary),
            crossing_indicator: d.crossing.map(|c| c.point),
            window,
            hovered: d
                .main
                .and_then(|r| self.scene.raycast_first(&r, f64::INFINITY))
                .map(|h| h.object_id),
        }
    }

    fn ray_end(&self, ray: &Ray) -> Vec3 {
        match self.scene.raycast_first(ray, RAY_RENDER_CAP) {
            Some(hit) => hit.point,
            None => ray.at(RAY_RENDER_CAP),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace line {line}: seq {got} does not follow previous seq {last}")]
    OutOfOrder { line: usize, last: u64, got: u64 },
}

/// Parses a line-delimited trace. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_trace(text: &str) -> Result<Vec<InputFrame>, TraceError> {
    let mut frames: Vec<InputFrame> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let frame: InputFrame = serde_json::from_str(line).map_err(|e| TraceError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Some(prev) = frames.last() {
            if frame.seq <= prev.seq {
                return Err(TraceError::OutOfOrder {
                    line: i + 1,
                    last: prev.seq,
                    got: frame.seq,
                });
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

pub fn format_trace(frames: &[InputFrame]) -> String {
    frames
        .iter()
        .map(|f| serde_json::to_string(f).expect("frames serialize") + "\n")
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplaySummary {
    pub frames: usize,
    pub selections: Vec<ObjectId>,
    pub final_fold_count: usize,
    pub events: Vec<EventRecord>,
}

/// Runs every frame through a fresh session, passing each event to `sink` as
/// it is produced.
pub fn replay(
    scene: Arc<Scene>,
    config: Config,
    frames: &[InputFrame],
    mut sink: impl FnMut(&EventRecord),
) -> Result<ReplaySummary, SessionError> {
    let mut session = Session::new(scene, config)?;
    let mut summary = ReplaySummary::default();
    for frame in frames {
        let (_, events) = session.step(frame)?;
        for e in events {
            sink(&e);
            if let InteractionEvent::SelectionMade { object_id } = e.event {
                summary.selections.push(object_id);
            }
            summary.events.push(e);
        }
        summary.frames += 1;
    }
    summary.final_fold_count = session.chain().len();
    Ok(summary)
}

/// Event log text, one JSON object per line.
pub fn format_event_log(events: &[EventRecord]) -> String {
    events.iter().map(|e| e.to_json_line() + "\n").collect()
}
