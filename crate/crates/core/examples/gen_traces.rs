//! Regenerates the bundled traces under `assets/traces/`.
//!
//! Run with: cargo run -p foldray-core --example gen_traces

use std::path::Path;
use std::sync::Arc;

use foldray::authoring::{press_primary, press_trigger, TraceBuilder};
use foldray::reach::target_point;
use foldray::scene::bundled;
use foldray::session::{format_trace, Buttons, InputFrame, InteractionEvent};
use foldray::{Config, Scene, Session, Vec3};

/// Drives a builder and a live session side by side so window aim points can
/// be computed from the chain the session actually holds.
struct Script<'a> {
    builder: TraceBuilder<'a>,
    session: Session,
}

impl<'a> Script<'a> {
    fn new(scene: &'a Scene) -> Self {
        Self {
            builder: TraceBuilder::new(scene, Config::default()),
            session: Session::new(Arc::new(scene.clone()), Config::default()).unwrap(),
        }
    }

    fn run(&mut self, frame: InputFrame) -> Vec<InteractionEvent> {
        let (_, events) = self.session.step(&frame).unwrap();
        events.into_iter().map(|e| e.event).collect()
    }

    /// Cross both rays at `point`, physically or through the window.
    fn cross_at(&mut self, point: Vec3, buttons: Buttons) -> Vec<InteractionEvent> {
        let chain = self.session.chain().clone();
        let frame = if chain.is_empty() {
            self.builder.push_dominant(point, point, buttons)
        } else {
            let main = self
                .builder
                .window_point_for(&chain, point)
                .expect("fold point visible in the window");
            let secondary = self.builder.portal_aim_for(&chain, point).unwrap();
            self.builder.push_dominant(main, secondary, buttons)
        };
        self.run(frame)
    }

    /// Fold at `point`, looking toward `look_at` from it.
    fn fold(&mut self, point: Vec3, look_at: Option<Vec3>) {
        assert!(self.cross_at(point, Buttons::NONE).is_empty());
        let events = self.cross_at(point, press_primary());
        assert!(
            matches!(events.as_slice(), [InteractionEvent::FoldCreated { .. }]),
            "fold at {point} failed: {events:?}"
        );
        if let Some(at) = look_at {
            self.builder.look_along(at - point);
        }
    }

    /// Aim through the window (or directly) at `target` and pull the trigger.
    fn select(&mut self, target: Vec3) -> Vec<InteractionEvent> {
        let chain = self.session.chain().clone();
        let main = if chain.is_empty() {
            target
        } else {
            self.builder.window_point_for(&chain, target).unwrap()
        };
        let rest = self.builder.window_point(-0.8, -0.8);
        let secondary = if chain.is_empty() {
            main + Vec3::new(-3.0, -1.0, 0.0)
        } else {
            rest
        };
        let hover = self.builder.push_dominant(main, secondary, Buttons::NONE);
        assert!(self.run(hover).is_empty());
        let pull = self.builder.push_dominant(main, secondary, press_trigger());
        self.run(pull)
    }

    fn idle(&mut self) {
        let ahead = self.builder.head_world().position + self.builder.head_world().forward() * 10.0;
        let left = self.builder.hand_world_position(foldray::scene::Hand::Left);
        let right = self
            .builder
            .hand_world_position(foldray::scene::Hand::Right);
        // Parallel rays never cross.
        let f = self
            .builder
            .push_aimed(ahead + (left - right), ahead, Buttons::NONE);
        assert!(self.run(f).is_empty());
    }
}

fn target_of(scene: &Scene) -> Vec3 {
    target_point(&scene.targets().next().unwrap().shape)
}

fn wall_room() -> Vec<InputFrame> {
    let scene = bundled::wall_room();
    let target = target_of(&scene);
    let mut s = Script::new(&scene);
    s.idle();
    s.fold(Vec3::new(0.0, 2.5, -2.5), Some(target));
    let events = s.select(target);
    assert!(matches!(
        events.as_slice(),
        [InteractionEvent::SelectionMade { .. }]
    ));
    s.idle();
    s.builder.into_frames()
}

fn open_room() -> Vec<InputFrame> {
    let scene = bundled::by_name("open_room").unwrap();
    let target = target_of(&scene);
    let mut s = Script::new(&scene);
    s.idle();
    let events = s.select(target);
    assert!(matches!(
        events.as_slice(),
        [InteractionEvent::SelectionMade { .. }]
    ));
    s.idle();
    s.builder.into_frames()
}

fn u_maze() -> Vec<InputFrame> {
    let scene = bundled::by_name("u_maze").unwrap();
    let target = target_of(&scene);
    let first = Vec3::new(0.5, 0.0, -4.0);
    let second = Vec3::new(-3.0, 0.0, -7.5);
    let mut s = Script::new(&scene);
    s.idle();
    s.fold(first, Some(second));
    s.fold(second, Some(target));
    let events = s.select(target);
    assert!(matches!(
        events.as_slice(),
        [InteractionEvent::SelectionMade { .. }]
    ));
    s.idle();
    s.builder.into_frames()
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/traces");
    std::fs::create_dir_all(&dir).unwrap();
    for (name, frames) in [
        ("wall_room", wall_room()),
        ("open_room", open_room()),
        ("u_maze", u_maze()),
    ] {
        let path = dir.join(format!("{name}.jsonl"));
        std::fs::write(&path, format_trace(&frames)).unwrap();
        println!("{}: {} frames", path.display(), frames.len());
    }
}
