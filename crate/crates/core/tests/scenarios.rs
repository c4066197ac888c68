mod support;

use std::collections::BTreeSet;
use std::sync::Arc;

use foldray::folding::effective_main_ray;
use foldray::geom::{intersect, Pose, Ray};
use foldray::reach::target_point;
use foldray::scene::{bundled, ObjectId, Scene};
use foldray::session::{
    format_event_log, parse_trace, replay, Buttons, InputFrame, InteractionEvent, SessionError,
    TraceError,
};
use foldray::{Config, Session, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

/// First hit by testing every object, ties to the lower id.
fn brute_first_hit(scene: &Scene, ray: &Ray) -> Option<(ObjectId, f64)> {
    let mut best: Option<(ObjectId, f64)> = None;
    for o in scene.objects() {
        if let Some(h) = intersect(ray, &o.shape) {
            let better = match best {
                None => true,
                Some((id, t)) => h.t < t - 1e-12 || ((h.t - t).abs() <= 1e-12 && o.id < id),
            };
            if better {
                best = Some((o.id, h.t));
            }
        }
    }
    best
}

#[test]
fn canonical_wall_room_log() {
    let scene = scene("wall_room");
    let summary = run(&scene, TRACE_WALL_ROOM);
    let kinds: Vec<_> = summary.events.iter().map(|e| e.event.clone()).collect();
    assert!(
        matches!(
            kinds.as_slice(),
            [
                InteractionEvent::FoldCreated { .. },
                InteractionEvent::SelectionMade {
                    object_id: ObjectId(1)
                }
            ]
        ),
        "{kinds:?}"
    );
    assert_eq!(summary.frames, 6);
    assert_eq!(summary.selections, vec![ObjectId(1)]);
    assert_eq!(summary.final_fold_count, 1);
}

#[test]
fn every_trace_selects_its_target() {
    for (name, trace) in TRACES {
        let scene = scene(name);
        let target = scene.targets().next().unwrap().id;
        let summary = run(&scene, trace);
        assert_eq!(summary.selections, vec![target], "{name}");
    }
}

#[test]
fn replay_is_deterministic_and_leaves_scene_untouched() {
    for (name, trace) in TRACES {
        let scene = Arc::new(scene(name));
        let before = scene.digest();
        let log = |_: ()| {
            let s = replay(scene.clone(), Config::default(), &frames(trace), |_| {}).unwrap();
            format_event_log(&s.events)
        };
        let (a, b) = (log(()), log(()));
        assert_eq!(a.as_bytes(), b.as_bytes(), "{name}");
        assert!(!a.is_empty());
        assert_eq!(scene.digest(), before, "{name}");
    }
}

#[test]
fn selections_agree_with_brute_force_raycast() {
    for (name, trace) in TRACES {
        let scene = scene(name);
        let mut session = Session::new(Arc::new(scene.clone()), Config::default()).unwrap();
        let mut checked = 0;
        for f in frames(trace) {
            let ray = effective_main_ray(&session.rig(&f), session.chain(), session.config());
            let (_, events) = session.step(&f).unwrap();
            for e in events {
                if let InteractionEvent::SelectionMade { object_id } = e.event {
                    let (id, _) = brute_first_hit(&scene, &ray.unwrap()).unwrap();
                    assert_eq!(id, object_id, "{name}");
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 1, "{name}");
    }
}

#[test]
fn raycast_matches_brute_force() {
    for scene in bundled::ALL.iter().map(|(n, _)| support::scene(n)) {
        let (lo, hi) = scene.bounds().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(scene.objects().len() as u64);
        for _ in 0..1000 {
            let origin = Vec3::new(
                rng.gen_range(lo.x..hi.x),
                rng.gen_range(lo.y..hi.y),
                rng.gen_range(lo.z..hi.z),
            );
            let ray = Ray::new(origin, random_unit(&mut rng));
            let fast = scene
                .raycast_first(&ray, f64::INFINITY)
                .map(|h| (h.object_id, h.t));
            assert_eq!(fast, brute_first_hit(&scene, &ray));
        }
    }
}

#[test]
fn empty_trace_yields_no_events() {
    let s = replay(Arc::new(scene("wall_room")), Config::default(), &[], |_| {}).unwrap();
    assert_eq!(s.frames, 0);
    assert!(s.events.is_empty());
    assert_eq!(format_event_log(&s.events), "");
}

#[test]
fn malformed_line_is_reported_by_number() {
    let lines: Vec<&str> = TRACE_WALL_ROOM.lines().collect();
    let text = format!("{}\n{}\n{{\"seq\": oops}}\n", lines[0], lines[1]);
    match parse_trace(&text) {
        Err(TraceError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn out_of_order_frames_are_rejected() {
    let f = frames(TRACE_WALL_ROOM);
    let mut session = Session::new(Arc::new(scene("wall_room")), Config::default()).unwrap();
    session.step(&f[1]).unwrap();
    assert!(matches!(
        session.step(&f[0]),
        Err(SessionError::OutOfOrder { .. })
    ));
    let text = format!(
        "{}\n{}\n",
        TRACE_WALL_ROOM.lines().nth(1).unwrap(),
        TRACE_WALL_ROOM.lines().next().unwrap()
    );
    assert!(matches!(
        parse_trace(&text),
        Err(TraceError::OutOfOrder { line: 2, .. })
    ));
}

#[test]
fn event_log_lines_are_tagged_json() {
    let s = run(&scene("wall_room"), TRACE_WALL_ROOM);
    for line in format_event_log(&s.events).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["seq"].is_u64());
        assert!(v["event"].is_string());
    }
    let last = s.events.last().unwrap().to_json_line();
    assert!(last.contains("\"event\":\"SelectionMade\""));
    assert!(last.contains("\"object_id\":1"));
}

#[test]
fn pop_on_empty_chain_and_failed_trigger() {
    let scene = scene("wall_room");
    let mut session = Session::new(Arc::new(scene), Config::default()).unwrap();
    let idle = frames(TRACE_WALL_ROOM)[0];
    let mut f = idle;
    f.buttons = Buttons {
        pop: true,
        ..Buttons::NONE
    };
    assert!(session.step(&f).unwrap().1.is_empty());
    f.seq += 1;
    f.buttons = Buttons {
        trigger: true,
        ..Buttons::NONE
    };
    let (_, ev) = session.step(&f).unwrap();
    assert_eq!(ev[0].event, InteractionEvent::SelectionAttemptFailed);
}

#[test]
fn idle_frame_renders_two_point_polylines() {
    let scene = scene("wall_room");
    let mut session = Session::new(Arc::new(scene), Config::default()).unwrap();
    let (render, events) = session.step(&frames(TRACE_WALL_ROOM)[0]).unwrap();
    assert!(events.is_empty());
    assert!(render.crossing_indicator.is_none());
    assert!(render.window.is_none());
    assert_eq!(render.main_polyline.len(), 2);
    assert_eq!(render.secondary_polyline.len(), 2);
}

#[test]
fn pinhole_cannot_cross_from_one_centre() {
    // Why the secondary ray is carried through the window rigidly: two rays
    // leaving the same camera centre meet only at that centre.
    let c = Vec3::new(0.0, 1.5, -6.0);
    let a = Ray::new(c, Vec3::new(0.1, 0.0, -1.0));
    let b = Ray::new(c, Vec3::new(-0.1, 0.0, -1.0));
    assert!(foldray::folding::crossing_point(&a, &b, 0.05).is_none());
}

fn arb_pose() -> impl Strategy<Value = Pose> {
    (any::<u64>()).prop_map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Pose::new(random_point(&mut rng, 3.0), random_rotation(&mut rng))
    })
}

fn arb_frame() -> impl Strategy<Value = (Pose, Pose, Pose, [bool; 4])> {
    (arb_pose(), arb_pose(), arb_pose(), any::<[bool; 4]>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_input_keeps_session_invariants(
        steps in prop::collection::vec(arb_frame(), 1..40),
        crossing_seed in any::<u64>(),
    ) {
        let scene = Arc::new(scene("wall_room"));
        let digest = scene.digest();
        let config = Config { max_folds: 3, epsilon: 0.5, ..Config::default() };
        let mut session = Session::new(scene.clone(), config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(crossing_seed);
        let (mut created, mut popped) = (0usize, 0usize);
        let mut origin = *session.user_origin();
        for (i, (head, left, mut right, b)) in steps.into_iter().enumerate() {
            // Make crossings common: aim the right hand at a point on the left ray.
            if rng.gen_bool(0.6) {
                let target = left.position + left.forward() * rng.gen_range(0.5..4.0);
                if let Some(q) = foldray::UnitQuaternion::look_rotation(target - right.position, Vec3::Y) {
                    right.orientation = q;
                }
            }
            let frame = InputFrame {
                seq: i as u64,
                head,
                left,
                right,
                buttons: Buttons { trigger: b[0], primary: b[1], pop: b[2], teleport: b[3] },
            };
            let (render, events) = session.step(&frame).unwrap();
            prop_assert!(events.len() <= 1);
            let mut teleported = false;
            for e in &events {
                prop_assert_eq!(e.seq, frame.seq);
                match e.event {
                    InteractionEvent::FoldCreated { .. } => created += 1,
                    InteractionEvent::FoldPopped => popped += 1,
                    InteractionEvent::Teleported { .. } => teleported = true,
                    _ => {}
                }
            }
            if teleported {
                created = session.chain().len();
                popped = 0;
                origin = *session.user_origin();
            }
            prop_assert_eq!(*session.user_origin(), origin);
            prop_assert!(session.chain().len() <= 3);
            prop_assert_eq!(created - popped, session.chain().len());
            prop_assert!(render.main_polyline.len() >= 2);
            prop_assert!(render.secondary_polyline.len() >= 2);
            prop_assert_eq!(render.window.is_some(), !session.chain().is_empty());
        }
        prop_assert_eq!(scene.digest(), digest);
    }
}

#[test]
fn fold_above_wall_sees_target() {
    let scene = scene("wall_room");
    let fold = Vec3::new(0.0, 2.5, -2.5);
    let target = target_point(&scene.object(ObjectId(1)).unwrap().shape);
    assert!(scene.segment_visible(fold, target, &BTreeSet::from([ObjectId(1)])));
    assert!(!scene.segment_visible(
        scene.spawn_hand_position(foldray::scene::Hand::Right),
        target,
        &BTreeSet::from([ObjectId(1)])
    ));
}
