//! Brute-force reachability oracle.
//!
//! A target is selectable with `k` folds when there is an unobstructed
//! polyline from the dominant hand to the target with `k` interior vertices.
//! Candidate vertices are the free points of a uniform grid; the minimum is
//! found by breadth-first search over the visibility graph.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{Shape, Vec3};
use crate::scene::{Hand, ObjectId, Scene};

/// Default padding added around the scene bounds.
pub const BOUNDS_MARGIN: f64 = 1.0;

/// Grid points this close to an object count as inside it.
const INSIDE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachOptions {
    pub max_folds: usize,
    pub grid_step: f64,
    /// Axis-aligned `(min, max)`; `None` uses the scene bounds plus 1 m.
    pub bounds: Option<(Vec3, Vec3)>,
    pub hand: Hand,
}

impl Default for ReachOptions {
    fn default() -> Self {
        Self {
            max_folds: 2,
            grid_step: 0.25,
            bounds: None,
            hand: Hand::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error("no object with id {0}")]
    UnknownTarget(ObjectId),
    #[error("grid step must be positive, got {0}")]
    BadGridStep(f64),
    #[error("grid bounds are empty")]
    EmptyBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachEntry {
    pub target: ObjectId,
    /// `None` when unreachable within `max_folds`.
    pub min_folds: Option<usize>,
    /// Hand, fold vertices, target point. Empty when unreachable.
    pub witness: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachabilityReport {
    pub max_folds: usize,
    pub grid_step: f64,
    pub entries: Vec<ReachEntry>,
}

/// Point the oracle aims for on a target object.
pub fn target_point(shape: &Shape) -> Vec3 {
    match *shape {
        Shape::Sphere { center, .. } | Shape::Box { center, .. } => center,
        Shape::Quad { pose, .. } => pose.position,
    }
}

/// Free grid points inside `bounds`, in x-major, then y, then z order.
pub fn grid_nodes(scene: &Scene, bounds: (Vec3, Vec3), step: f64) -> Vec<Vec3> {
    let (lo, hi) = bounds;
    let count = |a: f64, b: f64| ((b - a) / step + 1e-9).floor() as i64 + 1;
    let (nx, ny, nz) = (count(lo.x, hi.x), count(lo.y, hi.y), count(lo.z, hi.z));
    let mut nodes = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let p = Vec3::new(
                    lo.x + i as f64 * step,
                    lo.y + j as f64 * step,
                    lo.z + k as f64 * step,
                );
                if !scene.point_in_any_object(p, INSIDE_MARGIN) {
                    nodes.push(p);
                }
            }
        }
    }
    nodes
}

pub fn default_bounds(scene: &Scene) -> Option<(Vec3, Vec3)> {
    let (lo, hi) = scene.bounds()?;
    let m = Vec3::new(BOUNDS_MARGIN, BOUNDS_MARGIN, BOUNDS_MARGIN);
    Some((lo - m, hi + m))
}

/// Minimum number of folds needed to reach `target`.
pub fn min_folds(
    scene: &Scene,
    target: ObjectId,
    opts: &ReachOptions,
) -> Result<ReachEntry, ReachError> {
    let object = scene
        .object(target)
        .ok_or(ReachError::UnknownTarget(target))?;
    if !(opts.grid_step > 0.0 && opts.grid_step.is_finite()) {
        return Err(ReachError::BadGridStep(opts.grid_step));
    }
    let bounds = opts
        .bounds
        .or_else(|| default_bounds(scene))
        .ok_or(ReachError::EmptyBounds)?;
    if !(bounds.0.x <= bounds.1.x && bounds.0.y <= bounds.1.y && bounds.0.z <= bounds.1.z) {
        return Err(ReachError::EmptyBounds);
    }

    let hand = scene.spawn_hand_position(opts.hand);
    let goal = target_point(&object.shape);
    let none = BTreeSet::new();
    let ignore_target: BTreeSet<ObjectId> = [target].into();
    let found = |path: Vec<Vec3>| ReachEntry {
        target,
        min_folds: Some(path.len() - 2),
        witness: path,
    };

    if scene.segment_visible(hand, goal, &ignore_target) {
        return Ok(found(vec![hand, goal]));
    }

    let nodes = grid_nodes(scene, bounds, opts.grid_step);
    let sees_goal: Vec<bool> = nodes
        .iter()
        .map(|&p| scene.segment_visible(p, goal, &ignore_target))
        .collect();

    // parent[i]: None = unvisited, Some(None) = reached from the hand,
    // Some(Some(j)) = reached from node j.
    let mut parent: Vec<Option<Option<usize>>> = vec![None; nodes.len()];
    let path_to = |parent: &[Option<Option<usize>>], mut i: usize| {
        let mut path = vec![goal, nodes[i]];
        while let Some(Some(j)) = parent[i] {
            path.push(nodes[j]);
            i = j;
        }
        path.push(hand);
        path.reverse();
        path
    };

    // Layer 1: everything the hand sees directly.
    let mut frontier: Vec<usize> = Vec::new();
    for (i, &p) in nodes.iter().enumerate() {
        if scene.segment_visible(hand, p, &none) {
            parent[i] = Some(None);
            frontier.push(i);
        }
    }

    if opts.max_folds >= 1 {
        // Shortest single-vertex polyline.
        let best = frontier
            .iter()
            .copied()
            .filter(|&i| sees_goal[i])
            .min_by(|&a, &b| {
                let len = |i: usize| hand.distance(nodes[i]) + nodes[i].distance(goal);
                len(a).total_cmp(&len(b)).then(a.cmp(&b))
            });
        if let Some(i) = best {
            return Ok(found(path_to(&parent, i)));
        }
    }
    // `frontier` holds the nodes first reached with `folds - 1` vertices.
    for folds in 2..=opts.max_folds {
        if frontier.is_empty() {
            break;
        }
        // Any unvisited goal-seeing node the frontier sees ends the search.
        let mut candidates: Vec<usize> = (0..nodes.len())
            .filter(|&i| sees_goal[i] && parent[i].is_none())
            .collect();
        candidates.sort_by(|&a, &b| {
            hand.distance(nodes[a])
                .total_cmp(&hand.distance(nodes[b]))
                .then(a.cmp(&b))
        });
        for c in candidates {
            if let Some(j) = visible_from(scene, &nodes, &frontier, nodes[c]) {
                parent[c] = Some(Some(j));
                return Ok(found(path_to(&parent, c)));
            }
        }
        if folds == opts.max_folds {
            break;
        }
        // Goal-seeing nodes are skipped: none of them is visible from here.
        let mut next = Vec::new();
        for i in 0..nodes.len() {
            if parent[i].is_some() || sees_goal[i] {
                continue;
            }
            if let Some(j) = visible_from(scene, &nodes, &frontier, nodes[i]) {
                parent[i] = Some(Some(j));
                next.push(i);
            }
        }
        frontier = next;
    }

    Ok(ReachEntry {
        target,
        min_folds: None,
        witness: Vec::new(),
    })
}

/// A frontier node that sees `p`, nearest first.
fn visible_from(scene: &Scene, nodes: &[Vec3], frontier: &[usize], p: Vec3) -> Option<usize> {
    let none = BTreeSet::new();
    let mut order: Vec<(f64, usize)> = frontier
        .iter()
        .map(|&j| (nodes[j].distance(p), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order
        .into_iter()
        .find(|&(_, j)| scene.segment_visible(nodes[j], p, &none))
        .map(|(_, j)| j)
}

/// Runs [`min_folds`] for every target in the scene.
pub fn reachability(scene: &Scene, opts: &ReachOptions) -> Result<ReachabilityReport, ReachError> {
    let entries = scene
        .targets()
        .map(|t| min_folds(scene, t.id, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReachabilityReport {
        max_folds: opts.max_folds,
        grid_step: opts.grid_step,
        entries,
    })
}
