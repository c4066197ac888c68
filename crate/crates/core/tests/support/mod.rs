//! Independent oracles shared by the integration tests. Nothing here calls
//! the closed-form routines it is used to check.

#![allow(dead_code)]

use std::sync::Arc;

use foldray::geom::{Pose, Ray, UnitQuaternion, Vec3};
use foldray::scene::{bundled, Scene};
use foldray::session::{parse_trace, replay, InputFrame, ReplaySummary};
use foldray::Config;
use rand::Rng;

pub const TRACE_WALL_ROOM: &str = include_str!("../../assets/traces/wall_room.jsonl");
pub const TRACE_OPEN_ROOM: &str = include_str!("../../assets/traces/open_room.jsonl");
pub const TRACE_U_MAZE: &str = include_str!("../../assets/traces/u_maze.jsonl");

/// `(scene name, trace text)` for every bundled trace.
pub const TRACES: [(&str, &str); 3] = [
    ("wall_room", TRACE_WALL_ROOM),
    ("open_room", TRACE_OPEN_ROOM),
    ("u_maze", TRACE_U_MAZE),
];

pub fn scene(name: &str) -> Scene {
    bundled::by_name(name).unwrap_or_else(|| panic!("no bundled scene {name}"))
}

pub fn frames(trace: &str) -> Vec<InputFrame> {
    parse_trace(trace).expect("bundled trace parses")
}

pub fn run(scene: &Scene, trace: &str) -> ReplaySummary {
    replay(
        Arc::new(scene.clone()),
        Config::default(),
        &frames(trace),
        |_| {},
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Random generation

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let l = v.length();
        if l > 0.1 && l <= 1.0 {
            return v / l;
        }
    }
}

pub fn random_point<R: Rng>(rng: &mut R, half: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-half..half),
        rng.gen_range(-half..half),
        rng.gen_range(-half..half),
    )
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> UnitQuaternion {
    loop {
        let q = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0f64),
        ];
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return UnitQuaternion::new_normalize(q[0], q[1], q[2], q[3]).unwrap();
        }
    }
}

/// `n` near-uniform directions on the unit sphere (Fibonacci lattice).
pub fn sphere_directions(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), y, r * phi.sin())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rotation matrices built straight from quaternion components

pub type Mat3 = [[f64; 3]; 3];

pub fn rotation_matrix(q: UnitQuaternion) -> Mat3 {
    let [w, x, y, z] = q.to_wxyz();
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub fn mat_mul(m: &Mat3, v: Vec3) -> Vec3 {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

pub fn mat_mul_transpose(m: &Mat3, v: Vec3) -> Vec3 {
    Vec3::new(
        m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
        m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
        m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z,
    )
}

// ---------------------------------------------------------------------------
// Closest approach by dense sampling

fn dist2_at(a: &Ray, b: &Ray, ta: f64, tb: f64) -> f64 {
    let pa = a.origin + a.direction * ta;
    let pb = b.origin + b.direction * tb;
    (pa - pb).length_squared()
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
fn golden_min(mut lo: f64, mut hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let t = 0.5 * (lo + hi);
    // Endpoints matter when the minimum is clamped.
    [(t, f(t)), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct SampledApproach {
    pub t_a: f64,
    pub t_b: f64,
    pub distance: f64,
}

/// Minimal distance over `t_a, t_b ∈ [0, 100]`: a 1e-3 grid over `t_a` with
/// a 1D search over `t_b` at each sample, then local refinement.
pub fn sampled_closest_approach(a: &Ray, b: &Ray) -> SampledApproach {
    const T_MAX: f64 = 100.0;
    const STEP: f64 = 1e-3;
    let best_tb = |ta: f64, iters| golden_min(0.0, T_MAX, iters, |tb| dist2_at(a, b, ta, tb));
    let mut best = (0.0, f64::INFINITY);
    let n = (T_MAX / STEP) as usize;
    for i in 0..=n {
        let ta = i as f64 * STEP;
        let (_, d) = best_tb(ta, 30);
        if d < best.1 {
            best = (ta, d);
        }
    }
    let lo = (best.0 - 2.0 * STEP).max(0.0);
    let hi = (best.0 + 2.0 * STEP).min(T_MAX);
    let (t_a, _) = golden_min(lo, hi, 80, |ta| best_tb(ta, 120).1);
    let (t_b, d2) = best_tb(t_a, 120);
    SampledApproach {
        t_a,
        t_b,
        distance: d2.sqrt(),
    }
}

// ---------------------------------------------------------------------------
// Ray marching against an oriented box

pub struct OrientedBox {
    pub center: Vec3,
    pub half: Vec3,
    pub rot: Mat3,
}

impl OrientedBox {
    pub fn inside(&self, p: Vec3) -> bool {
        let l = mat_mul_transpose(&self.rot, p - self.center);
        l.x.abs() <= self.half.x && l.y.abs() <= self.half.y && l.z.abs() <= self.half.z
    }
}

/// First `t` at which the inside test flips, marching in `step` increments up
/// to `t_max` and refining by bisection.
pub fn march_first_crossing(
    ray: &Ray,
    inside: impl Fn(Vec3) -> bool,
    step: f64,
    t_max: f64,
) -> Option<f64> {
    let at = |t: f64| ray.origin + ray.direction * t;
    let start = inside(at(0.0));
    let n = (t_max / step).ceil() as usize;
    let mut prev = 0.0;
    for i in 1..=n {
        let t = i as f64 * step;
        if inside(at(t)) != start {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(at(mid)) == start {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = t;
    }
    None
}

// ---------------------------------------------------------------------------
// Pinhole projection, written against the rotation matrix

/// Window coordinates of `world` for a camera at `pose` with vertical field of
/// view `fov` and unit aspect.
pub fn project_uv(pose: &Pose, fov: f64, world: Vec3) -> (f64, f64) {
    let m = rotation_matrix(pose.orientation);
    let local = mat_mul_transpose(&m, world - pose.position);
    let depth = -local.z;
    let t = (fov / 2.0).tan();
    (local.x / (depth * t), local.y / (depth * t))
}

pub fn point_ray_distance(ray: &Ray, p: Vec3) -> f64 {
    let d = p - ray.origin;
    let along = d.dot(ray.direction);
    (d - ray.direction * along).length()
}
