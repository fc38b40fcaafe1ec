//! The benchmark scenarios C1–C4 and the random single-obstacle training
//! worlds.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polarnav_core::gridworld::{MovingObstacle, PointSpec, PoseSpec, ScenarioSpec, StaticObstacle};
use polarnav_core::{wrap_angle, Point};

pub const SCENARIO_NAMES: [&str; 4] = ["c1", "c2", "c3", "c4"];

/// Side of the square training arena, meters.
pub const ARENA_M: f64 = 8.0;
pub const ARENA_RESOLUTION_M: f64 = 0.1;
/// Episode cap for training worlds.
pub const TRAINING_MAX_STEPS: usize = 80;
/// Number of world templates the training family cycles through.
pub const TRAINING_KINDS: usize = 3;

/// Free space kept between the obstacle and the start or goal.
const OBSTACLE_CLEARANCE_M: f64 = 0.45;

/// Held-out evaluation worlds draw seeds from this range; training seeds
/// stay below it.
const HELD_OUT_SEED_BASE: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldKind {
    /// A round pillar near the straight line to the goal.
    Pillar,
    /// A thin wall across the straight line to the goal.
    Wall,
    /// A box dead ahead with the goal behind the robot.
    TightTurn,
}

impl WorldKind {
    pub fn from_index(i: usize) -> Self {
        match i % TRAINING_KINDS {
            0 => WorldKind::Pillar,
            1 => WorldKind::Wall,
            _ => WorldKind::TightTurn,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            WorldKind::Pillar => "pillar",
            WorldKind::Wall => "wall",
            WorldKind::TightTurn => "tight_turn",
        }
    }
}

fn clearance(ob: &StaticObstacle, p: &Point) -> f64 {
    match *ob {
        StaticObstacle::Circle {
            center_x_m,
            center_y_m,
            radius_m,
            ..
        } => Point::new(center_x_m, center_y_m).distance(p) - radius_m,
        StaticObstacle::Rect {
            min_x_m,
            min_y_m,
            max_x_m,
            max_y_m,
            ..
        } => {
            let dx = (min_x_m - p.x).max(p.x - max_x_m).max(0.0);
            let dy = (min_y_m - p.y).max(p.y - max_y_m).max(0.0);
            dx.hypot(dy)
        }
    }
}

fn inside_arena(p: &Point, margin: f64) -> bool {
    p.x >= margin && p.y >= margin && p.x <= ARENA_M - margin && p.y <= ARENA_M - margin
}

fn rect_around(c: Point, half_x: f64, half_y: f64) -> StaticObstacle {
    StaticObstacle::rect(c.translated(-half_x, -half_y), c.translated(half_x, half_y))
}

fn propose(kind: WorldKind, rng: &mut ChaCha8Rng) -> (PoseSpec, Point, StaticObstacle) {
    let start = Point::new(rng.random_range(2.5..5.5), rng.random_range(2.5..5.5));
    let yaw = rng.random_range(-PI..PI);
    let pose = PoseSpec {
        x_m: start.x,
        y_m: start.y,
        yaw_rad: yaw,
    };
    match kind {
        WorldKind::Pillar | WorldKind::Wall => {
            let heading = rng.random_range(-PI..PI);
            let dist = rng.random_range(1.5..3.0);
            let goal = start.translated(dist * heading.cos(), dist * heading.sin());
            let mid = Point::new((start.x + goal.x) / 2.0, (start.y + goal.y) / 2.0);
            let (nx, ny) = (-heading.sin(), heading.cos());
            let ob = if kind == WorldKind::Pillar {
                let off = rng.random_range(-0.4..0.4);
                let r = rng.random_range(0.25..0.5);
                StaticObstacle::circle(mid.translated(off * nx, off * ny), r)
            } else {
                let half_len = rng.random_range(0.4..0.8);
                let off = rng.random_range(-0.4..0.4);
                let c = mid.translated(off * nx, off * ny);
                // wall along whichever axis is closer to perpendicular
                if heading.cos().abs() > heading.sin().abs() {
                    rect_around(c, 0.1, half_len)
                } else {
                    rect_around(c, half_len, 0.1)
                }
            };
            (pose, goal, ob)
        }
        WorldKind::TightTurn => {
            let behind = rng.random_range(0.6 * PI..PI) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let dir = wrap_angle(yaw + behind);
            let dist = rng.random_range(1.2..2.5);
            let goal = start.translated(dist * dir.cos(), dist * dir.sin());
            let ahead = rng.random_range(0.8..1.1);
            let half = rng.random_range(0.2..0.4);
            let c = start.translated(ahead * yaw.cos(), ahead * yaw.sin());
            (pose, goal, rect_around(c, half, half))
        }
    }
}

/// One world of the training family. Identical `(kind, seed)` give
/// identical worlds.
pub fn training_world(kind: WorldKind, seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let (start, goal, ob) = propose(kind, &mut rng);
        let s = Point::new(start.x_m, start.y_m);
        let (lo, hi) = ob.bounds();
        let ok = inside_arena(&goal, 0.8)
            && inside_arena(&lo, 0.3)
            && inside_arena(&hi, 0.3)
            && clearance(&ob, &s) >= OBSTACLE_CLEARANCE_M
            && clearance(&ob, &goal) >= OBSTACLE_CLEARANCE_M;
        if !ok {
            continue;
        }
        let mut spec = ScenarioSpec::open(
            &format!("train_{}_{seed}", kind.as_str()),
            ARENA_M,
            ARENA_M,
            ARENA_RESOLUTION_M,
        );
        spec.start = start;
        spec.goal = PointSpec::from(goal);
        spec.static_obstacles = vec![ob];
        spec.max_steps = TRAINING_MAX_STEPS;
        spec.seed = seed;
        return spec;
    }
}

/// World for training episode `episode` of a run seeded with `run_seed`;
/// the template cycles with the episode index.
pub fn curriculum_world(run_seed: u64, episode: usize) -> ScenarioSpec {
    let seed = (run_seed.wrapping_mul(0x9E37_79B9) << 24 ^ episode as u64) % HELD_OUT_SEED_BASE;
    training_world(WorldKind::from_index(episode), seed)
}

/// Evaluation worlds drawn from seeds disjoint from every training seed.
pub fn held_out_worlds(count: usize) -> Vec<ScenarioSpec> {
    (0..count)
        .map(|i| training_world(WorldKind::from_index(i), HELD_OUT_SEED_BASE + i as u64))
        .collect()
}

/// Episode cap for the benchmark scenarios.
pub const SCENARIO_MAX_STEPS: usize = 150;
/// Width of the C1 doorway, meters.
pub const DOORWAY_WIDTH_M: f64 = 0.9;
/// Time at which the C2 obstacle appears, seconds.
pub const C2_APPEAR_S: f64 = 1.0;
/// Distance at which the C3 mover stops in front of the robot, meters.
pub const C3_HALT_WITHIN_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown scenario {0:?}; expected one of c1, c2, c3, c4")]
pub struct UnknownScenario(pub String);

/// Benchmark scenario `name` with a small seed-dependent perturbation of
/// the start pose and mover timing.
pub fn scenario(name: &str, seed: u64) -> Result<ScenarioSpec, UnknownScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter_y = rng.random_range(-0.05..0.05);
    let jitter_yaw = rng.random_range(-0.05..0.05);
    let speed_scale = rng.random_range(0.9..1.1);
    let depart = rng.random_range(0.0..0.4);
    let mut spec = match name {
        "c1" => c1(),
        "c2" => c2(),
        "c3" => c3(speed_scale, depart),
        "c4" => c4(speed_scale, depart),
        _ => return Err(UnknownScenario(name.to_string())),
    };
    spec.start.y_m += jitter_y;
    spec.start.yaw_rad = wrap_angle(spec.start.yaw_rad + jitter_yaw);
    spec.seed = seed;
    Ok(spec)
}

fn base(name: &str, width_m: f64, height_m: f64) -> ScenarioSpec {
    let mut s = ScenarioSpec::open(name, width_m, height_m, ARENA_RESOLUTION_M);
    s.max_steps = SCENARIO_MAX_STEPS;
    s
}

/// A wall across the room with a narrow doorway; the goal lies on the other
/// side of the wall, behind the start, so the route bends through 180°.
fn c1() -> ScenarioSpec {
    let mut s = base("c1", ARENA_M, ARENA_M);
    let (door_lo, door_hi) = (4.0 - DOORWAY_WIDTH_M / 2.0, 4.0 + DOORWAY_WIDTH_M / 2.0);
    s.static_obstacles = vec![
        StaticObstacle::rect(Point::new(0.0, 3.9), Point::new(door_lo, 4.1)),
        StaticObstacle::rect(Point::new(door_hi, 3.9), Point::new(ARENA_M, 4.1)),
    ];
    s.start = PoseSpec {
        x_m: 2.0,
        y_m: 2.5,
        yaw_rad: 0.0,
    };
    s.goal = PointSpec { x_m: 2.0, y_m: 5.5 };
    s
}

/// Open room; a disk lands on the straight route shortly after the start.
fn c2() -> ScenarioSpec {
    let mut s = base("c2", ARENA_M, ARENA_M);
    s.static_obstacles = vec![StaticObstacle::circle(Point::new(4.0, 4.0), 0.4).appearing_at(C2_APPEAR_S)];
    s.start = PoseSpec {
        x_m: 1.0,
        y_m: 4.0,
        yaw_rad: 0.0,
    };
    s.goal = PointSpec { x_m: 7.0, y_m: 4.0 };
    s
}

/// Corridor with a fast disk coming head-on that stops once it is close to
/// the robot.
fn c3(speed_scale: f64, depart_s: f64) -> ScenarioSpec {
    let mut s = base("c3", 10.0, ARENA_M);
    s.static_obstacles = vec![
        StaticObstacle::rect(Point::new(0.0, 2.3), Point::new(10.0, 2.5)),
        StaticObstacle::rect(Point::new(0.0, 5.5), Point::new(10.0, 5.7)),
    ];
    s.start = PoseSpec {
        x_m: 1.0,
        y_m: 4.0,
        yaw_rad: 0.0,
    };
    s.goal = PointSpec { x_m: 8.0, y_m: 4.0 };
    s.moving_obstacles = vec![MovingObstacle {
        radius_m: 0.4,
        depart_s,
        waypoints: vec![PointSpec { x_m: 9.4, y_m: 4.0 }, PointSpec { x_m: 0.5, y_m: 4.0 }],
        segment_speeds_mps: vec![1.5 * speed_scale],
        halt_within_m: Some(C3_HALT_WITHIN_M),
    }];
    s
}

/// Open room; a disk crosses the route at right angles near its middle.
fn c4(speed_scale: f64, depart_s: f64) -> ScenarioSpec {
    let mut s = base("c4", ARENA_M, ARENA_M);
    s.start = PoseSpec {
        x_m: 1.0,
        y_m: 4.0,
        yaw_rad: 0.0,
    };
    s.goal = PointSpec { x_m: 7.0, y_m: 4.0 };
    s.moving_obstacles = vec![MovingObstacle {
        radius_m: 0.3,
        depart_s,
        waypoints: vec![PointSpec { x_m: 4.0, y_m: 6.5 }, PointSpec { x_m: 4.0, y_m: 0.5 }],
        segment_speeds_mps: vec![0.7 * speed_scale],
        halt_within_m: None,
    }];
    s
}

/// Parameters of [`random_world`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWorldParams {
    pub obstacle_count: usize,
    pub min_size_m: f64,
    pub max_size_m: f64,
}

impl Default for RandomWorldParams {
    fn default() -> Self {
        RandomWorldParams {
            obstacle_count: 3,
            min_size_m: 0.2,
            max_size_m: 0.6,
        }
    }
}

/// Arena scattered with `obstacle_count` pillars and boxes whose half-size
/// lies in `[min_size_m, max_size_m)`, keeping clear of the start and goal.
pub fn random_world(params: &RandomWorldParams, seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Point::new(rng.random_range(1.0..ARENA_M - 1.0), rng.random_range(1.0..ARENA_M - 1.0));
    let goal = loop {
        let g = Point::new(rng.random_range(1.0..ARENA_M - 1.0), rng.random_range(1.0..ARENA_M - 1.0));
        if g.distance(&start) >= 2.0 {
            break g;
        }
    };
    let mut obstacles = Vec::with_capacity(params.obstacle_count);
    while obstacles.len() < params.obstacle_count {
        let c = Point::new(rng.random_range(0.5..ARENA_M - 0.5), rng.random_range(0.5..ARENA_M - 0.5));
        let size = if params.max_size_m > params.min_size_m {
            rng.random_range(params.min_size_m..params.max_size_m)
        } else {
            params.min_size_m
        };
        let ob = if rng.random::<bool>() {
            StaticObstacle::circle(c, size)
        } else {
            rect_around(c, size, size)
        };
        if clearance(&ob, &start) >= OBSTACLE_CLEARANCE_M && clearance(&ob, &goal) >= OBSTACLE_CLEARANCE_M {
            obstacles.push(ob);
        }
    }
    let mut spec = ScenarioSpec::open(&format!("random_{seed}"), ARENA_M, ARENA_M, ARENA_RESOLUTION_M);
    spec.start = PoseSpec {
        x_m: start.x,
        y_m: start.y,
        yaw_rad: rng.random_range(-PI..PI),
    };
    spec.goal = PointSpec::from(goal);
    spec.static_obstacles = obstacles;
    spec.max_steps = SCENARIO_MAX_STEPS;
    spec.seed = seed;
    spec
}
