//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polarnav_autodiff::{ParamStore, Tensor};
use polarnav_core::costmap::{inflate, render_polar, InflationParams, ObsImage, ObservationConfig, PolarParams, Representation};
use polarnav_core::gridworld::{check_collision, step};
use polarnav_core::nav::{dwa_plan, plan_global, DwaConfig, GlobalPlannerConfig, PlanError};
use polarnav_core::par::Execution;
use polarnav_core::reward::{transition_reward, RewardParams};
use polarnav_core::{Action, ActionBounds, OccupancyGrid, Point, RobotState, LETHAL_COST};
use polarnav_harness::commands::{benchmark_command, train_command};
use polarnav_harness::gradcheck::{run_suite, TOLERANCE};
use polarnav_harness::scenarios::{curriculum_world, held_out_worlds};
use polarnav_harness::{run_benchmark, HarnessConfig, PlannerKind};
use polarnav_sac::losses::{augmentation_target, critic_targets, TargetBatch};
use polarnav_sac::networks::Networks;
use polarnav_sac::{evaluate, squash, train, Batch, NetworkConfig, SacAgent, SacConfig, TrainOptions};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

// ---------------------------------------------------------------- 1: reward

const REWARD_TOL: f64 = 1e-9;

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Kernel-weighted mean over every cell center (inside the grid or not) in
/// the truncation square.
fn brute_force_gaussian(grid: &OccupancyGrid, x: f64, y: f64, p: &RewardParams) -> f64 {
    let res = grid.resolution();
    let o = grid.origin();
    let pad = (p.gaussian_half_width_m / res).ceil() as i64 + 2;
    let (mut mass, mut acc) = (0.0, 0.0);
    for iy in -pad..grid.height() as i64 + pad {
        for ix in -pad..grid.width() as i64 + pad {
            let cx = o.x + (ix as f64 + 0.5) * res;
            let cy = o.y + (iy as f64 + 0.5) * res;
            if (cx - x).abs() > p.gaussian_half_width_m || (cy - y).abs() > p.gaussian_half_width_m {
                continue;
            }
            let w = (-((cx - x).powi(2) + (cy - y).powi(2)) / (2.0 * p.gaussian_sigma_m.powi(2))).exp();
            mass += w;
            let inside = ix >= 0 && iy >= 0 && (ix as usize) < grid.width() && (iy as usize) < grid.height();
            if inside {
                acc += w * grid.get(ix as usize, iy as usize) as f64 / 254.0;
            }
        }
    }
    acc / mass
}

fn criterion_reward() -> Outcome {
    let mut world = OccupancyGrid::new(60, 60, 0.1, Point::default());
    for iy in 20..40 {
        for ix in 30..34 {
            world.set(ix, iy, LETHAL_COST);
        }
    }
    for i in 0..3 {
        world.set(i, 0, LETHAL_COST);
        world.set(0, i, LETHAL_COST);
    }
    let costmap = inflate(&world, &InflationParams::default());
    let p = RewardParams::default();
    let dt = 0.2;
    // (x, y, yaw, v, omega, waypoint x, waypoint y)
    let cases: [(f64, f64, f64, f64, f64, f64, f64); 12] = [
        (1.03, 3.01, 0.0, 1.0, 0.0, 5.02, 3.04),
        (1.53, 3.02, PI, 0.5, 0.0, 5.02, 3.04),
        (1.07, 1.52, 0.2, 0.3, -1.5, 2.53, 1.49),
        (1.07, 1.52, 0.9, 0.3, -1.5, 2.53, 1.49),
        (2.01, 4.73, 0.1, -0.5, 0.4, 4.83, 4.91),
        (1.01, 5.02, 0.0, 0.5, 0.0, 1.21, 5.03),
        (2.73, 3.02, 0.0, 1.0, 0.0, 5.02, 3.04),
        (2.73, 3.02, 0.0, 1.0, 0.0, 2.97, 3.01),
        (2.62, 2.51, 0.3, 0.0, 0.0, 1.01, 1.02),
        (0.33, 0.31, 0.7, 0.2, 0.3, 2.02, 2.01),
        (4.51, 4.52, 3.0, 0.4, 0.5, 5.51, 4.42),
        (4.92, 1.13, -2.0, 0.0, 0.0, 5.52, 5.47),
    ];
    let mut worst: f64 = 0.0;
    let (mut collisions, mut goals, mut regress, mut progress) = (0, 0, 0, 0);
    for &(x, y, yaw, v, w, wx, wy) in &cases {
        let s = RobotState::new(x, y, yaw);
        let a = Action::new(v, w);
        let s2 = step(&s, &a, dt);
        let (x2, y2, yaw2) = (x + v * yaw.cos() * dt, y + v * yaw.sin() * dt, yaw + w * dt);
        if (s2.x - x2).abs() > 1e-12 || (s2.y - y2).abs() > 1e-12 || wrap(s2.yaw - yaw2).abs() > 1e-12 {
            return Outcome::new(false, format!("kinematics mismatch at ({x}, {y})"));
        }
        let collided = check_collision(&s2, &world, 0.25);
        let wp = Point::new(wx, wy);
        let (got, _) = transition_reward(&s, &s2, &wp, &costmap, collided, &p);

        let d0 = ((x - wx).powi(2) + (y - wy).powi(2)).sqrt();
        let d1 = ((x2 - wx).powi(2) + (y2 - wy).powi(2)).sqrt();
        let b0 = wrap((wy - y).atan2(wx - x) - yaw).abs();
        let b1 = wrap((wy - y2).atan2(wx - x2) - yaw2).abs();
        let pd = if d0 - d1 >= 0.0 { d0 - d1 } else { 2.0 * (d0 - d1) };
        let pb = if b0 - b1 >= 0.0 { b0 - b1 } else { 2.0 * (b0 - b1) };
        let g = brute_force_gaussian(&costmap, x2, y2, &p);
        let goal = d1 <= p.goal_tolerance_m;
        let terminal_bonus = if collided {
            -p.r_max
        } else if goal {
            p.r_max
        } else {
            0.0
        };
        let want = p.distance_weight * pd + p.bearing_weight * pb - g + terminal_bonus;
        worst = worst.max((got - want).abs());
        collisions += collided as usize;
        goals += (goal && !collided) as usize;
        regress += (pd < 0.0 || pb < 0.0) as usize;
        progress += (pd > 0.0) as usize;
    }
    let coverage = collisions >= 2 && goals >= 1 && regress >= 2 && progress >= 2;
    Outcome::new(
        worst <= REWARD_TOL && coverage,
        format!(
            "12 cases ({collisions} collision, {goals} goal, {regress} regress, {progress} progress), max |error| {worst:.2e} (tol {REWARD_TOL:.0e})"
        ),
    )
}

// ------------------------------------------------------------- 2: gradcheck

fn criterion_gradcheck() -> Outcome {
    let results = run_suite(7);
    let worst = results.iter().map(|r| r.max_relative_error).fold(0.0, f64::max);
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    Outcome::new(
        failed.is_empty(),
        format!(
            "{} checks, max relative error {worst:.2e} (tol {TOLERANCE:.0e}){}",
            results.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!(", failed: {}", failed.join(" "))
            }
        ),
    )
}

// --------------------------------------------------------------- 3: density

fn criterion_density() -> Outcome {
    let b = ActionBounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1200;
    let (lo, hi) = (b.low(), b.high());
    let (dv, dw) = ((hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let log_std = [rng.random_range(-1.5..0.0), rng.random_range(-1.5..0.0)];
        let mut total = 0.0;
        for i in 0..n {
            let v = lo[0] + (i as f64 + 0.5) * dv;
            for j in 0..n {
                let w = lo[1] + (j as f64 + 0.5) * dw;
                total += squash::log_prob(mu, log_std, &Action::new(v, w), &b).exp();
            }
        }
        worst = worst.max((total * dv * dw - 1.0).abs());
    }
    Outcome::new(worst <= 1e-2, format!("20 (mu, sigma) pairs, max |integral - 1| {worst:.2e} (tol 1e-2)"))
}

// --------------------------------------------------------------- 4: targets

fn tiny_net() -> NetworkConfig {
    NetworkConfig {
        conv_filters: vec![3],
        conv_strides: vec![2],
        latent_dim: 6,
        actor_hidden: vec![8],
        critic_hidden: vec![8],
        log_std_min: -10.0,
        log_std_max: 2.0,
    }
}

fn uniform(shape: &[usize], lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(lo..hi)).collect())
}

fn criterion_targets() -> Outcome {
    let obs = (2, 8, 8);
    let nets_for = |seed: u64| {
        let mut store = ParamStore::<f64>::new();
        let nets = Networks::new(&mut store, obs, &tiny_net(), 0.1, &mut ChaCha8Rng::seed_from_u64(seed));
        (nets, store)
    };
    let (nets, online) = nets_for(1);
    let (_, target) = nets_for(2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 8;
    let views: Vec<Tensor<f64>> = (0..2).map(|_| uniform(&[n, 2, 8, 8], 0.0, 1.0, &mut rng)).collect();
    let noises: Vec<Tensor<f64>> = (0..2).map(|_| uniform(&[n, 2], -2.0, 2.0, &mut rng)).collect();
    let rewards: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let dones = vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
    let batch = TargetBatch {
        rewards: &rewards,
        dones: &dones,
        gamma: 0.99,
        alpha: 0.1,
        log_half_sum: 0.3,
    };
    let y = critic_targets(&nets, &online, &target, views.clone(), noises.clone(), &batch).unwrap();
    let per_view: Vec<Vec<f64>> = (0..2)
        .map(|k| augmentation_target(&nets, &online, &target, views[k].clone(), noises[k].clone(), &batch).unwrap())
        .collect();
    let mean_ok = (0..n).all(|i| dones[i] == 1.0 || y[i].to_bits() == ((per_view[0][i] + per_view[1][i]) / 2.0).to_bits());
    let terminal_ok = (0..n).all(|i| dones[i] == 0.0 || y[i].to_bits() == rewards[i].to_bits());

    // agent-level EMA: one update with sync every step, then n more syncs
    let tau = 0.01;
    let config = SacConfig {
        batch_size: 4,
        target_update_every: 1,
        tau,
        network: tiny_net(),
        ..SacConfig::desk()
    };
    let mut agent = SacAgent::<f64>::new(config, obs, ActionBounds::default(), 5).unwrap();
    let size = 4;
    let mut frand = |len: usize, lo: f32, hi: f32| -> Vec<f32> { (0..len).map(|_| rng.random_range(lo..hi)).collect() };
    let batch = Batch {
        size,
        obs_shape: obs,
        obs: frand(size * 128, 0.0, 1.0),
        actions: frand(size * 2, -1.0, 1.0),
        rewards: frand(size, -1.0, 1.0),
        next_obs: frand(size * 128, 0.0, 1.0),
        dones: vec![0.0, 1.0, 0.0, 0.0],
    };
    let before = agent.target_params().clone();
    let critic_ids = agent.networks().critic_ids();
    agent.update(&batch, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let mut ema_err: f64 = 0.0;
    let mut untouched = true;
    for (id, _, t) in agent.target_params().iter() {
        let old = before.get(id).data();
        let src = agent.params().get(id).data();
        if critic_ids.contains(&id) {
            for ((&got, &o), &s) in t.data().iter().zip(old).zip(src) {
                ema_err = ema_err.max((got - ((1.0 - tau) * o + tau * s)).abs());
            }
        } else {
            untouched &= t.data() == old;
        }
    }
    let synced = agent.target_params().clone();
    let steps = 50;
    for _ in 0..steps {
        agent.target_sync(tau);
    }
    let decay = (1.0 - tau).powi(steps);
    for &id in &critic_ids {
        let (a, s, o) = (agent.target_params().get(id), agent.params().get(id), synced.get(id));
        for ((&got, &s), &o) in a.data().iter().zip(s.data()).zip(o.data()) {
            ema_err = ema_err.max((got - (s + decay * (o - s))).abs());
        }
    }
    let ema_ok = ema_err <= 1e-12 && untouched;
    Outcome::new(
        mean_ok && terminal_ok && ema_ok,
        format!(
            "K=2 mean bitwise: {mean_ok}, terminal y = r: {terminal_ok}, EMA tau={tau} max |error| {ema_err:.1e}, non-critic targets untouched: {untouched}"
        ),
    )
}

// -------------------------------------------------------------- 5: planners

const NEIGHBORS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Label-correcting search that relaxes every edge until nothing improves.
fn brute_force_path_cost(grid: &OccupancyGrid, start: (usize, usize), goal: (usize, usize), weight: f64) -> Option<f64> {
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let lethal = |x: i64, y: i64| grid.get(x as usize, y as usize) >= 254;
    let mut dist = vec![f64::INFINITY; (w * h) as usize];
    dist[(start.1 as i64 * w + start.0 as i64) as usize] = 0.0;
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let d = dist[(y * w + x) as usize];
                if !d.is_finite() {
                    continue;
                }
                for (dx, dy) in NEIGHBORS {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h || lethal(nx, ny) {
                        continue;
                    }
                    if dx != 0 && dy != 0 && (lethal(nx, y) || lethal(x, ny)) {
                        continue;
                    }
                    let len = if dx != 0 && dy != 0 { 2f64.sqrt() } else { 1.0 } * grid.resolution();
                    let c = len * (1.0 + grid.get(nx as usize, ny as usize) as f64 / 254.0 * weight);
                    let slot = &mut dist[(ny * w + nx) as usize];
                    if d + c < *slot - 1e-12 {
                        *slot = d + c;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let d = dist[(goal.1 as i64 * w + goal.0 as i64) as usize];
    d.is_finite().then_some(d)
}

fn global_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let config = GlobalPlannerConfig::default();
    let (mut worst, mut unreachable) = (0.0f64, 0);
    for k in 0..20 {
        let mut g = OccupancyGrid::new(15, 15, 0.1, Point::default());
        for c in g.costs_mut() {
            *c = if rng.random_bool(0.25) {
                LETHAL_COST
            } else if k % 2 == 1 {
                rng.random_range(0..254)
            } else {
                0
            };
        }
        let free: Vec<(usize, usize)> = (0..15).flat_map(|y| (0..15).map(move |x| (x, y))).filter(|&(x, y)| !g.is_lethal(x, y)).collect();
        let s = free[rng.random_range(0..free.len())];
        let t = free[rng.random_range(0..free.len())];
        let oracle = brute_force_path_cost(&g, s, t, config.cost_weight);
        match (plan_global(&g, &g.cell_center(s.0, s.1), &g.cell_center(t.0, t.1), &config), oracle) {
            (Ok(plan), Some(want)) => {
                // the returned path must itself realize the reported cost
                let mut walked = 0.0;
                for w in plan.cells.windows(2) {
                    let (dx, dy) = (w[1].0 as i64 - w[0].0 as i64, w[1].1 as i64 - w[0].1 as i64);
                    if dx.abs() > 1 || dy.abs() > 1 || g.is_lethal(w[1].0, w[1].1) {
                        return (false, format!("grid {k}: invalid step"));
                    }
                    let len = if dx != 0 && dy != 0 { 2f64.sqrt() } else { 1.0 } * 0.1;
                    walked += len * (1.0 + g.get(w[1].0, w[1].1) as f64 / 254.0);
                }
                worst = worst.max((plan.cost - want).abs()).max((walked - want).abs());
            }
            (Err(PlanError::NoPath), None) => unreachable += 1,
            (got, want) => return (false, format!("grid {k}: planner {:?} vs oracle {want:?}", got.map(|p| p.cost))),
        }
    }
    (worst <= 1e-9, format!("plan_global: 20 grids ({unreachable} unreachable), max cost error {worst:.1e}"))
}

fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn oracle_collides(grid: &OccupancyGrid, x: f64, y: f64, radius: f64) -> bool {
    let res = grid.resolution();
    let (fx, fy) = ((x - grid.origin().x) / res, (y - grid.origin().y) / res);
    if fx < 0.0 || fy < 0.0 || fx >= grid.width() as f64 || fy >= grid.height() as f64 {
        return true;
    }
    if grid.is_lethal(fx as usize, fy as usize) {
        return true;
    }
    grid.lethal_cells().any(|(ix, iy)| {
        let c = grid.cell_center(ix, iy);
        (c.x - x).hypot(c.y - y) <= radius
    })
}

fn oracle_dwa(robot: &RobotState, vel: &Action, wp: &Point, grid: &OccupancyGrid, cfg: &DwaConfig) -> Action {
    let b = &cfg.bounds;
    let (dv, dw) = (cfg.max_linear_accel_mps2 * cfg.control_dt_s, cfg.max_angular_accel_radps2 * cfg.control_dt_s);
    let v_hi = (vel.v + dv).min(b.v_max_mps);
    let v_lo = (vel.v - dv).max(b.v_min_mps).min(v_hi);
    let w_hi = (vel.omega + dw).min(b.omega_max_radps);
    let w_lo = (vel.omega - dw).max(-b.omega_max_radps).min(w_hi);
    let steps = (cfg.horizon_s / cfg.sim_dt_s).round() as usize;
    let lethal: Vec<Point> = grid.lethal_cells().map(|(x, y)| grid.cell_center(x, y)).collect();
    let mut scored: Vec<(f64, Action)> = Vec::new();
    for v in lattice(v_lo, v_hi, cfg.linear_samples) {
        'arc: for w in lattice(w_lo, w_hi, cfg.angular_samples) {
            let (mut x, mut y, mut th) = (robot.x, robot.y, robot.yaw);
            let mut clearance = cfg.clearance_cap_m;
            for _ in 0..steps {
                x += v * th.cos() * cfg.sim_dt_s;
                y += v * th.sin() * cfg.sim_dt_s;
                th += w * cfg.sim_dt_s;
                if oracle_collides(grid, x, y, cfg.footprint_radius_m) {
                    continue 'arc;
                }
                for c in &lethal {
                    clearance = clearance.min((c.x - x).hypot(c.y - y));
                }
            }
            let score = -cfg.path_weight * (x - wp.x).hypot(y - wp.y) + cfg.clearance_weight * clearance + cfg.speed_weight * v;
            scored.push((score, Action::new(v, w)));
        }
    }
    let Some(best) = scored.iter().map(|s| s.0).reduce(f64::max) else {
        return Action::STOP;
    };
    scored
        .into_iter()
        .filter(|s| s.0 == best)
        .map(|s| s.1)
        .min_by(|a, b| (a.omega.abs(), a.v, a.omega).partial_cmp(&(b.omega.abs(), b.v, b.omega)).unwrap())
        .unwrap()
}

fn dwa_scenes() -> Vec<(OccupancyGrid, RobotState, Action, Point, DwaConfig)> {
    let base = OccupancyGrid::new(60, 60, 0.1, Point::default());
    let block = |g: &mut OccupancyGrid, x0: usize, x1: usize, y0: usize, y1: usize| {
        for y in y0..y1 {
            for x in x0..x1 {
                g.set(x, y, LETHAL_COST);
            }
        }
    };
    let inflated = |g: &OccupancyGrid| inflate(g, &InflationParams::default());
    let d = DwaConfig::default();
    let padded = DwaConfig {
        footprint_radius_m: 0.25,
        ..d
    };
    let mut scenes = Vec::new();
    scenes.push((base.clone(), RobotState::new(1.0, 3.0, 0.0), Action::new(0.5, 0.0), Point::new(5.0, 3.0), d));
    let mut wall = base.clone();
    block(&mut wall, 30, 33, 0, 60);
    scenes.push((inflated(&wall), RobotState::new(2.2, 3.0, 0.0), Action::new(0.8, 0.0), Point::new(4.5, 3.0), d));
    scenes.push((wall.clone(), RobotState::new(2.2, 3.0, 0.0), Action::new(0.8, 0.0), Point::new(4.5, 3.0), padded));
    let mut pillar = base.clone();
    block(&mut pillar, 28, 32, 28, 32);
    scenes.push((inflated(&pillar), RobotState::new(1.8, 3.0, 0.05), Action::new(0.6, 0.1), Point::new(4.5, 3.1), d));
    scenes.push((inflated(&pillar), RobotState::new(3.0, 1.6, PI / 2.0), Action::new(0.4, -0.3), Point::new(3.1, 4.6), d));
    let mut corridor = base.clone();
    block(&mut corridor, 0, 60, 24, 26);
    block(&mut corridor, 0, 60, 35, 37);
    scenes.push((inflated(&corridor), RobotState::new(1.0, 3.0, 0.4), Action::new(0.7, 0.0), Point::new(5.0, 3.0), d));
    scenes.push((corridor.clone(), RobotState::new(1.0, 3.0, -0.3), Action::new(0.2, 0.6), Point::new(5.0, 3.2), padded));
    let mut pocket = base.clone();
    block(&mut pocket, 20, 40, 20, 22);
    block(&mut pocket, 20, 22, 20, 40);
    block(&mut pocket, 20, 40, 38, 40);
    scenes.push((inflated(&pocket), RobotState::new(3.0, 3.0, PI), Action::new(0.3, 0.0), Point::new(5.5, 3.0), d));
    scenes.push((base.clone(), RobotState::new(3.0, 3.0, 1.0), Action::new(-0.3, 1.2), Point::new(1.0, 1.0), d));
    let mut boxed = base.clone();
    block(&mut boxed, 25, 36, 25, 36);
    boxed.set(30, 30, 0);
    scenes.push((boxed, RobotState::new(3.05, 3.05, 0.0), Action::new(0.3, 0.2), Point::new(5.0, 5.0), d));
    scenes
}

fn criterion_planners() -> Outcome {
    let (global_ok, global_note) = global_oracle();
    let mut matches = 0;
    let mut notes = Vec::new();
    for (i, (grid, robot, vel, wp, cfg)) in dwa_scenes().iter().enumerate() {
        let got = dwa_plan(robot, vel, wp, grid, cfg);
        let want = oracle_dwa(robot, vel, wp, grid, cfg);
        if (got.v - want.v).abs() <= 1e-12 && (got.omega - want.omega).abs() <= 1e-12 {
            matches += 1;
        } else {
            notes.push(format!("scene {i}: ({:.3}, {:.3}) vs ({:.3}, {:.3})", got.v, got.omega, want.v, want.omega));
        }
    }
    Outcome::new(
        global_ok && matches == 10,
        format!("{global_note}; dwa_plan: {matches}/10 scenes match exhaustive enumeration {}", notes.join(" ")),
    )
}

// ----------------------------------------------------------------- 6: polar

fn marker_cells(img: &ObsImage) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..img.height {
        for c in 0..img.width {
            if img.get(1, r, c) == 1.0 {
                out.push((r, c));
            }
        }
    }
    out
}

fn criterion_polar() -> Outcome {
    let params = PolarParams {
        angle_bins: 40,
        distance_bins: 40,
        r_max_m: 4.0,
        marker_px: 3,
    };
    let grid = OccupancyGrid::new(100, 100, 0.1, Point::default());
    let bins = params.angle_bins as i64;
    let step_rad = 2.0 * PI / bins as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut placed, mut equivariant) = (0, 0);
    for _ in 0..50 {
        let robot = RobotState::new(rng.random_range(2.0..8.0), rng.random_range(2.0..8.0), rng.random_range(-PI..PI));
        let wp = Point::new(robot.x + rng.random_range(-4.5..4.5), robot.y + rng.random_range(-4.5..4.5));
        let bearing = wrap((wp.y - robot.y).atan2(wp.x - robot.x) - robot.yaw);
        let row = (((bearing + PI) / (2.0 * PI)) * bins as f64).floor() as i64;
        let dist = (wp.x - robot.x).hypot(wp.y - robot.y);
        let col = ((dist / params.r_max_m * params.distance_bins as f64).floor() as i64).min(params.distance_bins as i64 - 1);
        let mut want: Vec<(usize, usize)> = Vec::new();
        for dr in -1..=1 {
            for dc in -1..=1 {
                let c = col + dc;
                if (0..params.distance_bins as i64).contains(&c) {
                    want.push(((row + dr).rem_euclid(bins) as usize, c as usize));
                }
            }
        }
        want.sort();
        let img = render_polar(&grid, &robot, &wp, &params);
        let mut got = marker_cells(&img);
        got.sort();
        placed += (got == want) as usize;

        // rotating the robot by delta shifts the marker rows by -delta/step
        let delta = rng.random_range(-PI..PI);
        let turned = RobotState::new(robot.x, robot.y, robot.yaw + delta);
        let img2 = render_polar(&grid, &turned, &wp, &params);
        let rows2: Vec<i64> = marker_cells(&img2).iter().map(|&(r, _)| r as i64).collect();
        let center2 = rows2.iter().copied().find(|r| rows2.contains(&((r + 1) % bins)) && rows2.contains(&((r - 1).rem_euclid(bins))));
        let expected = row as f64 - delta / step_rad;
        let ok = center2.is_some_and(|r| {
            let diff = (r as f64 - expected).rem_euclid(bins as f64);
            diff.min(bins as f64 - diff) <= 1.0 + 1e-9
        });
        equivariant += ok as usize;
    }
    Outcome::new(
        placed == 50 && equivariant == 50,
        format!("marker placement {placed}/50 exact, rotation equivariance {equivariant}/50 within one bin"),
    )
}

// ----------------------------------------------------------- 7 & 8: training

const TRAIN_SEEDS: [u64; 3] = [0, 1, 2];
const EVAL_EPISODES: usize = 100;

struct TrainedAgent {
    seed: u64,
    agent: SacAgent<f32>,
    success: f64,
    minutes: f64,
}

fn train_agent(seed: u64, representation: Representation) -> TrainedAgent {
    let base = HarnessConfig::default();
    let observation = ObservationConfig {
        representation,
        ..base.observation()
    };
    let options = TrainOptions {
        episodes: base.train.episodes,
        seed,
        observation,
        env: base.env,
        outdir: None,
        checkpoint_every: None,
    };
    let t = Instant::now();
    let report = train(base.train.sac.clone(), &options, |ep| curriculum_world(seed, ep)).expect("training runs");
    let (rates, _) = evaluate(&report.agent, &observation, &base.env, &held_out_worlds(EVAL_EPISODES), Execution::Parallel)
        .expect("evaluation runs");
    TrainedAgent {
        seed,
        agent: report.agent,
        success: rates.success,
        minutes: t.elapsed().as_secs_f64() / 60.0,
    }
}

fn criterion_learning(polar: &[TrainedAgent]) -> Outcome {
    let base = HarnessConfig::default();
    let random = SacAgent::<f32>::new(base.train.sac.clone(), base.observation().shape(), base.env.action_bounds, 99).unwrap();
    let (rates, _) = evaluate(&random, &base.observation(), &base.env, &held_out_worlds(EVAL_EPISODES), Execution::Parallel).unwrap();
    let per_seed: Vec<String> =
        polar.iter().map(|a| format!("seed {} {:.0}% ({:.1} min)", a.seed, a.success * 100.0, a.minutes)).collect();
    Outcome::new(
        polar.iter().all(|a| a.success >= 0.70) && rates.success <= 0.25,
        format!(
            "{} episodes, DrQ polar: {}; random weights {:.0}% (need >=70% each, random <=25%)",
            base.train.episodes,
            per_seed.join(", "),
            rates.success * 100.0
        ),
    )
}

fn criterion_representation(polar: &[TrainedAgent], cartesian: &[TrainedAgent]) -> Outcome {
    let mean = |v: &[TrainedAgent]| v.iter().map(|a| a.success).sum::<f64>() / v.len() as f64;
    let (p, c) = (mean(polar), mean(cartesian));
    let per_seed: Vec<String> = cartesian.iter().map(|a| format!("{:.0}%", a.success * 100.0)).collect();
    Outcome::new(
        p >= c,
        format!(
            "mean success polar {:.1}% vs cartesian-rotation {:.1}% (per seed {}); full-scale context 98.7% vs 42.0%",
            p * 100.0,
            c * 100.0,
            per_seed.join(" ")
        ),
    )
}

// ------------------------------------------------------------- 9: benchmark

fn criterion_benchmark(polar: &[TrainedAgent]) -> Outcome {
    let mut config = HarnessConfig::default();
    config.benchmark.scenarios = vec!["c1".into(), "c3".into()];
    config.benchmark.planners = vec![PlannerKind::Dwa, PlannerKind::Sp];
    config.benchmark.runs_per_cell = 10;
    let (classical, _) = run_benchmark(&config, None, Execution::Parallel).expect("benchmark runs");
    let sp_c1 = classical.cell("c1", PlannerKind::Sp).expect("sp c1 cell");
    let dwa_c3 = classical.cell("c3", PlannerKind::Dwa).expect("dwa c3 cell");

    config.benchmark.scenarios = vec!["c3".into()];
    config.benchmark.planners = vec![PlannerKind::Sac];
    let mut sac_rates = Vec::new();
    let mut orderings = Vec::new();
    for trained in polar {
        let agent = std::sync::Arc::new(trained.agent.clone());
        let (report, _) = run_benchmark(&config, Some(&agent), Execution::Parallel).expect("sac benchmark runs");
        let cell = report.cell("c3", PlannerKind::Sac).expect("sac c3 cell");
        sac_rates.push(cell.collision_rate);
        orderings.push(format!(
            "seed {} collision {:.0}% success {:.0}% distance {}",
            trained.seed,
            cell.collision_rate * 100.0,
            cell.success_rate * 100.0,
            cell.mean_travel_distance_m.map_or("n/a".into(), |d| format!("{d:.2} m"))
        ));
    }
    let sac_mean = sac_rates.iter().sum::<f64>() / sac_rates.len() as f64;
    let sp_ok = sp_c1.collision_rate == 0.0 && sp_c1.success_rate == 1.0;
    let dwa_fails = dwa_c3.collision_rate + dwa_c3.timeout_rate > 0.0;
    let passed = sp_ok && dwa_fails && sac_mean < dwa_c3.collision_rate;
    Outcome::new(
        passed,
        format!(
            "SP c1 success {:.0}% collision {:.0}%; DWA c3 collision {:.0}% timeout {:.0}% distance {}; SAC c3 mean collision {:.0}% [{}]",
            sp_c1.success_rate * 100.0,
            sp_c1.collision_rate * 100.0,
            dwa_c3.collision_rate * 100.0,
            dwa_c3.timeout_rate * 100.0,
            dwa_c3.mean_travel_distance_m.map_or("n/a".into(), |d| format!("{d:.2} m")),
            sac_mean * 100.0,
            orderings.join("; ")
        ),
    )
}

// ----------------------------------------------------------- 10: determinism

fn collect_files(dir: &Path, prefix: &Path, out: &mut Vec<(String, Vec<u8>)>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, prefix, out);
        } else {
            out.push((p.strip_prefix(prefix).unwrap().display().to_string(), fs::read(&p).unwrap()));
        }
    }
}

fn pipeline(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut config = HarnessConfig::default();
    config.train.episodes = 20;
    config.train.eval_episodes = 20;
    config.train.seed = 11;
    let train_dir = root.join("train");
    let summary = train_command(&config, &train_dir).expect("train");
    config.benchmark.scenarios = vec!["c3".into()];
    config.benchmark.planners = vec![PlannerKind::Sac];
    config.benchmark.runs_per_cell = 3;
    config.benchmark.checkpoint = summary.checkpoint;
    benchmark_command(&config, &root.join("bench")).expect("benchmark");
    let mut files = Vec::new();
    collect_files(root, root, &mut files);
    files
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = pipeline(&dir.path().join("a"));
    let b = pipeline(&dir.path().join("b"));
    let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
    let required = ["train/train_log.csv", "train/eval.json", "train/checkpoint/params.bin", "bench/report.json", "bench/report.csv"];
    let complete = required.iter().all(|r| names.contains(r)) && names.iter().any(|n| n.starts_with("bench/logs/"));
    let identical = a == b;
    Outcome::new(
        identical && complete,
        format!("{} files compared (train log, eval, checkpoint, report, trajectory logs), byte-identical: {identical}", a.len()),
    )
}

/// Skips the criteria that train agents (7, 8 and 9).
const SKIP_TRAINING_VAR: &str = "POLARNAV_SKIP_TRAINING";

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // cargo's harness protocol: listing prints nothing, filters run everything
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let mut failures = 0;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        failures += (!o.passed) as usize;
        println!(
            "criterion {id:>2} {:<28} {} [{:.1}s] {}",
            name,
            if o.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    };
    report(1, "reward exactness", &mut criterion_reward);
    report(2, "gradient verification", &mut criterion_gradcheck);
    report(3, "squashed density", &mut criterion_density);
    report(4, "target machinery", &mut criterion_targets);
    report(5, "planner oracles", &mut criterion_planners);
    report(6, "polar rendering", &mut criterion_polar);
    report(10, "determinism", &mut criterion_determinism);
    if std::env::var_os(SKIP_TRAINING_VAR).is_some() {
        for (id, name) in [(7, "desk-scale learning"), (8, "representation ordering"), (9, "benchmark behavior")] {
            println!("criterion {id:>2} {name:<28} SKIP ({SKIP_TRAINING_VAR} is set)");
        }
        finish(failures);
        return;
    }
    let polar: Vec<TrainedAgent> = TRAIN_SEEDS.iter().map(|&s| train_agent(s, Representation::Polar)).collect();
    report(7, "desk-scale learning", &mut || criterion_learning(&polar));
    let cartesian: Vec<TrainedAgent> = TRAIN_SEEDS.iter().map(|&s| train_agent(s, Representation::CartesianRotation)).collect();
    report(8, "representation ordering", &mut || criterion_representation(&polar, &cartesian));
    report(9, "benchmark behavior", &mut || criterion_benchmark(&polar));
    finish(failures);
}

fn finish(failures: usize) {
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all evaluated criteria passed");
}
