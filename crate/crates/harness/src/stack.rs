//! The navigation pipeline: one global plan per episode, a waypoint chosen
//! every step, and a local planner producing the velocity command.

use serde::{Deserialize, Serialize};

use polarnav_core::gridworld::{Policy, PolicyContext, PolicyError};
use polarnav_core::nav::{dwa_plan, make_waypoints, plan_global, select_waypoint, sp_plan, DwaConfig, SpConfig};
use polarnav_core::{Action, Point};
use polarnav_sac::SacPlanner;

use crate::config::NavSection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Sac,
    Dwa,
    Sp,
}

impl PlannerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerKind::Sac => "sac",
            PlannerKind::Dwa => "dwa",
            PlannerKind::Sp => "sp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sac" => Some(PlannerKind::Sac),
            "dwa" => Some(PlannerKind::Dwa),
            "sp" => Some(PlannerKind::Sp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum LocalPlanner {
    Sac(Box<SacPlanner>),
    Dwa(DwaConfig),
    Sp(SpConfig),
}

impl LocalPlanner {
    pub fn kind(&self) -> PlannerKind {
        match self {
            LocalPlanner::Sac(_) => PlannerKind::Sac,
            LocalPlanner::Dwa(_) => PlannerKind::Dwa,
            LocalPlanner::Sp(_) => PlannerKind::Sp,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NavigationStack {
    local: LocalPlanner,
    nav: NavSection,
    waypoints: Vec<Point>,
    current: Option<Point>,
}

impl NavigationStack {
    pub fn new(local: LocalPlanner, nav: NavSection) -> Self {
        NavigationStack {
            local,
            nav,
            waypoints: Vec::new(),
            current: None,
        }
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    /// Waypoint chosen at the last step.
    pub fn current_waypoint(&self) -> Option<Point> {
        self.current
    }

    pub fn kind(&self) -> PlannerKind {
        self.local.kind()
    }
}

impl Policy for NavigationStack {
    /// Plans once on the initial costmap. Without a global path the goal
    /// itself becomes the only waypoint.
    fn reset(&mut self, ctx: &PolicyContext<'_>) -> Result<(), PolicyError> {
        self.waypoints = match plan_global(ctx.costmap, &ctx.robot.position(), &ctx.goal, &self.nav.global_planner) {
            Ok(plan) => make_waypoints(&plan, self.nav.waypoint_spacing_m),
            Err(_) => vec![ctx.goal],
        };
        self.current = None;
        if let LocalPlanner::Sac(p) = &mut self.local {
            SacPlanner::reset(p);
        }
        Ok(())
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        if self.waypoints.is_empty() {
            self.reset(ctx)?;
        }
        let (wp, _) = select_waypoint(&self.waypoints, &ctx.robot, ctx.costmap, self.nav.waypoint_clearance_m);
        self.current = Some(wp);
        match &mut self.local {
            LocalPlanner::Sac(p) => p.plan(ctx.costmap, &ctx.robot, &wp),
            LocalPlanner::Dwa(c) => Ok(dwa_plan(&ctx.robot, &ctx.velocity, &wp, ctx.costmap, c)),
            LocalPlanner::Sp(c) => Ok(sp_plan(&ctx.robot, &wp, ctx.costmap, c)),
        }
    }
}
