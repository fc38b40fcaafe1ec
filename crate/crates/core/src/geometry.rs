use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid may round up to exactly 2π for tiny negative inputs
    if wrapped >= PI {
        wrapped -= 2.0 * PI;
    }
    if wrapped < -PI {
        wrapped = -PI;
    }
    wrapped
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// Planar robot pose. `yaw` is kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl RobotState {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Bearing of `target` relative to the current heading, in `[-π, π)`.
    pub fn bearing_to(&self, target: &Point) -> f64 {
        wrap_angle((target.y - self.y).atan2(target.x - self.x) - self.yaw)
    }
}

/// Commanded linear (m/s) and angular (rad/s) velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub v: f64,
    pub omega: f64,
}

impl Action {
    pub const STOP: Action = Action { v: 0.0, omega: 0.0 };

    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBounds {
    pub v_min_mps: f64,
    pub v_max_mps: f64,
    pub omega_max_radps: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            v_min_mps: -0.5,
            v_max_mps: 1.0,
            omega_max_radps: 1.5,
        }
    }
}

impl ActionBounds {
    pub fn contains(&self, action: &Action) -> bool {
        action.v >= self.v_min_mps
            && action.v <= self.v_max_mps
            && action.omega.abs() <= self.omega_max_radps
    }

    /// Clamps into bounds; the flag reports whether anything changed.
    /// Non-finite components become zero.
    pub fn clamp(&self, action: Action) -> (Action, bool) {
        let fix = |x: f64, lo: f64, hi: f64| if x.is_finite() { x.clamp(lo, hi) } else { 0.0 };
        let clamped = Action {
            v: fix(action.v, self.v_min_mps, self.v_max_mps),
            omega: fix(action.omega, -self.omega_max_radps, self.omega_max_radps),
        };
        (clamped, clamped != action)
    }

    /// Lower and upper corner of the action box as `[v, ω]` arrays.
    pub fn low(&self) -> [f64; 2] {
        [self.v_min_mps, -self.omega_max_radps]
    }

    pub fn high(&self) -> [f64; 2] {
        [self.v_max_mps, self.omega_max_radps]
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_min_mps <= self.v_max_mps) || !(self.omega_max_radps > 0.0) {
            return Err(format!("invalid action bounds {self:?}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_handles_seam() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!(wrap_angle(-1e-17) < PI);
    }

    #[test]
    fn clamp_reports_changes() {
        let bounds = ActionBounds::default();
        let (a, changed) = bounds.clamp(Action::new(2.0, -3.0));
        assert!(changed);
        assert_eq!(a, Action::new(1.0, -1.5));
        let (a, changed) = bounds.clamp(Action::new(0.3, 0.2));
        assert!(!changed);
        assert_eq!(a, Action::new(0.3, 0.2));
        let (a, _) = bounds.clamp(Action::new(f64::NAN, 0.0));
        assert_eq!(a.v, 0.0);
    }

    proptest! {
        #[test]
        fn wrap_is_in_range(a in -1e6f64..1e6) {
            let w = wrap_angle(a);
            prop_assert!((-PI..PI).contains(&w));
            let k = ((a - w) / (2.0 * PI)).round();
            prop_assert!((k * 2.0 * PI - (a - w)).abs() < 1e-6);
        }
    }
}
