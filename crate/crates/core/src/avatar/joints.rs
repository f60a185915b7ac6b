use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const HEAD_YAW: &str = "HeadYaw";
pub const HEAD_PITCH: &str = "HeadPitch";

/// Every simulated joint, in the order they are reported.
pub const JOINT_NAMES: [&str; 14] = [
    HEAD_YAW,
    HEAD_PITCH,
    "LShoulderPitch",
    "LShoulderRoll",
    "LElbowYaw",
    "LElbowRoll",
    "RShoulderPitch",
    "RShoulderRoll",
    "RElbowYaw",
    "RElbowRoll",
    "LHipPitch",
    "RHipPitch",
    "LKneePitch",
    "RKneePitch",
];

const HEAD_SPEED: f64 = 200.0;
const BODY_SPEED: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub name: String,
    pub angle: f64,
    pub min: f64,
    pub max: f64,
    /// Degrees per second.
    pub max_speed: f64,
    pub target: f64,
}

impl JointState {
    pub fn new(name: &str, min: f64, max: f64, max_speed: f64) -> Self {
        Self {
            name: name.to_owned(),
            angle: 0.0,
            min,
            max,
            max_speed,
            target: 0.0,
        }
    }

    pub fn within_limits(&self, angle: f64) -> bool {
        angle.is_finite() && (self.min..=self.max).contains(&angle)
    }

    /// Targets are clamped into the joint's range.
    pub fn set_target(&mut self, target: f64) {
        self.target = target.clamp(self.min, self.max);
    }

    /// Moves toward the target by at most `max_speed * dt`.
    pub fn advance(&mut self, dt: f64) {
        let limit = self.max_speed * dt;
        let delta = (self.target - self.angle).clamp(-limit, limit);
        self.angle = (self.angle + delta).clamp(self.min, self.max);
    }
}

pub fn default_joints() -> BTreeMap<String, JointState> {
    JOINT_NAMES
        .iter()
        .map(|&name| {
            let joint = match name {
                HEAD_YAW => JointState::new(name, -119.0, 119.0, HEAD_SPEED),
                HEAD_PITCH => JointState::new(name, -38.0, 29.0, HEAD_SPEED),
                _ => JointState::new(name, -120.0, 120.0, BODY_SPEED),
            };
            (name.to_owned(), joint)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_limited_step() {
        let mut j = JointState::new("j", -120.0, 120.0, 30.0);
        j.set_target(10.0);
        j.advance(0.1);
        assert!((j.angle - 3.0).abs() < 1e-12);
    }

    #[test]
    fn target_is_clamped() {
        let mut j = JointState::new("j", -38.0, 29.0, 1000.0);
        j.set_target(90.0);
        j.advance(1.0);
        assert_eq!(j.angle, 29.0);
    }

    #[test]
    fn head_limits() {
        let joints = default_joints();
        assert_eq!((joints[HEAD_YAW].min, joints[HEAD_YAW].max), (-119.0, 119.0));
        assert_eq!((joints[HEAD_PITCH].min, joints[HEAD_PITCH].max), (-38.0, 29.0));
        assert_eq!(joints.len(), 14);
    }
}
