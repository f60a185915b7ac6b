//! Simulated humanoid avatar.
//!
//! [`Avatar`] is the plain simulation. [`node`] wires it to the bus as a set
//! of cooperating nodes: a command loop, an integrator and one producer per
//! sensor stream, which can run under the virtual scheduler or on threads.

mod camera;
mod command;
mod joints;
pub mod keyframes;
pub mod node;
mod posture;
mod sim;
pub mod streams;

pub use camera::{project_face, CameraModel, FaceObservation, VisitorFace};
pub use command::{
    parse_command, posture_duration, walk_duration, Command, CommandParseError, CommandReply, Method, TURN_SPEED,
    WALK_SPEED,
};
pub use joints::{default_joints, JointState, HEAD_PITCH, HEAD_YAW, JOINT_NAMES};
pub use keyframes::{Keyframe, KeyframeTimeline};
pub use node::{avatar_nodes, AvatarHandle};
pub use posture::{Posture, PostureState};
pub use sim::{Avatar, AvatarState, Pose, BATTERY_DRAIN};
pub use streams::{SensorKind, SensorRates};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("step of {0} s is outside (0, 0.1]")]
    InvalidStep(f64),
    #[error("visitor face ({0}, {1}) is outside azimuth [-180, 180] / elevation [-90, 90]")]
    FaceOutOfRange(f64, f64),
}
