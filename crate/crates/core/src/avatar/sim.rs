//! The simulated robot: state, command execution and the integrator.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::command::{posture_duration, walk_duration, Command, CommandReply, Method};
use super::joints::{default_joints, JointState, HEAD_PITCH, HEAD_YAW};
use super::keyframes::{self, KeyframeTimeline};
use super::posture::{Posture, PostureState};
use super::{CameraModel, FaceObservation, SimError, VisitorFace};

/// Battery drain while awake, percent per second.
pub const BATTERY_DRAIN: f64 = 0.01;
const DONE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Degrees, normalized to (-180, 180].
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvatarState {
    pub joints: BTreeMap<String, JointState>,
    pub posture: PostureState,
    pub torso: Pose,
    pub battery: f64,
    pub resting: bool,
    pub visitor_face: Option<VisitorFace>,
}

impl Default for AvatarState {
    fn default() -> Self {
        let mut joints = default_joints();
        for (name, angle) in Posture::Stand.angles() {
            let j = joints.get_mut(&name).expect("posture names a known joint");
            j.angle = angle;
            j.target = angle;
        }
        Self {
            joints,
            posture: PostureState::At(Posture::Stand),
            torso: Pose::default(),
            battery: 100.0,
            resting: false,
            visitor_face: None,
        }
    }
}

impl AvatarState {
    pub fn head_yaw(&self) -> f64 {
        self.joints[HEAD_YAW].angle
    }

    pub fn head_pitch(&self) -> f64 {
        self.joints[HEAD_PITCH].angle
    }

    pub fn angles(&self) -> BTreeMap<String, f64> {
        self.joints.iter().map(|(n, j)| (n.clone(), j.angle)).collect()
    }
}

fn normalize_deg(a: f64) -> f64 {
    let mut a = a % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

#[derive(Debug, Clone)]
enum Motion {
    Posture {
        to: Posture,
        start: BTreeMap<String, f64>,
    },
    Walk {
        start: Pose,
        dx: f64,
        dy: f64,
        dtheta: f64,
    },
    Timeline {
        timeline: KeyframeTimeline,
        start: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone)]
struct Active {
    cmd_id: String,
    motion: Motion,
    elapsed: f64,
    duration: f64,
}

/// Simulated humanoid.
///
/// Instantaneous commands (`say`, `setAngles`, `wakeUp`, `rest`) take effect
/// and reply at once. Durative ones (postures, walking, gestures) run one at a
/// time from a FIFO queue and reply when they finish.
#[derive(Debug, Clone)]
pub struct Avatar {
    state: AvatarState,
    camera: CameraModel,
    active: Option<Active>,
    queue: VecDeque<Command>,
    spoken: Vec<String>,
}

impl Default for Avatar {
    fn default() -> Self {
        Self::new(CameraModel::default())
    }
}

impl Avatar {
    pub fn new(camera: CameraModel) -> Self {
        Self {
            state: AvatarState::default(),
            camera,
            active: None,
            queue: VecDeque::new(),
            spoken: Vec::new(),
        }
    }

    pub fn state(&self) -> &AvatarState {
        &self.state
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    /// Everything said so far, in order.
    pub fn spoken(&self) -> &[String] {
        &self.spoken
    }

    pub fn is_busy(&self) -> bool {
        self.active.is_some() || !self.queue.is_empty()
    }

    pub fn observe_face(&self) -> Option<FaceObservation> {
        super::project_face(&self.state, &self.camera)
    }

    pub fn set_visitor_face(&mut self, face: Option<VisitorFace>) -> Result<(), SimError> {
        if let Some(f) = face {
            if !(-180.0..=180.0).contains(&f.azimuth) || !(-90.0..=90.0).contains(&f.elevation) {
                return Err(SimError::FaceOutOfRange(f.azimuth, f.elevation));
            }
        }
        self.state.visitor_face = face;
        Ok(())
    }

    /// Resets the battery level; the only way it can rise.
    pub fn set_battery(&mut self, percent: f64) {
        self.state.battery = percent.clamp(0.0, 100.0);
    }

    /// Starts or queues `cmd`. Returns the reply when the command finished (or
    /// failed) immediately, `None` when it will reply from a later
    /// [`Avatar::step`].
    pub fn execute_command(&mut self, cmd: Command) -> Option<CommandReply> {
        if self.state.resting && cmd.method.is_motion() {
            return Some(CommandReply::fail(&cmd.id, "robot is resting; send wakeUp first"));
        }
        match cmd.method {
            Method::Say => {
                let Some(text) = cmd.args.get("text").and_then(Value::as_str) else {
                    return Some(CommandReply::fail(&cmd.id, "say needs a string `text`"));
                };
                self.spoken.push(text.to_owned());
                Some(CommandReply::ok(&cmd.id, format!("said {text:?}")))
            }
            Method::SetAngles => Some(self.set_angles(&cmd)),
            Method::WakeUp => {
                if self.state.resting {
                    self.state.resting = false;
                    for (name, angle) in Posture::Stand.angles() {
                        self.state.joints.get_mut(&name).unwrap().set_target(angle);
                    }
                    self.state.posture = PostureState::At(Posture::Stand);
                }
                Some(CommandReply::ok(&cmd.id, "awake"))
            }
            Method::Rest => {
                // Rest is answered first; interrupted commands follow from step().
                self.state.resting = true;
                for (name, angle) in Posture::Crouch.angles() {
                    self.state.joints.get_mut(&name).unwrap().set_target(angle);
                }
                self.state.posture = PostureState::At(Posture::Crouch);
                Some(CommandReply::ok(&cmd.id, "resting"))
            }
            Method::GoToPosture | Method::MoveTo | Method::Dancing | Method::Singing | Method::Goodbye => {
                if let Err(reason) = validate_durative(&cmd) {
                    return Some(CommandReply::fail(&cmd.id, reason));
                }
                self.queue.push_back(cmd);
                if self.active.is_none() {
                    self.start_next();
                }
                None
            }
        }
    }

    fn set_angles(&mut self, cmd: &Command) -> CommandReply {
        let mut targets = Vec::with_capacity(cmd.args.len());
        for (name, value) in &cmd.args {
            let Some(joint) = self.state.joints.get(name) else {
                return CommandReply::fail(&cmd.id, format!("unknown joint {name}"));
            };
            let Some(angle) = value.as_f64() else {
                return CommandReply::fail(&cmd.id, format!("{name}: angle must be a number"));
            };
            if !joint.within_limits(angle) {
                return CommandReply::fail(
                    &cmd.id,
                    format!("{name}={angle} violates limits [{}, {}]", joint.min, joint.max),
                );
            }
            targets.push((name.clone(), angle));
        }
        for (name, angle) in targets {
            self.state.joints.get_mut(&name).unwrap().set_target(angle);
        }
        CommandReply::ok(&cmd.id, "targets set")
    }

    fn start_next(&mut self) {
        let Some(cmd) = self.queue.pop_front() else { return };
        let angles = self.state.angles();
        let (motion, duration) = match cmd.method {
            Method::GoToPosture => {
                let to: Posture = cmd.args["name"].as_str().unwrap().parse().unwrap();
                self.state.posture = PostureState::Transition { to };
                let speed = cmd.arg_f64("speed").unwrap_or(1.0);
                (Motion::Posture { to, start: angles }, posture_duration(speed))
            }
            Method::MoveTo => {
                let dx = cmd.arg_f64("x").unwrap_or(0.0);
                let dy = cmd.arg_f64("y").unwrap_or(0.0);
                let dtheta = cmd.arg_f64("theta").unwrap_or(0.0);
                let motion = Motion::Walk {
                    start: self.state.torso,
                    dx,
                    dy,
                    dtheta,
                };
                (motion, walk_duration(dx, dy, dtheta))
            }
            Method::Dancing | Method::Singing | Method::Goodbye => {
                let timeline = match cmd.method {
                    Method::Dancing => keyframes::dance(),
                    Method::Singing => keyframes::sing(),
                    _ => keyframes::wave(),
                };
                let d = timeline.duration();
                (Motion::Timeline { timeline, start: angles }, d)
            }
            _ => unreachable!("only durative commands are queued"),
        };
        self.active = Some(Active {
            cmd_id: cmd.id,
            motion,
            elapsed: 0.0,
            duration,
        });
    }

    /// Advances the simulation by `dt` seconds and returns replies of
    /// commands that completed (or were interrupted) during the step.
    pub fn step(&mut self, dt: f64) -> Result<Vec<CommandReply>, SimError> {
        if !(dt > 0.0 && dt <= 0.1) {
            return Err(SimError::InvalidStep(dt));
        }
        let mut replies = Vec::new();

        if self.state.resting {
            if let Some(active) = self.active.take() {
                replies.push(CommandReply::fail(&active.cmd_id, "interrupted by rest"));
            }
            for cmd in self.queue.drain(..) {
                replies.push(CommandReply::fail(&cmd.id, "interrupted by rest"));
            }
        }

        if let Some(active) = &mut self.active {
            active.elapsed += dt;
            let frac = if active.duration > 0.0 {
                (active.elapsed / active.duration).min(1.0)
            } else {
                1.0
            };
            match &active.motion {
                Motion::Posture { to, start } => {
                    for (name, goal) in to.angles() {
                        let from = start[&name];
                        self.state.joints.get_mut(&name).unwrap().set_target(from + (goal - from) * frac);
                    }
                }
                Motion::Walk { start, dx, dy, dtheta } => {
                    let h = start.heading.to_radians();
                    let (s, c) = h.sin_cos();
                    let before = self.state.torso.heading;
                    self.state.torso = Pose {
                        x: start.x + (dx * c - dy * s) * frac,
                        y: start.y + (dx * s + dy * c) * frac,
                        heading: normalize_deg(start.heading + dtheta * frac),
                    };
                    // The visitor stays put in the world while the torso turns.
                    let turned = normalize_deg(self.state.torso.heading - before);
                    if let Some(face) = &mut self.state.visitor_face {
                        face.azimuth = normalize_deg(face.azimuth - turned);
                    }
                }
                Motion::Timeline { timeline, start } => {
                    for (name, target) in timeline.sample(active.elapsed, start) {
                        self.state.joints.get_mut(&name).unwrap().set_target(target);
                    }
                }
            }
        }

        for joint in self.state.joints.values_mut() {
            joint.advance(dt);
        }

        if let Some(active) = &self.active {
            if active.elapsed + DONE_EPS >= active.duration {
                let active = self.active.take().unwrap();
                let detail = match active.motion {
                    Motion::Posture { to, .. } => {
                        self.state.posture = PostureState::At(to);
                        format!("posture {to}")
                    }
                    Motion::Walk { .. } => {
                        let p = self.state.torso;
                        format!("at ({:.3}, {:.3}, {:.1})", p.x, p.y, p.heading)
                    }
                    Motion::Timeline { timeline, .. } => format!("{} finished", timeline.name),
                };
                replies.push(CommandReply::ok(&active.cmd_id, detail));
                self.start_next();
            }
        }

        if !self.state.resting {
            self.state.battery = (self.state.battery - BATTERY_DRAIN * dt).max(0.0);
        }
        Ok(replies)
    }
}

fn validate_durative(cmd: &Command) -> Result<(), String> {
    match cmd.method {
        Method::GoToPosture => {
            let name = cmd
                .args
                .get("name")
                .and_then(Value::as_str)
                .ok_or("goToPosture needs a string `name`")?;
            name.parse::<Posture>()?;
            let speed = cmd.arg_f64("speed").unwrap_or(1.0);
            if !(speed > 0.0 && speed <= 1.0) {
                return Err(format!("speed {speed} outside (0, 1]"));
            }
        }
        Method::MoveTo => {
            for key in ["x", "y", "theta"] {
                match cmd.args.get(key) {
                    None => {}
                    Some(v) if v.as_f64().is_some_and(f64::is_finite) => {}
                    Some(v) => return Err(format!("moveTo `{key}` must be a number, got {v}")),
                }
            }
        }
        _ => {}
    }
    Ok(())
}
