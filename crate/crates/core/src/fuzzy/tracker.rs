//! Head-tracking loop: camera frames in, `setAngles` commands out.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::{HeadController, HeadDelta};
use crate::avatar::{default_joints, FaceObservation, HEAD_PITCH, HEAD_YAW};
use crate::bus::{keys, BusError, Connector, Envelope, Kind};
use crate::clock::Millis;
use crate::runtime::{BusLink, Node};

/// Joint readings older than this make the tracker skip a frame.
pub const STALE_JOINTS_MS: Millis = 1000;

#[derive(Debug, Clone, Copy)]
struct HeadAngles {
    yaw: f64,
    pitch: f64,
    at: Millis,
}

/// What happened to one camera frame.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackOutcome {
    NoFace,
    /// Inside the deadband on both axes.
    Centered,
    StaleJoints,
    Commanded { id: String, yaw: f64, pitch: f64 },
}

/// Consumes `avatar.nao.data.camera` and `avatar.nao.data.joints`, publishes
/// `avatar.nao.command` (setAngles) and `lumen.motion.head`.
///
/// When frames pile up only the newest one is evaluated.
pub struct HeadTracker {
    link: BusLink,
    controller: HeadController,
    head: Option<HeadAngles>,
    yaw_limits: (f64, f64),
    pitch_limits: (f64, f64),
    sent: u64,
    last: Option<TrackOutcome>,
}

impl HeadTracker {
    pub fn new(connector: Arc<dyn Connector>, controller: HeadController) -> Result<Self, BusError> {
        let link = BusLink::open(connector, "head-tracker", &[keys::CAMERA, keys::JOINTS])?;
        let joints = default_joints();
        let limits = |n: &str| (joints[n].min, joints[n].max);
        Ok(Self {
            link,
            controller,
            head: None,
            yaw_limits: limits(HEAD_YAW),
            pitch_limits: limits(HEAD_PITCH),
            sent: 0,
            last: None,
        })
    }

    pub fn controller(&self) -> &HeadController {
        &self.controller
    }

    pub fn commands_sent(&self) -> u64 {
        self.sent
    }

    pub fn last_outcome(&self) -> Option<&TrackOutcome> {
        self.last.as_ref()
    }

    fn read_joints(&mut self, env: &Envelope) {
        let angles = env.payload.get("angles").and_then(Value::as_object);
        let get = |name: &str| angles.and_then(|a| a.get(name)).and_then(Value::as_f64);
        match (get(HEAD_YAW), get(HEAD_PITCH)) {
            (Some(yaw), Some(pitch)) => self.head = Some(HeadAngles { yaw, pitch, at: env.ts }),
            _ => log::warn!("joints payload without head angles"),
        }
    }

    fn track(&mut self, frame: &Envelope, now: Millis) -> TrackOutcome {
        let face = frame
            .payload
            .get("face")
            .filter(|f| !f.is_null())
            .and_then(|f| serde_json::from_value::<FaceObservation>(f.clone()).ok());
        let Some(face) = face else {
            return TrackOutcome::NoFace;
        };
        let head = match self.head {
            Some(h) if now.saturating_sub(h.at) <= STALE_JOINTS_MS => h,
            _ => return TrackOutcome::StaleJoints,
        };
        let delta = self.controller.flc_step(face);
        if delta.is_zero() {
            return TrackOutcome::Centered;
        }
        let yaw = (head.yaw + delta.yaw).clamp(self.yaw_limits.0, self.yaw_limits.1);
        let pitch = (head.pitch + delta.pitch).clamp(self.pitch_limits.0, self.pitch_limits.1);
        self.sent += 1;
        let id = format!("head-{}", self.sent);
        let mut args = Map::new();
        args.insert(HEAD_YAW.into(), json!(yaw));
        args.insert(HEAD_PITCH.into(), json!(pitch));
        self.link.send(
            keys::COMMAND,
            Kind::Command,
            json!({"id": id, "method": "setAngles", "args": args}),
        );
        self.link.send(keys::MOTION_HEAD, Kind::Event, motion_payload(face, delta, yaw, pitch));
        TrackOutcome::Commanded { id, yaw, pitch }
    }
}

fn motion_payload(face: FaceObservation, delta: HeadDelta, yaw: f64, pitch: f64) -> Value {
    json!({
        "face": {"x": face.x, "y": face.y},
        "delta": {"yaw": delta.yaw, "pitch": delta.pitch},
        "target": {"yaw": yaw, "pitch": pitch},
    })
}

impl Node for HeadTracker {
    fn name(&self) -> &str {
        "head-tracker"
    }

    fn poll(&mut self, now: Millis) -> bool {
        let batch = self.link.drain();
        if batch.is_empty() {
            return false;
        }
        let mut frame = None;
        for env in batch {
            match env.key.to_string().as_str() {
                keys::JOINTS => self.read_joints(&env),
                keys::CAMERA => frame = Some(env),
                _ => {}
            }
        }
        if let Some(frame) = frame {
            let outcome = self.track(&frame, now);
            if outcome == TrackOutcome::StaleJoints {
                log::debug!("skipping frame: no fresh joint data");
            }
            self.last = Some(outcome);
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::{Broker, Connection};
    use crate::clock::{Clock, VirtualClock};
    use crate::fuzzy::{build_head_controller, HeadControllerConfig};

    fn rig() -> (Broker, HeadTracker, VirtualClock) {
        let clock = VirtualClock::new(0);
        let broker = Broker::new(Default::default(), Arc::new(clock.clone()));
        let controller = build_head_controller(HeadControllerConfig::default()).unwrap();
        let tracker = HeadTracker::new(Arc::new(broker.clone()), controller).unwrap();
        (broker, tracker, clock)
    }

    fn feed(conn: &impl Connection, face: Value) {
        conn.publish_json(keys::JOINTS, Kind::Data, json!({"seq": 0, "angles": {"HeadYaw": 0.0, "HeadPitch": 0.0}}))
            .unwrap();
        conn.publish_json(keys::CAMERA, Kind::Data, json!({"seq": 0, "face": face})).unwrap();
    }

    #[test]
    fn left_face_turns_head_left() {
        let (broker, mut tracker, _) = rig();
        let sensors = broker.connect("sensors");
        let probe = broker.connect("probe");
        probe.subscribe_str(keys::COMMAND).unwrap();
        feed(&sensors, json!({"x": 80.0, "y": 120.0}));
        assert!(tracker.poll(0));
        let cmds = probe.drain().unwrap();
        assert_eq!(cmds.len(), 1);
        assert_eq!(cmds[0].payload["method"], "setAngles");
        assert!(cmds[0].payload["args"]["HeadYaw"].as_f64().unwrap() > 0.0);
        assert_eq!(cmds[0].payload["args"]["HeadPitch"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn null_and_centered_faces_send_nothing() {
        let (broker, mut tracker, _) = rig();
        let sensors = broker.connect("sensors");
        let probe = broker.connect("probe");
        probe.subscribe_str(keys::COMMAND).unwrap();
        feed(&sensors, Value::Null);
        tracker.poll(0);
        assert_eq!(tracker.last_outcome(), Some(&TrackOutcome::NoFace));
        feed(&sensors, json!({"x": 160.0, "y": 120.0}));
        tracker.poll(0);
        assert_eq!(tracker.last_outcome(), Some(&TrackOutcome::Centered));
        assert!(probe.drain().unwrap().is_empty());
    }

    #[test]
    fn stale_joints_skip() {
        let (broker, mut tracker, clock) = rig();
        let sensors = broker.connect("sensors");
        sensors
            .publish_json(keys::JOINTS, Kind::Data, json!({"angles": {"HeadYaw": 0.0, "HeadPitch": 0.0}}))
            .unwrap();
        clock.advance(1500);
        sensors.publish_json(keys::CAMERA, Kind::Data, json!({"face": {"x": 20.0, "y": 120.0}})).unwrap();
        tracker.poll(clock.now_ms());
        assert_eq!(tracker.last_outcome(), Some(&TrackOutcome::StaleJoints));
        assert_eq!(tracker.commands_sent(), 0);
    }
}
