//! Sensor stream scheduling and payloads.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AvatarState, CameraModel};
use crate::bus::keys;
use crate::clock::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Camera,
    Sonar,
    Battery,
    Tactile,
    Joints,
}

impl SensorKind {
    pub const ALL: [SensorKind; 5] = [
        SensorKind::Camera,
        SensorKind::Sonar,
        SensorKind::Battery,
        SensorKind::Tactile,
        SensorKind::Joints,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SensorKind::Camera => keys::CAMERA,
            SensorKind::Sonar => keys::SONAR,
            SensorKind::Battery => keys::BATTERY,
            SensorKind::Tactile => keys::TACTILE,
            SensorKind::Joints => keys::JOINTS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SensorKind::Camera => "camera",
            SensorKind::Sonar => "sonar",
            SensorKind::Battery => "battery",
            SensorKind::Tactile => "tactile",
            SensorKind::Joints => "joints",
        }
    }
}

/// Publication rates in Hz. Tactile is event-driven and has no rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorRates {
    pub camera: f64,
    pub joints: f64,
    pub sonar: f64,
    pub battery: f64,
}

impl Default for SensorRates {
    fn default() -> Self {
        Self {
            camera: 10.0,
            joints: 10.0,
            sonar: 5.0,
            battery: 0.2,
        }
    }
}

impl SensorRates {
    pub fn period_ms(&self, kind: SensorKind) -> Option<Millis> {
        let hz = match kind {
            SensorKind::Camera => self.camera,
            SensorKind::Joints => self.joints,
            SensorKind::Sonar => self.sonar,
            SensorKind::Battery => self.battery,
            SensorKind::Tactile => return None,
        };
        (hz > 0.0).then(|| ((1000.0 / hz).round() as Millis).max(1))
    }
}

/// Fixed-rate schedule. The first sample is due one period after the first
/// call to [`PeriodicStream::due`]; a lagging caller skips missed slots
/// instead of bursting.
#[derive(Debug, Clone)]
pub struct PeriodicStream {
    period: Millis,
    next_due: Option<Millis>,
    seq: u64,
}

impl PeriodicStream {
    pub fn new(period: Millis) -> Self {
        assert!(period > 0);
        Self {
            period,
            next_due: None,
            seq: 0,
        }
    }

    /// Returns the sequence number to publish if a sample is due at `now`.
    pub fn due(&mut self, now: Millis) -> Option<u64> {
        let next = *self.next_due.get_or_insert(now + self.period);
        if now < next {
            return None;
        }
        let missed = (now - next) / self.period;
        self.next_due = Some(next + (missed + 1) * self.period);
        let seq = self.seq;
        self.seq += 1;
        Some(seq)
    }
}

/// Synthetic sonar range when nobody stands in front of the robot, metres.
pub const SONAR_MAX_RANGE: f64 = 2.55;
/// Range reported while a visitor is in view.
pub const SONAR_VISITOR_RANGE: f64 = 0.9;

pub fn payload(kind: SensorKind, seq: u64, state: &AvatarState, camera: &CameraModel) -> Value {
    match kind {
        SensorKind::Camera => {
            let face = super::project_face(state, camera).map(|f| json!({"x": f.x, "y": f.y}));
            json!({"seq": seq, "face": face})
        }
        SensorKind::Joints => json!({
            "seq": seq,
            "angles": state.angles(),
            "posture": state.posture.label(),
            "resting": state.resting,
        }),
        SensorKind::Sonar => {
            let range = match state.visitor_face {
                Some(f) if f.azimuth.abs() <= 30.0 => SONAR_VISITOR_RANGE,
                _ => SONAR_MAX_RANGE,
            };
            json!({"seq": seq, "left": range, "right": range})
        }
        SensorKind::Battery => json!({"seq": seq, "percent": state.battery}),
        SensorKind::Tactile => json!({"seq": seq}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_seconds_of_camera_is_twenty_frames() {
        let period = SensorRates::default().period_ms(SensorKind::Camera).unwrap();
        let mut s = PeriodicStream::new(period);
        let n = (0..=2000).step_by(10).filter_map(|t| s.due(t)).count();
        assert_eq!(n, 20);
    }

    #[test]
    fn lagging_caller_skips() {
        let mut s = PeriodicStream::new(100);
        assert_eq!(s.due(0), None);
        assert_eq!(s.due(100), Some(0));
        assert_eq!(s.due(450), Some(1));
        assert_eq!(s.due(460), None);
        assert_eq!(s.due(500), Some(2));
    }

    #[test]
    fn default_periods() {
        let r = SensorRates::default();
        assert_eq!(r.period_ms(SensorKind::Battery), Some(5000));
        assert_eq!(r.period_ms(SensorKind::Sonar), Some(200));
        assert_eq!(r.period_ms(SensorKind::Tactile), None);
    }

    #[test]
    fn camera_payload_without_face_is_null() {
        let state = AvatarState::default();
        let v = payload(SensorKind::Camera, 3, &state, &CameraModel::default());
        assert_eq!(v, json!({"seq": 3, "face": null}));
    }
}
