//! Timed joint waypoints for gestures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::joints::JointState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    /// Seconds from the start of playback.
    pub t: f64,
    pub targets: BTreeMap<String, f64>,
}

/// Playback starts from the pose the robot is in and interpolates linearly
/// toward the first keyframe, then between consecutive keyframes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyframeTimeline {
    pub name: String,
    pub frames: Vec<Keyframe>,
}

impl KeyframeTimeline {
    pub fn duration(&self) -> f64 {
        self.frames.last().map_or(0.0, |f| f.t)
    }

    pub fn joints(&self) -> impl Iterator<Item = &str> {
        self.frames
            .first()
            .into_iter()
            .flat_map(|f| f.targets.keys().map(String::as_str))
    }

    /// Problems with the timeline: non-increasing times, ragged joint sets,
    /// unknown joints, targets outside limits.
    pub fn check(&self, joints: &BTreeMap<String, JointState>) -> Vec<String> {
        let mut problems = Vec::new();
        let mut prev_t = 0.0;
        let first_keys: Vec<&String> = self.frames.first().map(|f| f.targets.keys().collect()).unwrap_or_default();
        if self.frames.is_empty() {
            problems.push("no keyframes".into());
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.t <= prev_t {
                problems.push(format!("frame {i}: t={} not after {prev_t}", f.t));
            }
            prev_t = f.t;
            if f.targets.keys().collect::<Vec<_>>() != first_keys {
                problems.push(format!("frame {i}: joint set differs from frame 0"));
            }
            for (name, angle) in &f.targets {
                match joints.get(name) {
                    None => problems.push(format!("frame {i}: unknown joint {name}")),
                    Some(j) if !j.within_limits(*angle) => {
                        problems.push(format!("frame {i}: {name}={angle} outside [{}, {}]", j.min, j.max))
                    }
                    Some(_) => {}
                }
            }
        }
        problems
    }

    /// Interpolated targets at `t`, starting from `start` at time 0.
    pub fn sample(&self, t: f64, start: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
        let t = t.max(0.0);
        let idx = self.frames.partition_point(|f| f.t <= t);
        if idx == self.frames.len() {
            return self.frames.last().map(|f| f.targets.clone()).unwrap_or_default();
        }
        let next = &self.frames[idx];
        let prev = idx.checked_sub(1).map(|i| &self.frames[i]);
        let t0 = prev.map_or(0.0, |p| p.t);
        let from = |n: &str| match prev {
            Some(p) => p.targets[n],
            None => start.get(n).copied().unwrap_or(0.0),
        };
        let frac = (t - t0) / (next.t - t0);
        next.targets
            .iter()
            .map(|(n, &b)| {
                let a = from(n);
                (n.clone(), a + (b - a) * frac)
            })
            .collect()
    }
}

fn build(name: &str, base: &[(&str, f64)], frames: &[(f64, &[(&str, f64)])]) -> KeyframeTimeline {
    let base: BTreeMap<String, f64> = base.iter().map(|(n, a)| ((*n).to_owned(), *a)).collect();
    let frames = frames
        .iter()
        .map(|(t, overrides)| {
            let mut targets = base.clone();
            for (n, a) in overrides.iter() {
                *targets.get_mut(*n).expect("override names a base joint") = *a;
            }
            Keyframe { t: *t, targets }
        })
        .collect();
    KeyframeTimeline {
        name: name.to_owned(),
        frames,
    }
}

const ARMS_DOWN: [(&str, f64); 9] = [
    ("HeadYaw", 0.0),
    ("LShoulderPitch", 85.0),
    ("LShoulderRoll", 10.0),
    ("LElbowYaw", -70.0),
    ("LElbowRoll", -25.0),
    ("RShoulderPitch", 85.0),
    ("RShoulderRoll", -10.0),
    ("RElbowYaw", 70.0),
    ("RElbowRoll", 25.0),
];

/// Twelve-second arm-pumping dance, 10 frames.
pub fn dance() -> KeyframeTimeline {
    build(
        "dancing",
        &ARMS_DOWN,
        &[
            (2.0, &[("LShoulderPitch", 20.0), ("RShoulderPitch", 20.0), ("LElbowRoll", -80.0), ("RElbowRoll", 80.0)]),
            (3.0, &[("LShoulderPitch", 40.0), ("RShoulderPitch", 40.0), ("LElbowRoll", -40.0), ("RElbowRoll", 40.0), ("HeadYaw", 15.0)]),
            (4.0, &[("LShoulderPitch", 20.0), ("RShoulderPitch", 20.0), ("LElbowRoll", -80.0), ("RElbowRoll", 80.0), ("HeadYaw", -15.0)]),
            (5.0, &[("LShoulderPitch", -20.0), ("RShoulderPitch", 60.0), ("LShoulderRoll", 40.0), ("RElbowRoll", 70.0)]),
            (6.5, &[("LShoulderPitch", 60.0), ("RShoulderPitch", -20.0), ("RShoulderRoll", -40.0), ("LElbowRoll", -70.0)]),
            (8.0, &[("LShoulderPitch", -20.0), ("RShoulderPitch", 60.0), ("LShoulderRoll", 40.0), ("RElbowRoll", 70.0)]),
            (9.0, &[("LShoulderPitch", 30.0), ("RShoulderPitch", 30.0), ("LElbowYaw", -20.0), ("RElbowYaw", 20.0)]),
            (10.0, &[("LShoulderPitch", 0.0), ("RShoulderPitch", 0.0), ("LShoulderRoll", 60.0), ("RShoulderRoll", -60.0)]),
            (11.0, &[("LShoulderPitch", 40.0), ("RShoulderPitch", 40.0), ("HeadYaw", 10.0)]),
            (12.0, &[]),
        ],
    )
}

/// Ten-second singing routine: right hand holds a microphone, left waves.
pub fn sing() -> KeyframeTimeline {
    let mic: &[(&str, f64)] = &[("RShoulderPitch", 30.0), ("RElbowRoll", 85.0), ("RElbowYaw", 90.0)];
    build(
        "singing",
        &ARMS_DOWN,
        &[
            (2.0, mic),
            (3.5, &[("RShoulderPitch", 30.0), ("RElbowRoll", 85.0), ("RElbowYaw", 90.0), ("LShoulderPitch", -30.0), ("LShoulderRoll", 30.0), ("HeadYaw", 10.0)]),
            (5.0, &[("RShoulderPitch", 30.0), ("RElbowRoll", 85.0), ("RElbowYaw", 90.0), ("LShoulderPitch", -30.0), ("LShoulderRoll", 60.0), ("HeadYaw", -10.0)]),
            (6.0, &[("RShoulderPitch", 30.0), ("RElbowRoll", 85.0), ("RElbowYaw", 90.0), ("LShoulderPitch", -30.0), ("LShoulderRoll", 30.0)]),
            (7.0, &[("RShoulderPitch", 30.0), ("RElbowRoll", 85.0), ("RElbowYaw", 90.0), ("LShoulderPitch", -30.0), ("LShoulderRoll", 60.0)]),
            (8.0, &[("RShoulderPitch", 30.0), ("RElbowRoll", 85.0), ("RElbowYaw", 90.0), ("LShoulderPitch", 20.0)]),
            (9.0, mic),
            (10.0, &[]),
        ],
    )
}

/// Ten-second hand wave with the right arm raised, 8 frames.
pub fn wave() -> KeyframeTimeline {
    let up: &[(&str, f64)] = &[("RShoulderPitch", -60.0), ("RShoulderRoll", -20.0), ("RElbowRoll", 60.0)];
    let out: &[(&str, f64)] = &[("RShoulderPitch", -60.0), ("RShoulderRoll", -60.0), ("RElbowRoll", 30.0)];
    build(
        "goodbye",
        &ARMS_DOWN,
        &[(2.0, up), (3.0, out), (4.0, up), (5.0, out), (6.0, up), (7.0, out), (8.0, up), (10.0, &[])],
    )
}
