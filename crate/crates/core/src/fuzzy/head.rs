//! Fuzzy head-tracking controller.
//!
//! Inputs are the face position in a 320x240 frame (`FaceXLoc`, `FaceYLoc`);
//! outputs are head yaw/pitch increments in degrees (`AngleX`, `AngleY`).
//! Six single-antecedent rules push the head toward the face: a face on the
//! negative side of the frame asks for a positive angle and vice versa.

use serde::{Deserialize, Serialize};

use super::{
    defuzzify_centroid, infer_mamdani, FuzzyError, FuzzyRule, FuzzySystem, GaussianTerm, Grid, Label,
    LinguisticVariable,
};
use crate::avatar::FaceObservation;

pub const FACE_X_LOC: &str = "FaceXLoc";
pub const FACE_Y_LOC: &str = "FaceYLoc";
pub const ANGLE_X: &str = "AngleX";
pub const ANGLE_Y: &str = "AngleY";

/// Which reading of the published parameter table to use.
///
/// `AsPrinted` takes the rows literally, which puts the "positive" term of
/// `FaceYLoc`, `AngleX` and `AngleY` at the middle of the universe and the
/// "zero" term at the top. `Corrected` swaps the positive and zero rows of
/// those three variables so centers increase negative < zero < positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterSet {
    #[default]
    Corrected,
    AsPrinted,
}

impl std::str::FromStr for ParameterSet {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "as_printed" => Ok(Self::AsPrinted),
            other => Err(FuzzyError::InvalidConfig(format!("unknown parameter set {other:?}"))),
        }
    }
}

/// One column of the parameter table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermParams {
    pub c_n: f64,
    pub sigma_n: f64,
    pub c_p: f64,
    pub sigma_p: f64,
    pub c_z: f64,
    pub sigma_z: f64,
}

impl TermParams {
    const fn new(c_n: f64, sigma_n: f64, c_p: f64, sigma_p: f64, c_z: f64, sigma_z: f64) -> Self {
        Self {
            c_n,
            sigma_n,
            c_p,
            sigma_p,
            c_z,
            sigma_z,
        }
    }

    fn swap_positive_zero(self) -> Self {
        Self::new(self.c_n, self.sigma_n, self.c_z, self.sigma_z, self.c_p, self.sigma_p)
    }

    fn terms(&self) -> Result<Vec<GaussianTerm>, FuzzyError> {
        Ok(vec![
            GaussianTerm::new(Label::Negative, self.c_n, self.sigma_n)?,
            GaussianTerm::new(Label::Zero, self.c_z, self.sigma_z)?,
            GaussianTerm::new(Label::Positive, self.c_p, self.sigma_p)?,
        ])
    }
}

const PRINTED: [(&str, [f64; 2], TermParams); 4] = [
    (FACE_X_LOC, [0.0, 320.0], TermParams::new(0.0, 80.0, 320.0, 80.0, 160.0, 50.0)),
    (FACE_Y_LOC, [0.0, 240.0], TermParams::new(0.0, 70.0, 120.0, 40.0, 240.0, 70.0)),
    (ANGLE_X, [-45.0, 45.0], TermParams::new(-15.0, 10.0, 0.0, 10.0, 15.0, 10.0)),
    (ANGLE_Y, [-25.0, 25.0], TermParams::new(-7.0, 6.0, 0.0, 6.0, 7.0, 6.0)),
];

impl ParameterSet {
    /// `(variable, universe, parameters)` for the four variables.
    pub fn table(self) -> [(&'static str, [f64; 2], TermParams); 4] {
        match self {
            ParameterSet::AsPrinted => PRINTED,
            ParameterSet::Corrected => PRINTED.map(|(name, universe, p)| {
                if name == FACE_X_LOC {
                    (name, universe, p)
                } else {
                    (name, universe, p.swap_positive_zero())
                }
            }),
        }
    }

    pub fn system(self) -> Result<FuzzySystem, FuzzyError> {
        let variables = self
            .table()
            .iter()
            .map(|(name, universe, p)| LinguisticVariable::new(name, *universe, p.terms()?))
            .collect::<Result<Vec<_>, _>>()?;
        FuzzySystem::new(variables, head_rules())
    }
}

/// The six tracking rules: each input label maps to the opposite output label.
pub fn head_rules() -> Vec<FuzzyRule> {
    use Label::*;
    vec![
        FuzzyRule::single(FACE_X_LOC, Negative, ANGLE_X, Positive),
        FuzzyRule::single(FACE_X_LOC, Positive, ANGLE_X, Negative),
        FuzzyRule::single(FACE_X_LOC, Zero, ANGLE_X, Zero),
        FuzzyRule::single(FACE_Y_LOC, Negative, ANGLE_Y, Positive),
        FuzzyRule::single(FACE_Y_LOC, Positive, ANGLE_Y, Negative),
        FuzzyRule::single(FACE_Y_LOC, Zero, ANGLE_Y, Zero),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadControllerConfig {
    pub parameter_set: ParameterSet,
    /// Output grid spacing in degrees.
    pub step: f64,
    /// Pixel distance from the frame center inside which an axis outputs 0.
    pub deadband: f64,
    pub gain: f64,
}

impl Default for HeadControllerConfig {
    fn default() -> Self {
        Self {
            parameter_set: ParameterSet::Corrected,
            step: 0.01,
            deadband: 5.0,
            gain: 1.0,
        }
    }
}

/// Head increments in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeadDelta {
    pub yaw: f64,
    pub pitch: f64,
}

impl HeadDelta {
    pub fn is_zero(&self) -> bool {
        self.yaw == 0.0 && self.pitch == 0.0
    }
}

#[derive(Debug, Clone)]
pub struct HeadController {
    system: FuzzySystem,
    config: HeadControllerConfig,
    yaw_grid: Grid,
    pitch_grid: Grid,
    center: (f64, f64),
    yaw_bound: [f64; 2],
    pitch_bound: [f64; 2],
}

pub fn build_head_controller(config: HeadControllerConfig) -> Result<HeadController, FuzzyError> {
    HeadController::from_system(config.parameter_set.system()?, config)
}

impl HeadController {
    /// Wraps any system that defines the four head-tracking variables, e.g.
    /// one loaded from JSON.
    pub fn from_system(system: FuzzySystem, config: HeadControllerConfig) -> Result<Self, FuzzyError> {
        if !(config.step.is_finite() && config.step > 0.0) {
            return Err(FuzzyError::InvalidStep(config.step));
        }
        if !(config.deadband.is_finite() && config.deadband >= 0.0) {
            return Err(FuzzyError::InvalidConfig(format!("deadband {}", config.deadband)));
        }
        if !config.gain.is_finite() {
            return Err(FuzzyError::InvalidConfig(format!("gain {}", config.gain)));
        }
        let ax = system.variable(ANGLE_X)?.universe;
        let ay = system.variable(ANGLE_Y)?.universe;
        let center = (system.variable(FACE_X_LOC)?.midpoint(), system.variable(FACE_Y_LOC)?.midpoint());
        Ok(Self {
            yaw_grid: Grid::over(ax, config.step)?,
            pitch_grid: Grid::over(ay, config.step)?,
            yaw_bound: ax,
            pitch_bound: ay,
            center,
            system,
            config,
        })
    }

    pub fn config(&self) -> &HeadControllerConfig {
        &self.config
    }

    pub fn system(&self) -> &FuzzySystem {
        &self.system
    }

    /// Pixel coordinates of the frame center.
    pub fn frame_center(&self) -> (f64, f64) {
        self.center
    }

    /// Crisp yaw increment for a face column, before deadband and gain.
    pub fn raw_yaw(&self, x: f64) -> f64 {
        let sm = infer_mamdani(&self.system, &[(FACE_X_LOC, x)], ANGLE_X, &self.yaw_grid)
            .expect("head system is validated at construction");
        defuzzify_centroid(&sm)
    }

    pub fn raw_pitch(&self, y: f64) -> f64 {
        let sm = infer_mamdani(&self.system, &[(FACE_Y_LOC, y)], ANGLE_Y, &self.pitch_grid)
            .expect("head system is validated at construction");
        defuzzify_centroid(&sm)
    }

    /// One control tick: face position to head increments.
    pub fn flc_step(&self, face: FaceObservation) -> HeadDelta {
        let (cx, cy) = self.center;
        let yaw = if (face.x - cx).abs() <= self.config.deadband {
            0.0
        } else {
            (self.config.gain * self.raw_yaw(face.x)).clamp(self.yaw_bound[0], self.yaw_bound[1])
        };
        let pitch = if (face.y - cy).abs() <= self.config.deadband {
            0.0
        } else {
            (self.config.gain * self.raw_pitch(face.y)).clamp(self.pitch_bound[0], self.pitch_bound[1])
        };
        HeadDelta { yaw, pitch }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centers(set: ParameterSet, name: &str) -> (f64, f64, f64) {
        let (_, _, p) = set.table().into_iter().find(|(n, _, _)| *n == name).unwrap();
        (p.c_n, p.c_p, p.c_z)
    }

    #[test]
    fn printed_and_corrected_angle_x() {
        assert_eq!(centers(ParameterSet::AsPrinted, ANGLE_X), (-15.0, 0.0, 15.0));
        // corrected: (c_n, c_p, c_z) = (-15, 15, 0)
        assert_eq!(centers(ParameterSet::Corrected, ANGLE_X), (-15.0, 15.0, 0.0));
        let sys = ParameterSet::Corrected.system().unwrap();
        let ax = sys.variable(ANGLE_X).unwrap();
        let cs: Vec<f64> = Label::ALL.iter().map(|l| ax.term(*l).c).collect();
        assert_eq!(cs, vec![-15.0, 0.0, 15.0]);
    }

    #[test]
    fn corrected_face_y_is_symmetric() {
        let sys = ParameterSet::Corrected.system().unwrap();
        let v = sys.variable(FACE_Y_LOC).unwrap();
        assert_eq!((v.term(Label::Negative).c, v.term(Label::Negative).sigma), (0.0, 70.0));
        assert_eq!((v.term(Label::Zero).c, v.term(Label::Zero).sigma), (120.0, 40.0));
        assert_eq!((v.term(Label::Positive).c, v.term(Label::Positive).sigma), (240.0, 70.0));
    }

    #[test]
    fn centered_face_gives_no_motion() {
        let c = build_head_controller(HeadControllerConfig::default()).unwrap();
        assert_eq!(c.flc_step(FaceObservation { x: 160.0, y: 120.0 }), HeadDelta::default());
    }

    #[test]
    fn left_face_turns_head_positive() {
        let c = build_head_controller(HeadControllerConfig::default()).unwrap();
        let d = c.flc_step(FaceObservation { x: 0.0, y: 120.0 });
        assert!(d.yaw > 10.0 && d.yaw < 15.0, "{d:?}");
        assert_eq!(d.pitch, 0.0);
    }

    #[test]
    fn gain_scales_and_clamps() {
        let cfg = HeadControllerConfig {
            gain: 10.0,
            ..Default::default()
        };
        let c = build_head_controller(cfg).unwrap();
        let d = c.flc_step(FaceObservation { x: 0.0, y: 0.0 });
        assert_eq!(d.yaw, 45.0);
        assert_eq!(d.pitch, 25.0);
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            HeadControllerConfig { step: 0.0, ..Default::default() },
            HeadControllerConfig { deadband: -1.0, ..Default::default() },
            HeadControllerConfig { gain: f64::NAN, ..Default::default() },
        ] {
            assert!(build_head_controller(cfg).is_err());
        }
    }

    #[test]
    fn system_round_trips_through_json() {
        let sys = ParameterSet::Corrected.system().unwrap();
        let text = serde_json::to_string_pretty(&sys).unwrap();
        let back: FuzzySystem = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sys);
    }
}
