use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::joints::JOINT_NAMES;

/// The six basic whole-body postures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Posture {
    Stand,
    StandInit,
    StandZero,
    Crouch,
    Sit,
    SitRelax,
}

impl Posture {
    pub const ALL: [Posture; 6] = [
        Posture::Stand,
        Posture::StandInit,
        Posture::StandZero,
        Posture::Crouch,
        Posture::Sit,
        Posture::SitRelax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Posture::Stand => "Stand",
            Posture::StandInit => "StandInit",
            Posture::StandZero => "StandZero",
            Posture::Crouch => "Crouch",
            Posture::Sit => "Sit",
            Posture::SitRelax => "SitRelax",
        }
    }

    /// Joint angles in degrees, same order as [`JOINT_NAMES`].
    fn table(self) -> [f64; 14] {
        match self {
            //                 HY   HP   LSP   LSR   LEY    LER   RSP   RSR    REY   RER   LHP    RHP    LKP    RKP
            Posture::Stand => [0.0, 0.0, 85.0, 10.0, -70.0, -25.0, 85.0, -10.0, 70.0, 25.0, -10.0, -10.0, 20.0, 20.0],
            Posture::StandInit => [0.0, 0.0, 80.0, 8.0, -70.0, -60.0, 80.0, -8.0, 70.0, 60.0, -25.0, -25.0, 40.0, 40.0],
            Posture::StandZero => [0.0; 14],
            Posture::Crouch => [0.0, 10.0, 75.0, 5.0, -45.0, -60.0, 75.0, -5.0, 45.0, 60.0, -50.0, -50.0, 115.0, 115.0],
            Posture::Sit => [0.0, 0.0, 60.0, 8.0, -40.0, -50.0, 60.0, -8.0, 40.0, 50.0, -90.0, -90.0, 60.0, 60.0],
            Posture::SitRelax => [0.0, -5.0, 45.0, 20.0, -20.0, -30.0, 45.0, -20.0, 20.0, 30.0, -90.0, -90.0, 50.0, 50.0],
        }
    }

    pub fn angles(self) -> BTreeMap<String, f64> {
        JOINT_NAMES
            .iter()
            .zip(self.table())
            .map(|(n, a)| ((*n).to_owned(), a))
            .collect()
    }
}

impl fmt::Display for Posture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Posture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Posture::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown posture {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostureState {
    At(Posture),
    Transition { to: Posture },
}

impl PostureState {
    pub fn label(&self) -> String {
        match self {
            PostureState::At(p) => p.name().to_owned(),
            PostureState::Transition { .. } => "Transition".to_owned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::joints::default_joints;

    #[test]
    fn posture_tables_respect_limits() {
        let joints = default_joints();
        for p in Posture::ALL {
            for (name, angle) in p.angles() {
                assert!(joints[&name].within_limits(angle), "{p} {name} {angle}");
            }
            assert_eq!(p.name().parse::<Posture>().unwrap(), p);
        }
        assert!("Dab".parse::<Posture>().is_err());
    }
}
