use serde::{Deserialize, Serialize};

use super::AvatarState;

/// Pinhole-free linear camera: pixels are proportional to angle off-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub width: f64,
    pub height: f64,
    /// Horizontal field of view, degrees.
    pub hfov: f64,
    pub vfov: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 320.0,
            height: 240.0,
            hfov: 60.0,
            vfov: 45.0,
        }
    }
}

impl CameraModel {
    /// Pixels per degree, horizontal.
    pub fn kx(&self) -> f64 {
        self.width / self.hfov
    }

    pub fn ky(&self) -> f64 {
        self.height / self.vfov
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width / 2.0, self.height / 2.0)
    }

    /// Image position of a face at `face` when the head points at
    /// (`yaw`, `pitch`). `None` outside the field of view.
    pub fn project(&self, yaw: f64, pitch: f64, face: VisitorFace) -> Option<FaceObservation> {
        let dx = yaw - face.azimuth;
        let dy = pitch - face.elevation;
        if dx.abs() > self.hfov / 2.0 || dy.abs() > self.vfov / 2.0 {
            return None;
        }
        let (cx, cy) = self.center();
        Some(FaceObservation {
            x: cx + self.kx() * dx,
            y: cy + self.ky() * dy,
        })
    }

    /// Inverse of [`CameraModel::project`] for a known head pose.
    pub fn unproject(&self, yaw: f64, pitch: f64, obs: FaceObservation) -> VisitorFace {
        let (cx, cy) = self.center();
        VisitorFace {
            azimuth: yaw - (obs.x - cx) / self.kx(),
            elevation: pitch - (obs.y - cy) / self.ky(),
        }
    }
}

/// Face position in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceObservation {
    pub x: f64,
    pub y: f64,
}

/// Visitor face direction in degrees, relative to the torso heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitorFace {
    pub azimuth: f64,
    pub elevation: f64,
}

pub fn project_face(state: &AvatarState, cam: &CameraModel) -> Option<FaceObservation> {
    let face = state.visitor_face?;
    cam.project(state.head_yaw(), state.head_pitch(), face)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_face() {
        let cam = CameraModel::default();
        let obs = cam.project(5.0, -3.0, VisitorFace { azimuth: 5.0, elevation: -3.0 }).unwrap();
        assert_eq!(obs, FaceObservation { x: 160.0, y: 120.0 });
    }

    #[test]
    fn fifteen_degrees_left() {
        let cam = CameraModel::default();
        let obs = cam.project(0.0, 0.0, VisitorFace { azimuth: 15.0, elevation: 0.0 }).unwrap();
        // 160 - (320 / 60) * 15
        assert!((obs.x - 80.0).abs() < 1e-12);
    }

    #[test]
    fn negative_azimuth_lands_right_of_center() {
        let cam = CameraModel::default();
        let obs = cam.project(0.0, 0.0, VisitorFace { azimuth: -15.0, elevation: 0.0 }).unwrap();
        assert!(obs.x > 160.0);
    }

    #[test]
    fn outside_fov() {
        let cam = CameraModel::default();
        assert!(cam.project(0.0, 0.0, VisitorFace { azimuth: 40.0, elevation: 0.0 }).is_none());
        assert!(cam.project(0.0, 0.0, VisitorFace { azimuth: 0.0, elevation: -23.0 }).is_none());
    }

    #[test]
    fn unproject_inverts_project() {
        let cam = CameraModel::default();
        let face = VisitorFace { azimuth: 12.5, elevation: -7.25 };
        let obs = cam.project(3.0, 1.0, face).unwrap();
        let back = cam.unproject(3.0, 1.0, obs);
        assert!((back.azimuth - face.azimuth).abs() < 1e-12);
        assert!((back.elevation - face.elevation).abs() < 1e-12);
    }
}
