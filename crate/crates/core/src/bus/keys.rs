//! Routing-key registry.
//!
//! Every key starts with `avatar` (robot endpoints) or `lumen` (intelligence
//! modules).

pub const CAMERA: &str = "avatar.nao.data.camera";
pub const SONAR: &str = "avatar.nao.data.sonar";
pub const BATTERY: &str = "avatar.nao.data.battery";
pub const TACTILE: &str = "avatar.nao.data.tactile";
pub const JOINTS: &str = "avatar.nao.data.joints";
pub const ALL_SENSOR_DATA: &str = "avatar.nao.data.#";
pub const COMMAND: &str = "avatar.nao.command";
pub const REPLY: &str = "avatar.nao.reply";

pub const VISUAL_FACE: &str = "lumen.visual.face";
pub const AUDIO_SPEECH: &str = "lumen.audio.speech";
pub const MOTION_HEAD: &str = "lumen.motion.head";
pub const BRAIN_STATE: &str = "lumen.brain.state";
pub const BRAIN_EVENT: &str = "lumen.brain.event";

/// First words a binding pattern may start with when the namespace policy is on.
pub const NAMESPACES: [&str; 2] = ["avatar", "lumen"];

pub const REGISTRY: [&str; 13] = [
    CAMERA,
    SONAR,
    BATTERY,
    TACTILE,
    JOINTS,
    COMMAND,
    REPLY,
    VISUAL_FACE,
    AUDIO_SPEECH,
    MOTION_HEAD,
    BRAIN_STATE,
    BRAIN_EVENT,
    ALL_SENSOR_DATA,
];
