use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::keyframes;
use crate::bus::Payload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Say,
    GoToPosture,
    MoveTo,
    SetAngles,
    WakeUp,
    Rest,
    Dancing,
    Singing,
    Goodbye,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Say,
        Method::GoToPosture,
        Method::MoveTo,
        Method::SetAngles,
        Method::WakeUp,
        Method::Rest,
        Method::Dancing,
        Method::Singing,
        Method::Goodbye,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Say => "say",
            Method::GoToPosture => "goToPosture",
            Method::MoveTo => "moveTo",
            Method::SetAngles => "setAngles",
            Method::WakeUp => "wakeUp",
            Method::Rest => "rest",
            Method::Dancing => "dancing",
            Method::Singing => "singing",
            Method::Goodbye => "goodbye",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Methods that move the body.
    pub fn is_motion(self) -> bool {
        !matches!(self, Method::Say | Method::WakeUp | Method::Rest)
    }

    /// Methods that occupy the motion queue until they finish.
    pub fn is_durative(self) -> bool {
        matches!(
            self,
            Method::GoToPosture | Method::MoveTo | Method::Dancing | Method::Singing | Method::Goodbye
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Translation speed of `moveTo`, m/s.
pub const WALK_SPEED: f64 = 0.1;
/// Rotation speed of `moveTo`, deg/s.
pub const TURN_SPEED: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub id: String,
    pub method: Method,
    #[serde(default)]
    pub args: Payload,
}

impl Command {
    pub fn new(id: impl Into<String>, method: Method, args: Value) -> Self {
        let args = match args {
            Value::Object(map) => map,
            Value::Null => Payload::new(),
            other => panic!("command args must be an object, got {other}"),
        };
        Self {
            id: id.into(),
            method,
            args,
        }
    }

    pub fn to_payload(&self) -> Payload {
        match serde_json::to_value(self) {
            Ok(Value::Object(map)) => map,
            _ => unreachable!("command serializes to an object"),
        }
    }

    pub fn arg_f64(&self, name: &str) -> Option<f64> {
        self.args.get(name).and_then(Value::as_f64)
    }

    /// Expected execution time in seconds once the command starts.
    pub fn nominal_duration(&self) -> f64 {
        match self.method {
            Method::GoToPosture => posture_duration(self.arg_f64("speed").unwrap_or(1.0)),
            Method::MoveTo => {
                let dx = self.arg_f64("x").unwrap_or(0.0);
                let dy = self.arg_f64("y").unwrap_or(0.0);
                let dth = self.arg_f64("theta").unwrap_or(0.0);
                walk_duration(dx, dy, dth)
            }
            Method::Dancing => keyframes::dance().duration(),
            Method::Singing => keyframes::sing().duration(),
            Method::Goodbye => keyframes::wave().duration(),
            Method::Say | Method::SetAngles | Method::WakeUp | Method::Rest => 0.0,
        }
    }
}

pub fn posture_duration(speed: f64) -> f64 {
    (1.0 - speed) * 2.0 + 0.5
}

pub fn walk_duration(dx: f64, dy: f64, dtheta_deg: f64) -> f64 {
    (dx.hypot(dy) / WALK_SPEED).max(dtheta_deg.abs() / TURN_SPEED)
}

/// Why a command payload could not be turned into a [`Command`]. Carries the
/// id when one was readable so the rejection can still be replied to.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandParseError {
    pub id: Option<String>,
    pub reason: String,
}

pub fn parse_command(payload: &Payload) -> Result<Command, CommandParseError> {
    let id = payload.get("id").and_then(Value::as_str).map(str::to_owned);
    let fail = |reason: String| CommandParseError { id: id.clone(), reason };
    let Some(cmd_id) = id.clone() else {
        return Err(fail("missing string `id`".into()));
    };
    let method = payload
        .get("method")
        .and_then(Value::as_str)
        .ok_or_else(|| fail("missing string `method`".into()))?;
    let method = Method::parse(method).ok_or_else(|| fail(format!("unknown method {method:?}")))?;
    let args = match payload.get("args") {
        None | Some(Value::Null) => Payload::new(),
        Some(Value::Object(map)) => map.clone(),
        Some(_) => return Err(fail("`args` must be an object".into())),
    };
    Ok(Command {
        id: cmd_id,
        method,
        args,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandReply {
    pub id: String,
    pub ok: bool,
    pub detail: String,
}

impl CommandReply {
    pub fn ok(id: &str, detail: impl Into<String>) -> Self {
        Self {
            id: id.to_owned(),
            ok: true,
            detail: detail.into(),
        }
    }

    pub fn fail(id: &str, detail: impl Into<String>) -> Self {
        Self {
            id: id.to_owned(),
            ok: false,
            detail: detail.into(),
        }
    }

    pub fn to_payload(&self) -> Payload {
        match json!({"id": self.id, "ok": self.ok, "detail": self.detail}) {
            Value::Object(map) => map,
            _ => unreachable!(),
        }
    }

    pub fn from_payload(payload: &Payload) -> Option<Self> {
        Some(Self {
            id: payload.get("id")?.as_str()?.to_owned(),
            ok: payload.get("ok")?.as_bool()?,
            detail: payload.get("detail").and_then(Value::as_str).unwrap_or_default().to_owned(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
            assert_eq!(serde_json::to_value(m).unwrap(), json!(m.name()));
        }
    }

    #[test]
    fn parse_reports_id_on_unknown_method() {
        let payload = json!({"id": "c1", "method": "fly", "args": {}});
        let err = parse_command(payload.as_object().unwrap()).unwrap_err();
        assert_eq!(err.id.as_deref(), Some("c1"));
        assert!(err.reason.contains("fly"));
    }

    #[test]
    fn durations() {
        assert_eq!(posture_duration(0.5), 1.5);
        assert_eq!(posture_duration(1.0), 0.5);
        assert!((walk_duration(0.2, 0.0, 0.0) - 2.0).abs() < 1e-12);
        assert_eq!(walk_duration(0.0, 0.0, 90.0), 4.5);
    }

    #[test]
    fn payload_round_trip() {
        let cmd = Command::new("x", Method::MoveTo, json!({"x": 0.2, "y": 0.0, "theta": 0.0}));
        assert_eq!(parse_command(&cmd.to_payload()).unwrap(), cmd);
        let reply = CommandReply::fail("x", "nope");
        assert_eq!(CommandReply::from_payload(&reply.to_payload()).unwrap(), reply);
    }
}
