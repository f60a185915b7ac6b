//! The routed message and its line-oriented JSON wire form.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use uuid::Uuid;

use super::{BusError, RoutingKey};
use crate::clock::Millis;

pub type Payload = Map<String, Value>;

/// Largest accepted serialized payload.
pub const MAX_PAYLOAD_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Data,
    Command,
    Event,
    Reply,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Data => "data",
            Kind::Command => "command",
            Kind::Event => "event",
            Kind::Reply => "reply",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "data" => Kind::Data,
            "command" => Kind::Command,
            "event" => Kind::Event,
            "reply" => Kind::Reply,
            _ => return None,
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub key: RoutingKey,
    pub kind: Kind,
    pub ts: Millis,
    pub id: Uuid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to: Option<RoutingKey>,
    pub payload: Payload,
}

impl Envelope {
    /// New envelope with a nil id and zero timestamp; the publishing
    /// connection stamps both.
    pub fn new(key: RoutingKey, kind: Kind, payload: Payload) -> Self {
        Self {
            key,
            kind,
            ts: 0,
            id: Uuid::nil(),
            reply_to: None,
            payload,
        }
    }

    /// Convenience for call sites holding a `json!({...})` value.
    ///
    /// Panics if `payload` is not a JSON object.
    pub fn with_json(key: RoutingKey, kind: Kind, payload: Value) -> Self {
        match payload {
            Value::Object(map) => Self::new(key, kind, map),
            other => panic!("envelope payload must be a JSON object, got {other}"),
        }
    }

    pub fn payload_size(&self) -> usize {
        serde_json::to_vec(&self.payload).map(|v| v.len()).unwrap_or(usize::MAX)
    }

    pub fn encode(&self) -> String {
        encode_envelope(self)
    }
}

/// One JSON object followed by a single LF.
pub fn encode_envelope(env: &Envelope) -> String {
    // serde_json escapes control characters inside strings, so the only LF
    // in the output is the terminator.
    let mut line = serde_json::to_string(env).expect("envelope serialization is infallible");
    line.push('\n');
    line
}

pub fn decode_envelope(line: &str) -> Result<Envelope, BusError> {
    let value: Value = serde_json::from_str(line.trim_end_matches(['\n', '\r'])).map_err(|e| {
        BusError::Decode {
            field: None,
            reason: e.to_string(),
        }
    })?;
    envelope_from_value(value)
}

fn field_err(field: &'static str, reason: impl Into<String>) -> BusError {
    BusError::Decode {
        field: Some(field),
        reason: reason.into(),
    }
}

/// Decodes an already-parsed JSON value, naming the offending field on error.
pub fn envelope_from_value(value: Value) -> Result<Envelope, BusError> {
    let Value::Object(mut obj) = value else {
        return Err(BusError::Decode {
            field: None,
            reason: "envelope must be a JSON object".into(),
        });
    };
    let mut take = |name: &'static str| obj.remove(name).ok_or_else(|| field_err(name, "missing"));

    let key = match take("key")? {
        Value::String(s) => RoutingKey::parse(&s).map_err(|e| field_err("key", e.to_string()))?,
        _ => return Err(field_err("key", "expected string")),
    };
    let kind = match take("kind")? {
        Value::String(s) => Kind::parse(&s).ok_or_else(|| field_err("kind", format!("unknown kind {s:?}")))?,
        _ => return Err(field_err("kind", "expected string")),
    };
    let ts = take("ts")?
        .as_u64()
        .ok_or_else(|| field_err("ts", "expected non-negative integer"))?;
    let id = match take("id")? {
        Value::String(s) => Uuid::parse_str(&s).map_err(|e| field_err("id", e.to_string()))?,
        _ => return Err(field_err("id", "expected string")),
    };
    let payload = match take("payload")? {
        Value::Object(map) => map,
        _ => return Err(field_err("payload", "expected JSON object")),
    };
    let reply_to = match obj.remove("reply_to") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => {
            Some(RoutingKey::parse(&s).map_err(|e| field_err("reply_to", e.to_string()))?)
        }
        Some(_) => return Err(field_err("reply_to", "expected string")),
    };
    Ok(Envelope {
        key,
        kind,
        ts,
        id,
        reply_to,
        payload,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Envelope {
        let mut env = Envelope::with_json(
            RoutingKey::parse("avatar.nao.command").unwrap(),
            Kind::Command,
            json!({"method": "say", "args": {"text": "hi\nthere"}}),
        );
        env.ts = 42;
        env.id = Uuid::from_u128(7);
        env
    }

    #[test]
    fn single_trailing_newline() {
        let line = sample().encode();
        assert!(line.ends_with('\n'));
        assert_eq!(line.matches('\n').count(), 1);
        assert_eq!(decode_envelope(&line).unwrap(), sample());
    }

    #[test]
    fn decodes_documented_line() {
        let line = r#"{"key":"avatar.nao.command","kind":"command","ts":1,"id":"00000000-0000-0000-0000-000000000001","payload":{}}"#;
        let env = decode_envelope(line).unwrap();
        assert_eq!(env.key.words().len(), 3);
        assert_eq!(env.id.to_string(), "00000000-0000-0000-0000-000000000001");
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (r#"{"kind":"data","ts":1,"id":"00000000-0000-0000-0000-000000000001","payload":{}}"#, "key"),
            (r#"{"key":"a","kind":"gossip","ts":1,"id":"00000000-0000-0000-0000-000000000001","payload":{}}"#, "kind"),
            (r#"{"key":"a","kind":"data","ts":-1,"id":"00000000-0000-0000-0000-000000000001","payload":{}}"#, "ts"),
            (r#"{"key":"a","kind":"data","ts":1,"id":"nope","payload":{}}"#, "id"),
            (r#"{"key":"a","kind":"data","ts":1,"id":"00000000-0000-0000-0000-000000000001","payload":[1]}"#, "payload"),
        ];
        for (line, field) in cases {
            match decode_envelope(line) {
                Err(BusError::Decode { field: Some(f), .. }) => assert_eq!(f, field, "{line}"),
                other => panic!("{line}: {other:?}"),
            }
        }
    }

    #[test]
    fn truncated_line_is_a_decode_error() {
        let line = sample().encode();
        let cut = &line[..line.len() / 2];
        assert!(matches!(decode_envelope(cut), Err(BusError::Decode { field: None, .. })));
    }
}
