//! Embeddable topic-routed message bus.
//!
//! [`Broker`] routes [`Envelope`]s from publishers to every subscription whose
//! [`BindingPattern`] matches the envelope's [`RoutingKey`]. Components talk
//! to it through the [`Connection`] trait, which is implemented both for
//! in-process handles ([`LocalConnection`]) and for TCP clients
//! ([`TcpConnection`]) speaking newline-delimited JSON. [`gateway`] mirrors
//! the same JSON bodies over WebSocket.

mod broker;
mod envelope;
pub mod gateway;
pub mod keys;
mod tcp;
mod topic;

use std::time::Duration;

use serde_json::Value;

pub use broker::{Broker, BrokerConfig, LocalConnection};
pub use envelope::{
    decode_envelope, encode_envelope, envelope_from_value, Envelope, Kind, Payload, MAX_PAYLOAD_BYTES,
};
pub use tcp::{serve_tcp, TcpConnection, TcpServer};
pub use topic::{topic_match, BindingPattern, PatternToken, RoutingKey};

/// Environment variable naming the broker address for every component.
pub const BUS_ADDR_ENV: &str = "BUS_ADDR";
pub const DEFAULT_BUS_ADDR: &str = "127.0.0.1:5673";

#[derive(Debug, thiserror::Error)]
pub enum BusError {
    #[error("invalid routing key {key:?}: {reason}")]
    InvalidKey { key: String, reason: String },
    #[error("invalid binding pattern {pattern:?}: {reason}")]
    InvalidPattern { pattern: String, reason: String },
    #[error("pattern {0:?} must start with a literal `avatar` or `lumen`")]
    NamespaceViolation(String),
    #[error("decode error{}: {reason}", field.map(|f| format!(" in field `{f}`")).unwrap_or_default())]
    Decode {
        field: Option<&'static str>,
        reason: String,
    },
    #[error("payload of {0} bytes exceeds the 1 MiB limit")]
    PayloadTooLarge(usize),
    #[error("unknown subscription {0}")]
    UnknownSubscription(String),
    #[error("connection closed")]
    Closed,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("timed out waiting for the broker")]
    Timeout,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Opaque per-connection subscription token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubscriptionId(pub String);

impl std::fmt::Display for SubscriptionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// A client's view of the bus.
///
/// Implementations serialize their own outbound writes, so a connection can be
/// shared between threads behind an `Arc`.
pub trait Connection: Send + Sync {
    fn name(&self) -> &str;

    /// Stamps `env` (id, timestamp) and routes it. Zero matching subscriptions
    /// is not an error.
    fn publish(&self, env: Envelope) -> Result<(), BusError>;

    fn subscribe(&self, pattern: &BindingPattern) -> Result<SubscriptionId, BusError>;

    fn unsubscribe(&self, id: &SubscriptionId) -> Result<(), BusError>;

    fn try_recv(&self) -> Result<Option<Envelope>, BusError>;

    fn recv_timeout(&self, timeout: Duration) -> Result<Option<Envelope>, BusError>;

    fn close(&self);

    fn subscribe_str(&self, pattern: &str) -> Result<SubscriptionId, BusError> {
        self.subscribe(&BindingPattern::parse(pattern)?)
    }

    fn publish_json(&self, key: &str, kind: Kind, payload: Value) -> Result<(), BusError> {
        let key = RoutingKey::parse(key)?;
        let Value::Object(map) = payload else {
            return Err(BusError::Decode {
                field: Some("payload"),
                reason: "expected JSON object".into(),
            });
        };
        self.publish(Envelope::new(key, kind, map))
    }

    /// Drains everything currently queued.
    fn drain(&self) -> Result<Vec<Envelope>, BusError> {
        let mut out = Vec::new();
        while let Some(env) = self.try_recv()? {
            out.push(env);
        }
        Ok(out)
    }
}

/// Reads `BUS_ADDR`, falling back to the default local port.
pub fn bus_addr_from_env() -> String {
    std::env::var(BUS_ADDR_ENV).unwrap_or_else(|_| DEFAULT_BUS_ADDR.to_owned())
}

/// Something that can open fresh connections to a bus. Long-running
/// components hold one so they can reconnect after a failure.
pub trait Connector: Send + Sync {
    fn connect(&self, name: &str) -> Result<Box<dyn Connection>, BusError>;
}

impl Connector for Broker {
    fn connect(&self, name: &str) -> Result<Box<dyn Connection>, BusError> {
        Ok(Box::new(Broker::connect(self, name)))
    }
}

/// Connects over TCP to a broker served by [`serve_tcp`].
#[derive(Debug, Clone)]
pub struct TcpConnector {
    pub addr: String,
}

impl TcpConnector {
    pub fn new(addr: impl Into<String>) -> Self {
        Self { addr: addr.into() }
    }
}

impl Connector for TcpConnector {
    fn connect(&self, name: &str) -> Result<Box<dyn Connection>, BusError> {
        Ok(Box::new(TcpConnection::connect(self.addr.as_str(), name)?))
    }
}
