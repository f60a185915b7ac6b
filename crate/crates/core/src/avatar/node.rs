//! Bus-facing avatar: a command loop, an integrator and sensor producers.
//!
//! All nodes share one [`AvatarHandle`]. Only the command loop and the
//! integrator mutate the simulation; producers read an immutable snapshot
//! that is swapped after every mutation.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex, RwLock};

use serde_json::{json, Value};

use super::streams::{self, PeriodicStream, SensorKind, SensorRates};
use super::{parse_command, Avatar, AvatarState, CameraModel, CommandReply, VisitorFace};
use crate::bus::{keys, BusError, Connector, Envelope, Kind};
use crate::clock::Millis;
use crate::runtime::{BusLink, Node};

/// Smallest integration step; also the virtual scheduler's tick.
pub const MIN_STEP_MS: Millis = 10;
const MAX_STEP_MS: Millis = 100;

struct Shared {
    avatar: Mutex<Avatar>,
    snapshot: RwLock<Arc<AvatarState>>,
    touches: Mutex<VecDeque<String>>,
    camera: CameraModel,
}

#[derive(Clone)]
pub struct AvatarHandle(Arc<Shared>);

impl AvatarHandle {
    pub fn new(avatar: Avatar) -> Self {
        let snapshot = RwLock::new(Arc::new(avatar.state().clone()));
        let camera = *avatar.camera();
        Self(Arc::new(Shared {
            avatar: Mutex::new(avatar),
            snapshot,
            touches: Mutex::new(VecDeque::new()),
            camera,
        }))
    }

    pub fn snapshot(&self) -> Arc<AvatarState> {
        self.0.snapshot.read().unwrap().clone()
    }

    pub fn camera(&self) -> CameraModel {
        self.0.camera
    }

    /// Runs `f` on the simulation and republishes the snapshot.
    pub fn with_avatar<R>(&self, f: impl FnOnce(&mut Avatar) -> R) -> R {
        let mut avatar = self.0.avatar.lock().unwrap();
        let out = f(&mut avatar);
        *self.0.snapshot.write().unwrap() = Arc::new(avatar.state().clone());
        out
    }

    pub fn spoken(&self) -> Vec<String> {
        self.0.avatar.lock().unwrap().spoken().to_vec()
    }

    /// Simulates a touch on the named tactile sensor.
    pub fn touch(&self, sensor: &str) {
        self.0.touches.lock().unwrap().push_back(sensor.to_owned());
    }
}

impl Default for AvatarHandle {
    fn default() -> Self {
        Self::new(Avatar::default())
    }
}

fn publish_reply(link: &mut BusLink, reply: &CommandReply) {
    link.send(keys::REPLY, Kind::Reply, Value::Object(reply.to_payload()));
}

/// Executes commands from `avatar.nao.command` and visitor updates from
/// `lumen.visual.face`.
pub struct CommandLoop {
    link: BusLink,
    avatar: AvatarHandle,
}

impl CommandLoop {
    pub fn new(connector: Arc<dyn Connector>, avatar: AvatarHandle) -> Result<Self, BusError> {
        let link = BusLink::open(connector, "avatar-command", &[keys::COMMAND, keys::VISUAL_FACE])?;
        Ok(Self { link, avatar })
    }

    fn handle(&mut self, env: Envelope) {
        match env.key.to_string().as_str() {
            keys::COMMAND => match parse_command(&env.payload) {
                Ok(cmd) => {
                    log::debug!("command {} {}", cmd.id, cmd.method);
                    if let Some(reply) = self.avatar.with_avatar(|a| a.execute_command(cmd)) {
                        publish_reply(&mut self.link, &reply);
                    }
                }
                Err(e) => match e.id {
                    Some(id) => publish_reply(&mut self.link, &CommandReply::fail(&id, e.reason)),
                    None => log::warn!("dropping command without id: {}", e.reason),
                },
            },
            keys::VISUAL_FACE => match face_from_payload(&env.payload) {
                Ok(face) => {
                    if let Err(e) = self.avatar.with_avatar(|a| a.set_visitor_face(face)) {
                        log::warn!("rejected visitor face: {e}");
                    }
                }
                Err(reason) => log::warn!("bad face event: {reason}"),
            },
            other => log::debug!("ignoring {other}"),
        }
    }
}

/// Reads `{"face": {"azimuth": a, "elevation": e} | null}`.
pub fn face_from_payload(payload: &crate::bus::Payload) -> Result<Option<VisitorFace>, String> {
    match payload.get("face") {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| e.to_string()),
    }
}

pub fn face_payload(face: Option<VisitorFace>) -> Value {
    match face {
        Some(f) => json!({"face": {"azimuth": f.azimuth, "elevation": f.elevation}}),
        None => json!({"face": null}),
    }
}

impl Node for CommandLoop {
    fn name(&self) -> &str {
        "avatar-command"
    }

    fn poll(&mut self, _now: Millis) -> bool {
        let batch = self.link.drain();
        let progress = !batch.is_empty();
        for env in batch {
            self.handle(env);
        }
        progress
    }
}

/// Advances the simulation with the clock and publishes completion replies.
pub struct Integrator {
    link: BusLink,
    avatar: AvatarHandle,
    last: Option<Millis>,
}

impl Integrator {
    pub fn new(connector: Arc<dyn Connector>, avatar: AvatarHandle) -> Result<Self, BusError> {
        let link = BusLink::open(connector, "avatar-integrator", &[])?;
        Ok(Self {
            link,
            avatar,
            last: None,
        })
    }
}

impl Node for Integrator {
    fn name(&self) -> &str {
        "avatar-integrator"
    }

    fn poll(&mut self, now: Millis) -> bool {
        let last = *self.last.get_or_insert(now);
        if now < last + MIN_STEP_MS {
            return false;
        }
        self.last = Some(now);
        let replies = self.avatar.with_avatar(|a| {
            let mut replies = Vec::new();
            let mut remaining = now - last;
            while remaining > 0 {
                let chunk = remaining.min(MAX_STEP_MS);
                remaining -= chunk;
                match a.step(chunk as f64 / 1000.0) {
                    Ok(r) => replies.extend(r),
                    Err(e) => log::error!("integrator: {e}"),
                }
            }
            replies
        });
        for reply in &replies {
            publish_reply(&mut self.link, reply);
        }
        true
    }
}

/// One periodic sensor stream.
pub struct SensorProducer {
    kind: SensorKind,
    name: String,
    link: BusLink,
    avatar: AvatarHandle,
    schedule: PeriodicStream,
}

impl SensorProducer {
    pub fn new(
        connector: Arc<dyn Connector>,
        avatar: AvatarHandle,
        kind: SensorKind,
        period: Millis,
    ) -> Result<Self, BusError> {
        let name = format!("avatar-{}", kind.name());
        let link = BusLink::open(connector, &name, &[])?;
        Ok(Self {
            kind,
            name,
            link,
            avatar,
            schedule: PeriodicStream::new(period),
        })
    }
}

impl Node for SensorProducer {
    fn name(&self) -> &str {
        &self.name
    }

    fn poll(&mut self, now: Millis) -> bool {
        let Some(seq) = self.schedule.due(now) else {
            return false;
        };
        let state = self.avatar.snapshot();
        let payload = streams::payload(self.kind, seq, &state, &self.avatar.camera());
        self.link.send(self.kind.key(), Kind::Data, payload);
        true
    }
}

/// Publishes one envelope per simulated touch.
pub struct TactileProducer {
    link: BusLink,
    avatar: AvatarHandle,
    seq: u64,
}

impl TactileProducer {
    pub fn new(connector: Arc<dyn Connector>, avatar: AvatarHandle) -> Result<Self, BusError> {
        let link = BusLink::open(connector, "avatar-tactile", &[])?;
        Ok(Self { link, avatar, seq: 0 })
    }
}

impl Node for TactileProducer {
    fn name(&self) -> &str {
        "avatar-tactile"
    }

    fn poll(&mut self, _now: Millis) -> bool {
        let touched = self.avatar.0.touches.lock().unwrap().pop_front();
        let Some(sensor) = touched else {
            return false;
        };
        self.link
            .send(SensorKind::Tactile.key(), Kind::Data, json!({"seq": self.seq, "sensor": sensor}));
        self.seq += 1;
        true
    }
}

/// All avatar nodes in scheduling order: commands, integrator, then the
/// sensors (joints ahead of camera so a controller sees fresh angles).
pub fn avatar_nodes(
    connector: Arc<dyn Connector>,
    avatar: &AvatarHandle,
    rates: SensorRates,
) -> Result<Vec<Box<dyn Node>>, BusError> {
    let mut nodes: Vec<Box<dyn Node>> = vec![
        Box::new(CommandLoop::new(connector.clone(), avatar.clone())?),
        Box::new(Integrator::new(connector.clone(), avatar.clone())?),
    ];
    for kind in [SensorKind::Joints, SensorKind::Camera, SensorKind::Sonar, SensorKind::Battery] {
        if let Some(period) = rates.period_ms(kind) {
            nodes.push(Box::new(SensorProducer::new(connector.clone(), avatar.clone(), kind, period)?));
        }
    }
    nodes.push(Box::new(TactileProducer::new(connector, avatar.clone())?));
    Ok(nodes)
}
