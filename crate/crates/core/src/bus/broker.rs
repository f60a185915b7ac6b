use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use crossbeam_channel::{Receiver, RecvTimeoutError, Sender, TryRecvError};
use uuid::Uuid;

use super::keys::NAMESPACES;
use super::{BindingPattern, BusError, Connection, Envelope, SubscriptionId, MAX_PAYLOAD_BYTES};
use crate::clock::{Clock, SystemClock};

#[derive(Debug, Clone, Copy)]
pub struct BrokerConfig {
    /// Reject binding patterns whose first token is not `avatar` or `lumen`.
    pub enforce_namespace: bool,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        Self {
            enforce_namespace: true,
        }
    }
}

struct Route {
    id: SubscriptionId,
    conn: u64,
    pattern: BindingPattern,
    tx: Sender<Envelope>,
}

struct Inner {
    config: BrokerConfig,
    clock: Arc<dyn Clock>,
    routes: RwLock<Vec<Route>>,
    next_conn: AtomicU64,
    delivered: AtomicU64,
}

/// In-process topic exchange. Cheap to clone; clones share the routing table.
#[derive(Clone)]
pub struct Broker {
    inner: Arc<Inner>,
}

impl Broker {
    pub fn new(config: BrokerConfig, clock: Arc<dyn Clock>) -> Self {
        Self {
            inner: Arc::new(Inner {
                config,
                clock,
                routes: RwLock::new(Vec::new()),
                next_conn: AtomicU64::new(1),
                delivered: AtomicU64::new(0),
            }),
        }
    }

    /// Wall-clock broker with the namespace policy on.
    pub fn with_defaults() -> Self {
        Self::new(BrokerConfig::default(), Arc::new(SystemClock))
    }

    /// Wall-clock broker accepting any pattern.
    pub fn open() -> Self {
        Self::new(
            BrokerConfig {
                enforce_namespace: false,
            },
            Arc::new(SystemClock),
        )
    }

    pub fn config(&self) -> BrokerConfig {
        self.inner.config
    }

    pub fn clock(&self) -> Arc<dyn Clock> {
        self.inner.clock.clone()
    }

    pub fn connect(&self, name: &str) -> LocalConnection {
        let id = self.inner.next_conn.fetch_add(1, Ordering::Relaxed);
        let (tx, rx) = crossbeam_channel::unbounded();
        LocalConnection {
            broker: self.clone(),
            id,
            name: name.to_owned(),
            tx,
            rx,
            closed: AtomicBool::new(false),
            out: Mutex::new(OutState { last_ts: 0, seq: 0 }),
            subs: Mutex::new(HashSet::new()),
            next_sub: AtomicU64::new(1),
        }
    }

    pub fn subscription_count(&self) -> usize {
        self.inner.routes.read().unwrap().len()
    }

    /// Total deliveries made since the broker was created.
    pub fn delivered_count(&self) -> u64 {
        self.inner.delivered.load(Ordering::Relaxed)
    }

    fn check_namespace(&self, pattern: &BindingPattern) -> Result<(), BusError> {
        if !self.inner.config.enforce_namespace {
            return Ok(());
        }
        match pattern.literal_prefix() {
            Some(first) if NAMESPACES.contains(&first) => Ok(()),
            _ => Err(BusError::NamespaceViolation(pattern.to_string())),
        }
    }

    fn route(&self, env: &Envelope) -> usize {
        let routes = self.inner.routes.read().unwrap();
        let mut n = 0;
        for route in routes.iter().filter(|r| r.pattern.matches(&env.key)) {
            if route.tx.send(env.clone()).is_ok() {
                n += 1;
            }
        }
        self.inner.delivered.fetch_add(n as u64, Ordering::Relaxed);
        n
    }

    fn drop_connection_routes(&self, conn: u64) {
        self.inner.routes.write().unwrap().retain(|r| r.conn != conn);
    }
}

struct OutState {
    last_ts: u64,
    seq: u64,
}

/// In-process connection. All subscriptions of one connection share a FIFO
/// inbox.
pub struct LocalConnection {
    broker: Broker,
    id: u64,
    name: String,
    tx: Sender<Envelope>,
    rx: Receiver<Envelope>,
    closed: AtomicBool,
    out: Mutex<OutState>,
    subs: Mutex<HashSet<SubscriptionId>>,
    next_sub: AtomicU64,
}

impl LocalConnection {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn is_closed(&self) -> bool {
        self.closed.load(Ordering::Acquire)
    }

    /// Receiving side of the inbox, for callers that want to `select!` on it.
    pub fn receiver(&self) -> Receiver<Envelope> {
        self.rx.clone()
    }

    /// Publishes and reports how many subscriptions received the envelope.
    pub fn publish_counted(&self, mut env: Envelope) -> Result<usize, BusError> {
        if self.is_closed() {
            return Err(BusError::Closed);
        }
        let size = env.payload_size();
        if size > MAX_PAYLOAD_BYTES {
            return Err(BusError::PayloadTooLarge(size));
        }
        // Holding the lock across routing keeps this connection's stamps and
        // deliveries in the same order.
        let mut out = self.out.lock().unwrap();
        out.seq += 1;
        if env.id.is_nil() {
            env.id = Uuid::from_u64_pair(self.id, out.seq);
        }
        if env.ts == 0 {
            env.ts = self.broker.inner.clock.now_ms();
        }
        env.ts = env.ts.max(out.last_ts);
        out.last_ts = env.ts;
        Ok(self.broker.route(&env))
    }
}

impl Connection for LocalConnection {
    fn name(&self) -> &str {
        &self.name
    }

    fn publish(&self, env: Envelope) -> Result<(), BusError> {
        self.publish_counted(env).map(|_| ())
    }

    fn subscribe(&self, pattern: &BindingPattern) -> Result<SubscriptionId, BusError> {
        if self.is_closed() {
            return Err(BusError::Closed);
        }
        self.broker.check_namespace(pattern)?;
        let n = self.next_sub.fetch_add(1, Ordering::Relaxed);
        let id = SubscriptionId(format!("c{}-s{}", self.id, n));
        self.broker.inner.routes.write().unwrap().push(Route {
            id: id.clone(),
            conn: self.id,
            pattern: pattern.clone(),
            tx: self.tx.clone(),
        });
        self.subs.lock().unwrap().insert(id.clone());
        Ok(id)
    }

    fn unsubscribe(&self, id: &SubscriptionId) -> Result<(), BusError> {
        if !self.subs.lock().unwrap().remove(id) {
            return Err(BusError::UnknownSubscription(id.0.clone()));
        }
        self.broker
            .inner
            .routes
            .write()
            .unwrap()
            .retain(|r| !(r.conn == self.id && r.id == *id));
        Ok(())
    }

    fn try_recv(&self) -> Result<Option<Envelope>, BusError> {
        match self.rx.try_recv() {
            Ok(env) => Ok(Some(env)),
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => Err(BusError::Closed),
        }
    }

    fn recv_timeout(&self, timeout: Duration) -> Result<Option<Envelope>, BusError> {
        match self.rx.recv_timeout(timeout) {
            Ok(env) => Ok(Some(env)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(BusError::Closed),
        }
    }

    fn close(&self) {
        if !self.closed.swap(true, Ordering::AcqRel) {
            self.broker.drop_connection_routes(self.id);
            self.subs.lock().unwrap().clear();
        }
    }
}

impl Drop for LocalConnection {
    fn drop(&mut self) {
        self.close();
    }
}
