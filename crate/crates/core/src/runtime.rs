//! Running components: the [`Node`] abstraction, a deterministic
//! virtual-clock [`Scheduler`] and a thread-per-node realtime runner.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde_json::Value;

use crate::bus::{BindingPattern, BusError, Connection, Connector, Envelope, Kind};
use crate::clock::{Clock, Millis, VirtualClock};

/// A cooperative component. `poll` does whatever work is ready at `now` and
/// reports whether it made progress (consumed or produced anything).
pub trait Node: Send {
    fn name(&self) -> &str;
    fn poll(&mut self, now: Millis) -> bool;
}

/// Lets a caller keep a handle on a node while a scheduler drives it.
impl<N: Node> Node for Arc<Mutex<N>> {
    fn name(&self) -> &str {
        // The name is only used for logging; avoid holding the lock across
        // the returned borrow.
        "shared"
    }

    fn poll(&mut self, now: Millis) -> bool {
        self.lock().unwrap().poll(now)
    }
}

/// Default tick of the virtual scheduler.
pub const TICK_MS: Millis = 10;
const MAX_SETTLE_ROUNDS: usize = 1000;

/// Drives nodes in a fixed order under a [`VirtualClock`].
///
/// At each instant all nodes are polled round-robin until none makes
/// progress, then the clock moves forward one tick. With in-process
/// connections the outcome is a pure function of the inputs.
pub struct Scheduler {
    clock: VirtualClock,
    tick: Millis,
    nodes: Vec<Box<dyn Node>>,
}

impl Scheduler {
    pub fn new(clock: VirtualClock) -> Self {
        Self::with_tick(clock, TICK_MS)
    }

    pub fn with_tick(clock: VirtualClock, tick: Millis) -> Self {
        assert!(tick > 0, "tick must be positive");
        Self {
            clock,
            tick,
            nodes: Vec::new(),
        }
    }

    pub fn add(&mut self, node: impl Node + 'static) -> &mut Self {
        self.nodes.push(Box::new(node));
        self
    }

    pub fn add_boxed(&mut self, node: Box<dyn Node>) -> &mut Self {
        self.nodes.push(node);
        self
    }

    pub fn clock(&self) -> &VirtualClock {
        &self.clock
    }

    pub fn now(&self) -> Millis {
        self.clock.now_ms()
    }

    /// Polls every node at the current instant until the system is quiet.
    pub fn settle(&mut self) {
        let now = self.clock.now_ms();
        for _ in 0..MAX_SETTLE_ROUNDS {
            let mut progress = false;
            for node in &mut self.nodes {
                progress |= node.poll(now);
            }
            if !progress {
                return;
            }
        }
        log::warn!("scheduler did not settle at t={now} ms");
    }

    /// Settles, then advances one tick.
    pub fn step(&mut self) {
        self.settle();
        self.clock.advance(self.tick);
    }

    /// Runs until the clock reads `end` (inclusive) and the system is quiet.
    pub fn run_until(&mut self, end: Millis) {
        while self.clock.now_ms() < end {
            self.step();
        }
        self.settle();
    }

    pub fn run_for(&mut self, duration: Millis) {
        let end = self.clock.now_ms() + duration;
        self.run_until(end);
    }

    /// Steps while `keep_going` holds, up to `limit` of virtual time. Returns
    /// false if the limit was hit.
    pub fn run_while(&mut self, limit: Millis, mut keep_going: impl FnMut() -> bool) -> bool {
        let end = self.clock.now_ms() + limit;
        loop {
            self.settle();
            if !keep_going() {
                return true;
            }
            if self.clock.now_ms() >= end {
                return false;
            }
            self.clock.advance(self.tick);
        }
    }
}

/// Runs each node on its own thread against a real clock.
pub struct RealtimeRunner {
    stop: Arc<AtomicBool>,
    handles: Vec<JoinHandle<()>>,
    clock: Arc<dyn Clock>,
    idle: Duration,
}

impl RealtimeRunner {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        Self {
            stop: Arc::new(AtomicBool::new(false)),
            handles: Vec::new(),
            clock,
            idle: Duration::from_millis(1),
        }
    }

    /// Sleep between polls that made no progress.
    pub fn idle(mut self, idle: Duration) -> Self {
        self.idle = idle;
        self
    }

    pub fn spawn(&mut self, mut node: Box<dyn Node>) -> std::io::Result<()> {
        let stop = self.stop.clone();
        let clock = self.clock.clone();
        let idle = self.idle;
        let handle = thread::Builder::new().name(node.name().to_owned()).spawn(move || {
            while !stop.load(Ordering::Acquire) {
                if !node.poll(clock.now_ms()) {
                    thread::sleep(idle);
                }
            }
        })?;
        self.handles.push(handle);
        Ok(())
    }

    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        self.stop.clone()
    }

    /// Blocks until the stop flag is raised by someone else.
    pub fn wait(&self) {
        while !self.stop.load(Ordering::Acquire) {
            thread::sleep(Duration::from_millis(20));
        }
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::Release);
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

impl Drop for RealtimeRunner {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Release);
    }
}

const BACKOFF_MIN: Duration = Duration::from_millis(50);
const BACKOFF_MAX: Duration = Duration::from_secs(2);

/// A bus connection that reopens itself (with exponential backoff) after a
/// failure and restores its subscriptions.
///
/// Errors are logged rather than returned from the receive path so a node
/// keeps running while the broker is away; messages published during an
/// outage are dropped.
pub struct BusLink {
    connector: Arc<dyn Connector>,
    name: String,
    patterns: Vec<BindingPattern>,
    conn: Option<Box<dyn Connection>>,
    retry_at: Instant,
    backoff: Duration,
}

impl BusLink {
    /// Validates `patterns` and tries to connect once. A failed first attempt
    /// is not fatal; the link retries on use.
    pub fn open(connector: Arc<dyn Connector>, name: &str, patterns: &[&str]) -> Result<Self, BusError> {
        let patterns = patterns
            .iter()
            .map(|p| BindingPattern::parse(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut link = Self {
            connector,
            name: name.to_owned(),
            patterns,
            conn: None,
            retry_at: Instant::now(),
            backoff: BACKOFF_MIN,
        };
        match link.try_connect() {
            Ok(()) | Err(BusError::Io(_)) | Err(BusError::Closed) | Err(BusError::Timeout) => Ok(link),
            Err(e) => Err(e),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_connected(&self) -> bool {
        self.conn.is_some()
    }

    fn try_connect(&mut self) -> Result<(), BusError> {
        let result = self.connector.connect(&self.name).and_then(|conn| {
            for p in &self.patterns {
                conn.subscribe(p)?;
            }
            Ok(conn)
        });
        match result {
            Ok(conn) => {
                self.conn = Some(conn);
                self.backoff = BACKOFF_MIN;
                Ok(())
            }
            Err(e) => {
                log::warn!("{}: connect failed ({e}); retrying in {:?}", self.name, self.backoff);
                self.retry_at = Instant::now() + self.backoff;
                self.backoff = (self.backoff * 2).min(BACKOFF_MAX);
                Err(e)
            }
        }
    }

    fn conn(&mut self) -> Option<&dyn Connection> {
        if self.conn.is_none() && Instant::now() >= self.retry_at {
            let _ = self.try_connect();
        }
        self.conn.as_deref()
    }

    fn on_error(&mut self, e: &BusError) {
        if matches!(e, BusError::Closed | BusError::Io(_)) {
            log::warn!("{}: lost bus connection ({e})", self.name);
            if let Some(c) = self.conn.take() {
                c.close();
            }
            self.retry_at = Instant::now() + self.backoff;
        }
    }

    pub fn publish(&mut self, env: Envelope) -> Result<(), BusError> {
        let Some(conn) = self.conn() else {
            return Err(BusError::Closed);
        };
        let result = conn.publish(env);
        if let Err(e) = &result {
            self.on_error(e);
        }
        result
    }

    /// Publishes and logs failures instead of returning them.
    pub fn send(&mut self, key: &str, kind: Kind, payload: Value) -> bool {
        let result = match self.conn() {
            None => Err(BusError::Closed),
            Some(conn) => conn.publish_json(key, kind, payload),
        };
        match result {
            Ok(()) => true,
            Err(e) => {
                log::warn!("{}: publish to {key} failed: {e}", self.name);
                self.on_error(&e);
                false
            }
        }
    }

    /// Everything delivered so far.
    pub fn drain(&mut self) -> Vec<Envelope> {
        let Some(conn) = self.conn() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        loop {
            match conn.try_recv() {
                Ok(Some(env)) => out.push(env),
                Ok(None) => break,
                Err(e) => {
                    self.on_error(&e);
                    break;
                }
            }
        }
        out
    }

    /// The most recent delivered envelope, if any; older ones are dropped.
    pub fn latest(&mut self) -> Option<Envelope> {
        self.drain().pop()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::Broker;
    use serde_json::json;

    struct Counter {
        name: String,
        link: BusLink,
        seen: usize,
        emit_at: Vec<Millis>,
    }

    impl Node for Counter {
        fn name(&self) -> &str {
            &self.name
        }

        fn poll(&mut self, now: Millis) -> bool {
            let got = self.link.drain().len();
            self.seen += got;
            let mut progress = got > 0;
            if self.emit_at.first() == Some(&now) {
                self.emit_at.remove(0);
                self.link.send("lumen.brain.event", Kind::Event, json!({"t": now}));
                progress = true;
            }
            progress
        }
    }

    #[test]
    fn scheduler_settles_same_instant_deliveries() {
        let clock = VirtualClock::new(0);
        let broker = Broker::new(Default::default(), Arc::new(clock.clone()));
        let connector: Arc<dyn Connector> = Arc::new(broker);
        let node = Arc::new(Mutex::new(Counter {
            name: "c".into(),
            link: BusLink::open(connector, "c", &["lumen.#"]).unwrap(),
            seen: 0,
            emit_at: vec![0, 50, 50],
        }));
        let mut sched = Scheduler::new(clock);
        sched.add(node.clone());
        sched.run_until(100);
        assert_eq!(sched.now(), 100);
        // Both emissions at t=50 happen within one settle.
        assert_eq!(node.lock().unwrap().seen, 3);
    }

    #[test]
    fn run_while_reports_limit() {
        let mut sched = Scheduler::new(VirtualClock::new(0));
        assert!(!sched.run_while(100, || true));
        assert_eq!(sched.now(), 100);
        assert!(sched.run_while(100, || false));
    }

    #[test]
    fn link_rejects_bad_pattern() {
        let connector: Arc<dyn Connector> = Arc::new(Broker::with_defaults());
        assert!(BusLink::open(connector, "x", &["robot.#"]).is_err());
    }
}
