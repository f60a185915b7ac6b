//! Newline-delimited JSON over TCP.
//!
//! Client to broker, one object per line:
//! `{"op":"hello","client":"<name>"}` (must come first),
//! `{"op":"subscribe","pattern":"...","req":n}`,
//! `{"op":"unsubscribe","sub":"...","req":n}`,
//! `{"op":"publish","envelope":{...}}`.
//!
//! Broker to client: delivered envelopes as bare wire-form lines, and control
//! replies carrying an `op` field (`welcome`, `subscribed`, `unsubscribed`,
//! `ack`, `error`). A reply echoes the request's `req` when one was given.

use std::io::{BufRead, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{select, Receiver, RecvTimeoutError, Sender, TryRecvError};
use serde_json::{json, Value};

use super::{
    encode_envelope, envelope_from_value, BindingPattern, Broker, BusError, Connection, Envelope,
    LocalConnection, SubscriptionId, MAX_PAYLOAD_BYTES,
};

const CONTROL_TIMEOUT: Duration = Duration::from_secs(5);

fn error_code(err: &BusError) -> &'static str {
    match err {
        BusError::InvalidKey { .. } => "invalid_key",
        BusError::InvalidPattern { .. } => "invalid_pattern",
        BusError::NamespaceViolation(_) => "namespace",
        BusError::Decode { .. } => "decode",
        BusError::PayloadTooLarge(_) => "too_large",
        BusError::UnknownSubscription(_) => "unknown_subscription",
        BusError::Closed => "closed",
        BusError::Protocol(_) => "bad_op",
        BusError::Timeout | BusError::Io(_) => "internal",
    }
}

fn error_reply(err: &BusError, req: Option<&Value>) -> Value {
    let mut reply = json!({"op": "error", "code": error_code(err), "message": err.to_string()});
    if let Some(req) = req {
        reply["req"] = req.clone();
    }
    reply
}

/// Fills in `id`/`ts` a client may leave out; the broker stamps them.
fn envelope_from_client(mut value: Value) -> Result<Envelope, BusError> {
    if let Value::Object(obj) = &mut value {
        obj.entry("id").or_insert_with(|| json!(uuid::Uuid::nil()));
        obj.entry("ts").or_insert_with(|| json!(0));
    }
    envelope_from_value(value)
}

/// Applies one client operation to `conn` and returns the reply to send, if
/// any. Shared by the TCP listener and the WebSocket gateway.
pub(crate) fn handle_client_op(conn: &LocalConnection, text: &str) -> Option<Value> {
    let value: Value = match serde_json::from_str(text.trim_end()) {
        Ok(v) => v,
        Err(e) => {
            return Some(error_reply(
                &BusError::Decode {
                    field: None,
                    reason: e.to_string(),
                },
                None,
            ))
        }
    };
    let req = value.get("req").cloned();
    let op = value.get("op").and_then(Value::as_str).unwrap_or_default();
    let result: Result<Option<Value>, BusError> = match op {
        "hello" => Ok(Some(json!({"op": "welcome", "connection": conn.id()}))),
        "subscribe" => value
            .get("pattern")
            .and_then(Value::as_str)
            .ok_or_else(|| BusError::Protocol("subscribe needs a string `pattern`".into()))
            .and_then(|p| {
                let pattern = BindingPattern::parse(p)?;
                let sub = conn.subscribe(&pattern)?;
                Ok(Some(json!({"op": "subscribed", "sub": sub.0, "pattern": pattern.to_string()})))
            }),
        "unsubscribe" => value
            .get("sub")
            .and_then(Value::as_str)
            .ok_or_else(|| BusError::Protocol("unsubscribe needs a string `sub`".into()))
            .and_then(|s| {
                conn.unsubscribe(&SubscriptionId(s.to_owned()))?;
                Ok(Some(json!({"op": "unsubscribed", "sub": s})))
            }),
        "publish" => value
            .get("envelope")
            .cloned()
            .ok_or_else(|| BusError::Protocol("publish needs an `envelope`".into()))
            .and_then(|e| {
                conn.publish(envelope_from_client(e)?)?;
                Ok(req.as_ref().map(|_| json!({"op": "ack"})))
            }),
        other => Err(BusError::Protocol(format!("unknown op {other:?}"))),
    };
    match result {
        Ok(Some(mut reply)) => {
            if let Some(req) = &req {
                reply["req"] = req.clone();
            }
            Some(reply)
        }
        Ok(None) => None,
        Err(e) => Some(error_reply(&e, req.as_ref())),
    }
}

/// Running TCP listener. Dropping the handle does not stop it; call
/// [`TcpServer::shutdown`].
pub struct TcpServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl TcpServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::Release);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }

    /// Blocks until the accept loop exits.
    pub fn join(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

/// Binds `addr` (port 0 picks a free port) and serves `broker` over TCP.
pub fn serve_tcp(broker: Broker, addr: impl ToSocketAddrs) -> Result<TcpServer, BusError> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = stop.clone();
    let accept = thread::Builder::new().name("bus-accept".into()).spawn(move || {
        for stream in listener.incoming() {
            if stop_flag.load(Ordering::Acquire) {
                break;
            }
            match stream {
                Ok(stream) => {
                    let broker = broker.clone();
                    let _ = thread::Builder::new()
                        .name("bus-client".into())
                        .spawn(move || serve_client(broker, stream));
                }
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
    })?;
    Ok(TcpServer {
        addr: local,
        stop,
        accept: Some(accept),
    })
}

fn write_line(stream: &mut TcpStream, line: &str) -> std::io::Result<()> {
    stream.write_all(line.as_bytes())?;
    if !line.ends_with('\n') {
        stream.write_all(b"\n")?;
    }
    Ok(())
}

fn serve_client(broker: Broker, stream: TcpStream) {
    let _ = stream.set_nodelay(true);
    let Ok(read_half) = stream.try_clone() else { return };
    let mut reader = BufReader::new(read_half);
    let mut writer = stream;

    let mut first = Vec::new();
    if reader.read_until(b'\n', &mut first).unwrap_or(0) == 0 {
        return;
    }
    let hello: Option<String> = serde_json::from_slice::<Value>(&first).ok().and_then(|v| {
        (v.get("op")? == "hello")
            .then(|| v.get("client")?.as_str().map(str::to_owned))
            .flatten()
    });
    let Some(client) = hello else {
        let err = BusError::Protocol("first message must be {\"op\":\"hello\",\"client\":...}".into());
        let _ = write_line(&mut writer, &error_reply(&err, None).to_string());
        let _ = writer.shutdown(Shutdown::Both);
        return;
    };
    let conn = broker.connect(&client);
    let welcome = json!({"op": "welcome", "connection": conn.id()}).to_string();
    if write_line(&mut writer, &welcome).is_err() {
        return;
    }

    let (ctl_tx, ctl_rx) = crossbeam_channel::unbounded::<String>();
    let inbox = conn.receiver();
    let writer_thread = thread::spawn(move || loop {
        let line = select! {
            recv(ctl_rx) -> msg => match msg {
                Ok(line) => line,
                Err(_) => break,
            },
            recv(inbox) -> env => match env {
                Ok(env) => encode_envelope(&env),
                Err(_) => break,
            },
        };
        if write_line(&mut writer, &line).is_err() {
            break;
        }
    });

    let mut buf = Vec::new();
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        let reply = match std::str::from_utf8(&buf) {
            Ok(text) if text.trim().is_empty() => None,
            Ok(text) => handle_client_op(&conn, text),
            Err(e) => Some(error_reply(
                &BusError::Decode {
                    field: None,
                    reason: e.to_string(),
                },
                None,
            )),
        };
        if let Some(reply) = reply {
            if ctl_tx.send(reply.to_string()).is_err() {
                break;
            }
        }
    }
    conn.close();
    drop(ctl_tx);
    drop(conn);
    let _ = writer_thread.join();
}

/// Remote client speaking the line protocol.
pub struct TcpConnection {
    name: String,
    writer: Mutex<TcpStream>,
    inbox: Receiver<Envelope>,
    control: Mutex<Receiver<Value>>,
    next_req: AtomicU64,
    closed: Arc<AtomicBool>,
}

impl TcpConnection {
    pub fn connect(addr: impl ToSocketAddrs, name: &str) -> Result<Self, BusError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let read_half = stream.try_clone()?;
        let (inbox_tx, inbox) = crossbeam_channel::unbounded();
        let (ctl_tx, control) = crossbeam_channel::unbounded();
        let closed = Arc::new(AtomicBool::new(false));
        let reader_closed = closed.clone();
        thread::Builder::new()
            .name(format!("bus-reader-{name}"))
            .spawn(move || read_loop(read_half, inbox_tx, ctl_tx, reader_closed))?;
        let conn = Self {
            name: name.to_owned(),
            writer: Mutex::new(stream),
            inbox,
            control: Mutex::new(control),
            next_req: AtomicU64::new(1),
            closed,
        };
        conn.send_line(&json!({"op": "hello", "client": name}).to_string())?;
        let welcome = conn.await_control(|v| v.get("op").is_some_and(|op| op == "welcome" || op == "error"))?;
        if welcome["op"] == "error" {
            return Err(BusError::Protocol(welcome["message"].as_str().unwrap_or("rejected").to_owned()));
        }
        Ok(conn)
    }

    /// Retries `connect` with exponential backoff until `deadline` elapses.
    pub fn connect_with_retry(addr: &str, name: &str, deadline: Duration) -> Result<Self, BusError> {
        let start = Instant::now();
        let mut backoff = Duration::from_millis(50);
        loop {
            match Self::connect(addr, name) {
                Ok(c) => return Ok(c),
                Err(e) if start.elapsed() + backoff > deadline => return Err(e),
                Err(e) => {
                    log::debug!("connect to {addr} failed ({e}); retrying in {backoff:?}");
                    thread::sleep(backoff);
                    backoff = (backoff * 2).min(Duration::from_secs(2));
                }
            }
        }
    }

    fn send_line(&self, line: &str) -> Result<(), BusError> {
        if self.closed.load(Ordering::Acquire) {
            return Err(BusError::Closed);
        }
        let mut w = self.writer.lock().unwrap();
        write_line(&mut w, line).map_err(|_| {
            self.closed.store(true, Ordering::Release);
            BusError::Closed
        })
    }

    fn await_control(&self, want: impl Fn(&Value) -> bool) -> Result<Value, BusError> {
        let rx = self.control.lock().unwrap();
        let deadline = Instant::now() + CONTROL_TIMEOUT;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match rx.recv_timeout(left) {
                Ok(v) if want(&v) => return Ok(v),
                Ok(v) => log::warn!("{}: unsolicited control message {v}", self.name),
                Err(RecvTimeoutError::Timeout) => return Err(BusError::Timeout),
                Err(RecvTimeoutError::Disconnected) => return Err(BusError::Closed),
            }
        }
    }

    fn request(&self, mut op: Value) -> Result<Value, BusError> {
        let req = self.next_req.fetch_add(1, Ordering::Relaxed);
        op["req"] = json!(req);
        self.send_line(&op.to_string())?;
        let reply = self.await_control(|v| v.get("req").and_then(Value::as_u64) == Some(req))?;
        if reply["op"] == "error" {
            let message = reply["message"].as_str().unwrap_or_default().to_owned();
            return Err(match reply["code"].as_str() {
                Some("unknown_subscription") => BusError::UnknownSubscription(
                    op.get("sub").and_then(Value::as_str).unwrap_or_default().to_owned(),
                ),
                Some("namespace") => BusError::NamespaceViolation(
                    op.get("pattern").and_then(Value::as_str).unwrap_or_default().to_owned(),
                ),
                _ => BusError::Protocol(message),
            });
        }
        Ok(reply)
    }
}

fn read_loop(stream: TcpStream, inbox: Sender<Envelope>, control: Sender<Value>, closed: Arc<AtomicBool>) {
    let mut reader = BufReader::new(stream);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        let value: Value = match serde_json::from_slice(&buf) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("skipping undecodable line from broker: {e}");
                continue;
            }
        };
        if value.get("op").is_some() {
            let _ = control.send(value);
            continue;
        }
        match envelope_from_value(value) {
            Ok(env) => {
                if inbox.send(env).is_err() {
                    break;
                }
            }
            Err(e) => log::warn!("skipping malformed envelope: {e}"),
        }
    }
    closed.store(true, Ordering::Release);
}

impl Connection for TcpConnection {
    fn name(&self) -> &str {
        &self.name
    }

    fn publish(&self, env: Envelope) -> Result<(), BusError> {
        let size = env.payload_size();
        if size > MAX_PAYLOAD_BYTES {
            return Err(BusError::PayloadTooLarge(size));
        }
        let env = serde_json::to_value(&env).map_err(|e| BusError::Protocol(e.to_string()))?;
        self.send_line(&json!({"op": "publish", "envelope": env}).to_string())
    }

    fn subscribe(&self, pattern: &BindingPattern) -> Result<SubscriptionId, BusError> {
        let reply = self.request(json!({"op": "subscribe", "pattern": pattern.to_string()}))?;
        reply["sub"]
            .as_str()
            .map(|s| SubscriptionId(s.to_owned()))
            .ok_or_else(|| BusError::Protocol("subscribed reply without `sub`".into()))
    }

    fn unsubscribe(&self, id: &SubscriptionId) -> Result<(), BusError> {
        self.request(json!({"op": "unsubscribe", "sub": id.0})).map(|_| ())
    }

    fn try_recv(&self) -> Result<Option<Envelope>, BusError> {
        match self.inbox.try_recv() {
            Ok(env) => Ok(Some(env)),
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => Err(BusError::Closed),
        }
    }

    fn recv_timeout(&self, timeout: Duration) -> Result<Option<Envelope>, BusError> {
        match self.inbox.recv_timeout(timeout) {
            Ok(env) => Ok(Some(env)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(BusError::Closed),
        }
    }

    fn close(&self) {
        if !self.closed.swap(true, Ordering::AcqRel) {
            let _ = self.writer.lock().unwrap().shutdown(Shutdown::Both);
        }
    }
}

impl Drop for TcpConnection {
    fn drop(&mut self) {
        self.close();
    }
}
