//! WebSocket mirror of the line protocol for browser clients.
//!
//! Each text frame carries one JSON body: the same client operations as the
//! TCP listener (`hello` is optional here), and delivered envelopes in their
//! wire form without the trailing LF. A frame that cannot be handled yields an
//! `{"op":"error",...}` frame and the session stays open.

use std::io::ErrorKind;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use tungstenite::{Message, WebSocket};

use super::tcp::handle_client_op;
use super::{Broker, BusError, Connection, LocalConnection};

const POLL: Duration = Duration::from_millis(10);

pub struct Gateway {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl Gateway {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::Release);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }

    pub fn join(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

pub fn gateway_serve(broker: Broker, addr: impl ToSocketAddrs) -> Result<Gateway, BusError> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = stop.clone();
    let accept = thread::Builder::new().name("ws-accept".into()).spawn(move || {
        for stream in listener.incoming() {
            if stop_flag.load(Ordering::Acquire) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let broker = broker.clone();
            let stop = stop_flag.clone();
            let _ = thread::Builder::new().name("ws-client".into()).spawn(move || {
                if let Err(e) = serve_session(broker, stream, stop) {
                    log::debug!("websocket session ended: {e}");
                }
            });
        }
    })?;
    Ok(Gateway {
        addr: local,
        stop,
        accept: Some(accept),
    })
}

fn serve_session(broker: Broker, stream: TcpStream, stop: Arc<AtomicBool>) -> Result<(), BusError> {
    let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
    let mut ws = tungstenite::accept(stream).map_err(|e| BusError::Protocol(e.to_string()))?;
    ws.get_ref().set_read_timeout(Some(POLL))?;
    let conn = broker.connect(&format!("ws:{peer}"));
    let result = pump(&mut ws, &conn, &stop);
    conn.close();
    let _ = ws.close(None);
    result
}

fn pump(ws: &mut WebSocket<TcpStream>, conn: &LocalConnection, stop: &AtomicBool) -> Result<(), BusError> {
    let proto = |e: tungstenite::Error| BusError::Protocol(e.to_string());
    while !stop.load(Ordering::Acquire) {
        match ws.read() {
            Ok(Message::Text(text)) => {
                if let Some(reply) = handle_client_op(conn, text.as_str()) {
                    ws.send(Message::text(reply.to_string())).map_err(proto)?;
                }
            }
            Ok(Message::Binary(_)) => {
                let reply = serde_json::json!({"op": "error", "code": "bad_op", "message": "binary frames are not supported"});
                ws.send(Message::text(reply.to_string())).map_err(proto)?;
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(proto(e)),
        }
        while let Some(env) = conn.try_recv()? {
            let body = serde_json::to_string(&env).map_err(|e| BusError::Protocol(e.to_string()))?;
            ws.send(Message::text(body)).map_err(proto)?;
        }
    }
    Ok(())
}
