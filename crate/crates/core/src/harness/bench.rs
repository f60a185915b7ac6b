//! Publish-to-deliver latency measurements.

use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::json;

use crate::avatar::{avatar_nodes, AvatarHandle, SensorRates};
use crate::bus::{keys, BusError, Connector, Kind};
use crate::clock::{Clock, SystemClock};
use crate::runtime::RealtimeRunner;

pub const BENCH_KEY: &str = "avatar.bench.latency";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("message count must be positive")]
    EmptyRun,
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error("only {received} of {sent} messages arrived")]
    Lost { sent: usize, received: usize },
}

impl LatencyStats {
    /// Nearest-rank percentiles over `samples` (milliseconds).
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self, BenchError> {
        if samples.is_empty() {
            return Err(BenchError::EmptyRun);
        }
        samples.sort_by(f64::total_cmp);
        let rank = |p: f64| {
            let idx = ((p * samples.len() as f64).ceil() as usize).clamp(1, samples.len()) - 1;
            samples[idx]
        };
        Ok(Self {
            count: samples.len(),
            p50_ms: rank(0.50),
            p95_ms: rank(0.95),
            max_ms: *samples.last().unwrap(),
        })
    }
}

/// Publishes `n` envelopes carrying a send timestamp and `payload_size`
/// bytes of padding, and times their arrival on a wildcard subscriber.
///
/// Subscribes to `#` when the broker allows it and falls back to
/// `avatar.bench.#` under the namespace policy.
pub fn bench_latency(connector: &dyn Connector, n: usize, payload_size: usize) -> Result<LatencyStats, BenchError> {
    if n == 0 {
        return Err(BenchError::EmptyRun);
    }
    let subscriber = connector.connect("bench-sub")?;
    if let Err(BusError::NamespaceViolation(_)) = subscriber.subscribe_str("#") {
        subscriber.subscribe_str("avatar.bench.#")?;
    }
    let publisher = connector.connect("bench-pub")?;
    let origin = Instant::now();
    let receiver = thread::spawn(move || {
        let mut samples = Vec::with_capacity(n);
        let deadline = Instant::now() + Duration::from_secs(10) + Duration::from_millis(n as u64);
        while samples.len() < n && Instant::now() < deadline {
            match subscriber.recv_timeout(Duration::from_millis(50)) {
                Ok(Some(env)) if env.key.to_string() == BENCH_KEY => {
                    if let Some(sent) = env.payload.get("sent_us").and_then(|v| v.as_u64()) {
                        let now = origin.elapsed().as_micros() as u64;
                        samples.push(now.saturating_sub(sent) as f64 / 1000.0);
                    }
                }
                Ok(_) => {}
                Err(e) => {
                    log::warn!("bench subscriber: {e}");
                    break;
                }
            }
        }
        subscriber.close();
        samples
    });
    let pad = "x".repeat(payload_size);
    for seq in 0..n {
        let sent_us = origin.elapsed().as_micros() as u64;
        publisher.publish_json(BENCH_KEY, Kind::Data, json!({"seq": seq, "sent_us": sent_us, "pad": pad}))?;
        // Light pacing so the run measures delivery, not queue build-up.
        thread::sleep(Duration::from_micros(200));
    }
    let samples = receiver.join().expect("bench receiver panicked");
    publisher.close();
    if samples.len() < n {
        return Err(BenchError::Lost {
            sent: n,
            received: samples.len(),
        });
    }
    LatencyStats::from_samples(samples)
}

/// Runs a realtime avatar and times `frames` camera envelopes from their
/// publisher stamp to arrival at a subscriber (millisecond resolution).
pub fn bench_camera(connector: Arc<dyn Connector>, frames: usize) -> Result<LatencyStats, BenchError> {
    if frames == 0 {
        return Err(BenchError::EmptyRun);
    }
    let probe = connector.connect("bench-camera")?;
    probe.subscribe_str(keys::CAMERA)?;
    let clock: Arc<dyn Clock> = Arc::new(SystemClock);
    let mut runner = RealtimeRunner::new(clock.clone());
    let avatar = AvatarHandle::default();
    for node in avatar_nodes(connector, &avatar, SensorRates::default())? {
        runner.spawn(node).map_err(BusError::Io)?;
    }
    let mut samples = Vec::with_capacity(frames);
    let deadline = Instant::now() + Duration::from_millis(200 * frames as u64 + 2000);
    while samples.len() < frames && Instant::now() < deadline {
        if let Some(env) = probe.recv_timeout(Duration::from_millis(50))? {
            samples.push(clock.now_ms().saturating_sub(env.ts) as f64);
        }
    }
    runner.shutdown();
    if samples.len() < frames {
        return Err(BenchError::Lost {
            sent: frames,
            received: samples.len(),
        });
    }
    LatencyStats::from_samples(samples)
}
