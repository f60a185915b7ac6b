//! Publish-to-deliver latency over loopback TCP.
//!
//! ```text
//! cargo run --release --example latency_bench [count] [bytes]
//! ```

use lumen::bus::{serve_tcp, Broker, TcpConnector};
use lumen::harness::bench_latency;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let size: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1024);

    let server = serve_tcp(Broker::open(), "127.0.0.1:0")?;
    let stats = bench_latency(&TcpConnector::new(server.local_addr().to_string()), n, size)?;
    println!(
        "{} messages of {size} B: p50 {:.3} ms  p95 {:.3} ms  max {:.3} ms",
        stats.count, stats.p50_ms, stats.p95_ms, stats.max_ms
    );
    server.shutdown();
    Ok(())
}
