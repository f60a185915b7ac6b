//! Scenarios, transcripts, latency benchmarks and in-process assemblies.

pub mod bench;
pub mod scenario;
pub mod transcript;
pub mod world;

pub use bench::{bench_camera, bench_latency, BenchError, LatencyStats};
pub use scenario::{canonical_tour, scenario_load, scenario_parse, ScenarioError, ScenarioPlayer, ScenarioStep, StepEvent};
pub use transcript::{transcript_diff, Diff, Entry, ExpectationResult, Transcript};
pub use world::{run_scenario_virtual, spawn_realtime, Assembly, VirtualWorld, WorldConfig, WorldError};
