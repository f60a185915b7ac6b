use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use lumen::avatar::{avatar_nodes, AvatarHandle, SensorRates};
use lumen::behavior::{fsm_validate, tour_fsm, Brain, BrainNode, FsmDefinition};
use lumen::bus::{gateway, serve_tcp, Broker, BrokerConfig, Connector, TcpConnector, BUS_ADDR_ENV};
use lumen::fuzzy::tracker::HeadTracker;
use lumen::fuzzy::{FuzzySystem, HeadController, HeadControllerConfig, ParameterSet};
use lumen::harness::{
    bench_camera, bench_latency, canonical_tour, run_scenario_virtual, scenario_load, spawn_realtime,
    transcript_diff, ScenarioPlayer, ScenarioStep, Transcript, WorldConfig,
};
use lumen::runtime::{Node, RealtimeRunner, Scheduler};
use lumen::{Clock, SystemClock, VirtualClock};

#[derive(Parser)]
#[command(name = "lumen", version, about = "Desk-scale social robot platform")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Message broker.
    #[command(subcommand)]
    Bus(BusCmd),
    /// Simulated robot.
    #[command(subcommand)]
    Avatar(AvatarCmd),
    /// Head controller and behavior engine.
    #[command(subcommand)]
    Brain(BrainCmd),
    /// Scripted scenarios and transcripts.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Latency measurements.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Broker, avatar, head controller, brain and the shipped tour scenario
    /// in one process.
    Demo(DemoArgs),
}

#[derive(Args, Clone)]
struct BusArg {
    /// Broker address (host:port).
    #[arg(long, env = BUS_ADDR_ENV, default_value = lumen::bus::DEFAULT_BUS_ADDR)]
    bus: String,
}

#[derive(Subcommand)]
enum BusCmd {
    Serve {
        #[arg(long, default_value_t = 5673)]
        port: u16,
        /// Also serve the WebSocket gateway on this port.
        #[arg(long)]
        ws_port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Accept subscriptions outside the avatar/lumen namespaces.
        #[arg(long)]
        open: bool,
    },
}

#[derive(Subcommand)]
enum AvatarCmd {
    Run {
        #[command(flatten)]
        bus: BusArg,
        /// Tick a virtual clock from zero instead of reading the system clock.
        #[arg(long)]
        virtual_clock: bool,
    },
}

#[derive(Subcommand)]
enum BrainCmd {
    /// Fuzzy head-tracking loop.
    Head {
        #[command(flatten)]
        bus: BusArg,
        #[arg(long, default_value = "corrected")]
        params: ParameterSet,
        #[arg(long, default_value_t = 1.0)]
        gain: f64,
        #[arg(long, default_value_t = 5.0)]
        deadband: f64,
        /// Load the fuzzy system from a JSON file instead of a built-in set.
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Tour-guide state machine.
    Fsm {
        #[command(flatten)]
        bus: BusArg,
        /// Machine definition (JSON); defaults to the built-in tour.
        #[arg(long)]
        fsm: Option<PathBuf>,
        #[arg(long)]
        virtual_clock: bool,
        /// Print the definition as JSON, validate it and exit.
        #[arg(long)]
        dump: bool,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    Play {
        file: PathBuf,
        #[command(flatten)]
        bus: BusArg,
        /// Compare the transcript against this file.
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Write the transcript here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run avatar and brain in-process under a virtual clock instead of
        /// talking to a broker.
        #[arg(long)]
        in_process: bool,
    },
    /// Compare two transcript files.
    Diff { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum BenchCmd {
    Latency {
        #[command(flatten)]
        bus: BusArg,
        #[arg(short = 'n', long, default_value_t = 1000)]
        count: usize,
        /// Padding bytes per message.
        #[arg(long, default_value_t = 1024)]
        size: usize,
        /// Also time this many camera frames from a local avatar.
        #[arg(long)]
        camera: Option<usize>,
    },
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    virtual_clock: bool,
    /// Serve the in-process broker over TCP on this port.
    #[arg(long)]
    port: Option<u16>,
    /// Serve the WebSocket gateway on this port.
    #[arg(long)]
    ws_port: Option<u16>,
    /// Write the transcript here.
    #[arg(long)]
    out: Option<PathBuf>,
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Bus(BusCmd::Serve {
            port,
            ws_port,
            host,
            open,
        }) => bus_serve(&host, port, ws_port, open),
        Cmd::Avatar(AvatarCmd::Run { bus, virtual_clock }) => avatar_run(&bus.bus, virtual_clock),
        Cmd::Brain(BrainCmd::Head {
            bus,
            params,
            gain,
            deadband,
            system,
        }) => brain_head(&bus.bus, params, gain, deadband, system),
        Cmd::Brain(BrainCmd::Fsm {
            bus,
            fsm,
            virtual_clock,
            dump,
        }) => brain_fsm(&bus.bus, fsm, virtual_clock, dump),
        Cmd::Scenario(ScenarioCmd::Play {
            file,
            bus,
            golden,
            out,
            in_process,
        }) => scenario_play(&file, &bus.bus, golden, out, in_process),
        Cmd::Scenario(ScenarioCmd::Diff { a, b }) => scenario_diff(&a, &b),
        Cmd::Bench(BenchCmd::Latency {
            bus,
            count,
            size,
            camera,
        }) => bench(&bus.bus, count, size, camera),
        Cmd::Demo(args) => demo(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn bus_serve(host: &str, port: u16, ws_port: Option<u16>, open: bool) -> CliResult {
    let config = BrokerConfig {
        enforce_namespace: !open,
    };
    let broker = Broker::new(config, Arc::new(SystemClock));
    let server = serve_tcp(broker.clone(), (host, port))?;
    println!("bus listening on {}", server.local_addr());
    let _gateway = match ws_port {
        Some(p) => {
            let gw = gateway::gateway_serve(broker, (host, p))?;
            println!("websocket gateway on {}", gw.local_addr());
            Some(gw)
        }
        None => None,
    };
    server.join();
    Ok(ExitCode::SUCCESS)
}

/// Runs nodes until the process is killed: on threads against the system
/// clock, or on one thread under a virtual clock paced at real time.
fn drive(nodes: Vec<Box<dyn Node>>, virtual_clock: Option<VirtualClock>) -> CliResult {
    match virtual_clock {
        Some(clock) => {
            let mut sched = Scheduler::new(clock);
            for n in nodes {
                sched.add_boxed(n);
            }
            let start = Instant::now();
            loop {
                sched.step();
                let target = Duration::from_millis(sched.now());
                if let Some(wait) = target.checked_sub(start.elapsed()) {
                    thread::sleep(wait);
                }
            }
        }
        None => {
            let mut runner = RealtimeRunner::new(Arc::new(SystemClock));
            for n in nodes {
                runner.spawn(n)?;
            }
            runner.wait();
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn connector(addr: &str) -> Arc<dyn Connector> {
    Arc::new(TcpConnector::new(addr))
}

fn avatar_run(addr: &str, virtual_clock: bool) -> CliResult {
    let avatar = AvatarHandle::default();
    let nodes = avatar_nodes(connector(addr), &avatar, SensorRates::default())?;
    log::info!("avatar streaming to {addr}");
    drive(nodes, virtual_clock.then(|| VirtualClock::new(0)))
}

fn brain_head(addr: &str, params: ParameterSet, gain: f64, deadband: f64, system: Option<PathBuf>) -> CliResult {
    let config = HeadControllerConfig {
        parameter_set: params,
        gain,
        deadband,
        ..HeadControllerConfig::default()
    };
    let system = match system {
        Some(path) => serde_json::from_str::<FuzzySystem>(&std::fs::read_to_string(path)?)?,
        None => params.system()?,
    };
    let controller = HeadController::from_system(system, config)?;
    let tracker = HeadTracker::new(connector(addr), controller)?;
    log::info!("head tracker on {addr} ({params:?}, gain {gain})");
    drive(vec![Box::new(tracker)], None)
}

fn load_fsm(path: Option<PathBuf>) -> Result<FsmDefinition, Box<dyn std::error::Error>> {
    Ok(match path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => tour_fsm(),
    })
}

fn brain_fsm(addr: &str, fsm: Option<PathBuf>, virtual_clock: bool, dump: bool) -> CliResult {
    let def = load_fsm(fsm)?;
    if dump {
        println!("{}", serde_json::to_string_pretty(&def)?);
        let violations = fsm_validate(&def);
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return Ok(if violations.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        });
    }
    let brain = Brain::new(def).map_err(|v| format!("invalid FSM: {v:?}"))?;
    let node = BrainNode::new(connector(addr), brain)?;
    drive(vec![Box::new(node)], virtual_clock.then(|| VirtualClock::new(0)))
}

/// Prints expectation results and compares against a golden file. Returns
/// whether everything passed.
fn report(transcript: &Transcript, golden: Option<PathBuf>, out: Option<PathBuf>) -> Result<bool, std::io::Error> {
    let rendered = transcript.render();
    match out {
        Some(path) => std::fs::write(path, &rendered)?,
        None => print!("{rendered}"),
    }
    for e in &transcript.expectations {
        let mark = if e.passed { "ok  " } else { "FAIL" };
        eprintln!(
            "{mark} t={:>6} expect {} within {} ms (observed {})",
            e.t,
            e.state,
            e.within,
            e.observed.as_deref().unwrap_or("-")
        );
    }
    let mut ok = transcript.passed();
    if let Some(path) = golden {
        let diff = transcript_diff(&std::fs::read_to_string(path)?, &rendered);
        eprintln!("{diff}");
        ok &= diff.is_equal();
    }
    eprintln!("states visited: {}", transcript.states_visited().len());
    Ok(ok)
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn play_remote(addr: &str, steps: Vec<ScenarioStep>) -> Result<Transcript, Box<dyn std::error::Error>> {
    let mut player = ScenarioPlayer::new(connector(addr), steps)?;
    let clock = SystemClock;
    while !player.is_done() {
        if !player.poll(clock.now_ms()) {
            thread::sleep(Duration::from_millis(1));
        }
    }
    // Let in-flight transitions arrive.
    let settle = clock.now_ms() + 1000;
    while clock.now_ms() < settle {
        player.poll(clock.now_ms());
        thread::sleep(Duration::from_millis(5));
    }
    Ok(player.into_transcript())
}

fn scenario_play(
    file: &PathBuf,
    addr: &str,
    golden: Option<PathBuf>,
    out: Option<PathBuf>,
    in_process: bool,
) -> CliResult {
    let steps = scenario_load(file)?;
    let transcript = if in_process {
        run_scenario_virtual(steps, &WorldConfig::default())?
    } else {
        play_remote(addr, steps)?
    };
    Ok(exit(report(&transcript, golden, out)?))
}

fn scenario_diff(a: &PathBuf, b: &PathBuf) -> CliResult {
    let diff = transcript_diff(&std::fs::read_to_string(a)?, &std::fs::read_to_string(b)?);
    println!("{diff}");
    Ok(exit(diff.is_equal()))
}

fn bench(addr: &str, count: usize, size: usize, camera: Option<usize>) -> CliResult {
    let conn = TcpConnector::new(addr);
    let stats = bench_latency(&conn, count, size)?;
    println!("{}", serde_json::to_string(&stats)?);
    if let Some(frames) = camera {
        let stats = bench_camera(Arc::new(conn), frames)?;
        println!("camera {}", serde_json::to_string(&stats)?);
    }
    Ok(ExitCode::SUCCESS)
}

fn demo(args: DemoArgs) -> CliResult {
    let cfg = WorldConfig::full();
    let steps = canonical_tour();
    if args.virtual_clock {
        let started = Instant::now();
        let transcript = run_scenario_virtual(steps, &cfg)?;
        let ok = report(&transcript, None, args.out)?;
        eprintln!("finished in {:.2?}", started.elapsed());
        return Ok(exit(ok));
    }
    let broker = Broker::new(BrokerConfig::default(), Arc::new(SystemClock));
    let _server = match args.port {
        Some(p) => Some(serve_tcp(broker.clone(), ("127.0.0.1", p))?),
        None => None,
    };
    let _gateway = match args.ws_port {
        Some(p) => Some(gateway::gateway_serve(broker.clone(), ("127.0.0.1", p))?),
        None => None,
    };
    let last = steps.last().map_or(0, |s| s.t);
    let (parts, runner) = spawn_realtime(broker, &cfg, Some(steps))?;
    log::info!("demo running in real time for about {} s", last / 1000 + 1);
    while !parts.scenario_done() {
        thread::sleep(Duration::from_millis(50));
    }
    thread::sleep(Duration::from_millis(1000));
    runner.shutdown();
    let transcript = parts.transcript().unwrap_or_default();
    Ok(exit(report(&transcript, None, args.out)?))
}
