//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lumen::avatar::{Avatar, CameraModel, Command, FaceObservation, Method, VisitorFace};
use lumen::behavior::fsm::fsm_validate;
use lumen::behavior::tour_fsm;
use lumen::bus::{
    keys, serve_tcp, topic_match, BindingPattern, Broker, Connection, Kind, RoutingKey, TcpConnector,
};
use lumen::fuzzy::{
    build_head_controller, head_rules, FuzzyRule, HeadControllerConfig, Label, ParameterSet, ANGLE_X, ANGLE_Y,
    FACE_X_LOC, FACE_Y_LOC,
};
use lumen::harness::{bench_latency, canonical_tour, run_scenario_virtual, VirtualWorld, WorldConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

const GOLDEN: &str = include_str!("../data/canonical_tour.golden.jsonl");

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fuzzy_oracle() -> Outcome {
    let start = Instant::now();
    let ctl = build_head_controller(HeadControllerConfig::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let yaw: BTreeMap<i64, f64> = (0..=32).map(|i| (i * 10, common::oracle_yaw((i * 10) as f64))).collect();
    let pitch: BTreeMap<i64, f64> = (0..=24).map(|j| (j * 10, common::oracle_pitch((j * 10) as f64))).collect();
    for (&x, &oy) in &yaw {
        for (&y, &op) in &pitch {
            let dy = (ctl.raw_yaw(x as f64) - oy).abs();
            let dp = (ctl.raw_pitch(y as f64) - op).abs();
            worst = worst.max(dy).max(dp);
        }
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-4, format!("max |err| {worst:.3e} deg over 33x25"))?;
    check(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("max |err| {worst:.2e} deg, {:.2} s", elapsed.as_secs_f64()))
}

fn symmetry() -> Outcome {
    let ctl = build_head_controller(HeadControllerConfig::default()).map_err(|e| e.to_string())?;
    let d = ctl.flc_step(FaceObservation { x: 160.0, y: 120.0 });
    check(d.yaw == 0.0 && d.pitch == 0.0, format!("deadband output {d:?}"))?;
    let open = build_head_controller(HeadControllerConfig {
        deadband: 0.0,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let d = open.flc_step(FaceObservation { x: 160.0, y: 120.0 });
    check(d.yaw.abs() < 1e-9 && d.pitch.abs() < 1e-9, format!("no-deadband output {d:?}"))?;
    let mut worst: f64 = 0.0;
    for k in 0..=160 {
        let dx = k as f64;
        worst = worst.max((open.raw_yaw(160.0 + dx) + open.raw_yaw(160.0 - dx)).abs());
        if k <= 120 {
            worst = worst.max((open.raw_pitch(120.0 + dx) + open.raw_pitch(120.0 - dx)).abs());
        }
    }
    check(worst < 1e-9, format!("antisymmetry residual {worst:.3e}"))?;
    Ok(format!("antisymmetry residual {worst:.1e}"))
}

fn closed_loop() -> Outcome {
    let start = Instant::now();
    let cfg = WorldConfig {
        head_tracking: Some(HeadControllerConfig::default()),
        fsm: None,
        ..WorldConfig::default()
    };
    let mut worst_final: f64 = 0.0;
    let mut slowest = 0;
    for az in [-25.0, 0.0, 25.0] {
        for el in [-18.0, 0.0, 18.0] {
            let mut world = VirtualWorld::new(&cfg, None).map_err(|e| e.to_string())?;
            let monitor = world.parts.broker.connect("monitor");
            monitor.subscribe_str(keys::CAMERA).map_err(|e| e.to_string())?;
            world
                .parts
                .avatar
                .with_avatar(|a| a.set_visitor_face(Some(VisitorFace { azimuth: az, elevation: el })))
                .map_err(|e| e.to_string())?;
            world.scheduler.run_until(4000);
            let errors: Vec<f64> = monitor
                .drain()
                .map_err(|e| e.to_string())?
                .iter()
                .map(|env| {
                    let face = &env.payload["face"];
                    let x = face["x"].as_f64().unwrap_or(f64::NAN);
                    let y = face["y"].as_f64().unwrap_or(f64::NAN);
                    (x - 160.0).hypot(y - 120.0)
                })
                .collect();
            check(errors.len() == 40, format!("({az},{el}): {} camera ticks", errors.len()))?;
            let reached = errors.iter().position(|&e| e <= 10.0);
            let Some(reached) = reached else {
                return Err(format!("({az},{el}): never within 10 px, last {:.2}", errors[39]));
            };
            slowest = slowest.max(reached + 1);
            for w in errors[3..].windows(2) {
                check(
                    w[1] <= w[0] + 1e-9,
                    format!("({az},{el}): error rose {:.4} -> {:.4}", w[0], w[1]),
                )?;
            }
            worst_final = worst_final.max(errors[39]);
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "slowest reach tick {slowest}, worst final error {worst_final:.2} px, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn table_fidelity() -> Outcome {
    use Label::*;
    let expected = vec![
        FuzzyRule::single(FACE_X_LOC, Negative, ANGLE_X, Positive),
        FuzzyRule::single(FACE_X_LOC, Positive, ANGLE_X, Negative),
        FuzzyRule::single(FACE_X_LOC, Zero, ANGLE_X, Zero),
        FuzzyRule::single(FACE_Y_LOC, Negative, ANGLE_Y, Positive),
        FuzzyRule::single(FACE_Y_LOC, Positive, ANGLE_Y, Negative),
        FuzzyRule::single(FACE_Y_LOC, Zero, ANGLE_Y, Zero),
    ];
    check(head_rules() == expected, "rule set differs")?;
    // (c_n, sigma_n, c_p, sigma_p, c_z, sigma_z) per column, as printed.
    let printed: [(&str, [f64; 6]); 4] = [
        (FACE_X_LOC, [0.0, 80.0, 320.0, 80.0, 160.0, 50.0]),
        (FACE_Y_LOC, [0.0, 70.0, 120.0, 40.0, 240.0, 70.0]),
        (ANGLE_X, [-15.0, 10.0, 0.0, 10.0, 15.0, 10.0]),
        (ANGLE_Y, [-7.0, 6.0, 0.0, 6.0, 7.0, 6.0]),
    ];
    let flat = |p: lumen::fuzzy::TermParams| [p.c_n, p.sigma_n, p.c_p, p.sigma_p, p.c_z, p.sigma_z];
    let as_printed = ParameterSet::AsPrinted.table();
    let corrected = ParameterSet::Corrected.table();
    for (i, (name, row)) in printed.iter().enumerate() {
        check(as_printed[i].0 == *name, format!("column {i} is {}", as_printed[i].0))?;
        check(flat(as_printed[i].2) == *row, format!("{name}: as_printed {:?}", flat(as_printed[i].2)))?;
        let want = if *name == FACE_X_LOC {
            *row
        } else {
            [row[0], row[1], row[4], row[5], row[2], row[3]]
        };
        check(flat(corrected[i].2) == want, format!("{name}: corrected {:?}", flat(corrected[i].2)))?;
    }
    Ok("6 rules, 4 columns as printed, 3 positive/zero swaps".into())
}

fn broker() -> Outcome {
    // Exhaustive topic semantics.
    let patterns = common::words(&["a", "b", "c", "*", "#"], 4);
    let keys_ = common::words(&["a", "b", "c"], 4);
    let mut pairs = 0usize;
    for p in &patterns {
        let bp = BindingPattern::parse(p).map_err(|e| e.to_string())?;
        let re = common::topic_regex(p);
        for k in &keys_ {
            let rk = RoutingKey::parse(k).map_err(|e| e.to_string())?;
            check(
                topic_match(&bp, &rk) == common::regex_match(&re, k),
                format!("pattern {p} key {k}"),
            )?;
            pairs += 1;
        }
    }

    // Five streams for 30 s of virtual time while commands run.
    let cfg = WorldConfig {
        fsm: None,
        ..WorldConfig::default()
    };
    let mut world = VirtualWorld::new(&cfg, None).map_err(|e| e.to_string())?;
    let monitor = world.parts.broker.connect("monitor");
    monitor.subscribe_str(keys::ALL_SENSOR_DATA).map_err(|e| e.to_string())?;
    monitor.subscribe_str(keys::REPLY).map_err(|e| e.to_string())?;
    let driver = world.parts.broker.connect("driver");
    let commands = [
        (1000, "say", json!({"text": "hello"})),
        (1500, "moveTo", json!({"x": 0.3, "y": 0.0, "theta": 0.0})),
        (2000, "dancing", json!({})),
        (8000, "setAngles", json!({"HeadYaw": 20.0})),
        (16000, "goToPosture", json!({"name": "Sit", "speed": 0.5})),
        (20000, "singing", json!({})),
        (29000, "goodbye", json!({})),
    ];
    let touches = [500, 7000, 7000, 15000, 22000];
    let mut t = 0;
    let mut sent = 0;
    let mut touched = 0;
    while t < 30_000 {
        t += 10;
        for (at, method, args) in &commands {
            if *at == t {
                sent += 1;
                driver
                    .publish_json(keys::COMMAND, Kind::Command, json!({"id": format!("c{sent}"), "method": method, "args": args}))
                    .map_err(|e| e.to_string())?;
            }
        }
        for at in touches {
            if at == t {
                world.parts.avatar.touch("head_front");
                touched += 1;
            }
        }
        world.scheduler.run_until(t);
    }
    let mut seqs: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    let mut ids = BTreeSet::new();
    let mut replies = Vec::new();
    for env in monitor.drain().map_err(|e| e.to_string())? {
        check(ids.insert(env.id), format!("duplicate envelope id {}", env.id))?;
        let key = env.key.to_string();
        if key == keys::REPLY {
            replies.push(env.payload["id"].as_str().unwrap_or_default().to_owned());
            continue;
        }
        let seq = env.payload["seq"].as_u64().ok_or(format!("{key}: missing seq"))?;
        seqs.entry(key).or_default().push(seq);
    }
    let expected = [
        (keys::CAMERA, 300usize),
        (keys::JOINTS, 300),
        (keys::SONAR, 150),
        (keys::BATTERY, 6),
        (keys::TACTILE, touched),
    ];
    for (key, count) in expected {
        let got = seqs.get(key).cloned().unwrap_or_default();
        check(got.len() == count, format!("{key}: {} samples, want {count}", got.len()))?;
        check(
            got.iter().enumerate().all(|(i, &s)| s == i as u64),
            format!("{key}: sequence not 0..{count} in order"),
        )?;
    }
    let reply_set: BTreeSet<&String> = replies.iter().collect();
    check(replies.len() == reply_set.len(), "duplicate replies")?;
    let completed = replies.len();
    Ok(format!(
        "{pairs} pattern/key pairs; 5 streams gap-free over 30 s; {completed} of {sent} commands finished in the window"
    ))
}

fn latency() -> Outcome {
    let server = serve_tcp(Broker::open(), "127.0.0.1:0").map_err(|e| e.to_string())?;
    let connector = TcpConnector::new(server.local_addr().to_string());
    let stats = bench_latency(&connector, 1000, 1024).map_err(|e| e.to_string())?;
    server.shutdown();
    check(stats.count == 1000, format!("{} samples", stats.count))?;
    check(stats.p50_ms < 5.0, format!("p50 {:.3} ms", stats.p50_ms))?;
    check(stats.p95_ms < 20.0, format!("p95 {:.3} ms", stats.p95_ms))?;
    Ok(format!(
        "p50 {:.3} ms, p95 {:.3} ms, max {:.3} ms",
        stats.p50_ms, stats.p95_ms, stats.max_ms
    ))
}

fn fsm() -> Outcome {
    let start = Instant::now();
    let def = tour_fsm();
    let violations = fsm_validate(&def);
    check(violations.is_empty(), format!("{} violations", violations.len()))?;
    check(def.states.len() == 15, format!("{} states", def.states.len()))?;
    for run in 1..=3 {
        let t = run_scenario_virtual(canonical_tour(), &WorldConfig::default()).map_err(|e| e.to_string())?;
        check(t.passed(), format!("run {run}: failed expectations"))?;
        check(t.render() == GOLDEN, format!("run {run}: transcript differs from golden"))?;
        let visited = t.states_visited().len();
        check(visited == 15, format!("run {run}: visited {visited} states"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("valid, 15 states, 3 runs byte-identical, {:.2} s", elapsed.as_secs_f64()))
}

fn random_command(rng: &mut StdRng, id: String, joints: &[(String, f64, f64)]) -> Command {
    let method = Method::ALL[rng.gen_range(0..Method::ALL.len())];
    let args = match method {
        Method::Say => json!({"text": "hi"}),
        Method::GoToPosture => {
            let names = ["Stand", "StandInit", "Sit", "Crouch", "LyingBack", "Nope"];
            json!({"name": names[rng.gen_range(0..names.len())], "speed": rng.gen_range(-0.5..1.5)})
        }
        Method::MoveTo => json!({
            "x": rng.gen_range(-0.5..0.5),
            "y": rng.gen_range(-0.5..0.5),
            "theta": rng.gen_range(-90.0..90.0),
        }),
        Method::SetAngles => {
            let mut args = serde_json::Map::new();
            for _ in 0..rng.gen_range(1..4) {
                let (name, min, max) = &joints[rng.gen_range(0..joints.len())];
                let span = max - min;
                args.insert(name.clone(), json!(rng.gen_range(min - span * 0.3..max + span * 0.3)));
            }
            if rng.gen_bool(0.05) {
                args.insert("NoSuchJoint".into(), json!(1.0));
            }
            Value::Object(args)
        }
        _ => json!({}),
    };
    Command::new(id, method, args)
}

fn simulator() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2017);
    let mut avatar = Avatar::new(CameraModel::default());
    let joints: Vec<(String, f64, f64)> = avatar
        .state()
        .joints
        .values()
        .map(|j| (j.name.clone(), j.min, j.max))
        .collect();
    let mut replies: BTreeMap<String, usize> = BTreeMap::new();
    let record = |rs: Vec<lumen::avatar::CommandReply>, replies: &mut BTreeMap<String, usize>| {
        for r in rs {
            *replies.entry(r.id).or_default() += 1;
        }
    };
    let limits_ok = |a: &Avatar| a.state().joints.values().all(|j| j.angle >= j.min && j.angle <= j.max);
    let n = 10_000;
    for i in 0..n {
        let cmd = random_command(&mut rng, format!("f{i}"), &joints);
        if let Some(r) = avatar.execute_command(cmd) {
            record(vec![r], &mut replies);
        }
        for _ in 0..rng.gen_range(0..5) {
            let rs = avatar.step(rng.gen_range(0.001..=0.1)).map_err(|e| e.to_string())?;
            record(rs, &mut replies);
            check(limits_ok(&avatar), format!("limits violated after command {i}"))?;
        }
    }
    // Rest interrupts whatever is still queued; every id must now be answered.
    if let Some(r) = avatar.execute_command(Command::new("flush", Method::Rest, json!({}))) {
        record(vec![r], &mut replies);
    }
    for _ in 0..300 {
        let rs = avatar.step(0.01).map_err(|e| e.to_string())?;
        record(rs, &mut replies);
        check(limits_ok(&avatar), "limits violated while flushing")?;
    }
    for i in 0..n {
        let id = format!("f{i}");
        let count = replies.get(&id).copied().unwrap_or(0);
        check(count == 1, format!("{id}: {count} replies"))?;
    }
    check(replies.len() == n + 1, format!("{} distinct reply ids", replies.len()))?;

    let mut walker = Avatar::new(CameraModel::default());
    let done = walker.execute_command(Command::new("walk", Method::MoveTo, json!({"x": 0.2, "y": 0.0, "theta": 0.0})));
    check(done.is_none(), "moveTo answered before walking")?;
    let mut answered = false;
    for _ in 0..1000 {
        if walker.step(0.01).map_err(|e| e.to_string())?.iter().any(|r| r.id == "walk" && r.ok) {
            answered = true;
            break;
        }
    }
    check(answered, "moveTo never completed")?;
    let p = walker.state().torso;
    let err = (p.x - 0.2).abs().max(p.y.abs()).max(p.heading.abs());
    check(err <= 1e-6, format!("moveTo landed at {p:?}"))?;
    Ok(format!("{n} fuzzed commands, limits held, one reply each; moveTo error {err:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("fuzzy-oracle", fuzzy_oracle),
        ("symmetry", symmetry),
        ("closed-loop-tracking", closed_loop),
        ("table-fidelity", table_fidelity),
        ("broker", broker),
        ("latency-bench", latency),
        ("fsm", fsm),
        ("simulator-contracts", simulator),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name:<22} {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name:<22} {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
