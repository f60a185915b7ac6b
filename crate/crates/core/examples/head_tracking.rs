//! The fuzzy head controller: its response curve, then a closed loop in
//! which it turns the simulated head toward a visitor.
//!
//! ```text
//! cargo run --example head_tracking
//! ```

use lumen::avatar::{FaceObservation, VisitorFace};
use lumen::bus::{keys, Connection};
use lumen::fuzzy::{build_head_controller, HeadControllerConfig};
use lumen::harness::{VirtualWorld, WorldConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctl = build_head_controller(HeadControllerConfig::default())?;
    println!("face x  -> yaw step     face y -> pitch step");
    for i in 0..=8 {
        let x = i as f64 * 40.0;
        let y = i as f64 * 30.0;
        let d = ctl.flc_step(FaceObservation { x, y });
        println!("{x:6.0}  -> {:+8.3}     {y:6.0} -> {:+8.3}", d.yaw, d.pitch);
    }

    let cfg = WorldConfig {
        head_tracking: Some(HeadControllerConfig::default()),
        fsm: None,
        ..WorldConfig::default()
    };
    let mut world = VirtualWorld::new(&cfg, None)?;
    let camera = world.parts.broker.connect("viewer");
    camera.subscribe_str(keys::CAMERA)?;
    world
        .parts
        .avatar
        .with_avatar(|a| a.set_visitor_face(Some(VisitorFace { azimuth: 25.0, elevation: -18.0 })))?;

    println!("\nvisitor at azimuth 25, elevation -18");
    for tick in 1..=15 {
        world.scheduler.run_for(100);
        let state = world.parts.avatar.snapshot();
        for env in camera.drain()? {
            let face = &env.payload["face"];
            let (x, y) = (face["x"].as_f64().unwrap_or(f64::NAN), face["y"].as_f64().unwrap_or(f64::NAN));
            println!(
                "tick {tick:2}: face ({x:6.1}, {y:6.1})  error {:5.1} px  head yaw {:+6.2} pitch {:+6.2}",
                (x - 160.0).hypot(y - 120.0),
                state.head_yaw(),
                state.head_pitch()
            );
        }
    }
    Ok(())
}
