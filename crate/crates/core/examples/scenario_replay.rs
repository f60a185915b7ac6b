//! Scripted visitors: play a scenario against the full in-process system,
//! check its expectations and compare two runs.
//!
//! ```text
//! cargo run --example scenario_replay
//! ```

use lumen::harness::{canonical_tour, run_scenario_virtual, scenario_parse, transcript_diff, WorldConfig};

const SHORT_VISIT: &str = r#"{"t":500,"event":"set_face","azimuth":8,"elevation":-3}
{"t":600,"event":"expect_state","state":"Greeting","within":1000}
{"t":6000,"event":"utter","text":"hello there"}
{"t":6100,"event":"expect_state","state":"Listening","within":500}
{"t":9000,"event":"utter","text":"goodbye"}
{"t":9100,"event":"expect_state","state":"Farewell","within":500}
{"t":9200,"event":"clear_face"}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let steps = scenario_parse(SHORT_VISIT)?;
    let transcript = run_scenario_virtual(steps, &WorldConfig::full())?;
    for e in &transcript.expectations {
        println!(
            "t={:>5} expect {:<10} within {:>4} ms: {}",
            e.t,
            e.state,
            e.within,
            if e.passed { "ok".to_owned() } else { format!("saw {:?}", e.observed) }
        );
    }
    println!("states: {:?}", transcript.states_visited());

    let a = run_scenario_virtual(canonical_tour(), &WorldConfig::default())?.render();
    let b = run_scenario_virtual(canonical_tour(), &WorldConfig::default())?.render();
    println!("\ncanonical tour: {} lines, reruns identical: {}", a.lines().count(), transcript_diff(&a, &b));
    println!("first lines:");
    for line in a.lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
