//! Building a Mamdani system by hand and inspecting the aggregated output set.
//!
//! ```text
//! cargo run --example custom_fuzzy_system
//! ```

use lumen::fuzzy::{
    defuzzify_centroid, infer_mamdani, FuzzyRule, FuzzySystem, GaussianTerm, Grid, Label, LinguisticVariable,
};

fn main() -> Result<(), lumen::fuzzy::FuzzyError> {
    use Label::*;
    // Distance to a visitor in metres -> walking speed in m/s.
    let distance = LinguisticVariable::new(
        "distance",
        [0.0, 4.0],
        vec![
            GaussianTerm::new(Negative, 0.0, 0.6)?,
            GaussianTerm::new(Zero, 1.0, 0.4)?,
            GaussianTerm::new(Positive, 4.0, 1.2)?,
        ],
    )?;
    let speed = LinguisticVariable::new(
        "speed",
        [-0.2, 0.2],
        vec![
            GaussianTerm::new(Negative, -0.1, 0.04)?,
            GaussianTerm::new(Zero, 0.0, 0.04)?,
            GaussianTerm::new(Positive, 0.1, 0.04)?,
        ],
    )?;
    let rules = vec![
        FuzzyRule::single("distance", Negative, "speed", Negative),
        FuzzyRule::single("distance", Zero, "speed", Zero),
        FuzzyRule::single("distance", Positive, "speed", Positive),
    ];
    let system = FuzzySystem::new(vec![distance, speed], rules)?;
    let grid = Grid::over([-0.2, 0.2], 0.001)?;

    for d in [0.2, 0.6, 1.0, 1.5, 2.5, 3.5] {
        let set = infer_mamdani(&system, &[("distance", d)], "speed", &grid)?;
        let bars: String = set
            .mu
            .iter()
            .step_by(20)
            .map(|m| match (m * 8.0) as u32 {
                0 => ' ',
                1..=2 => '.',
                3..=5 => 'o',
                _ => '#',
            })
            .collect();
        println!("d={d:3.1} m  |{bars}|  speed {:+.3} m/s", defuzzify_centroid(&set));
    }

    println!("\nas JSON:\n{}", serde_json::to_string_pretty(&system).expect("serializable"));
    Ok(())
}
