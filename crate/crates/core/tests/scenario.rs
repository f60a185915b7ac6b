use lumen::harness::{canonical_tour, run_scenario_virtual, transcript_diff, WorldConfig};

const GOLDEN: &str = include_str!("../data/canonical_tour.golden.jsonl");

#[test]
fn canonical_tour_matches_golden() {
    let t = run_scenario_virtual(canonical_tour(), &WorldConfig::default()).unwrap();
    for f in t.failures() {
        eprintln!("failed expectation: {f:?}");
    }
    let diff = transcript_diff(GOLDEN, &t.render());
    assert!(diff.is_equal(), "{diff}");
    assert!(t.passed());
    assert_eq!(t.render(), GOLDEN);
    assert_eq!(t.states_visited().len(), 15);
}
