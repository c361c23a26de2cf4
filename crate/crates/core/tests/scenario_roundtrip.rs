mod common;

use cetana_core::runner::{run_text, RunOptions};
use cetana_core::scenario::Scenario;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn serialize_then_parse_is_identity(seed in any::<u64>(), index in 0usize..1000) {
        let s = common::random_scenario(&mut common::rng(seed), index);
        let text = s.to_text();
        let back = Scenario::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_text(), text);
    }
}

#[test]
fn generated_scenarios_are_runnable() {
    for seed in 0..40 {
        let s = common::random_scenario(&mut common::rng(seed), seed as usize);
        let text = s.to_text();
        if let Err(e) = run_text(&text, &RunOptions::default()) {
            panic!("seed {seed}: {e}\n{text}");
        }
    }
}

#[test]
fn comments_and_blank_lines_do_not_matter() {
    let s = common::random_scenario(&mut common::rng(7), 7);
    let noisy: String = s
        .to_text()
        .lines()
        .map(|l| format!("  {l}   # note\n\n"))
        .collect();
    assert_eq!(Scenario::parse(&noisy).unwrap(), s);
}
