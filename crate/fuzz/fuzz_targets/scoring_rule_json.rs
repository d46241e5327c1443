#![no_main]

use hers_core::scoring::value_function;
use hers_core::{OutcomeDistribution, ScoringRule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rule) = ScoringRule::from_json_str(s) {
        let again = serde_json::to_string(&rule).unwrap();
        assert_eq!(ScoringRule::from_json_str(&again).unwrap(), rule);
        let v = value_function(&rule, &OutcomeDistribution::uniform(3)).unwrap();
        assert!(v.is_finite());
    }
});
