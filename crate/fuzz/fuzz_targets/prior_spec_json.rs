#![no_main]

use hers_core::bayes::PriorSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(prior) = PriorSpec::from_json_str(s) {
        let again = serde_json::to_string(&prior).unwrap();
        assert_eq!(PriorSpec::from_json_str(&again).unwrap().dim(), prior.dim());
        if prior.dim() <= 8 {
            prior.mean().unwrap();
        }
    }
});
