#![no_main]

use hers_core::Povm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(povm) = Povm::from_json_str(s) {
        let again = serde_json::to_string(&povm).unwrap();
        let back = Povm::from_json_str(&again).expect("serialized POVM re-parses");
        assert_eq!(back.len(), povm.len());
    }
});
