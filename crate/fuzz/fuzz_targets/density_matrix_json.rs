#![no_main]

use hers_core::DensityMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(state) = DensityMatrix::from_json_str(s) {
        let again = serde_json::to_string(&state).unwrap();
        let back = DensityMatrix::from_json_str(&again).expect("serialized state re-parses");
        assert_eq!(back.dim(), state.dim());
    }
});
