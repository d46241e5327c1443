#![no_main]

use hers_cli::state::parse_preset;
use libfuzzer_sys::fuzz_target;

// First byte picks the dimension (0 means unspecified), the rest is the name.
fuzz_target!(|data: &[u8]| {
    let Some((&d, name)) = data.split_first() else { return };
    let Ok(name) = std::str::from_utf8(name) else { return };
    let dim = (d != 0).then_some(d as usize);
    if let Some(Ok(state)) = parse_preset(name, dim) {
        assert!(dim.is_none_or(|d| d == state.dim()));
    }
});
