#![no_main]

use clap::Parser;
use hers_cli::Cli;
use libfuzzer_sys::fuzz_target;

// NUL-separated argument list.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let args = std::iter::once("hers").chain(s.split('\0'));
    let _ = Cli::try_parse_from(args);
});
