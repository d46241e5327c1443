#![no_main]

use clap::Parser;
use hers_cli::config::resolve;
use hers_cli::{Cli, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::from_json_str(s) {
        let cli = Cli::try_parse_from(["hers", "run"]).unwrap();
        if let Ok(resolved) = resolve(cli, Some(config)) {
            // The echoed configuration must resolve to the same run.
            let echo = serde_json::to_string(&resolved.echo()).unwrap();
            let cli = Cli::try_parse_from(["hers", "run"]).unwrap();
            let again = resolve(cli, Some(ExperimentConfig::from_json_str(&echo).unwrap())).unwrap();
            assert_eq!(again, resolved);
        }
    }
});
