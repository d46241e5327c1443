#![no_main]

use hers_core::bayes::{log_likelihood, MeasurementRecord};
use hers_core::DensityMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(record) = MeasurementRecord::from_json_str(s) {
        let again = serde_json::to_string(&record).unwrap();
        assert_eq!(MeasurementRecord::from_json_str(&again).unwrap().len(), record.len());
        if record.dim() <= 8 {
            log_likelihood(&DensityMatrix::maximally_mixed(record.dim()), &record).unwrap();
        }
    }
});
