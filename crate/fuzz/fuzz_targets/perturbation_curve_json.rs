#![no_main]

use hers_core::appendix::PerturbationCurve;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(curve) = PerturbationCurve::from_json_str(s) {
        if curve.dim() <= 8 {
            let _ = curve.g(0.01);
            let _ = curve.second_derivative_analytic();
        }
    }
});
