#![no_main]

use cmcwave_core::harness::RunReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = RunReport::from_json(text) {
        let _ = report.failed_checks().count();
        let _ = report.to_json();
    }
});
