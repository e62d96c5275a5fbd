#![no_main]

use libfuzzer_sys::fuzz_target;
use wiretap_jscc::experiment::ExperimentSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ExperimentSpec::from_json_str(text) {
        // Parsed specs must survive validation and re-serialization without
        // panicking, whatever the verdict.
        let _ = spec.validate();
        let _ = spec.to_json_string();
        let _ = spec.effective_budgets();
        let _ = spec.snr_grid_db.points_db();
    }
});
