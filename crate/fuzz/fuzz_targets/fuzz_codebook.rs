#![no_main]

use libfuzzer_sys::fuzz_target;
use wiretap_jscc::quantizer::ScalarCodebook;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cb) = ScalarCodebook::from_json_str(text) {
        // Anything that parses must uphold the codebook invariants in use.
        for x in [f64::NEG_INFINITY, -1.0, 0.0, 1.0, f64::INFINITY, f64::NAN] {
            let (idx, level) = cb.quantize(x);
            assert!(idx < cb.num_levels());
            assert_eq!(level, cb.levels()[idx]);
        }
        let json = cb.to_json_string().unwrap();
        let back = ScalarCodebook::from_json_str(&json).unwrap();
        assert_eq!(cb, back);
    }
});
