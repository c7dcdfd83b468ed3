#![no_main]
use libfuzzer_sys::fuzz_target;
use setdiv::hermitian::{operator_from_json, operator_to_json, Encoding};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(h) = operator_from_json(s) {
        // accepted documents must survive an exact round trip
        let again = operator_from_json(&operator_to_json(&h, Encoding::Hex).to_string()).expect("re-parse");
        assert_eq!(again.matrix(), h.matrix());
    }
});
