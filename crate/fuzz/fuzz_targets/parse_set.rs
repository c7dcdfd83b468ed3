#![no_main]
use libfuzzer_sys::fuzz_target;
use setdiv::hermitian::Encoding;
use setdiv::sets::{set_from_json, set_to_json};

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(set) = set_from_json(s) {
        let doc = set_to_json(&set, Encoding::Hex).to_string();
        let again = set_from_json(&doc).expect("re-parse");
        assert_eq!(again.dims(), set.dims());
    }
});
