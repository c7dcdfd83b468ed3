#![no_main]
use libfuzzer_sys::fuzz_target;
use setdiv::sets::family_from_json;

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = family_from_json(s);
    }
});
