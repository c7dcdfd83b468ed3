#![no_main]
use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated; only parsing runs, never a computation.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let args = std::iter::once("setdiv").chain(s.split('\0'));
    if let Ok(cli) = setdiv_cli::parse_args(args) {
        for t in &cli.tol {
            let _ = setdiv::tolerances::parse_override(t);
        }
    }
});
