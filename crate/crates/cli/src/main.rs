use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = setdiv_cli::run(std::env::args_os());
    if let Some(msg) = &outcome.diagnostic {
        eprintln!("{}", msg.trim_end());
    }
    if let Some(doc) = &outcome.document {
        if let Err(e) = setdiv_cli::emit(outcome.out.as_deref(), doc) {
            eprintln!("{{\"error\": \"writing output: {e}\"}}");
            return ExitCode::from(setdiv_cli::EXIT_IO as u8);
        }
    }
    ExitCode::from(outcome.code as u8)
}
