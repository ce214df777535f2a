use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    match modalsyl::cli::run(std::env::args_os(), &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.kind());
            ExitCode::from(if matches!(e, modalsyl::Error::Usage(_)) { 2 } else { 1 })
        }
    }
}
