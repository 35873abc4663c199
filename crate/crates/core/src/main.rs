use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = ehrenfest::cli::dispatch(std::env::args_os());
    if !outcome.stderr.is_empty() {
        eprint!("{}", outcome.stderr);
    }
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(&outcome.stdout)
        .and_then(|_| stdout.flush())
        .is_err()
    {
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.code as u8)
}
