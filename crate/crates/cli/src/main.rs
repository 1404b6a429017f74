use clap::Parser;
use slapmap_cli::{run, Cli};
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; 2 is reserved for mismatches
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("slapmap: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(dir) = &cli.run.out {
        if let Err(e) = output.write_to(dir, cli.run.format) {
            eprintln!("slapmap: cannot write {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(output.render(cli.run.format).as_bytes()).is_err() {
        return ExitCode::from(1);
    }
    if output.matched {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
