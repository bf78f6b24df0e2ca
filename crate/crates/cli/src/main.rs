// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod run;
mod table;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format, OutputArgs};
use run::Failure;

fn output_args(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::Thermo(a) => &a.out,
        Command::Coeff(a) => &a.out,
        Command::Expand(a) => &a.out,
        Command::Compare(a) => &a.out,
        Command::Verify(a) => &a.out,
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SPECACT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config {
            flag: "SPECACT_THREADS",
            msg: format!("expected a positive integer, got '{raw}'"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Output(format!("thread pool: {e}")))
}

fn main_inner(cli: &Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let outcome = run::run(&cli.command)?;
    let out = output_args(&cli.command);
    let text = match out.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    match &out.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Output(format!("writing {}: {e}", path.display())))?
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Output(format!("writing output: {e}")))?;
        }
    }
    Ok(outcome.success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
