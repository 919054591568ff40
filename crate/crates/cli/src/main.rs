mod args;
mod commands;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> qvar::Result<()> {
    match &cli.command {
        Command::Vnorm(a) => commands::vnorm(a),
        Command::Onorm(a) => commands::onorm(a),
        Command::Jumps(a) => commands::jumps(a),
        Command::Opnorm(a) => commands::opnorm(a),
        Command::Analytic(a) => commands::analytic(a),
        Command::Ritt(a) => commands::ritt(a),
        Command::Nrange(a) => commands::nrange(a),
        Command::Semigroup(a) => commands::semigroup(a),
        Command::Subordinate(a) => commands::subordinate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::IdentityCheck(a) => commands::identity_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; --help and --version are not errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
