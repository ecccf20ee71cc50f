use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args: Vec<_> = std::env::args_os().collect();
    // let clap print help/version itself
    if args.iter().skip(1).any(|a| a == "--help" || a == "-h" || a == "--version" || a == "-V" || a == "help") {
        if let Err(e) = cuspcli::Cli::try_parse_from(&args) {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    }
    match cuspcli::run_args(args) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for p in &outcome.artifacts {
                println!("wrote {}", p.display());
            }
            if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("error kind=check code=1 msg={f:?}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
