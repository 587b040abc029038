use std::process::ExitCode;

use clap::Parser;
use thermowatch_cli::args::{Cli, Command};
use thermowatch_cli::{detect, query, serve, simulate, CliResult, Exit};

fn run(cli: Cli) -> CliResult<Exit> {
    match cli.command {
        Command::Simulate(args) => {
            let s = simulate::simulate(&args)?;
            println!("{} frame(s) from {} camera(s); manifest {}", s.frames, s.cameras, s.manifest.display());
            Ok(Exit::Success)
        }
        Command::Detect(args) => {
            let s = detect::detect(&args)?;
            print!("{}", s.render());
            if s.spooled > 0 {
                eprintln!("thermowatch: {} table(s) spooled to {}", s.spooled, args.out.join(detect::SPOOL).display());
                Ok(Exit::PartialDelivery)
            } else {
                Ok(Exit::Success)
            }
        }
        Command::Serve(args) => serve::serve(&args).map(|()| Exit::Success),
        Command::Query(args) => {
            print!("{}", query::query(&args)?);
            Ok(Exit::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(exit) => ExitCode::from(exit.code()),
        Err(e) => {
            eprintln!("thermowatch: error: {e}");
            ExitCode::from(e.exit.code())
        }
    }
}
