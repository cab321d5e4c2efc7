use clap::Parser;
use distboost::args::{Cli, Command};
use distboost::commands;

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(args) => commands::fit::run(args),
        Command::Cv(args) => commands::cv::run(args),
        Command::Stabsel(args) => commands::stabsel::run(args),
        Command::Reproduce(args) => commands::reproduce::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
