use clap::Parser;
use fibspec::Cli;

fn main() {
    // clap exits with status 2 on malformed flags
    let cli = Cli::parse();
    std::process::exit(fibspec::run::run(&cli));
}
