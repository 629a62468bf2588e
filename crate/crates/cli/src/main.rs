use clap::Parser;
use levy_fpe_cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
