use clap::Parser;
use selectnet_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = execute(cli) {
        eprintln!("selectnet: {failure}");
        std::process::exit(failure.exit_code());
    }
}
