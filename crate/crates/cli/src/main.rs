use clap::Parser;
use zladder_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("zladder: {e}");
        std::process::exit(e.exit_code());
    }
}
