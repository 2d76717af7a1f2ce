use clap::Parser;

use wignerkin::cli::{run, Cli, EXIT_OK};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::exit(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
