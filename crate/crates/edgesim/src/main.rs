//! Binary entry point: parse arguments, dispatch, and report any failure as
//! a one-line diagnostic with a nonzero exit code.

use clap::Parser;
use edgesim::cli;

fn main() {
    if let Err(e) = cli::dispatch(cli::Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
