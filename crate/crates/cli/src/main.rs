// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use magbell_cli::{run, workers_from_env, Cli};

fn main() {
    let cli = Cli::parse();
    let result = workers_from_env().and_then(|w| run(&cli, w, &mut std::io::stdout()));
    if let Err(e) = result {
        eprintln!("magbell: {e}");
        std::process::exit(e.exit_code());
    }
}
