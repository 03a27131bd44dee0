mod args;
mod commands;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(a) => commands::cmd_compute(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Calibrate(a) => commands::cmd_calibrate(a),
        Command::Perturb(a) => commands::cmd_perturb(a),
        Command::Generate(a) => commands::cmd_generate(a),
    };
    if let Err(e) = result {
        let payload = serde_json::json!({
            "error": { "kind": e.kind, "message": e.message }
        });
        eprintln!("{}", serde_json::to_string(&payload).unwrap());
        std::process::exit(1);
    }
}
