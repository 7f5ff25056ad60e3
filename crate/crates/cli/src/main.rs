mod args;
mod commands;

use std::process::ExitCode;

use args::{Cli, Command};
use clap::Parser;

fn run(cli: &Cli) -> anyhow::Result<()> {
    let json = cli.json;
    match &cli.command {
        Command::Reconstruct(a) => commands::reconstruct(a, json),
        Command::MaskBg(a) => commands::mask_bg(a, json),
        Command::Render(a) => commands::render(a, json),
        Command::Translate(a) => commands::translate_cmd(a, json),
        Command::Register(a) => commands::register(a, json),
        Command::Stitch(a) => commands::stitch(a, json),
        Command::Probe(a) => commands::probe(a, json),
        Command::Serve(a) => commands::serve(a),
        Command::Project(c) => commands::project(c, json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
