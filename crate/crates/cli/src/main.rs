mod args;
mod commands;
mod ctx;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ferrolab_core::instruments::calibrate;
use ferrolab_core::rf::SweepConfig;

use args::{Cli, Command};
use commands::{analyze, experiment, prc, script};
use ctx::Ctx;
use error::{CliError, CliResult};
use manifest::RunManifest;

fn command_name(c: &Command) -> String {
    match c {
        Command::Check { .. } => "check".into(),
        Command::Run { .. } => "run".into(),
        Command::Experiment(e) => format!("experiment {}", e.name()),
        Command::Calibrate { .. } => "calibrate".into(),
        Command::PrcCollect(_) => "prc-collect".into(),
        Command::PrcTrain(_) => "prc-train".into(),
        Command::PrcServe(_) => "prc-serve".into(),
        Command::PrcStream(_) => "prc-stream".into(),
        Command::Analyze(_) => "analyze".into(),
        Command::Replay { .. } => "replay".into(),
    }
}

fn dispatch(ctx: &mut Ctx, cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Check { .. } | Command::Replay { .. } => unreachable!("handled before a context exists"),
        Command::Run { script: path, step_limit } => script::run_cmd(ctx, path, *step_limit),
        Command::Experiment(e) => experiment::run(ctx, e),
        Command::Calibrate { target } => {
            let fitted = calibrate(&ctx.params, &SweepConfig::default(), *target)?;
            ctx.write("params.txt", fitted.to_kv_string())?;
            println!("r_arm = {}", fitted.r_arm);
            Ok(())
        }
        Command::PrcCollect(a) => prc::collect(ctx, a),
        Command::PrcTrain(a) => prc::train_cmd(ctx, a, cli.global.seed),
        Command::PrcServe(a) => prc::serve_cmd(ctx, a),
        Command::PrcStream(a) => prc::stream_cmd(ctx, a),
        Command::Analyze(t) => analyze::run(ctx, t),
    }
}

/// Runs one command with its manifest written before and finalized after.
fn execute(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    match &cli.command {
        Command::Check { script: path } => return script::check_cmd(path),
        Command::Replay { manifest } => return replay(manifest, &cli),
        _ => {}
    }
    let mut ctx = Ctx::new(&cli.global)?;
    ctx.ensure_out()?;
    let mut m = RunManifest {
        tool: "ferrolab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command_name(&cli.command),
        args: argv,
        config_paths: ctx.config_paths.clone(),
        seed: ctx.seed,
        out_dir: ctx.out.display().to_string(),
        status: "running".into(),
        error: None,
        sim_time_start: 0.0,
        sim_time_end: None,
        outputs: Vec::new(),
        started_unix_ms: manifest::now_ms(),
        finished_unix_ms: None,
    };
    m.write(&ctx.out)?;
    let result = dispatch(&mut ctx, &cli);
    m.status = if result.is_ok() { "ok" } else { "failed" }.into();
    m.error = result.as_ref().err().map(|e| e.to_string());
    m.sim_time_end = Some(ctx.sim_seconds);
    m.outputs = ctx.outputs.clone();
    m.finished_unix_ms = Some(manifest::now_ms());
    m.write(&ctx.out)?;
    result
}

fn replay(path: &std::path::Path, cli: &Cli) -> CliResult<()> {
    let recorded = RunManifest::read(path)?;
    let mut argv = vec![recorded.tool.clone()];
    argv.extend(recorded.args_without_out());
    argv.push("--out".into());
    argv.push(cli.global.out.display().to_string());
    log::info!("replaying `{}` into {}", recorded.command, cli.global.out.display());
    let inner = Cli::try_parse_from(&argv).map_err(|e| CliError::Manifest(e.to_string()))?;
    if matches!(inner.command, Command::Replay { .. }) {
        return Err(CliError::Manifest("a manifest cannot replay another replay".into()));
    }
    execute(inner, argv[1..].to_vec())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli, argv[1..].to_vec()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("see `ferrolab --help`");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
