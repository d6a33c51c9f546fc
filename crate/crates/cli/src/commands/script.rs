use std::path::Path;

use ferrolab_core::analysis::PlotSeries;
use ferrolab_core::instruments::log_to_csv;
use ferrolab_core::script::{check, check_source, parse, CsvSink, Interpreter};

use crate::ctx::{read_text, Ctx};
use crate::error::{CliError, CliResult};

/// Prints diagnostics; fails when the script has errors.
pub fn check_cmd(path: &Path) -> CliResult<()> {
    let src = read_text(path)?;
    let diags = check_source(&src);
    for d in diags.errors.iter().chain(&diags.warnings) {
        println!("{}:{d}", path.display());
    }
    println!("{} errors, {} warnings", diags.errors.len(), diags.warnings.len());
    if diags.passed() {
        Ok(())
    } else {
        Err(CliError::CheckFailed {
            path: path.to_path_buf(),
            count: diags.errors.len(),
        })
    }
}

pub fn run_cmd(ctx: &mut Ctx, path: &Path, step_limit: u64) -> CliResult<()> {
    let src = read_text(path)?;
    let program = parse(&src).map_err(|err| CliError::Script {
        path: path.to_path_buf(),
        err,
    })?;
    let diags = check(&program);
    for d in diags.errors.iter().chain(&diags.warnings) {
        eprintln!("{}:{d}", path.display());
    }
    if !diags.passed() {
        return Err(CliError::CheckFailed {
            path: path.to_path_buf(),
            count: diags.errors.len(),
        });
    }
    let mut bench = ctx.bench()?;
    let mut sink = CsvSink::default();
    let result = Interpreter::new(&mut bench).with_step_limit(step_limit).run(&program, &mut sink);
    // Whatever was recorded before a runtime error is still written.
    ctx.account(&bench);
    ctx.write("log.csv", log_to_csv(bench.log()))?;
    if sink.header.is_some() {
        ctx.write("script.csv", sink.to_csv())?;
    }
    for v in &sink.printed {
        println!("{v}");
    }
    let zc22: Vec<(f64, f64)> = bench.log().iter().map(|e| (e.t, e.zc.zc22)).collect();
    ctx.plot("log_zc22.svg", "Z22 over time", "t (s)", "ZC22 (ohm)", &[PlotSeries::new("ZC22", zc22)])?;
    result.map_err(|err| CliError::Script {
        path: path.to_path_buf(),
        err,
    })
}
