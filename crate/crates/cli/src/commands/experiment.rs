use ferrolab_core::analysis::{hysteresis_metrics, lyapunov_curve, LoopMetrics, LyapunovConfig, PlotSeries};
use ferrolab_core::experiments::{
    chaos_probe, classify_inmemory, differentiation_run, dynamics_reduction_run, hysteresis_sweep, memory_store,
    progressive_adaptation, pulse_memory, HysteresisConfig, MemoryConfig, MemoryRun, PulseConfig,
};
use ferrolab_core::instruments::log_to_csv;

use crate::args::Experiment;
use crate::ctx::{load_dataset, Ctx};
use crate::error::{CliError, CliResult};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn loops_csv(m11: &[LoopMetrics], m22: &[LoopMetrics]) -> String {
    let mut out = String::from("loop,area_zc11,pinch_zc11,crossings_zc11,range_zc11,area_zc22,range_zc22\n");
    for (i, (a, b)) in m11.iter().zip(m22).enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            a.area,
            opt(a.pinch_voltage()),
            a.crossings.len(),
            a.range,
            b.area,
            b.range
        ));
    }
    out
}

fn memory_plot(ctx: &mut Ctx, name: &str, run: &MemoryRun) -> CliResult<()> {
    let pts = run.levels.iter().map(|l| (l.level, l.delta)).collect();
    ctx.plot(name, "Stored variation per level", "level", "delta ZC22 (ohm)", &[PlotSeries::new("delta", pts)])
}

pub fn run(ctx: &mut Ctx, exp: &Experiment) -> CliResult<()> {
    let name = exp.name();
    let summary = format!("{name}_summary.csv");
    match exp {
        Experiment::Hysteresis {
            v_min,
            v_max,
            step,
            dwell,
            loops,
            chaos_off,
        } => {
            let cfg = HysteresisConfig {
                v_min: *v_min,
                v_max: *v_max,
                step: *step,
                dwell: *dwell,
                loops: *loops,
            };
            let params = if *chaos_off { ctx.params.without_chaos() } else { ctx.params.clone() };
            let mut bench = ctx.bench_with(params)?;
            let run = hysteresis_sweep(&mut bench, &cfg)?;
            ctx.account(&bench);
            ctx.write("log.csv", log_to_csv(&run.entries))?;
            let per = run.samples_per_loop();
            let e = &run.entries[1..];
            let v: Vec<f64> = e.iter().map(|x| x.bias).collect();
            let z11: Vec<f64> = e.iter().map(|x| x.zc.zc11).collect();
            let z22: Vec<f64> = e.iter().map(|x| x.zc.zc22).collect();
            if *loops > 0 {
                let m11 = hysteresis_metrics(&v, &z11, per)?;
                let m22 = hysteresis_metrics(&v, &z22, per)?;
                ctx.write(&summary, loops_csv(&m11, &m22))?;
                let loop_pts = |i: usize| -> Vec<(f64, f64)> {
                    run.loop_entries(i).iter().map(|x| (x.bias, x.zc.zc11)).collect()
                };
                let series = [
                    PlotSeries::new("first loop", loop_pts(0)),
                    PlotSeries::new("last loop", loop_pts(loops - 1)),
                ];
                ctx.plot("hysteresis_zc11.svg", "ZC11 hysteresis", "bias (V)", "ZC11 (ohm)", &series)?;
            }
        }
        Experiment::Memory {
            setpoint,
            tol,
            levels,
            t_step,
            v_write,
            settle,
            hold,
            interval,
        } => {
            let cfg = MemoryConfig {
                setpoint: *setpoint,
                tol: *tol,
                t_p: (1..=*levels).map(|i| t_step * i as f64).collect(),
                v_write: *v_write,
                settle: *settle,
                hold: *hold,
                hold_interval: *interval,
            };
            let mut bench = ctx.bench()?;
            let run = memory_store(&mut bench, &cfg)?;
            ctx.account(&bench);
            ctx.write("log.csv", log_to_csv(bench.log()))?;
            ctx.write(&summary, run.summary_csv())?;
            memory_plot(ctx, "memory_delta.svg", &run)?;
        }
        Experiment::Pulse {
            setpoint,
            tol,
            levels,
            count_step,
            v_high,
            t_high,
            t_low,
            settle,
            hold,
            interval,
        } => {
            let cfg = PulseConfig {
                setpoint: *setpoint,
                tol: *tol,
                counts: (1..=*levels).map(|i| count_step * i).collect(),
                v_high: *v_high,
                t_high: *t_high,
                t_low: *t_low,
                settle: *settle,
                hold: *hold,
                hold_interval: *interval,
            };
            let mut bench = ctx.bench()?;
            let run = pulse_memory(&mut bench, &cfg)?;
            ctx.account(&bench);
            ctx.write("log.csv", log_to_csv(bench.log()))?;
            ctx.write(&summary, run.summary_csv())?;
            let series: Vec<PlotSeries> = run
                .levels
                .iter()
                .map(|l| PlotSeries::indexed(format!("{} pulses", l.level), &l.hold))
                .collect();
            ctx.plot("pulse_hold.svg", "Hold phase per pulse count", "reading", "ZC22 (ohm)", &series)?;
        }
        Experiment::Differentiate { weight, dataset } => {
            let ds = load_dataset(&dataset.dataset)?;
            let mut bench = ctx.bench()?;
            let run = differentiation_run(&mut bench, ds.digits(), *weight)?;
            ctx.account(&bench);
            ctx.write("log.csv", log_to_csv(bench.log()))?;
            ctx.write(&summary, run.summary_csv())?;
            println!("min gap {} ohm, resolution {} ohm, distinct {}", run.min_gap(), run.eps_d, run.all_distinct());
            ctx.plot(
                "differentiate_finals.svg",
                "Final ZC22 per digit",
                "digit",
                "ZC22 (ohm)",
                &[PlotSeries::indexed("final", &run.finals)],
            )?;
        }
        Experiment::Classify {
            digit,
            setpoint,
            dataset,
        } => {
            let ds = load_dataset(&dataset.dataset)?;
            let n = ds.digits().len();
            let weighted: Vec<usize> = match digit {
                Some(d) if *d >= n => return Err(CliError::Usage(format!("--digit must be below {n}"))),
                Some(d) => vec![*d],
                None => (0..n).collect(),
            };
            let mut header = String::from("weighted");
            for d in 0..n {
                header.push_str(&format!(",final_{d}"));
            }
            header.push_str(",detected\n");
            let mut table = header;
            let mut logs = String::new();
            let mut series = Vec::new();
            for &w in &weighted {
                // Every weighting starts from an identical fresh device.
                let mut bench = ctx.bench()?;
                let c = classify_inmemory(&mut bench, ds.digits(), w, *setpoint)?;
                ctx.account(&bench);
                let cells: Vec<String> = c.finals.iter().map(|f| f.to_string()).collect();
                table.push_str(&format!("{w},{},{}\n", cells.join(","), c.detected));
                let csv = log_to_csv(bench.log());
                if logs.is_empty() {
                    logs = csv;
                } else {
                    logs.extend(csv.lines().skip(1).map(|l| format!("{l}\n")));
                }
                println!("weighted {w}: detected {}", c.detected);
                series.push(PlotSeries::indexed(format!("weighted {w}"), &c.finals));
            }
            ctx.write("log.csv", logs)?;
            ctx.write(&summary, table)?;
            ctx.plot("classify_finals.svg", "Final ZC22 per streamed digit", "digit", "ZC22 (ohm)", &series)?;
        }
        Experiment::Progressive {
            digit,
            k,
            reps,
            setpoint,
            dataset,
        } => {
            let ds = load_dataset(&dataset.dataset)?;
            let mut bench = ctx.bench()?;
            let run = progressive_adaptation(&mut bench, ds.digits(), *digit, *k, *reps, *setpoint)?;
            ctx.account(&bench);
            ctx.write("log.csv", log_to_csv(bench.log()))?;
            ctx.write(&summary, run.summary_csv())?;
            let series: Vec<PlotSeries> = run
                .zc22
                .iter()
                .enumerate()
                .map(|(d, s)| PlotSeries::indexed(format!("digit {d}"), s))
                .collect();
            ctx.plot("progressive_zc22.svg", "ZC22 per repetition", "repetition", "ZC22 (ohm)", &series)?;
        }
        Experiment::Dynamics {
            digit,
            iterations,
            restore,
            dataset,
        } => {
            let ds = load_dataset(&dataset.dataset)?;
            let mut bench = ctx.bench()?;
            let run = dynamics_reduction_run(&mut bench, ds.digits(), *digit, *iterations, *restore)?;
            ctx.account(&bench);
            ctx.write("log.csv", log_to_csv(bench.log()))?;
            ctx.write(&summary, run.summary_csv())?;
            let rg = run.ranges();
            println!(
                "accuracy {}, final range {:.1}% of initial, restored {:.1}%",
                run.accuracy,
                100.0 * rg[rg.len() - 1] / rg[0],
                100.0 * run.restored.dynamic_range() / rg[0]
            );
            ctx.plot(
                "dynamics_range.svg",
                "Dynamic range per iteration",
                "iteration",
                "range (ohm)",
                &[PlotSeries::indexed("range", &rg)],
            )?;
        }
        Experiment::Chaos {
            low,
            high,
            pause,
            cycles,
        } => {
            let mut bench = ctx.bench()?;
            let run = chaos_probe(&mut bench, *low, *high, *pause, *cycles)?;
            ctx.account(&bench);
            ctx.write("log.csv", log_to_csv(&run.entries))?;
            ctx.write(&summary, run.summary_csv())?;
            let z = run.zc22();
            match lyapunov_curve(&z, &LyapunovConfig::default()) {
                Ok(c) => {
                    let (lo, hi) = c.slope_ci();
                    println!("lyapunov slope {} (95% CI {lo} .. {hi})", c.slope);
                    ctx.write("lyapunov.csv", c.to_csv())?;
                }
                Err(e) => log::warn!("no divergence curve: {e}"),
            }
            ctx.plot("chaos_zc22.svg", "ZC22 during the probe", "reading", "ZC22 (ohm)", &[PlotSeries::indexed("ZC22", &z)])?;
        }
    }
    Ok(())
}
