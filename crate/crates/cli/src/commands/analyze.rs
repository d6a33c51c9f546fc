use std::path::Path;

use ferrolab_core::analysis::{hysteresis_metrics, lyapunov_curve, summary_stats, LyapunovConfig, PlotSeries};
use ferrolab_core::instruments::{log_from_csv, LogEntry};

use crate::args::{Analyze, LogArgs};
use crate::ctx::{read_text, Ctx};
use crate::error::{CliError, CliResult};

fn column(entries: &[LogEntry], name: &str) -> CliResult<Vec<f64>> {
    let f: fn(&LogEntry) -> f64 = match name {
        "t_s" => |e| e.t,
        "bias_v" => |e| e.bias,
        "zc11" => |e| e.zc.zc11,
        "zc12" => |e| e.zc.zc12,
        "zc21" => |e| e.zc.zc21,
        "zc22" => |e| e.zc.zc22,
        other => return Err(CliError::Usage(format!("unknown column `{other}`"))),
    };
    Ok(entries.iter().map(f).collect())
}

fn load(input: &LogArgs, skip: usize) -> CliResult<Vec<LogEntry>> {
    let entries = log_from_csv(&read_text(Path::new(&input.log))?)?;
    if skip > entries.len() {
        return Err(CliError::Usage(format!("--skip {skip} exceeds the {} rows", entries.len())));
    }
    Ok(entries[skip..].to_vec())
}

pub fn run(ctx: &mut Ctx, tool: &Analyze) -> CliResult<()> {
    match tool {
        Analyze::Lyapunov {
            input,
            skip,
            eps,
            k_max,
            fit_lo,
            fit_hi,
        } => {
            let series = column(&load(input, *skip)?, &input.column)?;
            let fit = match (fit_lo, fit_hi) {
                (None, None) => None,
                (lo, hi) => Some((lo.unwrap_or(1), hi.unwrap_or((k_max / 4).max(1)))),
            };
            let cfg = LyapunovConfig {
                eps: *eps,
                k_max: *k_max,
                min_pair_gap: None,
                fit,
            };
            let c = lyapunov_curve(&series, &cfg)?;
            let (lo, hi) = c.slope_ci();
            ctx.write("lyapunov.csv", c.to_csv())?;
            ctx.write(
                "lyapunov_fit.csv",
                format!(
                    "slope,intercept,slope_se,ci_low,ci_high,fit_lo,fit_hi\n{},{},{},{lo},{hi},{},{}\n",
                    c.slope, c.intercept, c.slope_se, c.fit_range.0, c.fit_range.1
                ),
            )?;
            println!("slope {} (95% CI {lo} .. {hi})", c.slope);
            let pts = c.k.iter().zip(&c.mean_ln_d).map(|(k, d)| (*k as f64, *d)).collect();
            ctx.plot("lyapunov.svg", "Mean log divergence", "k", "<ln d(k)>", &[PlotSeries::new("ln d", pts)])?;
        }
        Analyze::Hysteresis { input, skip, per_loop } => {
            let entries = load(input, *skip)?;
            let v = column(&entries, "bias_v")?;
            let z = column(&entries, &input.column)?;
            let m = hysteresis_metrics(&v, &z, *per_loop)?;
            let mut out = String::from("loop,area,pinch,crossings,range\n");
            for (i, l) in m.iter().enumerate() {
                let pinch = l.pinch_voltage().map(|p| p.to_string()).unwrap_or_default();
                out.push_str(&format!("{i},{},{pinch},{},{}\n", l.area, l.crossings.len(), l.range));
            }
            ctx.write("hysteresis_loops.csv", out)?;
            let areas: Vec<f64> = m.iter().map(|l| l.area.abs()).collect();
            ctx.plot("hysteresis_area.svg", "Loop area", "loop", "|area|", &[PlotSeries::indexed("area", &areas)])?;
        }
        Analyze::Stats { input, skip, bins } => {
            let series = column(&load(input, *skip)?, &input.column)?;
            let s = summary_stats(&series, *bins)?;
            ctx.write(
                "stats.csv",
                format!("n,mean,std,std_defined\n{},{},{},{}\n", s.n, s.mean, s.std, s.std_defined),
            )?;
            let h = &s.histogram;
            let width = (h.hi - h.lo) / h.counts.len() as f64;
            let mut out = String::from("bin_low,bin_high,count\n");
            for (i, c) in h.counts.iter().enumerate() {
                let lo = h.lo + i as f64 * width;
                out.push_str(&format!("{lo},{},{c}\n", lo + width));
            }
            ctx.write("histogram.csv", out)?;
            println!("n {} mean {} std {}", s.n, s.mean, s.std);
            let pts = h.counts.iter().enumerate().map(|(i, c)| (h.lo + (i as f64 + 0.5) * width, *c as f64)).collect();
            ctx.plot("histogram.svg", "Histogram", &input.column, "count", &[PlotSeries::new("count", pts)])?;
        }
    }
    Ok(())
}
