use std::net::ToSocketAddrs;
use std::time::{Duration, Instant};

use ferrolab_core::analysis::PlotSeries;
use ferrolab_core::experiments::DigitBitmap;
use ferrolab_core::instruments::log_to_csv;
use ferrolab_core::reservoir::{
    accuracy, collect_dataset, model_file, samples_from_csv, samples_to_csv, serve, session_labels, stream_session,
    train, CollectConfig, ServiceResult, TrainConfig, Variant, CLASSES,
};

use crate::args::{CollectArgs, ServeArgs, StreamArgs, StreamingArgs, TrainArgs};
use crate::ctx::{load_dataset, read_text, Ctx};
use crate::error::{CliError, CliResult};

fn streaming(args: &StreamingArgs) -> CliResult<(Vec<DigitBitmap>, CollectConfig)> {
    if args.digits == 0 || args.digits > CLASSES {
        return Err(CliError::Usage(format!("--digits must be 1..={CLASSES}")));
    }
    let ds = load_dataset(&args.dataset.dataset)?;
    let cfg = CollectConfig {
        pixel_dwell: args.pixel_dwell,
        reset_low: args.reset_low,
        reset_high: args.reset_high,
        reset_star: args.reset_star,
        reset_tol: args.reset_tol,
        ..CollectConfig::default()
    };
    Ok((ds.digits()[..args.digits].to_vec(), cfg))
}

pub fn collect(ctx: &mut Ctx, args: &CollectArgs) -> CliResult<()> {
    let (digits, cfg) = streaming(&args.streaming)?;
    let cfg = CollectConfig { reps: args.reps, ..cfg };
    let mut bench = ctx.bench()?;
    let col = collect_dataset(&mut bench, &digits, &cfg)?;
    ctx.account(&bench);
    ctx.write("samples.csv", samples_to_csv(&col.samples))?;
    ctx.write("log.csv", log_to_csv(bench.log()))?;
    let mut skipped = String::from("rep,digit\n");
    for (r, d) in &col.skipped {
        skipped.push_str(&format!("{r},{d}\n"));
    }
    ctx.write("skipped.csv", skipped)?;
    println!("{} samples, {} skipped", col.samples.len(), col.skipped.len());
    let series: Vec<PlotSeries> = (0..digits.len())
        .filter_map(|d| col.samples.iter().find(|s| s.label == d))
        .map(|s| PlotSeries::indexed(format!("digit {}", s.label), &s.features))
        .collect();
    ctx.plot("samples_first.svg", "First sample per digit", "pixel", "ZC22 (ohm)", &series)
}

pub fn train_cmd(ctx: &mut Ctx, args: &TrainArgs, seed: Option<u64>) -> CliResult<()> {
    let variant = Variant::parse(&args.variant)
        .ok_or_else(|| CliError::Usage(format!("unknown variant `{}`", args.variant)))?;
    let samples = samples_from_csv(&read_text(&args.samples)?)?;
    let cfg = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        batch_size: args.batch_size,
        variant,
        seed: seed.unwrap_or(TrainConfig::default().seed),
        ..TrainConfig::default()
    };
    let model = train(&samples, &cfg)?;
    let acc = accuracy(&model, &samples)?;
    ctx.write("model.bin", model_file::to_bytes(&model))?;
    let m = &model.metrics;
    ctx.write(
        "train.csv",
        format!(
            "variant,epochs,final_loss,rmse,accuracy,samples\n{},{},{},{},{},{}\n",
            variant.name(),
            m.epochs,
            m.final_loss,
            m.rmse,
            acc,
            samples.len()
        ),
    )?;
    println!("rmse {} accuracy {acc}", m.rmse);
    Ok(())
}

fn results_csv(results: &[ServiceResult]) -> String {
    let mut out = String::from("seq,label,predicted,score\n");
    for r in results {
        let label = r.label.map(|l| l.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{label},{},{}\n", r.seq, r.predicted, r.score));
    }
    out
}

pub fn serve_cmd(ctx: &mut Ctx, args: &ServeArgs) -> CliResult<()> {
    if !args.model.is_file() {
        return Err(CliError::ModelNotFound(args.model.clone()));
    }
    let model = model_file::load(&args.model)?;
    let handle = serve(model, (args.bind.as_str(), args.port))?;
    println!("listening on {}", handle.local_addr());
    use std::io::Write as _;
    let _ = std::io::stdout().flush();
    let start = Instant::now();
    let limit = args.duration.map(Duration::from_secs_f64);
    let mut written = usize::MAX;
    loop {
        std::thread::sleep(Duration::from_millis(100));
        let results = handle.results();
        if results.len() != written {
            written = results.len();
            ctx.write("serve_results.csv", results_csv(&results))?;
        }
        if limit.is_some_and(|l| start.elapsed() >= l) {
            break;
        }
    }
    let malformed = handle.malformed();
    let results = handle.shutdown();
    ctx.write("serve_results.csv", results_csv(&results))?;
    println!("{} requests answered, {malformed} malformed", results.len());
    Ok(())
}

pub fn stream_cmd(ctx: &mut Ctx, args: &StreamArgs) -> CliResult<()> {
    let (digits, cfg) = streaming(&args.streaming)?;
    let server = args
        .server
        .to_socket_addrs()
        .map_err(|e| CliError::Usage(format!("--server {}: {e}", args.server)))?
        .next()
        .ok_or_else(|| CliError::Usage(format!("--server {} resolves to nothing", args.server)))?;
    let labels: Vec<usize> = session_labels(args.count, args.labels_seed)
        .into_iter()
        .map(|l| l % digits.len())
        .collect();
    let mut bench = ctx.bench()?;
    let timeout = Duration::from_secs_f64(args.timeout);
    let report = stream_session(&mut bench, &digits, &labels, &cfg, server, timeout)?;
    ctx.account(&bench);
    let mut session = String::from("seq,label,predicted,score\n");
    for (i, (l, r)) in report.labels.iter().zip(&report.replies).enumerate() {
        match r {
            Some(r) => session.push_str(&format!("{i},{l},{},{}\n", r.digit, r.score)),
            None => session.push_str(&format!("{i},{l},,\n")),
        }
    }
    ctx.write("session.csv", session)?;
    let conf = report.confusion();
    let mut table = String::from("label");
    for p in 0..CLASSES {
        table.push_str(&format!(",pred_{p}"));
    }
    table.push('\n');
    for (l, row) in conf.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        table.push_str(&format!("{l},{}\n", cells.join(",")));
    }
    ctx.write("confusion.csv", table)?;
    println!(
        "{}/{} answered, accuracy {}",
        report.answered(),
        report.labels.len(),
        report.accuracy()
    );
    Ok(())
}
