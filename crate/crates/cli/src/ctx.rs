use std::path::{Path, PathBuf};

use ferrolab_core::analysis::{line_plot_svg, PlotSeries};
use ferrolab_core::experiments::Dataset;
use ferrolab_core::ffmodel::DeviceParams;
use ferrolab_core::instruments::Testbench;

use crate::args::GlobalArgs;
use crate::error::{CliError, CliResult};

/// Resolved settings and output bookkeeping for one command.
pub struct Ctx {
    pub out: PathBuf,
    pub params: DeviceParams,
    pub seed: u64,
    pub plot: bool,
    pub config_paths: Vec<String>,
    pub outputs: Vec<String>,
    /// Simulated seconds summed over every bench used.
    pub sim_seconds: f64,
}

/// Flags over config file over built-in defaults.
pub fn resolve_params(g: &GlobalArgs) -> CliResult<(DeviceParams, Vec<String>)> {
    let mut text = String::new();
    let mut paths = Vec::new();
    if let Some(p) = &g.config {
        text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        paths.push(p.display().to_string());
        log::info!("device parameters from {}", p.display());
    } else {
        log::info!("device parameters: built-in defaults");
    }
    for kv in &g.set {
        if !kv.contains('=') {
            return Err(CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")));
        }
        log::info!("override {kv}");
        text.push('\n');
        text.push_str(kv);
    }
    let mut params = if text.trim().is_empty() {
        DeviceParams::default()
    } else {
        DeviceParams::from_kv_str(&text)?.0
    };
    if let Some(seed) = g.seed {
        log::info!("seed {seed} from --seed");
        params.seed = seed;
    }
    params.validate()?;
    Ok((params, paths))
}

impl Ctx {
    pub fn new(g: &GlobalArgs) -> CliResult<Self> {
        let (params, config_paths) = resolve_params(g)?;
        Ok(Self {
            out: g.out.clone(),
            seed: params.seed,
            params,
            plot: g.plot,
            config_paths,
            outputs: Vec::new(),
            sim_seconds: 0.0,
        })
    }

    pub fn bench_with(&self, params: DeviceParams) -> CliResult<Testbench> {
        Ok(Testbench::with_params(params)?)
    }

    pub fn bench(&self) -> CliResult<Testbench> {
        self.bench_with(self.params.clone())
    }

    pub fn account(&mut self, bench: &Testbench) {
        self.sim_seconds += bench.clock();
    }

    pub fn ensure_out(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
        self.ensure_out()?;
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(path)
    }

    /// Writes `name` only when plots were requested.
    pub fn plot(&mut self, name: &str, title: &str, x: &str, y: &str, series: &[PlotSeries]) -> CliResult<()> {
        if self.plot {
            let svg = line_plot_svg(title, x, y, series);
            self.write(name, svg)?;
        }
        Ok(())
    }
}

pub fn load_dataset(path: &Option<PathBuf>) -> CliResult<Dataset> {
    match path {
        None => Ok(Dataset::builtin()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(Dataset::parse(&text)?)
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
