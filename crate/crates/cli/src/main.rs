use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctxmeasure::config::RunConfig;
use ctxmeasure::manifest::load_manifest;
use ctxmeasure::report::{write_rows, MetaRow};
use ctxmeasure::runner::{output_target, run_camo_map, run_eval, run_meta};
use ctxmeasure::{selftest, CliError, Result};
use ctxmeasure_core::metastudy::Protocol;
use serde::Serialize;

/// Context-aware evaluation of foreground maps.
#[derive(Parser, Debug)]
#[command(name = "ctxmeasure", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score every foreground map of a manifest with the selected metrics.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Report file; stdout when omitted or `-`.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Export per-pixel camouflage degree maps.
    CamoMap {
        #[command(flatten)]
        run: RunArgs,
        /// Directory for the PNG maps.
        #[arg(long)]
        out_dir: PathBuf,
        /// Summary report; stdout when omitted or `-`.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a meta-measure protocol over the selected metrics.
    Meta {
        #[command(flatten)]
        run: RunArgs,
        /// mm1, mm2, mm3, mm4-erode or mm4-dilate.
        #[arg(long)]
        protocol: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the embedded oracle checks.
    Selftest,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Line-delimited JSON manifest.
    #[arg(long, short)]
    manifest: PathBuf,
    /// Flat key=value configuration file, applied before flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated metric names, or `all`.
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Context-measure kernel scale.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    beta_camo: Option<f64>,
    /// Context band width in pixels.
    #[arg(long)]
    band_width: Option<usize>,
    #[arg(long)]
    patch_size: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Approximate nearest-neighbour factor; 0 searches exhaustively.
    #[arg(long)]
    eps: Option<f64>,
    /// MM3 noise region: background or quiet-background.
    #[arg(long)]
    candidates: Option<String>,
    /// Any configuration key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags: [(&str, Option<String>); 14] = [
            ("metrics", self.metrics.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("format", self.format.clone()),
            ("threads", self.threads.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("beta", self.beta.map(|v| v.to_string())),
            ("beta_camo", self.beta_camo.map(|v| v.to_string())),
            ("band_width", self.band_width.map(|v| v.to_string())),
            ("patch_size", self.patch_size.map(|v| v.to_string())),
            ("overlap", self.overlap.map(|v| v.to_string())),
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("eps", self.eps.map(|v| v.to_string())),
            ("candidates", self.candidates.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for kv in &self.sets {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

fn emit<T: Serialize>(rows: &[T], cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
            write_rows(rows, cfg.format, BufWriter::new(file))
        }
        None => write_rows(rows, cfg.format, io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Eval { run, out } => {
            let cfg = run.config()?;
            let records = load_manifest(&run.manifest)?;
            let rows = run_eval(&records, &cfg)?;
            emit(&rows, &cfg, output_target(out.as_ref()))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                eprintln!("{failed} of {} scores failed", rows.len());
            }
            Ok(failed == 0)
        }
        Command::CamoMap { run, out_dir, out } => {
            let cfg = run.config()?;
            let records = load_manifest(&run.manifest)?;
            let rows = run_camo_map(&records, &cfg, &out_dir)?;
            emit(&rows, &cfg, output_target(out.as_ref()))?;
            Ok(rows.iter().all(|r| r.error.is_none()))
        }
        Command::Meta { run, protocol, out } => {
            let cfg = run.config()?;
            let protocol: Protocol = protocol.parse()?;
            let records = load_manifest(&run.manifest)?;
            let results = run_meta(&records, &cfg, protocol)?;
            let rows: Vec<MetaRow> = results.iter().map(MetaRow::from).collect();
            emit(&rows, &cfg, output_target(out.as_ref()))?;
            Ok(true)
        }
        Command::Selftest => {
            let mut ok = true;
            let mut stdout = io::stdout().lock();
            for s in selftest::run_all() {
                ok &= s.passed;
                let mark = if s.passed { "ok" } else { "FAILED" };
                writeln!(stdout, "{:<24} {mark:<6} {}", s.name, s.detail).map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })?;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
