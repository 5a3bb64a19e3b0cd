use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use texture_ensemble::classifiers::Algorithm;
use texture_ensemble::pipeline::{
    extract_features, extract_features_cached, run_on_table, save_model, CacheStatus, DatasetManifest,
    ExtractOptions, PipelineConfig, PipelineError, SkippedImage,
};
use texture_ensemble::report::{self, TableFormat};
use texture_ensemble::synth::{self, BenchmarkSpec};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "texens", version, about = "GLCM/histogram texture classification with ensemble combiners")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract features for every image in a manifest into a CSV cache.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Skip unreadable images instead of failing.
        #[arg(long)]
        skip_bad: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Train all classifiers, run both ensembles and write reports.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the master seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Abstention threshold, e.g. `--tau rf=0.6`. Repeatable.
        #[arg(long, value_name = "CLASSIFIER=VALUE", value_parser = parse_tau)]
        tau: Vec<(Algorithm, f64)>,
        #[arg(long, default_value = "text", value_parser = ["text", "csv"])]
        format: String,
        /// Comma-separated ids to show in the summary (rf,svm,knn,nb,dt,ve,cc).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        skip_bad: bool,
        /// Reuse or write a feature cache at this path.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Write the synthetic 4-class texture benchmark and its config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = synth::DEFAULT_PER_CLASS)]
        per_class: usize,
        #[arg(long, default_value_t = synth::DEFAULT_SIZE)]
        size: usize,
        #[arg(long, default_value_t = synth::DEFAULT_SEED)]
        seed: u64,
    },
}

fn parse_tau(s: &str) -> Result<(Algorithm, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected CLASSIFIER=VALUE, got {s:?}"))?;
    let alg: Algorithm = name.trim().parse()?;
    let tau: f64 = value.trim().parse().map_err(|e| format!("bad tau {value:?}: {e}"))?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(format!("tau {tau} not in [0, 1]"));
    }
    Ok((alg, tau))
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) if !p.is_file() => Err(CliError::Usage(format!("config file {} not found", p.display()))),
        Some(p) => PipelineConfig::load(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
    }
}

fn load_manifest(path: &Path) -> Result<DatasetManifest, CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("manifest {} not found", path.display())));
    }
    Ok(DatasetManifest::load(path)?)
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(())
}

fn report_skipped(skipped: &[SkippedImage]) {
    for s in skipped {
        eprintln!("skipped {}: {}", s.path, s.reason);
    }
}

fn write_skip_report(dir: &Path, skipped: &[SkippedImage]) -> Result<(), CliError> {
    if skipped.is_empty() {
        return Ok(());
    }
    let mut text = String::from("path,reason\n");
    for s in skipped {
        text.push_str(&format!("\"{}\",\"{}\"\n", s.path.replace('"', "\"\""), s.reason.replace('"', "\"\"")));
    }
    fs::write(dir.join("skipped.csv"), text)?;
    Ok(())
}

fn cmd_extract(
    manifest: &Path,
    config: Option<&Path>,
    out: &Path,
    skip_bad: bool,
    threads: Option<usize>,
) -> Result<(), CliError> {
    set_threads(threads)?;
    let cfg = load_config(config)?;
    let manifest = load_manifest(manifest)?;
    let (table, _status, skipped) = extract_features_cached(&manifest, &cfg, ExtractOptions { skip_bad }, out)?;
    report_skipped(&skipped);
    log::info!("wrote {} rows x {} features to {}", table.len(), table.schema.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    manifest: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    threads: Option<usize>,
    taus: &[(Algorithm, f64)],
    format: &str,
    only: &[String],
    skip_bad: bool,
    cache: Option<&Path>,
) -> Result<String, CliError> {
    set_threads(threads)?;
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    for &(alg, tau) in taus {
        cfg.tau.set(alg, tau);
    }
    cfg.validate()?;
    let known = ["rf", "svm", "knn", "nb", "dt", "ve", "cc"];
    if let Some(bad) = only.iter().find(|o| !known.contains(&o.to_ascii_lowercase().as_str())) {
        return Err(CliError::Usage(format!("--only: unknown id {bad:?} (expected {})", known.join(","))));
    }
    let format: TableFormat = format.parse().map_err(CliError::Usage)?;
    let manifest = load_manifest(manifest)?;

    let opts = ExtractOptions { skip_bad };
    let (table, skipped) = match cache {
        Some(path) => {
            let (t, status, s) = extract_features_cached(&manifest, &cfg, opts, path)?;
            if status == CacheStatus::Hit {
                log::info!("feature cache hit: {}", path.display());
            }
            (t, s)
        }
        None => extract_features(&manifest, &cfg, opts)?,
    };
    report_skipped(&skipped);
    let output = run_on_table(&table, &cfg)?;

    fs::create_dir_all(out)?;
    write_skip_report(out, &skipped)?;
    fs::write(out.join("result.json"), output.result.to_json())?;
    for r in &output.result.results {
        report::write_confusion_svg(&r.confusion, &r.name, out.join(format!("confusion_{}.svg", r.id)))?;
    }
    let all: Vec<_> = output.result.results.iter().collect();
    report::write_class_bars_svg(&all, out.join("class_recall.svg"))?;
    let models_dir = out.join("models");
    fs::create_dir_all(&models_dir)?;
    for m in &output.models {
        save_model(m, models_dir.join(format!("{}.json", m.algorithm().id()))).map_err(PipelineError::from)?;
    }
    let rows = report::select(&output.result, only);
    Ok(report::summary_table(&rows, format))
}

fn cmd_synth(out: &Path, per_class: usize, size: usize, seed: u64) -> Result<(), CliError> {
    if per_class < 2 || size == 0 {
        return Err(CliError::Usage("--per-class must be >= 2 and --size >= 1".into()));
    }
    let manifest = synth::write_benchmark(out, BenchmarkSpec { per_class, size, seed })?;
    let mut cfg = synth::benchmark_config();
    cfg.resize = [size, size];
    fs::write(out.join("config.toml"), cfg.to_toml())?;
    log::info!("wrote {}", manifest.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Extract { manifest, config, out, skip_bad, threads } => {
            cmd_extract(&manifest, config.as_deref(), &out, skip_bad, threads)
        }
        Command::Run { manifest, config, seed, out, threads, tau, format, only, skip_bad, cache } => {
            let table = cmd_run(
                &manifest,
                config.as_deref(),
                seed,
                &out,
                threads,
                &tau,
                &format,
                &only,
                skip_bad,
                cache.as_deref(),
            )?;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(table.as_bytes())?;
            Ok(())
        }
        Command::Synth { out, per_class, size, seed } => cmd_synth(&out, per_class, size, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `texens --help` for usage");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
