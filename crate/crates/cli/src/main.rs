use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aisclass::config::RunConfig;
use aisclass::ml::{parse_param, Params, Registry};
use aisclass::pipeline::{self, ParamSource, PipelineError};
use aisclass::synth::{self, SynthConfig};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

// Results go to stdout; a closed pipe (`| head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// AIS ship-type classification pipeline.
#[derive(Debug, Parser)]
#[command(name = "aisclass", version, about)]
struct Cli {
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    log_level: Option<String>,
    /// Share of vessels held out for testing.
    #[arg(long, global = true)]
    test_frac: Option<String>,
    #[arg(long, global = true)]
    folds: Option<String>,
    /// SMOTE placement: fold, paper or off.
    #[arg(long, global = true)]
    smote: Option<String>,
    #[arg(long, global = true)]
    smote_k: Option<String>,
    /// Override one configuration key, e.g. `--set smote=paper`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read, clean and static-fill raw daily AIS files.
    Clean {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Cut cleaned tracks into trips.
    Segment {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Compute per-trip features.
    Featurize {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        skips: Option<PathBuf>,
    },
    /// Split usable feature rows into train and test by vessel.
    Split {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-search one model family with stratified k-fold CV.
    Tune {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        data: DataArgs,
        /// Grid such as `C=0.1,1,10;kernel=rbf`; defaults to the family's grid.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a model on the training rows.
    Train {
        /// Model family; see `aisclass models`.
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        data: DataArgs,
        /// Hyperparameter `key=value`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE", conflicts_with = "from_cv")]
        params: Vec<String>,
        /// Use the best parameters of a `tune` result.
        #[arg(long)]
        from_cv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a trained model on the test rows.
    Evaluate {
        #[arg(long = "model-file")]
        model_file: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write Gini and permutation importance as CSV.
        #[arg(long)]
        importance: Option<PathBuf>,
    },
    /// Tabulate evaluation files side by side.
    Report {
        #[arg(required = true)]
        evals: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict ship types for vessels that never report one.
    Backfill {
        #[arg(long = "model-file")]
        model_file: Option<PathBuf>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        geojson: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Write trips as GeoJSON LineStrings.
    ExportGeojson {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add predicted types from this model.
        #[arg(long = "model-file")]
        model_file: Option<PathBuf>,
    },
    /// Generate synthetic raw AIS days.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 2)]
        days: u32,
        #[arg(long, default_value = "2025-01-23")]
        start: NaiveDate,
        /// Also write every vessel's true class.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        no_noise: bool,
    },
    /// List registered model families and their defaults.
    Models,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    split: Option<PathBuf>,
}

impl DataArgs {
    fn resolve(&self, cfg: &RunConfig) -> (PathBuf, PathBuf) {
        (
            or_default(&self.features, cfg, "features"),
            or_default(&self.split, cfg, "split"),
        )
    }
}

fn or_default(p: &Option<PathBuf>, cfg: &RunConfig, name: &str) -> PathBuf {
    p.clone().unwrap_or_else(|| cfg.path(name))
}

fn build_config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| aisclass::config::ConfigError::Syntax { line: 0, text: o.clone() })?;
        cfg.set(k, v)?;
    }
    let flags = [
        ("test_frac", &cli.test_frac),
        ("folds", &cli.folds),
        ("smote", &cli.smote),
        ("smote_k", &cli.smote_k),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.set("threads", &t.to_string())?;
    }
    if let Some(l) = &cli.log_level {
        cfg.set("log_level", l)?;
    }
    Ok(cfg)
}

fn parse_params(items: &[String]) -> Result<Params, PipelineError> {
    items
        .iter()
        .flat_map(|s| s.split(';'))
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_param(s).map_err(PipelineError::from))
        .collect()
}

fn run(cli: &Cli, cfg: &mut RunConfig) -> Result<(), PipelineError> {
    let registry = Registry::builtin();
    match &cli.command {
        Command::Clean { inputs, out, report } => {
            let out = or_default(out, cfg, "cleaned");
            let report = or_default(report, cfg, "clean_report");
            let r = pipeline::cmd_clean(inputs, &out, Some(&report), cfg)?;
            say!("{} rows read, {} kept -> {}", r.rows_in, r.rows_out, out.display());
        }
        Command::Segment { input, out, summary } => {
            let input = or_default(input, cfg, "cleaned");
            let out = or_default(out, cfg, "trajectories");
            let s = pipeline::cmd_segment(&input, &out, summary.as_deref(), cfg)?;
            say!("{} trips from {} tracks -> {}", s.trips, s.tracks, out.display());
        }
        Command::Featurize { input, out, skips } => {
            let input = or_default(input, cfg, "trajectories");
            let out = or_default(out, cfg, "features");
            let s = pipeline::cmd_featurize(&input, &out, skips.as_deref(), cfg)?;
            say!("{} feature rows from {} trips -> {}", s.rows, s.trips, out.display());
        }
        Command::Split { features, out } => {
            let features = or_default(features, cfg, "features");
            let out = or_default(out, cfg, "split");
            let d = pipeline::cmd_split(&features, &out, cfg)?;
            say!(
                "{} train / {} test rows -> {}",
                d.plan.train_rows.len(),
                d.plan.test_rows.len(),
                out.display()
            );
        }
        Command::Tune { model, data, grid, out } => {
            if let Some(g) = grid {
                cfg.set(&format!("grid.{model}"), g)?;
            }
            let (features, split) = data.resolve(cfg);
            let out = or_default(out, cfg, "cv");
            let r = pipeline::cmd_tune(&features, &split, model, &out, cfg, &registry)?;
            for i in r.ranking().into_iter().take(5) {
                let e = &r.entries[i];
                say!("{:.4} ± {:.4}  {}", e.mean, e.std, pipeline::format_params(&e.params));
            }
        }
        Command::Train {
            model,
            data,
            params,
            from_cv,
            out,
        } => {
            let source = match from_cv {
                Some(p) => ParamSource::Cv(p.clone()),
                None if params.is_empty() => ParamSource::Defaults,
                None => ParamSource::Given(parse_params(params)?),
            };
            let (features, split) = data.resolve(cfg);
            let out = or_default(out, cfg, "model");
            let m = pipeline::cmd_train(&features, &split, model.as_deref(), &source, &out, cfg, &registry)?;
            say!("{} model -> {}", m.meta.family, out.display());
        }
        Command::Evaluate {
            model_file,
            data,
            out,
            importance,
        } => {
            let model = or_default(model_file, cfg, "model");
            let (features, split) = data.resolve(cfg);
            let out = or_default(out, cfg, "eval");
            let d = pipeline::cmd_evaluate(&model, &features, &split, &out, importance.as_deref(), cfg, &registry)?;
            let r = &d.report;
            say!(
                "{}: accuracy {:.4}, precision {:.4}, recall {:.4}, F1 {:.4}",
                d.model_name(),
                r.accuracy,
                r.macro_precision,
                r.macro_recall,
                r.macro_f1
            );
        }
        Command::Report { evals, out } => {
            let rows = pipeline::cmd_report(evals, out)?;
            for r in rows {
                say!(
                    "{:<14} {:<8} {:<4} {:>7} {:>7} {:>7} {:>7}",
                    r.model, r.tuning, r.smote, r.accuracy, r.precision, r.recall, r.f1
                );
            }
        }
        Command::Backfill {
            model_file,
            inputs,
            out,
            geojson,
            summary,
        } => {
            let model = or_default(model_file, cfg, "model");
            let s = pipeline::cmd_backfill(&model, inputs, out, geojson, summary.as_deref(), cfg, &registry)?;
            for (mmsi, t) in &s.predictions {
                say!("{mmsi}\t{t}");
            }
        }
        Command::ExportGeojson { input, out, model_file } => {
            let input = or_default(input, cfg, "trajectories");
            let out = or_default(out, cfg, "geojson");
            let n = pipeline::cmd_export_geojson(&input, &out, model_file.as_deref(), cfg, &registry)?;
            say!("{n} trips -> {}", out.display());
        }
        Command::Synth {
            out_dir,
            days,
            start,
            truth,
            no_noise,
        } => {
            let scfg = SynthConfig {
                seed: cfg.seed,
                start: *start,
                days: *days,
                noise: !no_noise,
                ..SynthConfig::default()
            };
            let data = synth::generate(&scfg);
            let io = |e: std::io::Error, p: &Path| PipelineError::Input(format!("{}: {e}", p.display()));
            let files = synth::write_days(&data, &scfg, out_dir).map_err(|e| io(e, out_dir))?;
            if let Some(t) = truth {
                synth::write_truth(&data, t).map_err(|e| io(e, t))?;
            }
            for f in files {
                say!("{}", f.display());
            }
        }
        Command::Models => {
            for name in registry.names() {
                let fam = registry.get(name)?;
                say!("{name}\t{}", pipeline::format_params(&fam.default_params()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cfg.log_level)
        .format_timestamp(None)
        .init();
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match run(&cli, &mut cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
