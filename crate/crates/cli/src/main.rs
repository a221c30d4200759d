use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use distweight::data::{load_csv, synthesize, Column, SynthSpec};
use distweight::distance::{pairwise_distances, DistanceMetricKind};
use distweight::harness::{emit_report, run_experiment, ExperimentConfig, ReportFormat};
use distweight::matrix::FeatureMatrix;
use distweight::metrics::{evaluate, DEFAULT_THRESHOLD};
use distweight::weighting::{
    compute_weights, normalize_mean_one, WeightScheme, WeightVector, DEFAULT_IDW_EPSILON,
    DEFAULT_IDW_POWER,
};

/// Distance-based sample weighting: experiments and inspection tools.
#[derive(Parser)]
#[command(name = "distweight", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment and write details.csv and aggregate.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output_dir (taken as given, not relative to the config).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Fill the wall_time_s column (output is then no longer byte-reproducible).
        #[arg(long)]
        record_wall_time: bool,
        /// Also write aggregate.md.
        #[arg(long)]
        markdown: bool,
    },
    /// Print the weight of every training row against a test set as CSV.
    Weights {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        metric: DistanceMetricKind,
        #[arg(long)]
        scheme: SchemeName,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_IDW_POWER)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_IDW_EPSILON)]
        epsilon: f64,
        /// Rescale the weights to mean one.
        #[arg(long)]
        normalize: bool,
    },
    /// Write a synthetic dataset described by a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against labels.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SchemeName {
    Uniform,
    ExpDecay,
    Idw,
}

/// An error plus the exit code it maps to: 2 for bad input the user can
/// fix before anything runs, 1 for failures while running.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            output_dir,
            record_wall_time,
            markdown,
        } => cmd_run(&config, output_dir, record_wall_time, markdown),
        Command::Weights {
            train,
            test,
            metric,
            scheme,
            lambda,
            p,
            epsilon,
            normalize,
        } => {
            let scheme = match scheme {
                SchemeName::Uniform => Ok(WeightScheme::Uniform),
                SchemeName::ExpDecay => lambda
                    .ok_or_else(|| anyhow!("--scheme exp_decay requires --lambda"))
                    .and_then(|l| Ok(WeightScheme::exp_decay(l)?)),
                SchemeName::Idw => WeightScheme::inverse_distance(p, epsilon).map_err(Into::into),
            };
            match scheme {
                Ok(s) => cmd_weights(&train, &test, metric, s, normalize),
                Err(e) => Err(usage(e)),
            }
        }
        Command::Synth { spec, out } => cmd_synth(&spec, &out),
        Command::Eval {
            scores,
            labels,
            threshold,
        } => cmd_eval(&scores, &labels, threshold),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn cmd_run(
    config: &Path,
    output_dir: Option<PathBuf>,
    record_wall_time: bool,
    markdown: bool,
) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::from_file(config).map_err(usage)?;
    cfg.record_wall_time |= record_wall_time;
    if let Some(dir) = output_dir {
        let cwd = std::env::current_dir().map_err(runtime)?;
        cfg.output_dir = cwd.join(dir);
    }
    let out = cfg.output_path();
    let table = run_experiment(&cfg).map_err(runtime)?;
    let mut written = emit_report(&table, &out, ReportFormat::Csv).map_err(runtime)?;
    if markdown {
        written.extend(emit_report(&table, &out, ReportFormat::Markdown).map_err(runtime)?);
    }
    let failed = table.failures().count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", table.results().len());
    }
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn read_matrix(path: &Path) -> anyhow::Result<FeatureMatrix> {
    let table = load_csv(path, &[""])?;
    let mut cols = Vec::with_capacity(table.columns().len());
    for (name, col) in table.column_names().iter().zip(table.columns()) {
        match col {
            Column::Numeric(v) if col.missing_count() == 0 => cols.push(
                v.iter()
                    .map(|x| x.expect("no missing"))
                    .collect::<Vec<f64>>(),
            ),
            _ => bail!("{}: column {name:?} is not fully numeric", path.display()),
        }
    }
    let n_rows = table.n_rows();
    let data = (0..n_rows)
        .flat_map(|i| cols.iter().map(move |c| c[i]))
        .collect();
    Ok(FeatureMatrix::new(data, n_rows, cols.len())?)
}

fn cmd_weights(
    train: &Path,
    test: &Path,
    metric: DistanceMetricKind,
    scheme: WeightScheme,
    normalize: bool,
) -> Result<(), Failure> {
    let train = read_matrix(train).map_err(usage)?;
    let test = read_matrix(test).map_err(usage)?;
    let weights = if scheme.needs_distances() {
        let d = pairwise_distances(&train, &test, metric).map_err(runtime)?;
        compute_weights(&d, scheme).map_err(runtime)?
    } else {
        WeightVector::uniform(train.n_rows())
    };
    let weights = if normalize {
        normalize_mean_one(&weights).map_err(runtime)?
    } else {
        weights
    };
    let mut out = String::from("index,weight\n");
    for (i, w) in weights.as_slice().iter().enumerate() {
        out.push_str(&format!("{i},{w:.6}\n"));
    }
    std::io::stdout().write_all(out.as_bytes()).map_err(runtime)
}

fn cmd_synth(spec: &Path, out: &Path) -> Result<(), Failure> {
    let json = std::fs::read_to_string(spec)
        .with_context(|| format!("cannot read {}", spec.display()))
        .map_err(usage)?;
    let spec: SynthSpec = serde_json::from_str(&json)
        .with_context(|| format!("invalid synth spec {}", spec.display()))
        .map_err(usage)?;
    spec.validate().map_err(usage)?;
    let ds = synthesize(&spec).map_err(runtime)?;
    let mut w = csv::Writer::from_path(out)
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(runtime)?;
    let mut header = ds.feature_names.clone();
    header.push("label".to_owned());
    w.write_record(&header).map_err(runtime)?;
    for (row, label) in ds.features.rows().zip(&ds.labels) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(label.to_string());
        w.write_record(&rec).map_err(runtime)?;
    }
    w.flush().map_err(runtime)
}

fn read_single_column(path: &Path) -> anyhow::Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.n_cols() != 1 {
        bail!(
            "{}: expected one column, found {}",
            path.display(),
            m.n_cols()
        );
    }
    Ok(m.as_slice().to_vec())
}

fn cmd_eval(scores: &Path, labels: &Path, threshold: f64) -> Result<(), Failure> {
    let scores = read_single_column(scores).map_err(usage)?;
    let labels = read_single_column(labels)
        .map_err(usage)?
        .into_iter()
        .map(|y| match y {
            0.0 => Ok(0u8),
            1.0 => Ok(1u8),
            other => Err(anyhow!("label {other} is not 0 or 1")),
        })
        .collect::<anyhow::Result<Vec<u8>>>()
        .map_err(usage)?;
    let r = evaluate(&scores, &labels, threshold).map_err(runtime)?;
    let mut out = String::from("metric,value\n");
    for (name, v) in [
        ("precision", r.precision),
        ("recall", r.recall),
        ("auc", r.auc),
        ("f1", r.f1),
        ("accuracy", r.accuracy),
    ] {
        out.push_str(&format!("{name},{v:.6}\n"));
    }
    std::io::stdout().write_all(out.as_bytes()).map_err(runtime)
}
