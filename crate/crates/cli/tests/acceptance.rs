//! Acceptance criteria, one PASS/FAIL line each. The process exits non-zero
//! if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use distweight::data::{synthesize, SynthSpec};
use distweight::distance::{DistanceMatrix, DistanceMetricKind};
use distweight::harness::{run_experiment, DatasetSource, ExperimentConfig, ReportTable};
use distweight::matrix::FeatureMatrix;
use distweight::metrics::roc_auc;
use distweight::model::{backward, fit, init_params, ModelConfig, ModelParams, TrainConfig};
use distweight::weighting::{compute_weights, WeightScheme, WeightVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took > limit {
        Err(format!("{detail}; took {took:.1?}, limit {limit:?}"))
    } else {
        Ok(format!("{detail}; {took:.1?}"))
    }
}

fn dm(rows: &[Vec<f64>]) -> DistanceMatrix {
    DistanceMatrix::from_rows(rows, DistanceMetricKind::Euclidean).unwrap()
}

const TABLE_LAMBDAS: [f64; 5] = [0.5, 0.7, 0.8, 0.9, 1.0];

fn exp_decay_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = rng.random_range(1..=200);
        let m = rng.random_range(1..=100);
        let d = common::random_matrix(&mut rng, n, m, 0.0, 10.0);
        let lambda = TABLE_LAMBDAS[k % TABLE_LAMBDAS.len()];
        let w = compute_weights(&dm(&d), WeightScheme::exp_decay(lambda).unwrap())
            .map_err(|e| e.to_string())?;
        for (a, b) in w
            .as_slice()
            .iter()
            .zip(common::exp_decay_weights(&d, lambda))
        {
            worst = worst.max((a - b).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("max abs error {worst:e} > 1e-12"));
    }
    within(
        Duration::from_secs(5),
        start,
        format!("100 matrices, max abs error {worst:e}"),
    )
}

fn uniform_degeneration() -> Outcome {
    let start = Instant::now();
    let ds = synthesize(&SynthSpec {
        n_samples: 200,
        n_features: 5,
        class_balance: 0.4,
        class_separation: 2.0,
        label_noise: 0.05,
        seed: 2,
    })
    .map_err(|e| e.to_string())?;
    let mcfg = ModelConfig::new(ds.n_features(), 2);
    let tcfg = TrainConfig {
        epochs: 20,
        shuffle_seed: 2,
        ..TrainConfig::default()
    };
    let trajectory = |w: &WeightVector| {
        let mut steps: Vec<ModelParams> = Vec::new();
        fit(&ds, None, w, &mcfg, &tcfg, |_, p| steps.push(p.clone())).map(|_| steps)
    };
    let uniform = trajectory(&WeightVector::uniform(200)).map_err(|e| e.to_string())?;
    let ones = WeightVector::from_values(vec![1.0; 200], WeightScheme::exp_decay(1.0).unwrap())
        .map_err(|e| e.to_string())?;
    let explicit = trajectory(&ones).map_err(|e| e.to_string())?;
    if uniform.len() != explicit.len() {
        return Err(format!("{} vs {} steps", uniform.len(), explicit.len()));
    }
    let same_bits = |a: &ModelParams, b: &ModelParams| {
        a.values()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    };
    if let Some(step) = (0..uniform.len()).find(|&s| !same_bits(&uniform[s], &explicit[s])) {
        return Err(format!("trajectories diverge at step {}", step + 1));
    }
    within(
        Duration::from_secs(10),
        start,
        format!("{} steps bit-identical", uniform.len()),
    )
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut report = Vec::new();
    for (input, hidden) in [(2, 4), (8, 16), (30, 64)] {
        let mut checked = 0;
        let mut worst: f64 = 0.0;
        while checked < 100 {
            let mut p = init_params(&ModelConfig {
                input_dim: input,
                hidden_layers: vec![hidden],
                seed: rng.random(),
            })
            .map_err(|e| e.to_string())?;
            for v in p.values_mut() {
                *v += rng.random_range(-0.1..0.1);
            }
            let rows = common::random_matrix(&mut rng, 16, input, -2.0, 2.0);
            let x = FeatureMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
            let y: Vec<u8> = (0..16).map(|_| rng.random_bool(0.5) as u8).collect();
            let w: Vec<f64> = (0..16).map(|_| rng.random_range(0.05..3.0)).collect();
            let (_, g) = backward(&p, &x, &y, &w).map_err(|e| e.to_string())?;
            let grads: Vec<f64> = g.values().copied().collect();
            for _ in 0..25 {
                let k = rng.random_range(0..grads.len());
                let n = common::numeric_gradient(&p, &x, &y, &w, k, 1e-5);
                worst = worst.max(common::relative_error(grads[k], n, 1e-6));
                checked += 1;
            }
        }
        if worst >= 1e-4 {
            return Err(format!(
                "{input}-{hidden}-1: relative error {worst:e} >= 1e-4"
            ));
        }
        report.push(format!(
            "{input}-{hidden}-1 {checked} coords max rel {worst:.1e}"
        ));
    }
    within(Duration::from_secs(30), start, report.join(", "))
}

fn auc_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=500);
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_bool(0.35) as u8).collect();
        labels[0] = 0;
        labels[n - 1] = 1;
        let levels = rng.random_range(2..20) as f64;
        let scores: Vec<f64> = (0..n)
            .map(|_| (rng.random_range(0.0..1.0f64) * levels).floor() / levels)
            .collect();
        let a = roc_auc(&scores, &labels).map_err(|e| e.to_string())?;
        worst = worst.max((a - common::auc_pairs(&scores, &labels)).abs());
    }
    if worst > 1e-12 {
        return Err(format!("max abs error {worst:e} > 1e-12"));
    }
    within(
        Duration::from_secs(5),
        start,
        format!("50 tied sets, max abs error {worst:e}"),
    )
}

fn weight_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ed = |l: f64| WeightScheme::exp_decay(l).unwrap();
    for case in 0..1000 {
        let n = rng.random_range(2..30);
        let m = rng.random_range(1..30);
        let mut d = common::random_matrix(&mut rng, n, m, 0.01, 8.0);
        // row 1 dominates row 0 entrywise
        d[1] = d[0]
            .iter()
            .map(|v| v + rng.random_range(0.0..2.0))
            .collect();
        let lambda = rng.random_range(0.05..3.0);
        let w = compute_weights(&dm(&d), ed(lambda)).map_err(|e| e.to_string())?;
        let w = w.as_slice();
        if let Some(v) = w.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(format!("case {case}: weight {v} outside (0, 1]"));
        }
        if w[1] > w[0] {
            return Err(format!("case {case}: farther row outweighs nearer row"));
        }
        let bigger = compute_weights(&dm(&d), ed(lambda * rng.random_range(1.0..3.0)))
            .map_err(|e| e.to_string())?;
        if bigger.as_slice().iter().zip(w).any(|(b, a)| b > a) {
            return Err(format!("case {case}: larger lambda increased a weight"));
        }
        d[rng.random_range(0..n)][rng.random_range(0..m)] = 0.0;
        let idw = compute_weights(&dm(&d), WeightScheme::inverse_distance(2.0, 1e-8).unwrap())
            .map_err(|e| e.to_string())?;
        if idw.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(format!("case {case}: IDW not finite with a zero distance"));
        }
    }
    within(Duration::from_secs(10), start, "1000 matrices".into())
}

fn mean_accuracy(table: &ReportTable, scheme: &str, tf: f64) -> Result<f64, String> {
    let runs = table.cell(scheme, tf);
    if let Some(r) = runs.iter().find(|r| r.failure().is_some()) {
        return Err(format!(
            "{scheme} tf={tf} run {} failed: {}",
            r.run,
            r.failure().unwrap()
        ));
    }
    if runs.is_empty() {
        return Err(format!("no runs for {scheme} tf={tf}"));
    }
    Ok(runs
        .iter()
        .map(|r| r.report().unwrap().accuracy)
        .sum::<f64>()
        / runs.len() as f64)
}

fn banknote() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::from_file(workspace().join("configs/banknote.json"))
        .map_err(|e| e.to_string())?;
    let path = std::env::var_os("DISTWEIGHT_BANKNOTE_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace().join("data/banknote.csv"));
    if !path.exists() {
        return Err(format!(
            "{} not found; run scripts/fetch_banknote.sh or set DISTWEIGHT_BANKNOTE_CSV",
            path.display()
        ));
    }
    if let DatasetSource::Csv { path: p, .. } = &mut cfg.dataset {
        *p = path;
    }
    cfg.test_fractions = vec![0.1, 0.5];
    cfg.n_runs = 5;
    let table = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut cells = Vec::new();
    for scheme in cfg.schemes().unwrap() {
        for tf in [0.1, 0.5] {
            let acc = mean_accuracy(&table, &scheme.tag(), tf)?;
            if acc < 0.99 {
                return Err(format!(
                    "{} tf={tf}: mean accuracy {acc:.4} < 0.99",
                    scheme.tag()
                ));
            }
            cells.push(format!("{}@{tf}={acc:.4}", scheme.tag()));
        }
    }
    within(Duration::from_secs(120), start, cells.join(" "))
}

fn breast_cancer() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::from_file(workspace().join("configs/breast_cancer.json"))
        .map_err(|e| e.to_string())?;
    cfg.test_fractions = vec![0.1];
    cfg.n_runs = 5;
    let table = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let uniform = mean_accuracy(&table, "uniform", 0.1)?;
    let decayed = mean_accuracy(&table, &WeightScheme::ExpDecay { lambda: 1.0 }.tag(), 0.1)?;
    let detail = format!("exp_decay {decayed:.4} vs uniform {uniform:.4}");
    if decayed < uniform - 0.01 || decayed < 0.90 {
        return Err(detail);
    }
    within(Duration::from_secs(120), start, detail)
}

fn stress_ordering() -> Outcome {
    let start = Instant::now();
    let base = ExperimentConfig::from_file(workspace().join("configs/synthetic_stress.json"))
        .map_err(|e| e.to_string())?;
    let uniform = WeightScheme::Uniform;
    let decayed = WeightScheme::ExpDecay { lambda: 0.8 };
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..10u64 {
        let mut cfg = base.clone();
        if let DatasetSource::Synthetic(spec) = &mut cfg.dataset {
            spec.class_balance = 0.15;
            spec.label_noise = 0.1;
            spec.seed = seed;
        }
        cfg.schemes = Some(vec![uniform, decayed]);
        cfg.test_fractions = vec![0.9];
        cfg.base_seed = 1000 * seed;
        let table = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let mean_f1 = |s: WeightScheme| {
            let runs = table.cell(&s.tag(), 0.9);
            let done: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.report())
                .map(|r| r.f1)
                .collect();
            (done.len() == runs.len() && !done.is_empty())
                .then(|| done.iter().sum::<f64>() / done.len() as f64)
                .ok_or_else(|| format!("seed {seed}: failed runs for {}", s.tag()))
        };
        let (u, d) = (mean_f1(uniform)?, mean_f1(decayed)?);
        if d >= u {
            wins += 1;
        }
        pairs.push(format!("{d:.3}/{u:.3}"));
    }
    let detail = format!(
        "exp_decay >= uniform F1 in {wins}/10 seeds [{}]",
        pairs.join(" ")
    );
    if wins < 6 {
        return Err(detail);
    }
    within(Duration::from_secs(180), start, detail)
}

fn run_cli(config: &Path, out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_distweight"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    std::fs::read(out.join("details.csv")).map_err(|e| e.to_string())
}

fn cli_determinism() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = workspace().join("configs/breast_cancer.json");
    let first = run_cli(&config, &dir.path().join("a"))?;
    let second = run_cli(&config, &dir.path().join("b"))?;
    if first != second {
        return Err("details.csv differs between runs".into());
    }
    let rows = first.iter().filter(|&&b| b == b'\n').count() - 1;
    within(
        Duration::from_secs(120),
        start,
        format!("{rows} rows, {} bytes identical", first.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "exp-decay weights match the scalar oracle",
            exp_decay_oracle,
        ),
        (
            "all-ones weights reproduce uniform training bit for bit",
            uniform_degeneration,
        ),
        (
            "analytic gradients match central differences",
            gradient_check,
        ),
        ("rank AUC matches pair counting", auc_oracle),
        ("weight properties on random matrices", weight_properties),
        ("banknote mean accuracy >= 0.99", banknote),
        (
            "breast cancer exp-decay vs uniform at 10% test",
            breast_cancer,
        ),
        (
            "exp-decay F1 >= uniform on imbalanced noisy data",
            stress_ordering,
        ),
        ("run --config is byte-reproducible", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
