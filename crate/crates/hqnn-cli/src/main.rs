//! Command-line harness: function-approximation experiments, circuit-metric
//! and noise sweeps, complexity reports, gradient audits, and dataset dumps.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hqnn_core::analysis::SamplingPlan;
use hqnn_core::embed::EmbeddingKind;
use hqnn_core::noise::{Insertion, NoiseChannel, NoiseModel};

use hqnn_cli::config::{
    parse_channel, parse_embedding, parse_insertion, parse_model, parse_noise_mode, parse_task,
    FileConfig,
};
use hqnn_cli::experiment::{
    complexity_report, embedding_sweep, gradient_audit, make_dataset, metric_sweep_family,
    noise_sweep, run_experiment_parallel, DatasetFunction, DatasetSpec, ExperimentSpec, FamilyKind,
    ModelKind, TaskKind,
};
use hqnn_cli::io;

#[derive(Parser)]
#[command(
    name = "hqnn",
    about = "Hybrid quantum-classical network laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Configuration file (key = value sections); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeded repetitions.
    #[arg(long)]
    repeats: Option<usize>,
    /// Worker threads for independent runs and sweep cells.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate a model on a function-approximation task.
    Approx {
        #[command(flatten)]
        common: CommonArgs,
        /// univariate | multivariate
        #[arg(long)]
        task: Option<String>,
        /// nn | qnn | hqnn | hqnn_no_cin
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        /// angle | amplitude
        #[arg(long)]
        embedding: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        weight_decay: Option<f64>,
        #[arg(long)]
        cosine_schedule: Option<bool>,
        /// CSV file for --task custom_csv (columns x0..xk, y[, split]).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Instead of one run, sweep angle vs amplitude embedding over these
        /// layer counts (comma-separated) and write sweep.csv.
        #[arg(long)]
        embedding_sweep: Option<String>,
    },
    /// Expressibility and entangling-capability sweep of the PQC family.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated qubit counts, e.g. 2,4,7,9
        #[arg(long, default_value = "2,4,7,9")]
        qubits: String,
        /// Comma-separated layer counts, e.g. 1,5,10,15,20
        #[arg(long, default_value = "1,5,10,15,20")]
        layers: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
        /// pqc (trainable blocks alone) | reupload (with data-block angles
        /// as extra uniform parameters)
        #[arg(long, default_value = "pqc")]
        family: String,
    },
    /// Evaluate a noiselessly trained model under noise channels.
    Noise {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        task: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        /// depolarizing | amplitude_damping | both
        #[arg(long, default_value = "both")]
        channel: String,
        /// Comma-separated rates (a single value works too).
        #[arg(long, alias = "rate", default_value = "0,0.001,0.01,0.1,0.2")]
        rates: String,
        /// after_each_gate | after_each_layer
        #[arg(long)]
        insertion: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Exact parameter, gate, and depth accounting for a configuration.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        task: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        embedding: Option<String>,
    },
    /// Finite-difference audit of parameter-shift and hybrid gradients.
    Gradcheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 50)]
        models: usize,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
    /// Emit a dataset split as CSV.
    Dataset {
        #[command(flatten)]
        common: CommonArgs,
        /// sinc1d | sinc2d
        #[arg(long, default_value = "sinc1d")]
        function: String,
        /// Output file (defaults to stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Approx {
            common,
            task,
            model,
            qubits,
            layers,
            embedding,
            epochs,
            batch_size,
            learning_rate,
            weight_decay,
            cosine_schedule,
            data,
            embedding_sweep,
        } => cmd_approx(
            common,
            task,
            model,
            qubits,
            layers,
            embedding,
            epochs,
            batch_size,
            learning_rate,
            weight_decay,
            cosine_schedule,
            data,
            embedding_sweep,
        ),
        Command::Analyze {
            common,
            qubits,
            layers,
            samples,
            bins,
            runs,
            family,
        } => cmd_analyze(common, qubits, layers, samples, bins, runs, family),
        Command::Noise {
            common,
            task,
            model,
            qubits,
            layers,
            channel,
            rates,
            insertion,
            epochs,
        } => cmd_noise(
            common, task, model, qubits, layers, channel, rates, insertion, epochs,
        ),
        Command::Report {
            common,
            task,
            model,
            qubits,
            layers,
            embedding,
        } => cmd_report(common, task, model, qubits, layers, embedding),
        Command::Gradcheck {
            common,
            models,
            tolerance,
        } => cmd_gradcheck(common, models, tolerance),
        Command::Dataset {
            common,
            function,
            output,
        } => cmd_dataset(common, function, output),
    }
}

fn load_config(common: &CommonArgs) -> Result<FileConfig> {
    match &common.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

fn setup_jobs(common: &CommonArgs, cfg: &FileConfig) -> Result<()> {
    let jobs = match common.jobs {
        Some(j) => Some(j),
        None => cfg.get_parsed::<usize>("output", "jobs")?,
    };
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .ok();
    }
    Ok(())
}

fn output_dir(common: &CommonArgs, cfg: &FileConfig, default: &str) -> Result<PathBuf> {
    Ok(match &common.output_dir {
        Some(d) => d.clone(),
        None => cfg
            .get("output", "dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(default)),
    })
}

/// Assemble an ExperimentSpec from config-file values and CLI overrides.
#[allow(clippy::too_many_arguments)]
fn build_spec(
    common: &CommonArgs,
    cfg: &FileConfig,
    task: Option<String>,
    model: Option<String>,
    qubits: Option<usize>,
    layers: Option<usize>,
    embedding: Option<String>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    weight_decay: Option<f64>,
    cosine_schedule: Option<bool>,
) -> Result<ExperimentSpec> {
    let task = match task.or_else(|| cfg.get("experiment", "task").map(String::from)) {
        Some(s) => parse_task(&s)?,
        None => TaskKind::Univariate,
    };
    let model = match model.or_else(|| cfg.get("experiment", "model").map(String::from)) {
        Some(s) => parse_model(&s)?,
        None => ModelKind::Hqnn,
    };
    let n_qubits = qubits
        .or(cfg.get_parsed("experiment", "qubits")?)
        .or_else(|| task.input_dim())
        .unwrap_or(1);
    let n_layers = layers
        .or(cfg.get_parsed("experiment", "layers")?)
        .unwrap_or(5);
    let embedding = match embedding.or_else(|| cfg.get("experiment", "embedding").map(String::from))
    {
        Some(s) => parse_embedding(&s)?,
        None => EmbeddingKind::Angle,
    };

    let mut spec = ExperimentSpec::new(task, model, n_qubits, n_layers);
    spec.embedding = embedding;
    spec.train.learning_rate = learning_rate
        .or(cfg.get_parsed("train", "learning_rate")?)
        .unwrap_or(spec.train.learning_rate);
    spec.train.weight_decay = weight_decay
        .or(cfg.get_parsed("train", "weight_decay")?)
        .unwrap_or(spec.train.weight_decay);
    spec.train.beta1 = cfg
        .get_parsed("train", "beta1")?
        .unwrap_or(spec.train.beta1);
    spec.train.beta2 = cfg
        .get_parsed("train", "beta2")?
        .unwrap_or(spec.train.beta2);
    spec.train.epsilon = cfg
        .get_parsed("train", "epsilon")?
        .unwrap_or(spec.train.epsilon);
    spec.train.epochs = epochs
        .or(cfg.get_parsed("train", "epochs")?)
        .unwrap_or(spec.train.epochs);
    spec.train.batch_size = batch_size
        .or(cfg.get_parsed("train", "batch_size")?)
        .unwrap_or(spec.train.batch_size);
    spec.train.seed = common
        .seed
        .or(cfg.get_parsed("train", "seed")?)
        .unwrap_or(spec.train.seed);
    spec.train.repeats = common
        .repeats
        .or(cfg.get_parsed("train", "repeats")?)
        .unwrap_or(spec.train.repeats);
    spec.train.cosine_schedule = cosine_schedule
        .or(cfg.get_parsed("train", "cosine_schedule")?)
        .unwrap_or(spec.train.cosine_schedule);

    if let Some(name) = cfg.get("noise", "channel") {
        let channel = parse_channel(name)?;
        let rate = cfg.get_parsed::<f64>("noise", "rate")?.unwrap_or(0.0);
        let insertion = match cfg.get("noise", "insertion") {
            Some(s) => parse_insertion(s)?,
            None => Insertion::AfterEachGate,
        };
        spec.noise = NoiseModel::new(channel, rate, insertion).map_err(anyhow::Error::from)?;
    }
    if let Some(mode) = cfg.get("noise", "mode") {
        spec.noise_mode = parse_noise_mode(mode)?;
    }
    Ok(spec)
}

#[allow(clippy::too_many_arguments)]
fn cmd_approx(
    common: CommonArgs,
    task: Option<String>,
    model: Option<String>,
    qubits: Option<usize>,
    layers: Option<usize>,
    embedding: Option<String>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    weight_decay: Option<f64>,
    cosine_schedule: Option<bool>,
    data: Option<PathBuf>,
    embedding_sweep_layers: Option<String>,
) -> Result<()> {
    let cfg = load_config(&common)?;
    setup_jobs(&common, &cfg)?;
    let mut spec = build_spec(
        &common,
        &cfg,
        task,
        model,
        qubits,
        layers,
        embedding,
        epochs,
        batch_size,
        learning_rate,
        weight_decay,
        cosine_schedule,
    )?;
    spec.custom_data = data.or_else(|| cfg.get("experiment", "data").map(PathBuf::from));
    if spec.task == TaskKind::CustomCsv {
        // Resolve the input width up front so accounting works.
        let path = spec
            .custom_data
            .clone()
            .ok_or_else(|| anyhow::anyhow!("--task custom_csv needs --data <file>"))?;
        let (train_set, _) = hqnn_cli::experiment::load_custom_csv(&path)?;
        spec.input_dim = Some(train_set.inputs[0].len());
    }
    let out = output_dir(&common, &cfg, "out/approx")?;
    if let Some(layer_list) = embedding_sweep_layers {
        let layer_grid: Vec<usize> = parse_list(&layer_list, "layers")?;
        if layer_grid.is_empty() {
            bail!("empty embedding sweep grid");
        }
        let rows = embedding_sweep(&spec, &layer_grid)?;
        let path = io::write_sweep_csv(&out, &io::embedding_sweep_csv(&rows))?;
        for r in &rows {
            println!(
                "embedding={} layers={:2} depth={} mean test MSE {:.6} ± {:.6}",
                r.embedding, r.n_layers, r.circuit_depth, r.mean_test_mse, r.std_test_mse
            );
        }
        println!("sweep written to {}", path.display());
        return Ok(());
    }
    let report = complexity_report(&spec)?;
    let agg = run_experiment_parallel(&spec)?;
    for run in &agg.runs {
        io::write_run(
            &out,
            &spec,
            run,
            report.classical_param_count,
            report.quantum_param_count,
        )?;
    }
    io::write_aggregate(&out, &agg)?;
    println!(
        "task={:?} model={:?} qubits={} layers={} params={}C+{}Q",
        spec.task,
        spec.model,
        spec.n_qubits,
        spec.n_layers,
        report.classical_param_count,
        report.quantum_param_count
    );
    for run in &agg.runs {
        println!(
            "  seed {}: train MSE {:.6}, test MSE {:.6}",
            run.seed, run.train_mse, run.test_metrics.mse
        );
    }
    for (seed, err) in &agg.failed_runs {
        println!("  seed {seed}: FAILED ({err})");
    }
    println!(
        "mean test MSE {:.6} ± {:.6}  (MAE {:.6} ± {:.6})",
        agg.mean_test_mse, agg.std_test_mse, agg.mean_test_mae, agg.std_test_mae
    );
    println!("results under {}", out.display());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} entry '{p}': {e}"))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    common: CommonArgs,
    qubits: String,
    layers: String,
    samples: Option<usize>,
    bins: Option<usize>,
    runs: Option<usize>,
    family: String,
) -> Result<()> {
    let cfg = load_config(&common)?;
    setup_jobs(&common, &cfg)?;
    let qubit_grid: Vec<usize> = parse_list(&qubits, "qubits")?;
    let layer_grid: Vec<usize> = parse_list(&layers, "layers")?;
    if qubit_grid.is_empty() || layer_grid.is_empty() {
        bail!("empty sweep grid");
    }
    let plan = SamplingPlan {
        n_samples: samples
            .or(cfg.get_parsed("analysis", "samples")?)
            .unwrap_or(1000),
        n_bins: bins.or(cfg.get_parsed("analysis", "bins")?).unwrap_or(75),
        n_runs: runs.or(cfg.get_parsed("analysis", "runs")?).unwrap_or(4),
        seed: common.seed.or(cfg.get_parsed("train", "seed")?).unwrap_or(0),
    };
    let family = match family.as_str() {
        "pqc" => FamilyKind::Pqc,
        "reupload" => FamilyKind::Reupload,
        other => bail!("unknown family '{other}' (pqc, reupload)"),
    };
    let out = output_dir(&common, &cfg, "out/analyze")?;
    let rows = metric_sweep_family(&qubit_grid, &layer_grid, &plan, family, true)?;
    let path = io::write_sweep_csv(&out, &io::metric_sweep_csv(&rows))?;
    for r in &rows {
        println!(
            "qubits={} layers={:2} {}: {:.4} ± {:.4}",
            r.n_qubits, r.n_layers, r.metric, r.mean, r.std
        );
    }
    println!("sweep written to {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_noise(
    common: CommonArgs,
    task: Option<String>,
    model: Option<String>,
    qubits: Option<usize>,
    layers: Option<usize>,
    channel: String,
    rates: String,
    insertion: Option<String>,
    epochs: Option<usize>,
) -> Result<()> {
    let cfg = load_config(&common)?;
    setup_jobs(&common, &cfg)?;
    let mut spec = build_spec(
        &common, &cfg, task, model, qubits, layers, None, epochs, None, None, None, None,
    )?;
    if let Some(ins) = insertion {
        let parsed = parse_insertion(&ins)?;
        spec.noise = NoiseModel::new(spec.noise.channel, spec.noise.rate, parsed)
            .map_err(anyhow::Error::from)?;
    }
    let channels = match channel.as_str() {
        "both" => vec![NoiseChannel::Depolarizing, NoiseChannel::AmplitudeDamping],
        name => vec![parse_channel(name)?],
    };
    let rate_grid: Vec<f64> = parse_list(&rates, "rates")?;
    let out = output_dir(&common, &cfg, "out/noise")?;
    let rows = noise_sweep(&spec, &channels, &rate_grid)?;
    let path = io::write_sweep_csv(&out, &io::noise_sweep_csv(&rows))?;
    for r in &rows {
        println!(
            "channel={} rate={:<6} seed={}: test MSE {:.6}",
            r.channel, r.rate, r.seed, r.test_mse
        );
    }
    println!("sweep written to {}", path.display());
    Ok(())
}

fn cmd_report(
    common: CommonArgs,
    task: Option<String>,
    model: Option<String>,
    qubits: Option<usize>,
    layers: Option<usize>,
    embedding: Option<String>,
) -> Result<()> {
    let cfg = load_config(&common)?;
    let spec = build_spec(
        &common, &cfg, task, model, qubits, layers, embedding, None, None, None, None, None,
    )?;
    let report = complexity_report(&spec)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_gradcheck(common: CommonArgs, models: usize, tolerance: f64) -> Result<()> {
    let cfg = load_config(&common)?;
    let seed = common.seed.or(cfg.get_parsed("train", "seed")?).unwrap_or(0);
    let report = gradient_audit(models, seed, tolerance, 1e-10)?;
    println!(
        "checked {} parameters across {} models",
        report.params_checked, report.n_models
    );
    println!(
        "max relative error vs finite differences: {:.3e} (tolerance {:.1e})",
        report.max_rel_err, report.fd_tolerance
    );
    println!(
        "max analytic single-rotation error: {:.3e} (tolerance {:.1e})",
        report.analytic_max_err, report.analytic_tolerance
    );
    if report.passed {
        println!("gradcheck PASS");
        Ok(())
    } else {
        bail!("gradcheck FAIL");
    }
}

fn cmd_dataset(common: CommonArgs, function: String, output: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(&common)?;
    let function = match function.as_str() {
        "sinc1d" => DatasetFunction::DampedSinc1d,
        "sinc2d" => DatasetFunction::DampedSinc2d,
        other => bail!("unknown function '{other}' (sinc1d, sinc2d)"),
    };
    let seed = common.seed.or(cfg.get_parsed("train", "seed")?).unwrap_or(0);
    let (train, test) = make_dataset(&DatasetSpec::new(function, seed))?;
    let mut inputs = train.inputs.clone();
    inputs.extend(test.inputs.clone());
    let mut targets = train.targets.clone();
    targets.extend(test.targets.clone());
    let split: Vec<&str> = std::iter::repeat_n("train", train.len())
        .chain(std::iter::repeat_n("test", test.len()))
        .collect();
    let text = io::dataset_csv(&inputs, &targets, &split);
    match output {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    io::ensure_dir(parent)?;
                }
            }
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("dataset written to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
