//! Dataset generation, model construction with a parameter-count audit,
//! seeded multi-run experiments, and the sweep drivers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use hqnn_core::analysis::{
    entangling_capability, expressibility, PqcFamily, ReuploadFamily, SamplingPlan,
};
use hqnn_core::dense::{Activation, DenseNet};
use hqnn_core::embed::EmbeddingKind;
use hqnn_core::circuit::ReuploadCircuit;
use hqnn_core::error::{Error, Result};
use hqnn_core::eval::MetricReport;
use hqnn_core::noise::{NoiseChannel, NoiseModel};
use hqnn_core::train::{train, Dataset, HybridModel, NoisyHybrid, TrainConfig, Trainable, TrainReport};

/// Width of the hidden layers in the narrow NN baselines.
pub const NN_BASELINE_WIDTH: usize = 2;
/// Spread of the uniform initial distribution of circuit angles.
pub const THETA_INIT_SPREAD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Univariate,
    Multivariate,
    /// User-supplied samples from a CSV file (columns x0..xk, y and an
    /// optional train/test split column).
    CustomCsv,
}

impl TaskKind {
    /// Input dimension when the task defines one; custom data carries its
    /// own width.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            TaskKind::Univariate => Some(1),
            TaskKind::Multivariate => Some(2),
            TaskKind::CustomCsv => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Classical dense baseline.
    Nn,
    /// Bare re-uploading circuit, prediction = sum of measured expectations.
    Qnn,
    /// Embedding network -> circuit -> regression network.
    Hqnn,
    /// Circuit -> regression network (no classical input network).
    HqnnNoCin,
}

/// Whether a configured noise model perturbs only evaluation or the whole
/// training loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    EvaluateOnly,
    TrainNoisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub task: TaskKind,
    pub model: ModelKind,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub embedding: EmbeddingKind,
    pub noise: NoiseModel,
    pub noise_mode: NoiseMode,
    pub train: TrainConfig,
    /// CSV file backing a CustomCsv task.
    pub custom_data: Option<std::path::PathBuf>,
    /// Input width for CustomCsv tasks, filled in from the loaded file.
    pub input_dim: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(task: TaskKind, model: ModelKind, n_qubits: usize, n_layers: usize) -> Self {
        Self {
            task,
            model,
            n_qubits,
            n_layers,
            embedding: EmbeddingKind::Angle,
            noise: NoiseModel::none(),
            noise_mode: NoiseMode::EvaluateOnly,
            train: TrainConfig::default(),
            custom_data: None,
            input_dim: None,
        }
    }

    /// The model's input width: fixed by the builtin tasks, carried by the
    /// spec for custom data.
    pub fn input_dim(&self) -> Result<usize> {
        self.task
            .input_dim()
            .or(self.input_dim)
            .ok_or_else(|| Error::InvalidParameter("custom task needs a loaded input width".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.n_layers == 0 {
            return Err(Error::InvalidParameter("need at least one layer".into()));
        }
        if self.task == TaskKind::CustomCsv && self.custom_data.is_none() {
            return Err(Error::InvalidParameter(
                "custom task needs a data file".into(),
            ));
        }
        if self.model == ModelKind::Nn && !self.noise.is_none() {
            return Err(Error::InvalidParameter(
                "noise models apply to quantum circuits only".into(),
            ));
        }
        match self.task.input_dim().or(self.input_dim) {
            Some(d) => self.validate_dims(d),
            // Checked again once the file is loaded.
            None => Ok(()),
        }
    }

    fn validate_dims(&self, d: usize) -> Result<()> {
        match self.model {
            ModelKind::Nn => Ok(()),
            ModelKind::Qnn | ModelKind::HqnnNoCin => {
                // Without an input network the raw features feed the circuit.
                match self.embedding {
                    EmbeddingKind::Angle if d != self.n_qubits => Err(Error::DimensionMismatch {
                        expected: self.n_qubits,
                        got: d,
                    }),
                    EmbeddingKind::Amplitude { .. } if d > (1 << self.n_qubits) => {
                        Err(Error::DimensionMismatch {
                            expected: 1 << self.n_qubits,
                            got: d,
                        })
                    }
                    _ => Ok(()),
                }
            }
            ModelKind::Hqnn => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFunction {
    DampedSinc1d,
    DampedSinc2d,
}

impl DatasetFunction {
    pub fn for_task(task: TaskKind) -> Option<Self> {
        match task {
            TaskKind::Univariate => Some(DatasetFunction::DampedSinc1d),
            TaskKind::Multivariate => Some(DatasetFunction::DampedSinc2d),
            TaskKind::CustomCsv => None,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            DatasetFunction::DampedSinc1d => 1,
            DatasetFunction::DampedSinc2d => 2,
        }
    }

    /// sin(5x)/(5x) per coordinate, summed.
    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| (5.0 * v).sin() / (5.0 * v)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub function: DatasetFunction,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(function: DatasetFunction, seed: u64) -> Self {
        Self {
            function,
            n_train: 200,
            n_test: 100,
            seed,
        }
    }
}

/// Draw train and test sets uniformly from the half-open box (0, 3]^d;
/// the open lower end guards the 0/0 singularity of the damped sinc.
pub fn make_dataset(spec: &DatasetSpec) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.function.input_dim();
    let total = spec.n_train + spec.n_test;
    let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(total);
    while inputs.len() < total {
        let x: Vec<f64> = (0..d).map(|_| 3.0 * (1.0 - rng.gen::<f64>())).collect();
        // Train/test stay disjoint: repeated draws are astronomically
        // unlikely but cheap to rule out.
        if !inputs.contains(&x) {
            inputs.push(x);
        }
    }
    let targets: Vec<f64> = inputs.iter().map(|x| spec.function.eval(x)).collect();
    let test_inputs = inputs.split_off(spec.n_train);
    let test_targets = targets[spec.n_train..].to_vec();
    let train_targets = targets[..spec.n_train].to_vec();
    Ok((
        Dataset::new(inputs, train_targets)?,
        Dataset::new(test_inputs, test_targets)?,
    ))
}

/// Exact complexity accounting for one model configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub classical_param_count: usize,
    pub quantum_param_count: usize,
    pub u4_gate_count: u64,
    pub circuit_depth: u64,
    pub circuit_depth_expression: String,
}

/// Closed-form parameter and gate counts for a model preset. Quantum side:
/// 3nL parameters, n/gcd(n,r)·L entanglers, depth (4+n)L for angle and
/// (2^n+3+n)L for amplitude embedding.
pub fn complexity_report(spec: &ExperimentSpec) -> Result<ComplexityReport> {
    spec.validate()?;
    let n = spec.n_qubits;
    let l = spec.n_layers;
    let d = spec.input_dim()?;
    let classical = match spec.model {
        ModelKind::Nn => nn_baseline_widths(d, l)
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum(),
        ModelKind::Qnn => 0,
        // Embedding d -> w_in plus regression n -> 1, biases included.
        ModelKind::Hqnn => {
            let w_in = spec.embedding.input_width(n).min(1 << n);
            let embed = match spec.embedding {
                EmbeddingKind::Angle => d * n + n,
                EmbeddingKind::Amplitude { .. } => d * w_in + w_in,
            };
            embed + (n + 1)
        }
        ModelKind::HqnnNoCin => n + 1,
    };
    if spec.model == ModelKind::Nn {
        return Ok(ComplexityReport {
            n_qubits: 0,
            n_layers: l,
            classical_param_count: classical,
            quantum_param_count: 0,
            u4_gate_count: 0,
            circuit_depth: 0,
            circuit_depth_expression: "-".into(),
        });
    }
    let circuit = ReuploadCircuit::new(n, l, spec.embedding, None)?;
    let expression = match spec.embedding {
        EmbeddingKind::Angle => format!("(4 + {n}) * {l}"),
        EmbeddingKind::Amplitude { .. } => format!("(2^{n} + 3 + {n}) * {l}"),
    };
    Ok(ComplexityReport {
        n_qubits: n,
        n_layers: l,
        classical_param_count: classical,
        quantum_param_count: circuit.param_count(),
        u4_gate_count: circuit.u4_gate_count(),
        circuit_depth: circuit.depth_gate_layers(),
        circuit_depth_expression: expression,
    })
}

/// Widths of the narrow NN baseline: input, L-1 hidden layers of width 2,
/// scalar output (L weight layers total).
pub fn nn_baseline_widths(input_dim: usize, n_layers: usize) -> Vec<usize> {
    let mut widths = vec![input_dim];
    widths.extend(std::iter::repeat_n(NN_BASELINE_WIDTH, n_layers.saturating_sub(1)));
    widths.push(1);
    widths
}

/// A constructed model ready for training.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Hybrid(HybridModel),
    Dense(DenseNet),
}

impl BuiltModel {
    pub fn classical_param_count(&self) -> usize {
        match self {
            BuiltModel::Hybrid(m) => m.classical_param_count(),
            BuiltModel::Dense(n) => n.count_params(),
        }
    }

    pub fn quantum_param_count(&self) -> usize {
        match self {
            BuiltModel::Hybrid(m) => m.quantum_param_count(),
            BuiltModel::Dense(_) => 0,
        }
    }
}

impl Trainable for BuiltModel {
    fn params_flat(&self) -> Vec<f64> {
        match self {
            BuiltModel::Hybrid(m) => m.params_flat(),
            BuiltModel::Dense(n) => Trainable::params_flat(n),
        }
    }

    fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        match self {
            BuiltModel::Hybrid(m) => m.set_params_flat(params),
            BuiltModel::Dense(n) => Trainable::set_params_flat(n, params),
        }
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            BuiltModel::Hybrid(m) => m.predict(x),
            BuiltModel::Dense(n) => Trainable::predict(n, x),
        }
    }

    fn batch_loss_grad(&self, data: &Dataset, idx: &[usize]) -> Result<(f64, Vec<f64>)> {
        match self {
            BuiltModel::Hybrid(m) => m.batch_loss_grad(data, idx),
            BuiltModel::Dense(n) => n.batch_loss_grad(data, idx),
        }
    }
}

/// Build the model for a spec, then audit its realized parameter counts
/// against the closed-form accounting; any disagreement is a hard error.
pub fn build_model(spec: &ExperimentSpec, seed: u64) -> Result<BuiltModel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.input_dim()?;
    let model = match spec.model {
        ModelKind::Nn => {
            let widths = nn_baseline_widths(d, spec.n_layers);
            let mut acts = vec![Activation::Relu; widths.len() - 1];
            *acts.last_mut().unwrap() = Activation::Identity;
            BuiltModel::Dense(DenseNet::seeded(widths, acts, &mut rng)?)
        }
        ModelKind::Qnn => {
            let mut circuit = ReuploadCircuit::new(spec.n_qubits, spec.n_layers, spec.embedding, None)?;
            circuit.randomize_theta(&mut rng, -THETA_INIT_SPREAD, THETA_INIT_SPREAD);
            BuiltModel::Hybrid(HybridModel::new(None, circuit, None)?)
        }
        ModelKind::Hqnn => {
            let w_in = match spec.embedding {
                EmbeddingKind::Angle => spec.n_qubits,
                EmbeddingKind::Amplitude { .. } => 1 << spec.n_qubits,
            };
            // Pass-through init: the embedding starts as the identity map and
            // the regression as the plain sum, so the circuit begins at the
            // data's own frequency scale and training only refines it.
            let embed = DenseNet::passthrough(vec![d, w_in], vec![Activation::Identity])?;
            let regress =
                DenseNet::passthrough(vec![spec.n_qubits, 1], vec![Activation::Identity])?;
            let mut circuit = ReuploadCircuit::new(spec.n_qubits, spec.n_layers, spec.embedding, None)?;
            circuit.randomize_theta(&mut rng, -THETA_INIT_SPREAD, THETA_INIT_SPREAD);
            BuiltModel::Hybrid(HybridModel::new(Some(embed), circuit, Some(regress))?)
        }
        ModelKind::HqnnNoCin => {
            let regress =
                DenseNet::passthrough(vec![spec.n_qubits, 1], vec![Activation::Identity])?;
            let mut circuit = ReuploadCircuit::new(spec.n_qubits, spec.n_layers, spec.embedding, None)?;
            circuit.randomize_theta(&mut rng, -THETA_INIT_SPREAD, THETA_INIT_SPREAD);
            BuiltModel::Hybrid(HybridModel::new(None, circuit, Some(regress))?)
        }
    };
    // Build-time audit.
    let report = complexity_report(spec)?;
    if model.classical_param_count() != report.classical_param_count
        || model.quantum_param_count() != report.quantum_param_count
    {
        return Err(Error::InvalidParameter(format!(
            "parameter audit failed: realized {}C + {}Q, accounting {}C + {}Q",
            model.classical_param_count(),
            model.quantum_param_count(),
            report.classical_param_count,
            report.quantum_param_count
        )));
    }
    Ok(model)
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub report: TrainReport,
    pub test_metrics: MetricReport,
    pub train_mse: f64,
}

/// Mean and standard deviation over the repeat runs of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateReport {
    pub spec: ExperimentSpec,
    pub runs: Vec<RunResult>,
    pub failed_runs: Vec<(u64, String)>,
    pub mean_test_mse: f64,
    pub std_test_mse: f64,
    pub mean_test_mae: f64,
    pub std_test_mae: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Parse a custom dataset CSV: header `x0,..,xk,y[,split]`, one sample per
/// row. With a split column the marked rows form the test set; otherwise the
/// first two thirds train and the rest test.
pub fn load_custom_csv(path: &std::path::Path) -> Result<(Dataset, Dataset)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("reading {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or(Error::EmptyInput)?
        .split(',')
        .map(str::trim)
        .collect();
    let has_split = header.last() == Some(&"split");
    let y_col = header
        .iter()
        .position(|&c| c == "y")
        .ok_or_else(|| Error::InvalidParameter("custom CSV needs a 'y' column".into()))?;
    if y_col == 0 {
        return Err(Error::InvalidParameter(
            "custom CSV needs at least one input column before 'y'".into(),
        ));
    }
    let mut train = (Vec::new(), Vec::new());
    let mut test = (Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != header.len() {
            return Err(Error::InvalidParameter(format!(
                "custom CSV row {}: expected {} columns, got {}",
                lineno + 2,
                header.len(),
                cols.len()
            )));
        }
        let parse = |v: &str| {
            v.parse::<f64>().map_err(|e| {
                Error::InvalidParameter(format!("custom CSV row {}: {e}", lineno + 2))
            })
        };
        let x: Vec<f64> = cols[..y_col].iter().map(|v| parse(v)).collect::<Result<_>>()?;
        let y = parse(cols[y_col])?;
        if x.iter().any(|v| !v.is_finite()) || !y.is_finite() {
            return Err(Error::NonFinite);
        }
        if has_split {
            match cols[header.len() - 1] {
                "test" => {
                    test.0.push(x);
                    test.1.push(y);
                }
                _ => {
                    train.0.push(x);
                    train.1.push(y);
                }
            }
        } else {
            rows.push((x, y));
        }
    }
    if !has_split {
        let cut = rows.len() * 2 / 3;
        for (i, (x, y)) in rows.into_iter().enumerate() {
            if i < cut {
                train.0.push(x);
                train.1.push(y);
            } else {
                test.0.push(x);
                test.1.push(y);
            }
        }
    }
    Ok((
        Dataset::new(train.0, train.1)?,
        Dataset::new(test.0, test.1)?,
    ))
}

/// Materialize the spec's dataset for one seed, along with a copy of the
/// spec whose input width is resolved.
fn dataset_for(spec: &ExperimentSpec, seed: u64) -> Result<(ExperimentSpec, Dataset, Dataset)> {
    let mut resolved = spec.clone();
    let (train_set, test_set) = match DatasetFunction::for_task(spec.task) {
        Some(function) => make_dataset(&DatasetSpec::new(function, seed))?,
        None => {
            let path = spec
                .custom_data
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("custom task needs a data file".into()))?;
            load_custom_csv(path)?
        }
    };
    resolved.input_dim = Some(train_set.inputs[0].len());
    resolved.validate_dims(train_set.inputs[0].len())?;
    Ok((resolved, train_set, test_set))
}

/// Train and evaluate one seeded run of the spec.
pub fn run_single(spec: &ExperimentSpec, seed: u64) -> Result<RunResult> {
    spec.validate()?;
    let (spec, train_set, test_set) = dataset_for(spec, seed)?;
    let spec = &spec;
    let mut cfg = spec.train;
    cfg.seed = seed;
    let built = build_model(spec, seed)?;

    let train_under_noise = spec.noise_mode == NoiseMode::TrainNoisy && !spec.noise.is_none();
    let (report, predictions, train_mse) = match (built, train_under_noise) {
        (BuiltModel::Hybrid(model), true) => {
            let mut noisy = NoisyHybrid {
                model,
                noise: spec.noise,
            };
            let report = train(&mut noisy, &train_set, Some(&test_set), &cfg)?;
            let preds = predict_all(&noisy, &test_set)?;
            let train_mse = noisy.dataset_mse(&train_set)?;
            (report, preds, train_mse)
        }
        (mut model, _) => {
            let report = train(&mut model, &train_set, Some(&test_set), &cfg)?;
            // Evaluate-only noise perturbs predictions of the noiselessly
            // trained model.
            let (preds, train_mse) = match (&model, spec.noise.is_none()) {
                (BuiltModel::Hybrid(m), false) => {
                    let noisy_preds = test_set
                        .inputs
                        .iter()
                        .map(|x| m.predict_with(x, Some(&spec.noise)))
                        .collect::<Result<Vec<f64>>>()?;
                    (noisy_preds, model.dataset_mse(&train_set)?)
                }
                _ => (predict_all(&model, &test_set)?, model.dataset_mse(&train_set)?),
            };
            (report, preds, train_mse)
        }
    };
    let test_metrics = MetricReport::compute(&test_set.targets, &predictions)?;
    Ok(RunResult {
        seed,
        report,
        test_metrics,
        train_mse,
    })
}

fn predict_all<M: Trainable>(model: &M, data: &Dataset) -> Result<Vec<f64>> {
    data.inputs.iter().map(|x| model.predict(x)).collect()
}

/// Run `spec.train.repeats` seeded repetitions (seeds base, base+1, …) and
/// aggregate. Individual failures are recorded, not fatal.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateReport> {
    spec.validate()?;
    let seeds: Vec<u64> = (0..spec.train.repeats)
        .map(|r| spec.train.seed + r as u64)
        .collect();
    let outcomes: Vec<(u64, Result<RunResult>)> = seeds
        .iter()
        .map(|&s| (s, run_single(spec, s)))
        .collect();
    aggregate_outcomes(spec, outcomes)
}

/// Parallel variant used by the CLI; deterministic because every run owns an
/// independent seeded stream.
pub fn run_experiment_parallel(spec: &ExperimentSpec) -> Result<AggregateReport> {
    use rayon::prelude::*;
    spec.validate()?;
    let seeds: Vec<u64> = (0..spec.train.repeats)
        .map(|r| spec.train.seed + r as u64)
        .collect();
    let outcomes: Vec<(u64, Result<RunResult>)> = seeds
        .par_iter()
        .map(|&s| (s, run_single(spec, s)))
        .collect();
    aggregate_outcomes(spec, outcomes)
}

fn aggregate_outcomes(
    spec: &ExperimentSpec,
    outcomes: Vec<(u64, Result<RunResult>)>,
) -> Result<AggregateReport> {
    let mut runs = Vec::new();
    let mut failed = Vec::new();
    for (seed, out) in outcomes {
        match out {
            Ok(r) => runs.push(r),
            Err(e) => failed.push((seed, e.to_string())),
        }
    }
    if runs.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "all {} runs failed; first error: {}",
            failed.len(),
            failed[0].1
        )));
    }
    let mses: Vec<f64> = runs.iter().map(|r| r.test_metrics.mse).collect();
    let maes: Vec<f64> = runs.iter().map(|r| r.test_metrics.mae).collect();
    let (mean_test_mse, std_test_mse) = mean_std(&mses);
    let (mean_test_mae, std_test_mae) = mean_std(&maes);
    Ok(AggregateReport {
        spec: spec.clone(),
        runs,
        failed_runs: failed,
        mean_test_mse,
        std_test_mse,
        mean_test_mae,
        std_test_mae,
    })
}

/// Which parameterized family a circuit-metric sweep samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Trainable blocks alone on |0…0⟩.
    Pqc,
    /// Full re-uploading circuit with data-block angles treated as
    /// additional uniform parameters.
    Reupload,
}

/// One row of a circuit-metric sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSweepRow {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n_samples: usize,
    pub n_bins: usize,
    pub seed: u64,
}

/// Expressibility and entangling capability of the PQC-block family over a
/// (qubits × layers) grid. Cells run independently (safe to parallelize).
pub fn metric_sweep(
    qubit_grid: &[usize],
    layer_grid: &[usize],
    plan: &SamplingPlan,
    parallel: bool,
) -> Result<Vec<MetricSweepRow>> {
    metric_sweep_family(qubit_grid, layer_grid, plan, FamilyKind::Pqc, parallel)
}

pub fn metric_sweep_family(
    qubit_grid: &[usize],
    layer_grid: &[usize],
    plan: &SamplingPlan,
    family: FamilyKind,
    parallel: bool,
) -> Result<Vec<MetricSweepRow>> {
    use rayon::prelude::*;
    plan.validate()?;
    let cells: Vec<(usize, usize)> = qubit_grid
        .iter()
        .flat_map(|&q| layer_grid.iter().map(move |&l| (q, l)))
        .collect();
    let eval_cell = |&(q, l): &(usize, usize)| -> Result<Vec<MetricSweepRow>> {
        let (e_mean, e_std, x_mean, x_std) = match family {
            FamilyKind::Pqc => {
                let fam = PqcFamily::new(q, l, None)?;
                let e = entangling_capability(&fam, plan)?;
                let x = expressibility(&fam, plan)?;
                (e.0, e.1, x.0, x.1)
            }
            FamilyKind::Reupload => {
                let template = ReuploadCircuit::new(q, l, EmbeddingKind::Angle, None)?;
                let fam = ReuploadFamily::new(template)?;
                let e = entangling_capability(&fam, plan)?;
                let x = expressibility(&fam, plan)?;
                (e.0, e.1, x.0, x.1)
            }
        };
        let row = |metric: &str, mean: f64, std: f64| MetricSweepRow {
            n_qubits: q,
            n_layers: l,
            metric: metric.to_string(),
            mean,
            std,
            n_samples: plan.n_samples,
            n_bins: plan.n_bins,
            seed: plan.seed,
        };
        Ok(vec![
            row("entangling_capability", e_mean, e_std),
            row("expressibility_kl", x_mean, x_std),
        ])
    };
    let nested: Vec<Vec<MetricSweepRow>> = if parallel {
        cells.par_iter().map(eval_cell).collect::<Result<_>>()?
    } else {
        cells.iter().map(eval_cell).collect::<Result<_>>()?
    };
    Ok(nested.into_iter().flatten().collect())
}

/// One row of a noise sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSweepRow {
    pub channel: String,
    pub rate: f64,
    pub seed: u64,
    pub test_mse: f64,
    pub test_mae: f64,
}

/// Train the spec's model noiselessly once per seed, then evaluate the test
/// metrics under each (channel, rate) on the density-matrix backend.
pub fn noise_sweep(
    spec: &ExperimentSpec,
    channels: &[NoiseChannel],
    rates: &[f64],
) -> Result<Vec<NoiseSweepRow>> {
    if spec.model == ModelKind::Nn {
        return Err(Error::InvalidParameter(
            "noise sweeps need a quantum model".into(),
        ));
    }
    let mut rows = Vec::new();
    for rep in 0..spec.train.repeats {
        let seed = spec.train.seed + rep as u64;
        let mut clean = spec.clone();
        clean.noise = NoiseModel::none();
        clean.noise_mode = NoiseMode::EvaluateOnly;
        let (clean, train_set, test_set) = dataset_for(&clean, seed)?;
        let mut cfg = clean.train;
        cfg.seed = seed;
        let mut built = build_model(&clean, seed)?;
        train(&mut built, &train_set, None, &cfg)?;
        let model = match built {
            BuiltModel::Hybrid(m) => m,
            BuiltModel::Dense(_) => unreachable!("rejected above"),
        };
        for &channel in channels {
            for &rate in rates {
                let noise = NoiseModel::new(channel, rate, spec.noise.insertion)?;
                let preds = test_set
                    .inputs
                    .iter()
                    .map(|x| model.predict_with(x, Some(&noise)))
                    .collect::<Result<Vec<f64>>>()?;
                let metrics = MetricReport::compute(&test_set.targets, &preds)?;
                rows.push(NoiseSweepRow {
                    channel: channel_name(channel).to_string(),
                    rate,
                    seed,
                    test_mse: metrics.mse,
                    test_mae: metrics.mae,
                });
            }
        }
    }
    Ok(rows)
}

pub fn channel_name(channel: NoiseChannel) -> &'static str {
    match channel {
        NoiseChannel::Depolarizing => "depolarizing",
        NoiseChannel::AmplitudeDamping => "amplitude_damping",
        NoiseChannel::None => "none",
    }
}

/// One row of an embedding-scheme comparison sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingSweepRow {
    pub embedding: String,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub circuit_depth: u64,
    pub classical_params: usize,
    pub quantum_params: usize,
    pub mean_test_mse: f64,
    pub std_test_mse: f64,
    pub mean_test_mae: f64,
}

/// Angle vs amplitude embedding over a layer grid at fixed qubit count,
/// trained at toy scale on the spec's task.
pub fn embedding_sweep(
    base: &ExperimentSpec,
    layer_grid: &[usize],
) -> Result<Vec<EmbeddingSweepRow>> {
    let mut rows = Vec::new();
    for &kind in &[
        EmbeddingKind::Angle,
        EmbeddingKind::Amplitude {
            auto_normalize: true,
        },
    ] {
        for &l in layer_grid {
            let mut spec = base.clone();
            spec.embedding = kind;
            spec.n_layers = l;
            // Only the hybrid model supports both embeddings for every task.
            spec.model = ModelKind::Hqnn;
            let agg = run_experiment(&spec)?;
            let report = complexity_report(&spec)?;
            rows.push(EmbeddingSweepRow {
                embedding: match kind {
                    EmbeddingKind::Angle => "angle".into(),
                    EmbeddingKind::Amplitude { .. } => "amplitude".into(),
                },
                n_qubits: spec.n_qubits,
                n_layers: l,
                circuit_depth: report.circuit_depth,
                classical_params: report.classical_param_count,
                quantum_params: report.quantum_param_count,
                mean_test_mse: agg.mean_test_mse,
                std_test_mse: agg.std_test_mse,
                mean_test_mae: agg.mean_test_mae,
            });
        }
    }
    Ok(rows)
}

/// Result of the finite-difference gradient audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradAuditReport {
    pub n_models: usize,
    pub params_checked: usize,
    /// Worst relative disagreement between assembled gradients and central
    /// finite differences of the scalar loss.
    pub max_rel_err: f64,
    /// Worst absolute error of the shift rule against the analytic -sin(θ)
    /// derivative of a single-rotation circuit.
    pub analytic_max_err: f64,
    pub fd_tolerance: f64,
    pub analytic_tolerance: f64,
    pub passed: bool,
}

/// Audit `n_models` random hybrid models (≤ 3 qubits, ≤ 3 layers, classical
/// nets ≤ width 4): the assembled end-to-end gradient must match central
/// finite differences (step 1e-5) of the batch loss within `fd_tol` relative,
/// and the shift rule must reproduce -sin(θ) for single-rotation circuits to
/// `analytic_tol`.
pub fn gradient_audit(
    n_models: usize,
    seed: u64,
    fd_tol: f64,
    analytic_tol: f64,
) -> Result<GradAuditReport> {
    use hqnn_core::state::Observable;
    use hqnn_core::train::param_shift_grad;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel: f64 = 0.0;
    let mut params_checked = 0usize;
    const EPS: f64 = 1e-5;

    for _ in 0..n_models {
        let n_qubits = rng.gen_range(1..=3usize);
        let n_layers = rng.gen_range(1..=3usize);
        let d_in = rng.gen_range(1..=4usize);
        let acts = [Activation::Tanh, Activation::Sigmoid, Activation::Identity];
        let mut embed_widths = vec![d_in];
        if rng.gen_bool(0.4) {
            embed_widths.push(rng.gen_range(1..=4usize));
        }
        embed_widths.push(n_qubits);
        let embed_acts: Vec<Activation> = (0..embed_widths.len() - 1)
            .map(|_| acts[rng.gen_range(0..acts.len())])
            .collect();
        let embed = DenseNet::seeded(embed_widths, embed_acts, &mut rng)?;
        let mut regress_widths = vec![n_qubits];
        if rng.gen_bool(0.4) {
            regress_widths.push(rng.gen_range(1..=4usize));
        }
        regress_widths.push(1);
        let mut regress_acts: Vec<Activation> = (0..regress_widths.len() - 1)
            .map(|_| acts[rng.gen_range(0..acts.len())])
            .collect();
        *regress_acts.last_mut().unwrap() = Activation::Identity;
        let regress = DenseNet::seeded(regress_widths, regress_acts, &mut rng)?;
        let mut circuit = ReuploadCircuit::new(n_qubits, n_layers, EmbeddingKind::Angle, None)?;
        circuit.randomize_theta(&mut rng, -std::f64::consts::PI, std::f64::consts::PI);
        let model = HybridModel::new(Some(embed), circuit, Some(regress))?;

        let data = Dataset::new(
            (0..4)
                .map(|_| (0..d_in).map(|_| rng.gen_range(-1.5..1.5)).collect())
                .collect(),
            (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )?;
        let idx: Vec<usize> = (0..data.len()).collect();
        let (_, grads) = model.batch_loss_grad(&data, &idx)?;
        let params = model.params_flat();
        for k in 0..params.len() {
            let mut p = params.clone();
            p[k] = params[k] + EPS;
            let mut plus = model.clone();
            plus.set_params_flat(&p)?;
            p[k] = params[k] - EPS;
            let mut minus = model.clone();
            minus.set_params_flat(&p)?;
            let fd = (plus.dataset_mse(&data)? - minus.dataset_mse(&data)?) / (2.0 * EPS);
            let rel = (fd - grads[k]).abs() / fd.abs().max(grads[k].abs()).max(1e-3);
            max_rel = max_rel.max(rel);
            params_checked += 1;
        }
    }

    // Analytic reference: a single-rotation circuit RY(h) with one trainable
    // beta has d<Z>/dbeta = -sin(h + beta); at beta = 0 this is -sin(h).
    let circuit = ReuploadCircuit::new(1, 1, EmbeddingKind::Angle, None)?;
    let measured = Observable::singles(1);
    let mut analytic_max: f64 = 0.0;
    for k in 0..64 {
        let h = -3.0 + 6.0 * k as f64 / 63.0;
        let g = param_shift_grad(&circuit, &[h], &measured, &[1.0])?;
        let beta = circuit.theta_index(0, 0, 1);
        analytic_max = analytic_max.max((g[beta] + h.sin()).abs());
    }

    Ok(GradAuditReport {
        n_models,
        params_checked,
        max_rel_err: max_rel,
        analytic_max_err: analytic_max,
        fd_tolerance: fd_tol,
        analytic_tolerance: analytic_tol,
        passed: max_rel <= fd_tol && analytic_max <= analytic_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn damped_sinc_values() {
        // sin(15)/15 at the right edge; the 2-D function doubles it at (3,3).
        let f1 = DatasetFunction::DampedSinc1d;
        let expect = (15.0f64).sin() / 15.0;
        assert!((f1.eval(&[3.0]) - expect).abs() < 1e-15);
        let f2 = DatasetFunction::DampedSinc2d;
        assert!((f2.eval(&[3.0, 3.0]) - 2.0 * expect).abs() < 1e-15);
    }

    #[test]
    fn dataset_split_sizes_and_domain() {
        let spec = DatasetSpec::new(DatasetFunction::DampedSinc1d, 7);
        let (train, test) = make_dataset(&spec).unwrap();
        assert_eq!(train.len(), 200);
        assert_eq!(test.len(), 100);
        for x in train.inputs.iter().chain(&test.inputs) {
            assert!(x[0] > 0.0 && x[0] <= 3.0);
        }
        // Disjoint and deterministic.
        for x in &test.inputs {
            assert!(!train.inputs.contains(x));
        }
        let (train2, _) = make_dataset(&spec).unwrap();
        assert_eq!(train.inputs, train2.inputs);
    }

    #[test]
    fn complexity_matches_reference_counts() {
        // Univariate HQNN 1 qubit: 4 classical, 3L quantum.
        let spec = ExperimentSpec::new(TaskKind::Univariate, ModelKind::Hqnn, 1, 5);
        let r = complexity_report(&spec).unwrap();
        assert_eq!(r.classical_param_count, 4);
        assert_eq!(r.quantum_param_count, 15);
        // Multivariate HQNN 2 qubits, 1 layer: 9 classical + 6 quantum.
        let spec = ExperimentSpec::new(TaskKind::Multivariate, ModelKind::Hqnn, 2, 1);
        let r = complexity_report(&spec).unwrap();
        assert_eq!(r.classical_param_count, 9);
        assert_eq!(r.quantum_param_count, 6);
        // NN baseline, 5 layers of width 2 on the univariate task: 25.
        let spec = ExperimentSpec::new(TaskKind::Univariate, ModelKind::Nn, 0, 5);
        let r = complexity_report(&spec).unwrap();
        assert_eq!(r.classical_param_count, 25);
        // Angle depth 260 and amplitude depth 10480 at n=9, L=20.
        let mut spec = ExperimentSpec::new(TaskKind::Univariate, ModelKind::HqnnNoCin, 9, 20);
        spec.task = TaskKind::Univariate;
        spec.model = ModelKind::Qnn;
        // A 9-qubit angle circuit needs 9 inputs; use the hybrid preset for
        // the report (counts do not depend on the task's input dim for the
        // quantum side).
        spec.model = ModelKind::Hqnn;
        let r = complexity_report(&spec).unwrap();
        assert_eq!(r.circuit_depth, 260);
        assert_eq!(r.quantum_param_count, 540);
        spec.embedding = EmbeddingKind::Amplitude {
            auto_normalize: true,
        };
        let r = complexity_report(&spec).unwrap();
        assert_eq!(r.circuit_depth, 10480);
    }

    #[test]
    fn build_model_audits_counts() {
        for (task, model, q, l, c_expect, q_expect) in [
            (TaskKind::Univariate, ModelKind::Hqnn, 1, 5, 4, 15),
            (TaskKind::Univariate, ModelKind::HqnnNoCin, 1, 5, 2, 15),
            (TaskKind::Univariate, ModelKind::Qnn, 1, 5, 0, 15),
            (TaskKind::Multivariate, ModelKind::Hqnn, 2, 5, 9, 30),
            (TaskKind::Multivariate, ModelKind::HqnnNoCin, 2, 1, 3, 6),
            (TaskKind::Univariate, ModelKind::Nn, 0, 5, 25, 0),
            (TaskKind::Multivariate, ModelKind::Nn, 0, 10, 57, 0),
        ] {
            let spec = ExperimentSpec::new(task, model, q, l);
            let built = build_model(&spec, 0).unwrap();
            assert_eq!(built.classical_param_count(), c_expect, "{model:?}");
            assert_eq!(built.quantum_param_count(), q_expect, "{model:?}");
        }
    }

    #[test]
    fn incompatible_spec_is_rejected() {
        // Pure QNN with angle embedding needs input dim == qubit count.
        let spec = ExperimentSpec::new(TaskKind::Univariate, ModelKind::Qnn, 2, 1);
        assert!(spec.validate().is_err());
        let spec = ExperimentSpec::new(TaskKind::Multivariate, ModelKind::HqnnNoCin, 3, 1);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn single_run_produces_metrics() {
        let mut spec = ExperimentSpec::new(TaskKind::Univariate, ModelKind::Hqnn, 1, 2);
        spec.train.epochs = 2;
        let run = run_single(&spec, 1).unwrap();
        assert_eq!(run.report.epoch_train_loss.len(), 2);
        assert!(run.test_metrics.mse.is_finite());
        assert!(run.test_metrics.mse >= 0.0);
    }

    #[test]
    fn aggregate_over_repeats() {
        let mut spec = ExperimentSpec::new(TaskKind::Univariate, ModelKind::HqnnNoCin, 1, 1);
        spec.train.epochs = 1;
        spec.train.repeats = 3;
        let agg = run_experiment(&spec).unwrap();
        assert_eq!(agg.runs.len(), 3);
        assert!(agg.failed_runs.is_empty());
        assert!(agg.mean_test_mse.is_finite());
        // Parallel execution is bit-identical.
        let agg2 = run_experiment_parallel(&spec).unwrap();
        assert_eq!(agg.mean_test_mse, agg2.mean_test_mse);
        let m1: Vec<f64> = agg.runs.iter().map(|r| r.test_metrics.mse).collect();
        let m2: Vec<f64> = agg2.runs.iter().map(|r| r.test_metrics.mse).collect();
        assert_eq!(m1, m2);
    }

    #[test]
    fn metric_sweep_emits_grid_rows() {
        let plan = SamplingPlan {
            n_samples: 60,
            n_bins: 20,
            n_runs: 2,
            seed: 4,
        };
        let rows = metric_sweep(&[2, 3], &[1, 2], &plan, false).unwrap();
        // 2 metrics per cell.
        assert_eq!(rows.len(), 2 * 2 * 2);
        assert!(rows.iter().all(|r| r.mean.is_finite()));
        // Reported divergences are never negative.
        assert!(rows
            .iter()
            .filter(|r| r.metric == "expressibility_kl")
            .all(|r| r.mean >= 0.0));
    }

    #[test]
    fn embedding_sweep_compares_both_schemes() {
        let mut base = ExperimentSpec::new(TaskKind::Univariate, ModelKind::Hqnn, 1, 1);
        base.train.epochs = 1;
        base.train.repeats = 1;
        let rows = embedding_sweep(&base, &[1, 2]).unwrap();
        assert_eq!(rows.len(), 4);
        let angle: Vec<_> = rows.iter().filter(|r| r.embedding == "angle").collect();
        let amp: Vec<_> = rows.iter().filter(|r| r.embedding == "amplitude").collect();
        assert_eq!(angle.len(), 2);
        assert_eq!(amp.len(), 2);
        // Amplitude preparation dominates the depth accounting.
        assert!(amp[0].circuit_depth > angle[0].circuit_depth);
        assert!(rows.iter().all(|r| r.mean_test_mse.is_finite()));
    }

    #[test]
    fn noise_sweep_rows_cover_the_grid() {
        let mut spec = ExperimentSpec::new(TaskKind::Univariate, ModelKind::HqnnNoCin, 1, 1);
        spec.train.epochs = 1;
        spec.train.repeats = 1;
        let rows = noise_sweep(
            &spec,
            &[NoiseChannel::Depolarizing, NoiseChannel::AmplitudeDamping],
            &[0.0, 0.1],
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.test_mse.is_finite()));
    }
}
