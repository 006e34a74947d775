//! File output: per-run trace CSV and JSON summary, experiment aggregates,
//! and sweep tables. CSV is UTF-8 with a header row and '.' decimals; JSON
//! uses struct-ordered (stable) keys. All numbers use shortest round-trip
//! formatting so re-reading a file reproduces the values exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use hqnn_core::eval::MetricReport;

use crate::experiment::{
    AggregateReport, EmbeddingSweepRow, ExperimentSpec, MetricSweepRow, NoiseSweepRow, RunResult,
};

/// Seconds since the Unix epoch; the only non-reproducible output field,
/// confined to the JSON headers.
fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// On-disk summary of one seeded run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub generated_at: u64,
    pub spec: ExperimentSpec,
    pub seed: u64,
    pub classical_param_count: usize,
    pub quantum_param_count: usize,
    pub best_epoch: usize,
    pub best_train_loss: f64,
    pub final_train_mse: f64,
    pub test_metrics: MetricReport,
}

/// On-disk aggregate over the repeats of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub generated_at: u64,
    pub spec: ExperimentSpec,
    pub seeds: Vec<u64>,
    pub failed_runs: Vec<(u64, String)>,
    pub per_run_test_mse: Vec<f64>,
    pub mean_test_mse: f64,
    pub std_test_mse: f64,
    pub mean_test_mae: f64,
    pub std_test_mae: f64,
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Epoch trace: one row per epoch with train and test MSE.
pub fn trace_csv(run: &RunResult) -> String {
    let mut out = String::from("epoch,train_mse,test_mse\n");
    let empty = Vec::new();
    let eval = run.report.epoch_eval_loss.as_ref().unwrap_or(&empty);
    for (e, &train) in run.report.epoch_train_loss.iter().enumerate() {
        let test = eval.get(e).map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{e},{train},{test}\n"));
    }
    out
}

/// Write `run-<seed>/trace.csv` and `run-<seed>/summary.json`; returns the
/// run directory.
pub fn write_run(
    output_dir: &Path,
    spec: &ExperimentSpec,
    run: &RunResult,
    classical_params: usize,
    quantum_params: usize,
) -> Result<PathBuf> {
    let dir = output_dir.join(format!("run-{}", run.seed));
    ensure_dir(&dir)?;
    write_file(&dir.join("trace.csv"), &trace_csv(run))?;
    let summary = RunSummary {
        generated_at: timestamp(),
        spec: spec.clone(),
        seed: run.seed,
        classical_param_count: classical_params,
        quantum_param_count: quantum_params,
        best_epoch: run.report.best_epoch,
        best_train_loss: run.report.best_train_loss,
        final_train_mse: run.train_mse,
        test_metrics: run.test_metrics.clone(),
    };
    write_file(
        &dir.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    Ok(dir)
}

/// Write `aggregate.json` for a finished experiment.
pub fn write_aggregate(output_dir: &Path, agg: &AggregateReport) -> Result<PathBuf> {
    ensure_dir(output_dir)?;
    let summary = AggregateSummary {
        generated_at: timestamp(),
        spec: agg.spec.clone(),
        seeds: agg.runs.iter().map(|r| r.seed).collect(),
        failed_runs: agg.failed_runs.clone(),
        per_run_test_mse: agg.runs.iter().map(|r| r.test_metrics.mse).collect(),
        mean_test_mse: agg.mean_test_mse,
        std_test_mse: agg.std_test_mse,
        mean_test_mae: agg.mean_test_mae,
        std_test_mae: agg.std_test_mae,
    };
    let path = output_dir.join("aggregate.json");
    write_file(&path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    Ok(path)
}

pub fn read_run_summary(path: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Parse a trace.csv back into (epoch, train_mse, test_mse) rows.
pub fn read_trace_csv(path: &Path) -> Result<Vec<(usize, f64, Option<f64>)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let epoch: usize = parts.next().context("epoch column")?.parse()?;
        let train: f64 = parts.next().context("train_mse column")?.parse()?;
        let test = match parts.next() {
            Some("") | None => None,
            Some(v) => Some(v.parse::<f64>()?),
        };
        rows.push((epoch, train, test));
    }
    Ok(rows)
}

pub fn metric_sweep_csv(rows: &[MetricSweepRow]) -> String {
    let mut out = String::from("qubits,layers,metric,mean,std,n_samples,n_bins,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n_qubits, r.n_layers, r.metric, r.mean, r.std, r.n_samples, r.n_bins, r.seed
        ));
    }
    out
}

pub fn noise_sweep_csv(rows: &[NoiseSweepRow]) -> String {
    let mut out = String::from("channel,rate,seed,test_mse,test_mae\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.channel, r.rate, r.seed, r.test_mse, r.test_mae
        ));
    }
    out
}

pub fn embedding_sweep_csv(rows: &[EmbeddingSweepRow]) -> String {
    let mut out = String::from(
        "embedding,qubits,layers,circuit_depth,classical_params,quantum_params,mean_test_mse,std_test_mse,mean_test_mae\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.embedding,
            r.n_qubits,
            r.n_layers,
            r.circuit_depth,
            r.classical_params,
            r.quantum_params,
            r.mean_test_mse,
            r.std_test_mse,
            r.mean_test_mae
        ));
    }
    out
}

pub fn write_sweep_csv(output_dir: &Path, contents: &str) -> Result<PathBuf> {
    ensure_dir(output_dir)?;
    let path = output_dir.join("sweep.csv");
    write_file(&path, contents)?;
    Ok(path)
}

/// Dataset dump: one row per sample, inputs then target.
pub fn dataset_csv(inputs: &[Vec<f64>], targets: &[f64], split: &[&str]) -> String {
    let dim = inputs.first().map(|x| x.len()).unwrap_or(0);
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    header.push("split".into());
    let mut out = header.join(",") + "\n";
    for ((x, y), s) in inputs.iter().zip(targets).zip(split) {
        let cols: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{},{},{}\n", cols.join(","), y, s));
    }
    out
}
