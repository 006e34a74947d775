//! Flat key = value configuration files, one section per module, checked
//! against the published schema (unknown sections or keys are errors).
//! Every CLI flag mirrors a config key; flags win.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use hqnn_core::embed::EmbeddingKind;
use hqnn_core::noise::{Insertion, NoiseChannel};

use crate::experiment::{ModelKind, NoiseMode, TaskKind};

/// Schema: section -> allowed keys.
pub const SCHEMA: &[(&str, &[&str])] = &[
    (
        "experiment",
        &["task", "model", "qubits", "layers", "embedding", "data"],
    ),
    (
        "train",
        &[
            "learning_rate",
            "weight_decay",
            "beta1",
            "beta2",
            "epsilon",
            "epochs",
            "batch_size",
            "seed",
            "repeats",
            "cosine_schedule",
        ],
    ),
    ("noise", &["channel", "rate", "insertion", "mode"]),
    ("analysis", &["samples", "bins", "runs"]),
    ("output", &["dir", "jobs"]),
];

/// Parsed configuration: flat (section, key) -> raw value strings.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: BTreeMap<(String, String), String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if !SCHEMA.iter().any(|(s, _)| *s == section) {
                    bail!("line {}: unknown section [{section}]", lineno + 1);
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if section.is_empty() {
                bail!("line {}: key {key} outside any section", lineno + 1);
            }
            let allowed = SCHEMA
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, keys)| keys)
                .unwrap();
            if !allowed.contains(&key.as_str()) {
                bail!(
                    "line {}: unknown key '{key}' in section [{section}] (allowed: {})",
                    lineno + 1,
                    allowed.join(", ")
                );
            }
            values.insert((section.clone(), key), value);
        }
        Ok(Self { values })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(|s| s.as_str())
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config [{section}] {key} = '{raw}': {e}")),
        }
    }
}

pub fn parse_task(s: &str) -> Result<TaskKind> {
    match s {
        "univariate" => Ok(TaskKind::Univariate),
        "multivariate" => Ok(TaskKind::Multivariate),
        "custom_csv" | "custom-csv" => Ok(TaskKind::CustomCsv),
        _ => bail!("unknown task '{s}' (univariate, multivariate, custom_csv)"),
    }
}

pub fn parse_model(s: &str) -> Result<ModelKind> {
    match s {
        "nn" => Ok(ModelKind::Nn),
        "qnn" => Ok(ModelKind::Qnn),
        "hqnn" => Ok(ModelKind::Hqnn),
        "hqnn_no_cin" | "hqnn-no-cin" => Ok(ModelKind::HqnnNoCin),
        _ => bail!("unknown model '{s}' (nn, qnn, hqnn, hqnn_no_cin)"),
    }
}

pub fn parse_embedding(s: &str) -> Result<EmbeddingKind> {
    match s {
        "angle" => Ok(EmbeddingKind::Angle),
        "amplitude" => Ok(EmbeddingKind::Amplitude {
            auto_normalize: true,
        }),
        _ => bail!("unknown embedding '{s}' (angle, amplitude)"),
    }
}

pub fn parse_channel(s: &str) -> Result<NoiseChannel> {
    match s {
        "none" => Ok(NoiseChannel::None),
        "depolarizing" => Ok(NoiseChannel::Depolarizing),
        "amplitude_damping" | "amplitude-damping" => Ok(NoiseChannel::AmplitudeDamping),
        _ => bail!("unknown channel '{s}' (none, depolarizing, amplitude_damping)"),
    }
}

pub fn parse_insertion(s: &str) -> Result<Insertion> {
    match s {
        "after_each_gate" | "gate" => Ok(Insertion::AfterEachGate),
        "after_each_layer" | "layer" => Ok(Insertion::AfterEachLayer),
        _ => bail!("unknown insertion '{s}' (after_each_gate, after_each_layer)"),
    }
}

pub fn parse_noise_mode(s: &str) -> Result<NoiseMode> {
    match s {
        "evaluate_only" => Ok(NoiseMode::EvaluateOnly),
        "train_noisy" => Ok(NoiseMode::TrainNoisy),
        _ => bail!("unknown noise mode '{s}' (evaluate_only, train_noisy)"),
    }
}
