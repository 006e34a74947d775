//! Circuit-family quality metrics: expressibility (KL divergence of the
//! sampled fidelity distribution against the Haar law) and entangling
//! capability (mean Meyer-Wallach entanglement).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{pqc_block, PqcBlockSpec, ReuploadCircuit};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Monte-Carlo settings for the family metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub n_samples: usize,
    pub n_bins: usize,
    pub n_runs: usize,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            n_bins: 75,
            n_runs: 4,
            seed: 0,
        }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.n_bins == 0 || self.n_runs == 0 {
            return Err(Error::InvalidParameter(
                "sampling plan fields must be positive".into(),
            ));
        }
        if self.n_samples < self.n_bins {
            return Err(Error::InvalidParameter(format!(
                "n_samples {} < n_bins {}",
                self.n_samples, self.n_bins
            )));
        }
        Ok(())
    }
}

/// A parameterized family: sample a parameter vector uniformly and produce
/// the corresponding state.
pub trait StateFamily {
    fn n_qubits(&self) -> usize;
    fn sample_state<R: Rng>(&self, rng: &mut R) -> StateVector;
}

/// The trainable-block family alone: L PQC blocks applied to |0…0⟩ with all
/// 3nL angles drawn uniformly from [0, 2π).
#[derive(Debug, Clone, Copy)]
pub struct PqcFamily {
    spec: PqcBlockSpec,
    n_layers: usize,
}

impl PqcFamily {
    pub fn new(n_qubits: usize, n_layers: usize, range_r: Option<usize>) -> Result<Self> {
        let range_r = if n_qubits == 1 { None } else { range_r.or(Some(1)) };
        Ok(Self {
            spec: PqcBlockSpec::new(n_qubits, range_r)?,
            n_layers,
        })
    }
}

impl StateFamily for PqcFamily {
    fn n_qubits(&self) -> usize {
        self.spec.n_qubits()
    }

    fn sample_state<R: Rng>(&self, rng: &mut R) -> StateVector {
        let n = self.spec.n_qubits();
        let mut state = StateVector::zero(n);
        let mut params = vec![0.0; 3 * n];
        for _ in 0..self.n_layers {
            for p in &mut params {
                *p = rng.gen_range(0.0..std::f64::consts::TAU);
            }
            state = pqc_block(&state, &self.spec, &params).expect("shapes fixed");
        }
        state
    }
}

/// A full re-uploading circuit with both the trainable angles and the
/// data-block angles treated as uniform parameters.
#[derive(Debug, Clone)]
pub struct ReuploadFamily {
    template: ReuploadCircuit,
}

impl ReuploadFamily {
    /// The template must use angle embedding.
    pub fn new(template: ReuploadCircuit) -> Result<Self> {
        if !template.embedding().is_angle() {
            return Err(Error::InvalidParameter(
                "re-uploading family sampling requires angle embedding".into(),
            ));
        }
        Ok(Self { template })
    }
}

impl StateFamily for ReuploadFamily {
    fn n_qubits(&self) -> usize {
        self.template.n_qubits()
    }

    fn sample_state<R: Rng>(&self, rng: &mut R) -> StateVector {
        let mut circuit = self.template.clone();
        circuit.randomize_theta(rng, 0.0, std::f64::consts::TAU);
        let h: Vec<f64> = (0..circuit.n_qubits())
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        circuit.final_state(&h).expect("shapes fixed")
    }
}

/// Haar fidelity density P(F) = (N-1)(1-F)^(N-2) for Hilbert dimension N.
pub fn haar_pdf(fidelity: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidParameter(
            "Haar fidelity law needs dimension >= 2".into(),
        ));
    }
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidParameter(format!(
            "fidelity {fidelity} outside [0, 1]"
        )));
    }
    Ok((dim as f64 - 1.0) * (1.0 - fidelity).powi(dim as i32 - 2))
}

/// Exact Haar probability mass of the fidelity bin [lo, hi]:
/// (1-lo)^(N-1) - (1-hi)^(N-1).
pub fn haar_bin_mass(lo: f64, hi: f64, dim: usize) -> f64 {
    let k = dim as i32 - 1;
    (1.0 - lo).powi(k) - (1.0 - hi).powi(k)
}

/// KL divergence of a fidelity sample against the binned Haar law.
/// Empty bins receive a 1e-9 floor on both distributions before
/// renormalization so the divergence stays finite.
pub fn kl_vs_haar(fidelities: &[f64], n_bins: usize, dim: usize) -> f64 {
    const EPS: f64 = 1e-9;
    let mut counts = vec![0u64; n_bins];
    for &f in fidelities {
        let idx = ((f * n_bins as f64) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let total = fidelities.len() as f64;
    let mut p: Vec<f64> = counts
        .iter()
        .map(|&c| (c as f64 / total).max(EPS))
        .collect();
    let mut q: Vec<f64> = (0..n_bins)
        .map(|b| {
            let lo = b as f64 / n_bins as f64;
            let hi = (b + 1) as f64 / n_bins as f64;
            haar_bin_mass(lo, hi, dim).max(EPS)
        })
        .collect();
    let ps: f64 = p.iter().sum();
    let qs: f64 = q.iter().sum();
    for v in &mut p {
        *v /= ps;
    }
    for v in &mut q {
        *v /= qs;
    }
    p.iter().zip(&q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum()
}

/// Expressibility over `plan.n_runs` independent runs: per run, sample
/// `n_samples` state pairs, histogram their fidelities, and take the KL
/// divergence against the Haar law. Lower is closer to Haar. Returns
/// (mean, std over runs).
pub fn expressibility<F: StateFamily>(family: &F, plan: &SamplingPlan) -> Result<(f64, f64)> {
    plan.validate()?;
    let dim = 1usize << family.n_qubits();
    if dim < 2 {
        return Err(Error::InvalidParameter(
            "expressibility needs at least one qubit".into(),
        ));
    }
    let kls: Vec<f64> = (0..plan.n_runs)
        .map(|run| {
            let mut rng = run_rng(plan.seed, run);
            let fidelities: Vec<f64> = (0..plan.n_samples)
                .map(|_| {
                    let a = family.sample_state(&mut rng);
                    let b = family.sample_state(&mut rng);
                    a.fidelity(&b).expect("equal sizes")
                })
                .collect();
            kl_vs_haar(&fidelities, plan.n_bins, dim)
        })
        .collect();
    Ok(mean_std(&kls))
}

/// Meyer-Wallach global entanglement Q = 2(1 - mean_k Tr(rho_k^2)).
/// Zero for every product state (and by convention for one qubit), up to 1
/// for globally entangled states.
pub fn meyer_wallach(state: &StateVector) -> f64 {
    let n = state.n_qubits();
    if n < 2 {
        return 0.0;
    }
    let mean_purity: f64 = (0..n)
        .map(|k| state.partial_trace(k).expect("wire in range").purity())
        .sum::<f64>()
        / n as f64;
    2.0 * (1.0 - mean_purity)
}

/// Mean Meyer-Wallach measure over uniformly sampled parameters;
/// (mean, std over runs), each within [0, 1].
pub fn entangling_capability<F: StateFamily>(
    family: &F,
    plan: &SamplingPlan,
) -> Result<(f64, f64)> {
    plan.validate()?;
    let qs: Vec<f64> = (0..plan.n_runs)
        .map(|run| {
            let mut rng = run_rng(plan.seed, run);
            let total: f64 = (0..plan.n_samples)
                .map(|_| meyer_wallach(&family.sample_state(&mut rng)))
                .sum();
            total / plan.n_samples as f64
        })
        .collect();
    Ok(mean_std(&qs))
}

/// Independent, reproducible substream per run.
fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(run as u64))
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
