//! End-to-end training of hybrid models: parameter-shift gradients for the
//! quantum parameters and encoded inputs, exact backprop for the classical
//! networks, AdamW updates, and the seeded minibatch loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::circuit::{QnnOutput, ReuploadCircuit, Shift};
use crate::dense::DenseNet;
use crate::error::{Error, Result};
use crate::noise::{noisy_final_dm, NoiseModel};
use crate::state::Observable;

/// Step size for the finite-difference fallback on amplitude-embedded inputs.
const AMP_FD_STEP: f64 = 1e-5;

/// Optimizer and loop settings. Defaults follow the reference protocol:
/// AdamW at a constant 0.005 learning rate with 0.01 decoupled weight decay,
/// 20 epochs of batch-16 minibatches, five repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub repeats: usize,
    /// Optional cosine decay of the learning rate over the epoch count;
    /// off by default (constant rate).
    pub cosine_schedule: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 20,
            batch_size: 16,
            seed: 0,
            repeats: 5,
            cosine_schedule: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.learning_rate > 0.0
            && self.weight_decay >= 0.0
            && self.epsilon > 0.0
            && self.epochs > 0
            && self.batch_size > 0
            && self.repeats > 0;
        if !positive {
            return Err(Error::InvalidParameter(
                "train config fields must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidParameter(
                "beta1 and beta2 must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Mean squared error over equal-length prediction and target vectors.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64)
}

/// Gradient of [`mse_loss`] w.r.t. the predictions: 2(pred - target)/n.
pub fn mse_grad(pred: &[f64], target: &[f64]) -> Vec<f64> {
    let n = pred.len() as f64;
    pred.iter()
        .zip(target)
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect()
}

pub(crate) fn shift_gradient_impl<F>(
    circuit: &ReuploadCircuit,
    _h: &[f64],
    measured: &[Observable],
    upstream: &[f64],
    eval: F,
) -> Result<Vec<f64>>
where
    F: Fn(Option<Shift>) -> Result<Vec<f64>>,
{
    if upstream.len() != measured.len() {
        return Err(Error::DimensionMismatch {
            expected: measured.len(),
            got: upstream.len(),
        });
    }
    let mut grad = vec![0.0; circuit.param_count()];
    for (index, g) in grad.iter_mut().enumerate() {
        let plus = eval(Some(Shift::Theta {
            index,
            delta: FRAC_PI_2,
        }))?;
        let minus = eval(Some(Shift::Theta {
            index,
            delta: -FRAC_PI_2,
        }))?;
        *g = upstream
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(u, (p, m))| u * 0.5 * (p - m))
            .sum();
    }
    Ok(grad)
}

/// Exact gradient of `upstream · expectations` w.r.t. every circuit angle via
/// the ±π/2 shift rule: two circuit evaluations per parameter.
pub fn param_shift_grad(
    circuit: &ReuploadCircuit,
    h: &[f64],
    measured: &[Observable],
    upstream: &[f64],
) -> Result<Vec<f64>> {
    shift_gradient_impl(circuit, h, measured, upstream, |shift| {
        circuit
            .forward_shifted(h, measured, shift)
            .map(|o| o.expectations)
    })
}

/// Gradient w.r.t. the encoded input vector h. Each h_i feeds one RY per
/// layer, so the derivative is the sum of per-occurrence shift terms.
/// Angle embedding only.
pub fn input_shift_grad(
    circuit: &ReuploadCircuit,
    h: &[f64],
    measured: &[Observable],
    upstream: &[f64],
) -> Result<Vec<f64>> {
    if !circuit.embedding().is_angle() {
        return Err(Error::AmplitudeInputGradient);
    }
    if upstream.len() != measured.len() {
        return Err(Error::DimensionMismatch {
            expected: measured.len(),
            got: upstream.len(),
        });
    }
    let mut grad = vec![0.0; h.len()];
    for (wire, g) in grad.iter_mut().enumerate() {
        for layer in 0..circuit.n_layers() {
            let plus = circuit
                .forward_shifted(
                    h,
                    measured,
                    Some(Shift::Input {
                        wire,
                        layer,
                        delta: FRAC_PI_2,
                    }),
                )?
                .expectations;
            let minus = circuit
                .forward_shifted(
                    h,
                    measured,
                    Some(Shift::Input {
                        wire,
                        layer,
                        delta: -FRAC_PI_2,
                    }),
                )?
                .expectations;
            *g += upstream
                .iter()
                .zip(plus.iter().zip(&minus))
                .map(|(u, (p, m))| u * 0.5 * (p - m))
                .sum::<f64>();
        }
    }
    Ok(grad)
}

/// First and second AdamW moment accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamWState {
    pub fn new(param_count: usize) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }
}

/// One AdamW update at step t >= 1 with bias-corrected moments and decoupled
/// weight decay: θ ← θ − η(m̂/(√v̂ + ε) + λθ).
pub fn adamw_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamWState,
    config: &TrainConfig,
    t: u64,
) {
    adamw_step_lr(params, grads, state, config, t, config.learning_rate);
}

fn adamw_step_lr(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamWState,
    config: &TrainConfig,
    t: u64,
    lr: f64,
) {
    debug_assert!(t >= 1);
    debug_assert_eq!(params.len(), grads.len());
    let b1 = config.beta1;
    let b2 = config.beta2;
    let bc1 = 1.0 - b1.powi(t as i32);
    let bc2 = 1.0 - b2.powi(t as i32);
    for i in 0..params.len() {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * (m_hat / (v_hat.sqrt() + config.epsilon) + config.weight_decay * params[i]);
    }
}

/// A supervised scalar-regression dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Anything the minibatch loop can optimize: a flat parameter view plus a
/// batched loss-and-gradient evaluation.
pub trait Trainable {
    fn params_flat(&self) -> Vec<f64>;
    fn set_params_flat(&mut self, params: &[f64]) -> Result<()>;
    fn predict(&self, x: &[f64]) -> Result<f64>;
    /// Mean batch loss and its gradient w.r.t. the flat parameters.
    fn batch_loss_grad(&self, data: &Dataset, idx: &[usize]) -> Result<(f64, Vec<f64>)>;

    fn dataset_mse(&self, data: &Dataset) -> Result<f64> {
        let preds = data
            .inputs
            .iter()
            .map(|x| self.predict(x))
            .collect::<Result<Vec<f64>>>()?;
        mse_loss(&preds, &data.targets)
    }
}

/// Composition classical embedding network → re-uploading circuit →
/// classical regression network, with a unified flat parameter view
/// `[embedding params, circuit angles, regression params]`.
///
/// Either classical side may be absent: without a regression network the
/// prediction is the unweighted sum of the measured expectations; without an
/// embedding network the input feeds the circuit directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    embed_net: Option<DenseNet>,
    circuit: ReuploadCircuit,
    regress_net: Option<DenseNet>,
    measured_wires: Vec<usize>,
}

impl HybridModel {
    /// Measures every wire with a single-Z observable (the default set).
    pub fn new(
        embed_net: Option<DenseNet>,
        circuit: ReuploadCircuit,
        regress_net: Option<DenseNet>,
    ) -> Result<Self> {
        let wires = (0..circuit.n_qubits()).collect();
        Self::with_measured(embed_net, circuit, regress_net, wires)
    }

    /// Restrict measurement to K ≤ n wires.
    pub fn with_measured(
        embed_net: Option<DenseNet>,
        circuit: ReuploadCircuit,
        regress_net: Option<DenseNet>,
        measured_wires: Vec<usize>,
    ) -> Result<Self> {
        if measured_wires.is_empty() || measured_wires.len() > circuit.n_qubits() {
            return Err(Error::InvalidParameter(
                "measured set must have 1..=n wires".into(),
            ));
        }
        for &w in &measured_wires {
            if w >= circuit.n_qubits() {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    n_qubits: circuit.n_qubits(),
                });
            }
        }
        if let Some(e) = &embed_net {
            let out = e.output_width();
            let ok = match circuit.embedding() {
                crate::embed::EmbeddingKind::Angle => out == circuit.n_qubits(),
                crate::embed::EmbeddingKind::Amplitude { .. } => {
                    out >= 1 && out <= (1 << circuit.n_qubits())
                }
            };
            if !ok {
                return Err(Error::DimensionMismatch {
                    expected: circuit.input_width(),
                    got: out,
                });
            }
        }
        if let Some(r) = &regress_net {
            if r.input_width() != measured_wires.len() {
                return Err(Error::DimensionMismatch {
                    expected: measured_wires.len(),
                    got: r.input_width(),
                });
            }
        }
        Ok(Self {
            embed_net,
            circuit,
            regress_net,
            measured_wires,
        })
    }

    pub fn embed_net(&self) -> Option<&DenseNet> {
        self.embed_net.as_ref()
    }

    pub fn circuit(&self) -> &ReuploadCircuit {
        &self.circuit
    }

    pub fn regress_net(&self) -> Option<&DenseNet> {
        self.regress_net.as_ref()
    }

    pub fn measured(&self) -> Vec<Observable> {
        self.measured_wires
            .iter()
            .map(|&w| Observable::single(self.circuit.n_qubits(), w).expect("validated"))
            .collect()
    }

    pub fn input_width(&self) -> usize {
        match &self.embed_net {
            Some(e) => e.input_width(),
            None => self.circuit.input_width(),
        }
    }

    pub fn classical_param_count(&self) -> usize {
        self.embed_net.as_ref().map_or(0, |n| n.count_params())
            + self.regress_net.as_ref().map_or(0, |n| n.count_params())
    }

    pub fn quantum_param_count(&self) -> usize {
        self.circuit.param_count()
    }

    pub fn param_count(&self) -> usize {
        self.classical_param_count() + self.quantum_param_count()
    }

    fn circuit_forward(&self, h: &[f64], noise: Option<&NoiseModel>) -> Result<QnnOutput> {
        let measured = self.measured();
        match noise {
            None => self.circuit.forward_measured(h, &measured),
            Some(nm) if nm.is_none() => self.circuit.forward_measured(h, &measured),
            Some(nm) => crate::noise::noisy_forward(&self.circuit, h, nm, &measured),
        }
    }

    /// Prediction with an optional density-matrix noise backend.
    pub fn predict_with(&self, x: &[f64], noise: Option<&NoiseModel>) -> Result<f64> {
        let h_owned;
        let h: &[f64] = match &self.embed_net {
            Some(e) => {
                let (out, _) = e.forward(x)?;
                h_owned = out;
                &h_owned
            }
            None => x,
        };
        let z = self.circuit_forward(h, noise)?.expectations;
        match &self.regress_net {
            Some(r) => Ok(r.forward(&z)?.0[0]),
            None => Ok(z.iter().sum()),
        }
    }

    /// Per-sample loss-gradient accumulation: classical backprop on the
    /// regression side, shift-rule gradients for the circuit angles and for
    /// the encoded inputs, then backprop through the embedding network.
    fn accumulate_sample_grad(
        &self,
        x: &[f64],
        upstream_scalar: f64,
        noise: Option<&NoiseModel>,
        grads: &mut [f64],
    ) -> Result<f64> {
        let measured = self.measured();
        // Embedding forward.
        let embed_out = match &self.embed_net {
            Some(e) => Some(e.forward(x)?),
            None => None,
        };
        let h: &[f64] = match &embed_out {
            Some((out, _)) => out,
            None => x,
        };
        // Circuit forward.
        let z = self.circuit_forward(h, noise)?.expectations;
        // Regression forward + prediction.
        let (pred, dz, regress_grads) = match &self.regress_net {
            Some(r) => {
                let (y, tape) = r.forward(&z)?;
                let (dz, pg) = r.backward(&tape, &[upstream_scalar])?;
                (y[0], dz, Some(pg))
            }
            None => (
                z.iter().sum::<f64>(),
                vec![upstream_scalar; z.len()],
                None,
            ),
        };
        // Circuit parameter gradients.
        let theta_grads = match noise {
            None => param_shift_grad(&self.circuit, h, &measured, &dz)?,
            Some(nm) if nm.is_none() => param_shift_grad(&self.circuit, h, &measured, &dz)?,
            Some(nm) => crate::noise::noisy_param_shift_grad(&self.circuit, h, nm, &measured, &dz)?,
        };
        // Input gradients into the embedding network.
        let embed_grads = match (&self.embed_net, &embed_out) {
            (Some(e), Some((_, tape))) => {
                let dh = if self.circuit.embedding().is_angle() {
                    match noise {
                        None => input_shift_grad(&self.circuit, h, &measured, &dz)?,
                        Some(nm) if nm.is_none() => {
                            input_shift_grad(&self.circuit, h, &measured, &dz)?
                        }
                        Some(nm) => self.noisy_input_grad_fd(h, &measured, &dz, nm)?,
                    }
                } else {
                    // No shift rule through amplitude preparation; central
                    // finite differences (documented approximation).
                    self.amplitude_input_grad_fd(h, &measured, &dz, noise)?
                };
                let (_, pg) = e.backward(tape, &dh)?;
                Some(pg)
            }
            _ => None,
        };
        // Pack into the flat layout.
        let mut k = 0;
        if let Some(pg) = embed_grads {
            for g in pg {
                grads[k] += g;
                k += 1;
            }
        } else if let Some(e) = &self.embed_net {
            k += e.count_params();
        }
        for g in theta_grads {
            grads[k] += g;
            k += 1;
        }
        if let Some(pg) = regress_grads {
            for g in pg {
                grads[k] += g;
                k += 1;
            }
        }
        Ok(pred)
    }

    fn amplitude_input_grad_fd(
        &self,
        h: &[f64],
        measured: &[Observable],
        dz: &[f64],
        noise: Option<&NoiseModel>,
    ) -> Result<Vec<f64>> {
        let mut dh = vec![0.0; h.len()];
        let mut probe = h.to_vec();
        for i in 0..h.len() {
            let orig = probe[i];
            probe[i] = orig + AMP_FD_STEP;
            let plus = self.circuit_forward(&probe, noise)?.expectations;
            probe[i] = orig - AMP_FD_STEP;
            let minus = self.circuit_forward(&probe, noise)?.expectations;
            probe[i] = orig;
            dh[i] = dz
                .iter()
                .zip(plus.iter().zip(&minus))
                .map(|(u, (p, m))| u * (p - m) / (2.0 * AMP_FD_STEP))
                .sum();
        }
        debug_assert_eq!(measured.len(), dz.len());
        Ok(dh)
    }

    fn noisy_input_grad_fd(
        &self,
        h: &[f64],
        measured: &[Observable],
        dz: &[f64],
        noise: &NoiseModel,
    ) -> Result<Vec<f64>> {
        // The encode occurrences obey the shift rule on the noisy backend too.
        crate::train::noisy_input_shift_grad(&self.circuit, h, noise, measured, dz)
    }
}

/// Input-occurrence shift rule evaluated on the density-matrix backend.
pub fn noisy_input_shift_grad(
    circuit: &ReuploadCircuit,
    h: &[f64],
    noise: &NoiseModel,
    measured: &[Observable],
    upstream: &[f64],
) -> Result<Vec<f64>> {
    if !circuit.embedding().is_angle() {
        return Err(Error::AmplitudeInputGradient);
    }
    let mut grad = vec![0.0; h.len()];
    for (wire, g) in grad.iter_mut().enumerate() {
        for layer in 0..circuit.n_layers() {
            let eval = |delta: f64| -> Result<Vec<f64>> {
                let rho = noisy_final_dm(
                    circuit,
                    h,
                    noise,
                    Some(Shift::Input { wire, layer, delta }),
                )?;
                measured.iter().map(|o| rho.expectation_z(o)).collect()
            };
            let plus = eval(FRAC_PI_2)?;
            let minus = eval(-FRAC_PI_2)?;
            *g += upstream
                .iter()
                .zip(plus.iter().zip(&minus))
                .map(|(u, (p, m))| u * 0.5 * (p - m))
                .sum::<f64>();
        }
    }
    Ok(grad)
}

impl Trainable for HybridModel {
    fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        if let Some(e) = &self.embed_net {
            out.extend(e.params_flat());
        }
        out.extend_from_slice(self.circuit.theta());
        if let Some(r) = &self.regress_net {
            out.extend(r.params_flat());
        }
        out
    }

    fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let mut k = 0;
        if let Some(e) = &mut self.embed_net {
            let n = e.count_params();
            e.set_params_flat(&params[k..k + n])?;
            k += n;
        }
        let nq = self.circuit.param_count();
        self.circuit.set_theta(&params[k..k + nq])?;
        k += nq;
        if let Some(r) = &mut self.regress_net {
            let n = r.count_params();
            r.set_params_flat(&params[k..k + n])?;
        }
        Ok(())
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_with(x, None)
    }

    fn batch_loss_grad(&self, data: &Dataset, idx: &[usize]) -> Result<(f64, Vec<f64>)> {
        batch_loss_grad_with_noise(self, data, idx, None)
    }
}

fn batch_loss_grad_with_noise(
    model: &HybridModel,
    data: &Dataset,
    idx: &[usize],
    noise: Option<&NoiseModel>,
) -> Result<(f64, Vec<f64>)> {
    if idx.is_empty() {
        return Err(Error::EmptyInput);
    }
    let b = idx.len() as f64;
    let mut grads = vec![0.0; model.param_count()];
    let mut sample = vec![0.0; model.param_count()];
    let mut loss = 0.0;
    for &i in idx {
        let x = &data.inputs[i];
        let y = data.targets[i];
        // Every gradient path is linear in the upstream scalar, so compute
        // the unit-upstream gradient once and scale by dL/dpred afterwards;
        // the 1/B batch average folds into that factor.
        sample.fill(0.0);
        let pred = model.accumulate_sample_grad(x, 1.0, noise, &mut sample)?;
        let upstream = 2.0 * (pred - y) / b;
        for (g, s) in grads.iter_mut().zip(&sample) {
            *g += upstream * s;
        }
        loss += (pred - y) * (pred - y);
    }
    Ok((loss / b, grads))
}

/// A hybrid model trained and evaluated on the noisy density-matrix backend.
#[derive(Debug, Clone)]
pub struct NoisyHybrid {
    pub model: HybridModel,
    pub noise: NoiseModel,
}

impl Trainable for NoisyHybrid {
    fn params_flat(&self) -> Vec<f64> {
        self.model.params_flat()
    }

    fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        self.model.set_params_flat(params)
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        self.model.predict_with(x, Some(&self.noise))
    }

    fn batch_loss_grad(&self, data: &Dataset, idx: &[usize]) -> Result<(f64, Vec<f64>)> {
        batch_loss_grad_with_noise(&self.model, data, idx, Some(&self.noise))
    }
}

impl Trainable for DenseNet {
    fn params_flat(&self) -> Vec<f64> {
        DenseNet::params_flat(self)
    }

    fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        DenseNet::set_params_flat(self, params)
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        if self.output_width() != 1 {
            return Err(Error::InvalidParameter(
                "scalar regression needs output width 1".into(),
            ));
        }
        Ok(self.forward(x)?.0[0])
    }

    fn batch_loss_grad(&self, data: &Dataset, idx: &[usize]) -> Result<(f64, Vec<f64>)> {
        if idx.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.output_width() != 1 {
            return Err(Error::InvalidParameter(
                "scalar regression needs output width 1".into(),
            ));
        }
        let b = idx.len() as f64;
        let mut grads = vec![0.0; self.count_params()];
        let mut loss = 0.0;
        for &i in idx {
            let (y, tape) = self.forward(&data.inputs[i])?;
            let resid = y[0] - data.targets[i];
            let (_, pg) = self.backward(&tape, &[2.0 * resid / b])?;
            for (g, p) in grads.iter_mut().zip(pg) {
                *g += p;
            }
            loss += resid * resid;
        }
        Ok((loss / b, grads))
    }
}

/// Per-epoch record of the training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Full-dataset training MSE measured at the end of each epoch.
    pub epoch_train_loss: Vec<f64>,
    /// Full-dataset evaluation MSE per epoch, when an eval set was given.
    pub epoch_eval_loss: Option<Vec<f64>>,
    pub best_epoch: usize,
    pub best_train_loss: f64,
}

/// Seeded minibatch loop: per-epoch shuffling, AdamW updates, divergence
/// detection, and restoration of the parameter snapshot with the lowest
/// end-of-epoch training loss.
pub fn train<M: Trainable>(
    model: &mut M,
    data: &Dataset,
    eval_data: Option<&Dataset>,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = model.params_flat();
    let mut state = AdamWState::new(params.len());
    let mut t: u64 = 0;
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut epoch_train_loss = Vec::with_capacity(config.epochs);
    let mut epoch_eval_loss = eval_data.map(|_| Vec::with_capacity(config.epochs));
    let mut best = (0usize, f64::INFINITY, params.clone());

    for epoch in 0..config.epochs {
        let lr = if config.cosine_schedule {
            0.5 * config.learning_rate
                * (1.0 + (std::f64::consts::PI * epoch as f64 / config.epochs as f64).cos())
        } else {
            config.learning_rate
        };
        indices.shuffle(&mut rng);
        for chunk in indices.chunks(config.batch_size) {
            let (loss, grads) = model.batch_loss_grad(data, chunk).map_err(|e| match e {
                Error::NonFinite => Error::Diverged {
                    epoch,
                    what: "non-finite activations in forward pass".into(),
                },
                other => other,
            })?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged {
                    epoch,
                    what: format!("non-finite minibatch loss {loss}"),
                });
            }
            t += 1;
            adamw_step_lr(&mut params, &grads, &mut state, config, t, lr);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Diverged {
                    epoch,
                    what: "parameters left the finite range".into(),
                });
            }
            model.set_params_flat(&params)?;
        }
        let train_loss = model.dataset_mse(data)?;
        if !train_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                what: "non-finite epoch loss".into(),
            });
        }
        epoch_train_loss.push(train_loss);
        if let (Some(trace), Some(eval)) = (&mut epoch_eval_loss, eval_data) {
            trace.push(model.dataset_mse(eval)?);
        }
        if train_loss < best.1 {
            best = (epoch, train_loss, params.clone());
        }
    }
    model.set_params_flat(&best.2)?;
    Ok(TrainReport {
        epoch_train_loss,
        epoch_eval_loss,
        best_epoch: best.0,
        best_train_loss: best.1,
    })
}
