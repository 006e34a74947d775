//! Density-matrix noise simulation: depolarizing and amplitude-damping
//! channels, noisy circuit evaluation, and noisy parameter-shift gradients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitOp, QnnOutput, ReuploadCircuit, Shift};
use crate::error::{Error, Result};
use crate::gates::apply_gate_dm_in_place;
use crate::state::{DensityMatrix, Observable};

/// Largest register simulated on the density-matrix backend (2^n × 2^n).
pub const MAX_NOISY_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChannel {
    Depolarizing,
    AmplitudeDamping,
    None,
}

/// Where channels are inserted while a circuit runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Insertion {
    /// After every gate, on the wires that gate acted on (default).
    AfterEachGate,
    /// Once per re-uploading layer, on every wire.
    AfterEachLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub channel: NoiseChannel,
    pub rate: f64,
    pub insertion: Insertion,
}

impl NoiseModel {
    pub fn new(channel: NoiseChannel, rate: f64, insertion: Insertion) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
            return Err(Error::RateOutOfRange(rate));
        }
        // NONE forces rate zero.
        let rate = if channel == NoiseChannel::None { 0.0 } else { rate };
        Ok(Self {
            channel,
            rate,
            insertion,
        })
    }

    pub fn none() -> Self {
        Self {
            channel: NoiseChannel::None,
            rate: 0.0,
            insertion: Insertion::AfterEachGate,
        }
    }

    pub fn is_none(&self) -> bool {
        self.channel == NoiseChannel::None || self.rate == 0.0
    }

    fn apply(&self, rho: &mut DensityMatrix, wire: usize) -> Result<()> {
        match self.channel {
            NoiseChannel::None => Ok(()),
            NoiseChannel::Depolarizing => depolarize_in_place(rho, wire, self.rate),
            NoiseChannel::AmplitudeDamping => amp_damp_in_place(rho, wire, self.rate),
        }
    }
}

/// rho <- (1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z) on one wire
/// (Pauli-twirl form: the observable consequence is the (1 - 4p/3)
/// contraction of that wire's ⟨Z⟩).
pub fn depolarize(rho: &DensityMatrix, wire: usize, p: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    depolarize_in_place(&mut out, wire, p)?;
    Ok(out)
}

fn depolarize_in_place(rho: &mut DensityMatrix, wire: usize, p: f64) -> Result<()> {
    check_rate(p)?;
    let n = rho.n_qubits();
    check_wire(wire, n)?;
    let d = rho.dim();
    let stride = 1usize << (n - 1 - wire);
    let mat = rho.matrix_mut();
    // Entrywise closed form on each 2x2 block of the acted wire. With block
    // entries a=(0,0), b=(0,1), e=(1,0), f=(1,1):
    //   X rho X = [f, e; b, a],  Y rho Y = [f, -e; -b, a],  Z rho Z = [a, -b; -e, f],
    // so the X and Y off-diagonal contributions cancel, leaving
    //   diagonal: (1 - 2p/3) a + (2p/3) f   (and symmetrically for f),
    //   off-diag: (1 - 4p/3) b              (and e).
    let diag_keep = 1.0 - 2.0 * p / 3.0;
    let diag_mix = 2.0 * p / 3.0;
    let off_keep = 1.0 - 4.0 * p / 3.0;
    for r0 in 0..d {
        if r0 & stride != 0 {
            continue;
        }
        let r1 = r0 | stride;
        for c0 in 0..d {
            if c0 & stride != 0 {
                continue;
            }
            let c1 = c0 | stride;
            let a = mat[r0 * d + c0];
            let b = mat[r0 * d + c1];
            let e = mat[r1 * d + c0];
            let f = mat[r1 * d + c1];
            mat[r0 * d + c0] = diag_keep * a + diag_mix * f;
            mat[r1 * d + c1] = diag_keep * f + diag_mix * a;
            mat[r0 * d + c1] = off_keep * b;
            mat[r1 * d + c0] = off_keep * e;
        }
    }
    Ok(())
}

/// Amplitude damping with Kraus pair K0 = [[1,0],[0,√(1-γ)]],
/// K1 = [[0,√γ],[0,0]] on one wire.
pub fn amp_damp(rho: &DensityMatrix, wire: usize, gamma: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    amp_damp_in_place(&mut out, wire, gamma)?;
    Ok(out)
}

fn amp_damp_in_place(rho: &mut DensityMatrix, wire: usize, gamma: f64) -> Result<()> {
    check_rate(gamma)?;
    let n = rho.n_qubits();
    check_wire(wire, n)?;
    let d = rho.dim();
    let stride = 1usize << (n - 1 - wire);
    let s = (1.0 - gamma).sqrt();
    let mat = rho.matrix_mut();
    // K0 rho K0† + K1 rho K1† entrywise on the 2x2 blocks of the acted wire.
    for r0 in 0..d {
        if r0 & stride != 0 {
            continue;
        }
        let r1 = r0 | stride;
        for c0 in 0..d {
            if c0 & stride != 0 {
                continue;
            }
            let c1 = c0 | stride;
            let a = mat[r0 * d + c0];
            let b = mat[r0 * d + c1];
            let e = mat[r1 * d + c0];
            let f = mat[r1 * d + c1];
            mat[r0 * d + c0] = a + gamma * f;
            mat[r0 * d + c1] = s * b;
            mat[r1 * d + c0] = s * e;
            mat[r1 * d + c1] = (1.0 - gamma) * f;
        }
    }
    Ok(())
}

fn check_rate(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::RateOutOfRange(p));
    }
    Ok(())
}

fn check_wire(wire: usize, n_qubits: usize) -> Result<()> {
    if wire >= n_qubits {
        return Err(Error::WireOutOfRange { wire, n_qubits });
    }
    Ok(())
}

pub(crate) fn noisy_final_dm(
    circuit: &ReuploadCircuit,
    h: &[f64],
    noise: &NoiseModel,
    shift: Option<Shift>,
) -> Result<DensityMatrix> {
    let n = circuit.n_qubits();
    if n > MAX_NOISY_QUBITS {
        return Err(Error::TooManyQubits {
            context: "density-matrix simulation",
            n_qubits: n,
            limit: MAX_NOISY_QUBITS,
        });
    }
    let mut rho = DensityMatrix::zero_state(n);
    for layer in circuit.layer_ops(h, shift)? {
        for op in layer {
            match &op {
                CircuitOp::Gate(g) => apply_gate_dm_in_place(&mut rho, g),
                CircuitOp::Dense(u) => apply_dense_dm(&mut rho, u),
            }
            if noise.insertion == Insertion::AfterEachGate {
                for w in op.wires(n) {
                    noise.apply(&mut rho, w)?;
                }
            }
        }
        if noise.insertion == Insertion::AfterEachLayer {
            for w in 0..n {
                noise.apply(&mut rho, w)?;
            }
        }
    }
    Ok(rho)
}

/// Evolve |0…0⟩⟨0…0| through the circuit with channel insertions; at rate 0
/// this reproduces the statevector expectations.
pub fn noisy_forward(
    circuit: &ReuploadCircuit,
    h: &[f64],
    noise: &NoiseModel,
    measured: &[Observable],
) -> Result<QnnOutput> {
    let rho = noisy_final_dm(circuit, h, noise, None)?;
    let expectations = measured
        .iter()
        .map(|obs| rho.expectation_z(obs))
        .collect::<Result<Vec<_>>>()?;
    Ok(QnnOutput { expectations })
}

/// Parameter-shift rule evaluated on noisy expectations (the gradient of the
/// effective observable under the channel's adjoint).
pub fn noisy_param_shift_grad(
    circuit: &ReuploadCircuit,
    h: &[f64],
    noise: &NoiseModel,
    measured: &[Observable],
    upstream: &[f64],
) -> Result<Vec<f64>> {
    crate::train::shift_gradient_impl(circuit, h, measured, upstream, |shift| {
        let rho = noisy_final_dm(circuit, h, noise, shift)?;
        measured.iter().map(|o| rho.expectation_z(o)).collect()
    })
}

/// U rho U† for a full-register dense unitary.
fn apply_dense_dm(rho: &mut DensityMatrix, u: &[Complex64]) {
    let d = rho.dim();
    let mat = rho.matrix();
    let mut tmp = vec![Complex64::new(0.0, 0.0); d * d];
    // tmp = U rho
    for r in 0..d {
        for k in 0..d {
            let uv = u[r * d + k];
            if uv.norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..d {
                tmp[r * d + c] += uv * mat[k * d + c];
            }
        }
    }
    // out = tmp U†
    let out = rho.matrix_mut();
    out.fill(Complex64::new(0.0, 0.0));
    for r in 0..d {
        for k in 0..d {
            let tv = tmp[r * d + k];
            if tv.norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..d {
                out[r * d + c] += tv * u[c * d + k].conj();
            }
        }
    }
}
