//! Classical-to-quantum data encodings: per-wire angle embedding, amplitude
//! embedding, and the re-uploading data block.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{apply_gate_in_place, Gate};
use crate::state::StateVector;

const AMP_NORM_TOL: f64 = 1e-9;

/// Which encoding a circuit uses for its classical input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    /// One feature per qubit as an RY rotation angle; constant circuit depth.
    Angle,
    /// Features written directly into the 2^n amplitudes. With
    /// `auto_normalize` the input is divided by its l2 norm, otherwise it
    /// must arrive normalized.
    Amplitude { auto_normalize: bool },
}

impl EmbeddingKind {
    pub fn is_angle(&self) -> bool {
        matches!(self, EmbeddingKind::Angle)
    }

    /// Width of the classical vector feeding an n-qubit circuit.
    pub fn input_width(&self, n_qubits: usize) -> usize {
        match self {
            EmbeddingKind::Angle => n_qubits,
            EmbeddingKind::Amplitude { .. } => 1 << n_qubits,
        }
    }
}

fn check_finite(h: &[f64]) -> Result<()> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Product state ⊗_i (cos(h_i/2)|0⟩ + sin(h_i/2)|1⟩), one qubit per feature.
///
/// Any real angle is accepted; values wrap naturally.
pub fn angle_embed(h: &[f64]) -> Result<StateVector> {
    if h.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_finite(h)?;
    encode_block(&StateVector::zero(h.len()), h)
}

/// Normalize x, pad with zeros to 2^n, and write it as state amplitudes.
///
/// This writes the state directly rather than synthesizing a preparation
/// circuit; the theoretical O(poly(N)) depth is accounted for analytically
/// in complexity reports.
pub fn amplitude_embed(x: &[f64], n_qubits: usize, auto_normalize: bool) -> Result<StateVector> {
    let dim = 1usize << n_qubits;
    if x.is_empty() || x.len() > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    check_finite(x)?;
    let norm_sq: f64 = x.iter().map(|v| v * v).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let scale = if auto_normalize {
        1.0 / norm_sq.sqrt()
    } else {
        if (norm_sq - 1.0).abs() > AMP_NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        1.0
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (a, &v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v * scale, 0.0);
    }
    Ok(StateVector::from_parts_unchecked(n_qubits, amps))
}

/// The re-uploading data block S(h): RY(h_i) on wire i of an existing state.
///
/// Applying it to |0…0⟩ coincides with [`angle_embed`].
pub fn encode_block(state: &StateVector, h: &[f64]) -> Result<StateVector> {
    if h.len() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            got: h.len(),
        });
    }
    check_finite(h)?;
    let mut out = state.clone();
    for (wire, &angle) in h.iter().enumerate() {
        apply_gate_in_place(&mut out, &Gate::ry(wire, angle));
    }
    Ok(out)
}

/// Dense unitary mapping |0…0⟩ to the normalized amplitude vector, as a
/// Householder reflection. Used to re-apply an amplitude-embedded state
/// inside each re-uploading layer.
pub fn prep_unitary(target: &StateVector) -> Vec<Complex64> {
    let d = target.dim();
    let v = target.amplitudes();
    let mut w: Vec<Complex64> = v.iter().map(|a| -a).collect();
    w[0] += 1.0; // w = e0 - v
    let wnorm_sq: f64 = w.iter().map(|a| a.norm_sqr()).sum();
    let mut u = vec![Complex64::new(0.0, 0.0); d * d];
    if wnorm_sq < 1e-24 {
        for i in 0..d {
            u[i * d + i] = Complex64::new(1.0, 0.0);
        }
        return u;
    }
    let scale = 2.0 / wnorm_sq;
    for r in 0..d {
        for c in 0..d {
            let refl = w[r] * w[c].conj() * scale;
            u[r * d + c] = -refl;
            if r == c {
                u[r * d + c] += 1.0;
            }
        }
    }
    u
}
