//! Gate definitions and their application to states and density matrices.
//!
//! Single-qubit gates are applied by stride iteration over basis-index pairs;
//! density matrices evolve as U rho U† with the same kernels applied to rows
//! and then (conjugated) to columns.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, StateVector};

/// A circuit gate. Angles are radians.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Rx { wire: usize, angle: f64 },
    Ry { wire: usize, angle: f64 },
    Rz { wire: usize, angle: f64 },
    /// General single-qubit rotation Rz(gamma) · Ry(beta) · Rz(alpha),
    /// i.e. the Z-Y decomposition with the global phase dropped.
    Rot {
        wire: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    PauliX { wire: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn rx(wire: usize, angle: f64) -> Self {
        Gate::Rx { wire, angle }
    }

    pub fn ry(wire: usize, angle: f64) -> Self {
        Gate::Ry { wire, angle }
    }

    pub fn rz(wire: usize, angle: f64) -> Self {
        Gate::Rz { wire, angle }
    }

    pub fn rot(wire: usize, alpha: f64, beta: f64, gamma: f64) -> Self {
        Gate::Rot {
            wire,
            alpha,
            beta,
            gamma,
        }
    }

    pub fn x(wire: usize) -> Self {
        Gate::PauliX { wire }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    /// Wires the gate acts on.
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { wire, .. }
            | Gate::Ry { wire, .. }
            | Gate::Rz { wire, .. }
            | Gate::Rot { wire, .. }
            | Gate::PauliX { wire } => vec![wire],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if let Gate::Cnot { control, target } = *self {
            if control == target {
                return Err(Error::DuplicateWires(control));
            }
        }
        for w in self.wires() {
            if w >= n_qubits {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    n_qubits,
                });
            }
        }
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => {
                if !angle.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
            Gate::Rot {
                alpha, beta, gamma, ..
            }
                if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) => {
                    return Err(Error::NonFinite);
                }
            _ => {}
        }
        Ok(())
    }

    /// Dense matrix realization: 2x2 row-major for single-qubit kinds,
    /// 4x4 for CNOT (control = first tensor factor).
    pub fn matrix(&self) -> Vec<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Gate::Rx { angle, .. } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                vec![
                    Complex64::new(c, 0.0),
                    Complex64::new(0.0, -s),
                    Complex64::new(0.0, -s),
                    Complex64::new(c, 0.0),
                ]
            }
            Gate::Ry { angle, .. } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                vec![
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ]
            }
            Gate::Rz { angle, .. } => {
                vec![
                    Complex64::from_polar(1.0, -angle / 2.0),
                    z,
                    z,
                    Complex64::from_polar(1.0, angle / 2.0),
                ]
            }
            Gate::Rot {
                alpha, beta, gamma, ..
            } => rot_matrix(alpha, beta, gamma).to_vec(),
            Gate::PauliX { .. } => vec![z, one, one, z],
            Gate::Cnot { .. } => {
                let mut m = vec![z; 16];
                m[0] = one;
                m[5] = one;
                m[11] = one;
                m[14] = one;
                m
            }
        }
    }
}

/// Closed form of Rz(gamma) Ry(beta) Rz(alpha) as a 2x2 row-major matrix.
pub fn rot_matrix(alpha: f64, beta: f64, gamma: f64) -> [Complex64; 4] {
    let (cb, sb) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    [
        Complex64::from_polar(cb, -(alpha + gamma) / 2.0),
        -Complex64::from_polar(sb, (alpha - gamma) / 2.0),
        Complex64::from_polar(sb, -(alpha - gamma) / 2.0),
        Complex64::from_polar(cb, (alpha + gamma) / 2.0),
    ]
}

/// Z-Y decomposition of a general rotation into three elementary gates,
/// applied in order RZ(alpha), RY(beta), RZ(gamma).
pub fn rot_decompose(wire: usize, alpha: f64, beta: f64, gamma: f64) -> [Gate; 3] {
    [
        Gate::rz(wire, alpha),
        Gate::ry(wire, beta),
        Gate::rz(wire, gamma),
    ]
}

/// Apply a gate to a pure state, returning the new state.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    gate.validate(state.n_qubits())?;
    let mut out = state.clone();
    apply_gate_in_place(&mut out, gate);
    Ok(out)
}

pub(crate) fn apply_gate_in_place(state: &mut StateVector, gate: &Gate) {
    let n = state.n_qubits();
    match *gate {
        Gate::Cnot { control, target } => {
            let cs = 1usize << (n - 1 - control);
            let ts = 1usize << (n - 1 - target);
            let amps = state.amplitudes_mut();
            for i in 0..amps.len() {
                if i & cs != 0 && i & ts == 0 {
                    amps.swap(i, i | ts);
                }
            }
        }
        Gate::PauliX { wire } => {
            let s = 1usize << (n - 1 - wire);
            let amps = state.amplitudes_mut();
            for i in 0..amps.len() {
                if i & s == 0 {
                    amps.swap(i, i | s);
                }
            }
        }
        _ => {
            let wire = gate.wires()[0];
            let m = gate.matrix();
            let m: [Complex64; 4] = [m[0], m[1], m[2], m[3]];
            apply_single_kernel(state.amplitudes_mut(), n, wire, &m);
        }
    }
}

/// 2x2 kernel over all (i, i|stride) pairs for one wire.
pub(crate) fn apply_single_kernel(
    amps: &mut [Complex64],
    n_qubits: usize,
    wire: usize,
    m: &[Complex64; 4],
) {
    let stride = 1usize << (n_qubits - 1 - wire);
    for i in 0..amps.len() {
        if i & stride == 0 {
            let j = i | stride;
            let a0 = amps[i];
            let a1 = amps[j];
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[j] = m[2] * a0 + m[3] * a1;
        }
    }
}

/// Apply a gate to a density matrix as U rho U†.
pub fn apply_gate_dm(rho: &DensityMatrix, gate: &Gate) -> Result<DensityMatrix> {
    gate.validate(rho.n_qubits())?;
    let mut out = rho.clone();
    apply_gate_dm_in_place(&mut out, gate);
    Ok(out)
}

pub(crate) fn apply_gate_dm_in_place(rho: &mut DensityMatrix, gate: &Gate) {
    let n = rho.n_qubits();
    let d = 1usize << n;
    match *gate {
        Gate::Cnot { control, target } => {
            let cs = 1usize << (n - 1 - control);
            let ts = 1usize << (n - 1 - target);
            let mat = rho.matrix_mut();
            // Row permutation (U rho), then column permutation (· U†).
            for r in 0..d {
                if r & cs != 0 && r & ts == 0 {
                    let r2 = r | ts;
                    for c in 0..d {
                        mat.swap(r * d + c, r2 * d + c);
                    }
                }
            }
            for c in 0..d {
                if c & cs != 0 && c & ts == 0 {
                    let c2 = c | ts;
                    for r in 0..d {
                        mat.swap(r * d + c, r * d + c2);
                    }
                }
            }
        }
        _ => {
            let wire = gate.wires()[0];
            let mv = gate.matrix();
            let m: [Complex64; 4] = [mv[0], mv[1], mv[2], mv[3]];
            let stride = 1usize << (n - 1 - wire);
            let mat = rho.matrix_mut();
            // Left-multiply by U: kernel over row pairs, every column.
            for r in 0..d {
                if r & stride == 0 {
                    let r2 = r | stride;
                    for c in 0..d {
                        let a0 = mat[r * d + c];
                        let a1 = mat[r2 * d + c];
                        mat[r * d + c] = m[0] * a0 + m[1] * a1;
                        mat[r2 * d + c] = m[2] * a0 + m[3] * a1;
                    }
                }
            }
            // Right-multiply by U†: kernel over column pairs, every row.
            for c in 0..d {
                if c & stride == 0 {
                    let c2 = c | stride;
                    for r in 0..d {
                        let a0 = mat[r * d + c];
                        let a1 = mat[r * d + c2];
                        mat[r * d + c] = a0 * m[0].conj() + a1 * m[1].conj();
                        mat[r * d + c2] = a0 * m[2].conj() + a1 * m[3].conj();
                    }
                }
            }
        }
    }
}
