//! Pure statevectors, density matrices, and Pauli-Z observables.

use num_complex::Complex64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Pauli-Z observable `O_beta = Z^{b_0} ⊗ … ⊗ Z^{b_{n-1}}` given by the set
/// of wires that carry a Z factor (identity elsewhere).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observable {
    n_qubits: usize,
    beta: Vec<bool>,
}

impl Observable {
    /// Build from a bit vector; at least one bit must be set.
    pub fn new(beta: Vec<bool>) -> Result<Self> {
        if !beta.iter().any(|&b| b) {
            return Err(Error::EmptyObservable);
        }
        Ok(Self {
            n_qubits: beta.len(),
            beta,
        })
    }

    /// Single-Z observable on one wire of an `n_qubits` register.
    pub fn single(n_qubits: usize, wire: usize) -> Result<Self> {
        if wire >= n_qubits {
            return Err(Error::WireOutOfRange { wire, n_qubits });
        }
        let mut beta = vec![false; n_qubits];
        beta[wire] = true;
        Ok(Self { n_qubits, beta })
    }

    /// One single-Z observable per wire, the default measured set.
    pub fn singles(n_qubits: usize) -> Vec<Self> {
        (0..n_qubits)
            .map(|w| Self::single(n_qubits, w).expect("wire in range"))
            .collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn beta(&self) -> &[bool] {
        &self.beta
    }

    /// Basis-index mask with a 1 wherever a Z factor acts.
    /// Wire w maps to bit (n-1-w): qubit 0 is the most significant bit.
    fn index_mask(&self) -> usize {
        let n = self.n_qubits;
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0usize, |m, (w, _)| m | (1 << (n - 1 - w)))
    }
}

/// Full 2^n-amplitude description of an n-qubit pure state.
///
/// Invariants: the amplitude vector has length exactly 2^n and unit norm
/// (within 1e-10). Qubit 0 is the most significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits > 0, "state needs at least one qubit");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Build from explicit amplitudes; length must be a power of two and the
    /// norm must be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two().max(2),
                got: len,
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Construct without the normalization check. Internal use only; callers
    /// guarantee unit norm (gate application preserves it).
    pub(crate) fn from_parts_unchecked(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨psi| O_beta |psi⟩ for a tensor product of Z factors. Always real.
    pub fn expectation_z(&self, obs: &Observable) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: obs.n_qubits(),
            });
        }
        let mask = obs.index_mask();
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let sign = if (i & mask).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                sign * a.norm_sqr()
            })
            .sum())
    }

    /// Fidelity |⟨a|b⟩|^2 between two states of equal size.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let overlap: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }

    /// Reduced single-qubit density matrix of `keep_wire`, tracing out the rest.
    pub fn partial_trace(&self, keep_wire: usize) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        if keep_wire >= n {
            return Err(Error::WireOutOfRange {
                wire: keep_wire,
                n_qubits: n,
            });
        }
        let stride = 1usize << (n - 1 - keep_wire);
        let mut rho = [Complex64::new(0.0, 0.0); 4];
        for (i, a) in self.amps.iter().enumerate() {
            let bit_i = (i & stride != 0) as usize;
            // Partner index with the kept qubit flipped; pairs sharing all
            // other bits are the only off-diagonal contributions, and each
            // (row, col) entry is visited exactly once per traced-out config.
            let b = self.amps[i ^ stride];
            rho[bit_i * 2 + bit_i] += a * a.conj();
            rho[bit_i * 2 + (1 - bit_i)] += a * b.conj();
        }
        DensityMatrix::from_matrix(1, rho.to_vec())
    }

    /// Promote to the density matrix |psi⟩⟨psi|.
    pub fn to_density_matrix(&self) -> DensityMatrix {
        let d = self.dim();
        let mut mat = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                mat[r * d + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            mat,
        }
    }

    /// Equality up to global phase, within an elementwise tolerance.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        if self.n_qubits != other.n_qubits {
            return false;
        }
        // Align phases on the largest-magnitude amplitude.
        let k = (0..self.dim())
            .max_by(|&i, &j| {
                self.amps[i]
                    .norm_sqr()
                    .partial_cmp(&self.amps[j].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        if other.amps[k].norm() < 1e-14 {
            return self.amps[k].norm() < tol;
        }
        let phase = self.amps[k] / other.amps[k];
        let phase = phase / Complex64::new(phase.norm(), 0.0);
        self.amps
            .iter()
            .zip(&other.amps)
            .all(|(a, b)| (a - b * phase).norm() <= tol)
    }
}

/// Possibly-mixed n-qubit state as a 2^n × 2^n Hermitian, unit-trace matrix
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: Vec<Complex64>,
}

impl DensityMatrix {
    /// |0…0⟩⟨0…0|.
    pub fn zero_state(n_qubits: usize) -> Self {
        assert!(n_qubits > 0, "state needs at least one qubit");
        let d = 1usize << n_qubits;
        let mut mat = vec![Complex64::new(0.0, 0.0); d * d];
        mat[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, mat }
    }

    /// The maximally mixed state I / 2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut mat = vec![Complex64::new(0.0, 0.0); d * d];
        let p = 1.0 / d as f64;
        for i in 0..d {
            mat[i * d + i] = Complex64::new(p, 0.0);
        }
        Self { n_qubits, mat }
    }

    /// Build from a row-major matrix, checking Hermiticity and unit trace.
    pub fn from_matrix(n_qubits: usize, mat: Vec<Complex64>) -> Result<Self> {
        let d = 1usize << n_qubits;
        if mat.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: mat.len(),
            });
        }
        let trace: Complex64 = (0..d).map(|i| mat[i * d + i]).sum();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm_sq: trace.re,
            });
        }
        for r in 0..d {
            for c in 0..=r {
                if (mat[r * d + c] - mat[c * d + r].conj()).norm() > NORM_TOL {
                    return Err(Error::InvalidParameter(
                        "density matrix is not Hermitian".into(),
                    ));
                }
            }
        }
        Ok(Self { n_qubits, mat })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.mat
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut [Complex64] {
        &mut self.mat
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.mat[i * d + i]).sum()
    }

    /// Tr(rho^2); 1 for pure states, 1/2^n for the maximally mixed state.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut p = 0.0;
        for r in 0..d {
            for c in 0..d {
                // Tr(rho rho) = sum_{r,c} rho[r,c] rho[c,r] with rho Hermitian.
                p += (self.mat[r * d + c] * self.mat[c * d + r]).re;
            }
        }
        p
    }

    /// Tr(O_beta rho); only the diagonal contributes.
    pub fn expectation_z(&self, obs: &Observable) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: obs.n_qubits(),
            });
        }
        let d = self.dim();
        let mask = obs.index_mask();
        Ok((0..d)
            .map(|i| {
                let sign = if (i & mask).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                sign * self.mat[i * d + i].re
            })
            .sum())
    }

    /// Reduced single-qubit density matrix of `keep_wire`.
    pub fn partial_trace(&self, keep_wire: usize) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        if keep_wire >= n {
            return Err(Error::WireOutOfRange {
                wire: keep_wire,
                n_qubits: n,
            });
        }
        let d = self.dim();
        let stride = 1usize << (n - 1 - keep_wire);
        let mut rho = vec![Complex64::new(0.0, 0.0); 4];
        for r in 0..d {
            let br = (r & stride != 0) as usize;
            // Column must agree with the row on all traced-out bits.
            for bc in 0..2usize {
                let c = if bc == 1 { r | stride } else { r & !stride };
                rho[br * 2 + bc] += self.mat[r * d + c];
            }
        }
        DensityMatrix::from_matrix(1, rho)
    }

    /// Smallest eigenvalue estimate used by the PSD sanity check
    /// (power iteration on sI - rho; exact for our 2x2 reduced states,
    /// a bound otherwise).
    pub fn min_eigenvalue_2x2(&self) -> Option<f64> {
        if self.n_qubits != 1 {
            return None;
        }
        let a = self.mat[0].re;
        let d = self.mat[3].re;
        let b = self.mat[1];
        let mean = 0.5 * (a + d);
        let disc = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
        Some(mean - disc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{apply_gate, Gate};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_state_has_unit_norm() {
        let s = StateVector::zero(3);
        assert_eq!(s.dim(), 8);
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn from_amplitudes_rejects_bad_inputs() {
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(0.9, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn expectation_z_basis_states() {
        // |0>, beta=[1] -> +1 ; |1>, beta=[1] -> -1
        let zero = StateVector::zero(1);
        let one = StateVector::from_amplitudes(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let z = Observable::single(1, 0).unwrap();
        assert!((zero.expectation_z(&z).unwrap() - 1.0).abs() < 1e-15);
        assert!((one.expectation_z(&z).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_z_ry_rotated() {
        // <Z> of RY(theta)|0> is cos(theta).
        let z = Observable::single(1, 0).unwrap();
        for theta in [0.3, 1.1, 2.5] {
            let s = apply_gate(
                &StateVector::zero(1),
                &Gate::ry(0, theta),
            )
            .unwrap();
            assert!((s.expectation_z(&z).unwrap() - theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn expectation_z_length_mismatch() {
        let s = StateVector::zero(2);
        let z = Observable::single(1, 0).unwrap();
        assert!(s.expectation_z(&z).is_err());
    }

    #[test]
    fn parity_observable_on_two_qubits() {
        // Z⊗Z on |01> -> -1.
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[1] = c(1.0, 0.0);
        let s = StateVector::from_amplitudes(amps).unwrap();
        let zz = Observable::new(vec![true, true]).unwrap();
        assert!((s.expectation_z(&zz).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn observable_needs_a_wire() {
        assert!(Observable::new(vec![false, false]).is_err());
    }

    #[test]
    fn fidelity_cases() {
        let zero = StateVector::zero(1);
        let one = StateVector::from_amplitudes(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((zero.fidelity(&zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(zero.fidelity(&one).unwrap().abs() < 1e-15);
        // (|0>, RY(pi/2)|0>) -> 0.5 = |cos(pi/4)|^2
        let rot = apply_gate(&zero, &Gate::ry(0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((zero.fidelity(&rot).unwrap() - 0.5).abs() < 1e-12);
        // symmetry
        assert!((rot.fidelity(&zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_size_mismatch() {
        assert!(StateVector::zero(1).fidelity(&StateVector::zero(2)).is_err());
    }

    #[test]
    fn partial_trace_product_and_bell() {
        // |00>, keep 0 -> |0><0|
        let s = StateVector::zero(2);
        let r = s.partial_trace(0).unwrap();
        assert!((r.matrix()[0].re - 1.0).abs() < 1e-12);
        assert!(r.matrix()[3].norm() < 1e-12);

        // Bell state, keep 0 -> I/2 (direct partial-trace arithmetic)
        let inv = 1.0 / 2f64.sqrt();
        let bell = StateVector::from_amplitudes(vec![
            c(inv, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(inv, 0.0),
        ])
        .unwrap();
        let r = bell.partial_trace(0).unwrap();
        assert!((r.matrix()[0].re - 0.5).abs() < 1e-12);
        assert!((r.matrix()[3].re - 0.5).abs() < 1e-12);
        assert!(r.matrix()[1].norm() < 1e-12);

        // |+> ⊗ |0>, keep 1 -> |0><0|
        let plus_zero = StateVector::from_amplitudes(vec![
            c(inv, 0.0),
            c(0.0, 0.0),
            c(inv, 0.0),
            c(0.0, 0.0),
        ])
        .unwrap();
        let r = plus_zero.partial_trace(1).unwrap();
        assert!((r.matrix()[0].re - 1.0).abs() < 1e-12);

        assert!(s.partial_trace(2).is_err());
    }

    #[test]
    fn density_matrix_expectations() {
        // rho = |0><0| -> +1 ; maximally mixed -> 0
        let z = Observable::single(1, 0).unwrap();
        let pure = DensityMatrix::zero_state(1);
        assert!((pure.expectation_z(&z).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!(mixed.expectation_z(&z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pure_state_promotion_matches_expectations() {
        let s = apply_gate(&StateVector::zero(1), &Gate::ry(0, 0.7)).unwrap();
        let rho = s.to_density_matrix();
        let z = Observable::single(1, 0).unwrap();
        assert!(
            (rho.expectation_z(&z).unwrap() - s.expectation_z(&z).unwrap()).abs() < 1e-12
        );
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_insensitive_equality() {
        let s = apply_gate(&StateVector::zero(1), &Gate::ry(0, 0.9)).unwrap();
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = StateVector::from_amplitudes(
            s.amplitudes().iter().map(|a| a * phase).collect(),
        )
        .unwrap();
        assert!(s.approx_eq_up_to_phase(&rotated, 1e-12));
        let other = apply_gate(&StateVector::zero(1), &Gate::ry(0, 1.0)).unwrap();
        assert!(!s.approx_eq_up_to_phase(&other, 1e-6));
    }
}
