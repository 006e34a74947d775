//! The data re-uploading circuit: alternating data-encode blocks and
//! parameterized blocks of per-qubit rotations plus a ranged CNOT layer.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embed::{amplitude_embed, prep_unitary, EmbeddingKind};
use crate::error::{Error, Result};
use crate::gates::{apply_gate_in_place, Gate};
use crate::state::{Observable, StateVector};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Wiring of one trainable block: per-qubit three-angle rotations followed by
/// a layer of n/gcd(n, r) CNOTs with range `r` (absent on a single qubit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PqcBlockSpec {
    n_qubits: usize,
    range_r: Option<usize>,
}

impl PqcBlockSpec {
    /// `range_r` must satisfy 0 < r < n; pass `None` for a single qubit.
    pub fn new(n_qubits: usize, range_r: Option<usize>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("need at least one qubit".into()));
        }
        match range_r {
            None if n_qubits > 1 => Err(Error::InvalidParameter(
                "multi-qubit block needs an entangler range".into(),
            )),
            Some(_) if n_qubits == 1 => Err(Error::InvalidParameter(
                "range constraint 0 < r < n has no solution for n = 1".into(),
            )),
            Some(r) if n_qubits > 1 && (r == 0 || r >= n_qubits) => Err(Error::InvalidParameter(
                format!("range {r} outside 0 < r < {n_qubits}"),
            )),
            _ => Ok(Self { n_qubits, range_r }),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn range_r(&self) -> Option<usize> {
        self.range_r
    }

    pub fn entangler_count(&self) -> usize {
        match self.range_r {
            None => 0,
            Some(r) => self.n_qubits / gcd(self.n_qubits, r),
        }
    }

    /// (control, target) pairs: for block index j in [1 ..= n/gcd(n,r)],
    /// control (j·r − r) mod n and target (j·r) mod n.
    pub fn entanglers(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        match self.range_r {
            None => Vec::new(),
            Some(r) => (1..=self.entangler_count())
                .map(|j| (((j * r) - r) % n, (j * r) % n))
                .collect(),
        }
    }
}

/// Apply one PQC block: ROT(alpha_i, beta_i, gamma_i) on every wire, then the
/// CNOT layer. `layer_params` holds 3n angles ordered per wire.
pub fn pqc_block(
    state: &StateVector,
    spec: &PqcBlockSpec,
    layer_params: &[f64],
) -> Result<StateVector> {
    let n = spec.n_qubits();
    if state.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.n_qubits(),
        });
    }
    if layer_params.len() != 3 * n {
        return Err(Error::DimensionMismatch {
            expected: 3 * n,
            got: layer_params.len(),
        });
    }
    let mut out = state.clone();
    for q in 0..n {
        apply_gate_in_place(
            &mut out,
            &Gate::rot(
                q,
                layer_params[3 * q],
                layer_params[3 * q + 1],
                layer_params[3 * q + 2],
            ),
        );
    }
    for (c, t) in spec.entanglers() {
        apply_gate_in_place(&mut out, &Gate::cnot(c, t));
    }
    Ok(out)
}

/// Per-measured-observable expectation values, each in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnnOutput {
    pub expectations: Vec<f64>,
}

/// One elementary operation of an unrolled circuit.
#[derive(Debug, Clone)]
pub(crate) enum CircuitOp {
    Gate(Gate),
    /// Full-register dense unitary (amplitude-embedding state preparation).
    Dense(Vec<Complex64>),
}

impl CircuitOp {
    pub(crate) fn wires(&self, n_qubits: usize) -> Vec<usize> {
        match self {
            CircuitOp::Gate(g) => g.wires(),
            CircuitOp::Dense(_) => (0..n_qubits).collect(),
        }
    }
}

/// Evaluation-time perturbation of a single rotation occurrence, used by the
/// parameter-shift rule.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Shift {
    /// Shift theta[flat index] by delta.
    Theta { index: usize, delta: f64 },
    /// Shift the encode angle of `wire` in layer `layer` only.
    Input {
        wire: usize,
        layer: usize,
        delta: f64,
    },
}

/// Immutable description of an L-layer data re-uploading circuit.
///
/// Each layer applies the data block S(h) followed by a PQC block; the
/// trainable tensor has shape [L][n][3] stored flat, 3nL angles total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuploadCircuit {
    n_qubits: usize,
    n_layers: usize,
    embedding: EmbeddingKind,
    range_r: Option<usize>,
    theta: Vec<f64>,
}

impl ReuploadCircuit {
    /// All-zero parameters; `range_r` defaults to 1 (ring) for n > 1.
    pub fn new(
        n_qubits: usize,
        n_layers: usize,
        embedding: EmbeddingKind,
        range_r: Option<usize>,
    ) -> Result<Self> {
        let range_r = match (n_qubits, range_r) {
            (1, _) => None,
            (_, None) => Some(1),
            (_, Some(r)) => Some(r),
        };
        // Validates the range constraint.
        PqcBlockSpec::new(n_qubits, range_r)?;
        Ok(Self {
            n_qubits,
            n_layers,
            embedding,
            range_r,
            theta: vec![0.0; 3 * n_qubits * n_layers],
        })
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        self.set_theta(&theta)?;
        Ok(self)
    }

    /// Draw every angle uniformly from [lo, hi).
    pub fn randomize_theta<R: Rng>(&mut self, rng: &mut R, lo: f64, hi: f64) {
        for t in &mut self.theta {
            *t = rng.gen_range(lo..hi);
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn embedding(&self) -> EmbeddingKind {
        self.embedding
    }

    pub fn range_r(&self) -> Option<usize> {
        self.range_r
    }

    pub fn block_spec(&self) -> PqcBlockSpec {
        PqcBlockSpec {
            n_qubits: self.n_qubits,
            range_r: self.range_r,
        }
    }

    /// Quantum parameter count, exactly 3·n·L.
    pub fn param_count(&self) -> usize {
        3 * self.n_qubits * self.n_layers
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.theta.clear();
        self.theta.extend_from_slice(theta);
        Ok(())
    }

    /// Flat index of theta[layer][qubit][k].
    pub fn theta_index(&self, layer: usize, qubit: usize, k: usize) -> usize {
        debug_assert!(layer < self.n_layers && qubit < self.n_qubits && k < 3);
        (layer * self.n_qubits + qubit) * 3 + k
    }

    /// Width of the classical input vector this circuit expects.
    pub fn input_width(&self) -> usize {
        self.embedding.input_width(self.n_qubits)
    }

    fn check_input(&self, h: &[f64]) -> Result<()> {
        match self.embedding {
            EmbeddingKind::Angle => {
                if h.len() != self.n_qubits {
                    return Err(Error::DimensionMismatch {
                        expected: self.n_qubits,
                        got: h.len(),
                    });
                }
            }
            EmbeddingKind::Amplitude { .. } => {
                if h.is_empty() || h.len() > (1 << self.n_qubits) {
                    return Err(Error::DimensionMismatch {
                        expected: 1 << self.n_qubits,
                        got: h.len(),
                    });
                }
            }
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Unrolled per-layer operations for the given input, with an optional
    /// shifted rotation occurrence.
    pub(crate) fn layer_ops(&self, h: &[f64], shift: Option<Shift>) -> Result<Vec<Vec<CircuitOp>>> {
        self.check_input(h)?;
        let n = self.n_qubits;
        let spec = self.block_spec();
        let prep = match self.embedding {
            EmbeddingKind::Angle => None,
            EmbeddingKind::Amplitude { auto_normalize } => {
                let target = amplitude_embed(h, n, auto_normalize)?;
                Some(prep_unitary(&target))
            }
        };
        let mut layers = Vec::with_capacity(self.n_layers);
        for l in 0..self.n_layers {
            let mut ops = Vec::with_capacity(2 * n + spec.entangler_count());
            match &prep {
                None => {
                    for (w, &angle) in h.iter().enumerate() {
                        let mut angle = angle;
                        if let Some(Shift::Input { wire, layer, delta }) = shift {
                            if wire == w && layer == l {
                                angle += delta;
                            }
                        }
                        ops.push(CircuitOp::Gate(Gate::ry(w, angle)));
                    }
                }
                Some(u) => ops.push(CircuitOp::Dense(u.clone())),
            }
            for q in 0..n {
                let base = self.theta_index(l, q, 0);
                let mut angles = [
                    self.theta[base],
                    self.theta[base + 1],
                    self.theta[base + 2],
                ];
                if let Some(Shift::Theta { index, delta }) = shift {
                    if index >= base && index < base + 3 {
                        angles[index - base] += delta;
                    }
                }
                ops.push(CircuitOp::Gate(Gate::rot(
                    q, angles[0], angles[1], angles[2],
                )));
            }
            for (c, t) in spec.entanglers() {
                ops.push(CircuitOp::Gate(Gate::cnot(c, t)));
            }
            layers.push(ops);
        }
        Ok(layers)
    }

    pub(crate) fn final_state_shifted(&self, h: &[f64], shift: Option<Shift>) -> Result<StateVector> {
        let mut state = StateVector::zero(self.n_qubits);
        for layer in self.layer_ops(h, shift)? {
            for op in layer {
                match op {
                    CircuitOp::Gate(g) => apply_gate_in_place(&mut state, &g),
                    CircuitOp::Dense(u) => apply_dense(&mut state, &u),
                }
            }
        }
        Ok(state)
    }

    /// Final state of the circuit on input `h`, starting from |0…0⟩.
    pub fn final_state(&self, h: &[f64]) -> Result<StateVector> {
        self.final_state_shifted(h, None)
    }

    pub(crate) fn forward_shifted(
        &self,
        h: &[f64],
        measured: &[Observable],
        shift: Option<Shift>,
    ) -> Result<QnnOutput> {
        let state = self.final_state_shifted(h, shift)?;
        let expectations = measured
            .iter()
            .map(|obs| state.expectation_z(obs))
            .collect::<Result<Vec<_>>>()?;
        Ok(QnnOutput { expectations })
    }

    /// Expectations of the measured observables; defaults to one single-Z
    /// observable per wire when `measured` is empty.
    pub fn forward_measured(&self, h: &[f64], measured: &[Observable]) -> Result<QnnOutput> {
        if measured.is_empty() {
            return self.forward(h);
        }
        self.forward_shifted(h, measured, None)
    }

    /// Forward pass with the default measured set (every wire, single Z).
    pub fn forward(&self, h: &[f64]) -> Result<QnnOutput> {
        self.forward_shifted(h, &Observable::singles(self.n_qubits), None)
    }

    /// Explicit dense product of all block matrices. Test oracle for the
    /// statevector path; limited to n ≤ 6.
    pub fn unitary(&self, h: &[f64]) -> Result<Vec<Complex64>> {
        if self.n_qubits > 6 {
            return Err(Error::TooManyQubits {
                context: "dense circuit unitary",
                n_qubits: self.n_qubits,
                limit: 6,
            });
        }
        let d = 1usize << self.n_qubits;
        let mut u = identity(d);
        for layer in self.layer_ops(h, None)? {
            for op in layer {
                let full = match op {
                    CircuitOp::Gate(g) => embed_gate(&g, self.n_qubits),
                    CircuitOp::Dense(m) => m,
                };
                u = mat_mul(&full, &u, d);
            }
        }
        Ok(u)
    }

    /// Gate-layer depth under the accounting convention used in complexity
    /// reports: (4 + n)·L for angle embedding, (2^n + 3 + n)·L for amplitude.
    pub fn depth_gate_layers(&self) -> u64 {
        let n = self.n_qubits as u64;
        let l = self.n_layers as u64;
        match self.embedding {
            EmbeddingKind::Angle => (4 + n) * l,
            EmbeddingKind::Amplitude { .. } => ((1u64 << n) + 3 + n) * l,
        }
    }

    /// Number of two-qubit (U(4)) gates. Amplitude embedding counts the
    /// 1/4(4^n - 3n - 1) CNOT lower bound of its preparation circuit per layer.
    pub fn u4_gate_count(&self) -> u64 {
        let l = self.n_layers as u64;
        let entanglers = self.block_spec().entangler_count() as u64 * l;
        match self.embedding {
            EmbeddingKind::Angle => entanglers,
            EmbeddingKind::Amplitude { .. } => {
                let n = self.n_qubits as u32;
                let prep = (4u64.pow(n) - 3 * n as u64 - 1) / 4;
                prep * l + entanglers
            }
        }
    }
}

fn identity(d: usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        m[i * d + i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn mat_mul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for k in 0..d {
            let av = a[r * d + k];
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..d {
                out[r * d + c] += av * b[k * d + c];
            }
        }
    }
    out
}

/// Embed a gate into the full 2^n-dimensional unitary by index arithmetic
/// (independent of the stride kernels used for simulation).
fn embed_gate(gate: &Gate, n_qubits: usize) -> Vec<Complex64> {
    let d = 1usize << n_qubits;
    match gate {
        Gate::Cnot { control, target } => {
            let cs = 1usize << (n_qubits - 1 - control);
            let ts = 1usize << (n_qubits - 1 - target);
            let mut m = vec![Complex64::new(0.0, 0.0); d * d];
            for i in 0..d {
                let j = if i & cs != 0 { i ^ ts } else { i };
                m[j * d + i] = Complex64::new(1.0, 0.0);
            }
            m
        }
        _ => {
            let g = gate.matrix();
            let wire = gate.wires()[0];
            let stride = 1usize << (n_qubits - 1 - wire);
            let mut m = vec![Complex64::new(0.0, 0.0); d * d];
            for i in 0..d {
                let bi = (i & stride != 0) as usize;
                for bj in 0..2usize {
                    let j = if bj == 1 { i | stride } else { i & !stride };
                    m[i * d + j] = g[bi * 2 + bj];
                }
            }
            m
        }
    }
}

/// Apply a full-register dense unitary to a state.
pub(crate) fn apply_dense(state: &mut StateVector, u: &[Complex64]) {
    let d = state.dim();
    let amps = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (r, o) in out.iter_mut().enumerate() {
        for (c, a) in amps.iter().enumerate() {
            *o += u[r * d + c] * a;
        }
    }
    state.amplitudes_mut().copy_from_slice(&out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn wiring_ring_for_three_qubits() {
        // n=3, r=1: (0->1), (1->2), (2->0) from the t_j, c_j formulas.
        let spec = PqcBlockSpec::new(3, Some(1)).unwrap();
        assert_eq!(spec.entanglers(), vec![(0, 1), (1, 2), (2, 0)]);
    }

    #[test]
    fn wiring_count_matches_gcd_formula() {
        for n in 2..=9usize {
            for r in 1..n {
                let spec = PqcBlockSpec::new(n, Some(r)).unwrap();
                assert_eq!(spec.entangler_count(), n / gcd(n, r));
                assert_eq!(spec.entanglers().len(), n / gcd(n, r));
            }
        }
    }

    #[test]
    fn nine_qubit_ring_covers_every_wire_once() {
        let spec = PqcBlockSpec::new(9, Some(1)).unwrap();
        let pairs = spec.entanglers();
        assert_eq!(pairs.len(), 9);
        let mut controls = [0usize; 9];
        let mut targets = [0usize; 9];
        for (c, t) in pairs {
            controls[c] += 1;
            targets[t] += 1;
        }
        assert!(controls.iter().all(|&k| k == 1));
        assert!(targets.iter().all(|&k| k == 1));
    }

    #[test]
    fn range_validation() {
        assert!(PqcBlockSpec::new(1, None).is_ok());
        assert!(PqcBlockSpec::new(1, Some(1)).is_err());
        assert!(PqcBlockSpec::new(4, Some(0)).is_err());
        assert!(PqcBlockSpec::new(4, Some(4)).is_err());
    }

    #[test]
    fn pqc_block_identity_on_zero_angles() {
        // Rotations are identity and CNOTs fix |0...0>.
        let spec = PqcBlockSpec::new(3, Some(1)).unwrap();
        let out = pqc_block(&StateVector::zero(3), &spec, &[0.0; 9]).unwrap();
        assert!((out.amplitudes()[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pqc_block_single_qubit_has_no_entangler() {
        let spec = PqcBlockSpec::new(1, None).unwrap();
        let out = pqc_block(&StateVector::zero(1), &spec, &[0.1, 0.8, -0.3]).unwrap();
        let direct = crate::gates::apply_gate(
            &StateVector::zero(1),
            &Gate::rot(0, 0.1, 0.8, -0.3),
        )
        .unwrap();
        for (a, b) in out.amplitudes().iter().zip(direct.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn pqc_block_shape_mismatch() {
        let spec = PqcBlockSpec::new(2, Some(1)).unwrap();
        assert!(pqc_block(&StateVector::zero(2), &spec, &[0.0; 5]).is_err());
    }

    #[test]
    fn param_count_identity() {
        // 3nL over the grid used in the tables; 27/135/270/405/540 at n=9.
        for n in [1usize, 2, 4, 7, 9] {
            for l in [1usize, 5, 10, 15, 20] {
                let r = if n == 1 { None } else { Some(1) };
                let c = ReuploadCircuit::new(n, l, EmbeddingKind::Angle, r).unwrap();
                assert_eq!(c.param_count(), 3 * n * l);
            }
        }
        let at9: Vec<usize> = [1, 5, 10, 15, 20]
            .iter()
            .map(|&l| {
                ReuploadCircuit::new(9, l, EmbeddingKind::Angle, Some(1))
                    .unwrap()
                    .param_count()
            })
            .collect();
        assert_eq!(at9, vec![27, 135, 270, 405, 540]);
    }

    #[test]
    fn forward_zero_circuit_gives_plus_one() {
        let c = ReuploadCircuit::new(3, 2, EmbeddingKind::Angle, Some(1)).unwrap();
        let out = c.forward(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out.expectations.len(), 3);
        for e in out.expectations {
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_single_qubit_reduces_to_analytic_cosine() {
        // 1 qubit, L=1, zero PQC angles, h=[x]: <Z> = cos(x).
        let c = ReuploadCircuit::new(1, 1, EmbeddingKind::Angle, None).unwrap();
        for x in [0.0, 0.4, 1.3, 2.9] {
            let out = c.forward(&[x]).unwrap();
            assert!((out.expectations[0] - x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut c = ReuploadCircuit::new(2, 2, EmbeddingKind::Angle, Some(1)).unwrap();
        c.randomize_theta(&mut rng, 0.0, 2.0 * PI);
        let a = c.forward(&[0.3, -0.8]).unwrap();
        let b = c.forward(&[0.3, -0.8]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unitary_of_empty_circuit_is_identity() {
        let c = ReuploadCircuit::new(2, 0, EmbeddingKind::Angle, Some(1)).unwrap();
        let u = c.unitary(&[0.1, 0.2]).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let expect = if r == col { 1.0 } else { 0.0 };
                assert!((u[r * 4 + col] - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn single_layer_unitary_is_rot_times_encode() {
        // One qubit, one layer, zero encode angle: the circuit unitary is the
        // closed-form rotation matrix itself.
        let c = ReuploadCircuit::new(1, 1, EmbeddingKind::Angle, None)
            .unwrap()
            .with_theta(vec![0.37, -1.2, 2.05])
            .unwrap();
        let u = c.unitary(&[0.0]).unwrap();
        let m = crate::gates::rot_matrix(0.37, -1.2, 2.05);
        for k in 0..4 {
            assert!((u[k] - m[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn unitary_matches_statevector_forward() {
        // Dense matrix-product oracle agrees with the kernel path within 1e-10.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..25 {
            let n = rng.gen_range(1..=4usize);
            let l = rng.gen_range(1..=4usize);
            let r = if n == 1 { None } else { Some(rng.gen_range(1..n)) };
            let mut c = ReuploadCircuit::new(n, l, EmbeddingKind::Angle, r).unwrap();
            c.randomize_theta(&mut rng, -PI, PI);
            let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();

            let u = c.unitary(&h).unwrap();
            let d = 1usize << n;
            // Unitarity check.
            for row in 0..d {
                for col in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..d {
                        acc += u[k * d + row].conj() * u[k * d + col];
                    }
                    let expect = if row == col { 1.0 } else { 0.0 };
                    assert!((acc - Complex64::new(expect, 0.0)).norm() < 1e-10);
                }
            }
            // First column of U is U|0...0>.
            let state = c.final_state(&h).unwrap();
            for row in 0..d {
                assert!((u[row * d] - state.amplitudes()[row]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn two_qubit_forward_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut c = ReuploadCircuit::new(2, 2, EmbeddingKind::Angle, Some(1)).unwrap();
        c.randomize_theta(&mut rng, -PI, PI);
        let h = [0.9, -0.35];
        let u = c.unitary(&h).unwrap();
        let out = c.forward(&h).unwrap();
        // <Z_k> from the dense unitary's first column.
        let d = 4usize;
        let amps: Vec<Complex64> = (0..d).map(|r| u[r * d]).collect();
        let z0: f64 = amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & 0b10 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum();
        let z1: f64 = amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & 0b01 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum();
        assert!((out.expectations[0] - z0).abs() < 1e-10);
        assert!((out.expectations[1] - z1).abs() < 1e-10);
    }

    #[test]
    fn amplitude_embedding_reuploads_preparation() {
        // Single qubit, zero PQC angles, one layer: the final state is the
        // amplitude-embedded input itself (no entangler on one qubit).
        let c = ReuploadCircuit::new(
            1,
            1,
            EmbeddingKind::Amplitude {
                auto_normalize: true,
            },
            None,
        )
        .unwrap();
        let s = c.final_state(&[3.0, 4.0]).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-12);

        // Two layers re-apply the same preparation: prep is a reflection,
        // so layer 2 maps the layer-1 state back toward |0> only if applied
        // to |0...0>; here we just check norm preservation and determinism.
        let c2 = ReuploadCircuit::new(
            2,
            2,
            EmbeddingKind::Amplitude {
                auto_normalize: true,
            },
            Some(1),
        )
        .unwrap();
        let s2 = c2.final_state(&[3.0, 0.0, 4.0, 0.0]).unwrap();
        assert!((s2.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_and_u4_accounting() {
        let angle = ReuploadCircuit::new(9, 20, EmbeddingKind::Angle, Some(1)).unwrap();
        assert_eq!(angle.depth_gate_layers(), 260);
        assert_eq!(angle.u4_gate_count(), 180);
        let amp = ReuploadCircuit::new(
            9,
            20,
            EmbeddingKind::Amplitude {
                auto_normalize: true,
            },
            Some(1),
        )
        .unwrap();
        assert_eq!(amp.depth_gate_layers(), 10480);
        let single = ReuploadCircuit::new(1, 7, EmbeddingKind::Angle, None).unwrap();
        assert_eq!(single.u4_gate_count(), 0);
    }

    #[test]
    fn dense_unitary_oracle_rejects_large_registers() {
        let c = ReuploadCircuit::new(7, 1, EmbeddingKind::Angle, Some(1)).unwrap();
        assert!(matches!(
            c.unitary(&[0.0; 7]),
            Err(crate::error::Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn input_dimension_mismatch_is_an_error() {
        let c = ReuploadCircuit::new(2, 1, EmbeddingKind::Angle, Some(1)).unwrap();
        assert!(c.forward(&[0.1]).is_err());
        assert!(c.forward(&[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn circuit_serializes_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut c = ReuploadCircuit::new(3, 2, EmbeddingKind::Angle, Some(2)).unwrap();
        c.randomize_theta(&mut rng, -PI, PI);
        let text = serde_json::to_string(&c).unwrap();
        let back: ReuploadCircuit = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }
}
