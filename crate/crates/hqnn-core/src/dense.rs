//! Minimal dense feed-forward network with exact reverse-mode gradients.
//! Serves as the classical embedding and regression networks of a hybrid
//! model and as the standalone NN baselines.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Cached pre- and post-activations of one forward pass, enough for exact
/// backprop through the same network.
#[derive(Debug, Clone)]
pub struct GradientTape {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

/// Fully connected network: per layer an affine map followed by an
/// activation. Weights are stored row-major `[d_out × d_in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    widths: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    activations: Vec<Activation>,
}

impl DenseNet {
    /// Zero-initialized network. `activations` has one entry per weight layer.
    pub fn new(widths: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::InvalidParameter(
                "layer widths need at least input and output, all nonzero".into(),
            ));
        }
        if activations.len() != widths.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: widths.len() - 1,
                got: activations.len(),
            });
        }
        let weights = widths
            .windows(2)
            .map(|w| vec![0.0; w[0] * w[1]])
            .collect();
        let biases = widths[1..].iter().map(|&w| vec![0.0; w]).collect();
        Ok(Self {
            widths,
            weights,
            biases,
            activations,
        })
    }

    /// Seeded init: every weight and bias of layer l uniform in
    /// ±sqrt(1/d_in_l). Keeps initial rotation angles small.
    pub fn seeded<R: Rng>(
        widths: Vec<usize>,
        activations: Vec<Activation>,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::new(widths, activations)?;
        for l in 0..net.weights.len() {
            let lim = (1.0 / net.widths[l] as f64).sqrt();
            for w in &mut net.weights[l] {
                *w = rng.gen_range(-lim..lim);
            }
            for b in &mut net.biases[l] {
                *b = rng.gen_range(-lim..lim);
            }
        }
        Ok(net)
    }

    /// Pass-through init: each weight matrix a truncated identity, biases
    /// zero. The network starts as (a projection of) the identity map.
    pub fn passthrough(widths: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        let mut net = Self::new(widths, activations)?;
        for l in 0..net.weights.len() {
            let (d_in, d_out) = (net.widths[l], net.widths[l + 1]);
            for i in 0..d_out.min(d_in) {
                net.weights[l][i * d_in + i] = 1.0;
            }
        }
        Ok(net)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    /// Exact parameter count: sum over layers of d_in·d_out + d_out.
    pub fn count_params(&self) -> usize {
        self.widths
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Affine-then-activation composition; the returned tape is sufficient
    /// for exact backprop. Detects NaN propagation.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, GradientTape)> {
        if x.len() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                got: x.len(),
            });
        }
        let mut pre = Vec::with_capacity(self.weights.len());
        let mut post = Vec::with_capacity(self.weights.len());
        let mut a = x.to_vec();
        for l in 0..self.weights.len() {
            let (d_in, _d_out) = (self.widths[l], self.widths[l + 1]);
            let mut z = self.biases[l].clone();
            for (i, zi) in z.iter_mut().enumerate() {
                let row = &self.weights[l][i * d_in..(i + 1) * d_in];
                *zi += row.iter().zip(&a).map(|(w, x)| w * x).sum::<f64>();
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            let act: Vec<f64> = z.iter().map(|&v| self.activations[l].apply(v)).collect();
            pre.push(z);
            post.push(act.clone());
            a = act;
        }
        Ok((
            a,
            GradientTape {
                input: x.to_vec(),
                pre,
                post,
            },
        ))
    }

    /// Reverse-mode gradients of `output · upstream` w.r.t. the input and all
    /// parameters. Parameter gradients are flattened in the same order as
    /// [`DenseNet::params_flat`].
    pub fn backward(
        &self,
        tape: &GradientTape,
        upstream: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if tape.pre.len() != self.weights.len()
            || tape.input.len() != self.input_width()
            || tape
                .pre
                .iter()
                .enumerate()
                .any(|(l, z)| z.len() != self.widths[l + 1])
        {
            return Err(Error::StaleTape);
        }
        if upstream.len() != self.output_width() {
            return Err(Error::DimensionMismatch {
                expected: self.output_width(),
                got: upstream.len(),
            });
        }
        let mut param_grads = vec![0.0; self.count_params()];
        // delta at the output layer
        let mut delta: Vec<f64> = tape
            .pre
            .last()
            .unwrap()
            .iter()
            .zip(upstream)
            .map(|(&z, &u)| u * self.activations.last().unwrap().derivative(z))
            .collect();

        let mut offset = self.count_params();
        for l in (0..self.weights.len()).rev() {
            let (d_in, d_out) = (self.widths[l], self.widths[l + 1]);
            let a_prev: &[f64] = if l == 0 { &tape.input } else { &tape.post[l - 1] };
            offset -= d_in * d_out + d_out;
            for i in 0..d_out {
                for j in 0..d_in {
                    param_grads[offset + i * d_in + j] = delta[i] * a_prev[j];
                }
                param_grads[offset + d_in * d_out + i] = delta[i];
            }
            // back-propagate to the previous layer
            let mut prev = vec![0.0; d_in];
            for (i, &di) in delta.iter().enumerate() {
                let row = &self.weights[l][i * d_in..(i + 1) * d_in];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += w * di;
                }
            }
            if l > 0 {
                for (j, p) in prev.iter_mut().enumerate() {
                    *p *= self.activations[l - 1].derivative(tape.pre[l - 1][j]);
                }
            }
            delta = prev;
        }
        Ok((delta, param_grads))
    }

    /// Flat parameter view, per layer `[weights row-major, biases]`.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count_params());
        for l in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.count_params() {
            return Err(Error::DimensionMismatch {
                expected: self.count_params(),
                got: params.len(),
            });
        }
        let mut k = 0;
        for l in 0..self.weights.len() {
            let nw = self.weights[l].len();
            self.weights[l].copy_from_slice(&params[k..k + nw]);
            k += nw;
            let nb = self.biases[l].len();
            self.biases[l].copy_from_slice(&params[k..k + nb]);
            k += nb;
        }
        Ok(())
    }
}
