//! ReLU feed-forward networks with exact and interval forward passes.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::interval::Interval;

/// Fully-connected network `x ↦ W_{k+1} relu(… relu(W_1 x + b_1) …) + b_{k+1}`
/// with equal input and output dimension. The output layer is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralNet {
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("layer {layer}: weight shape {rows}x{cols} inconsistent with bias length {bias}")]
    InconsistentShape {
        layer: usize,
        rows: usize,
        cols: usize,
        bias: usize,
    },
    #[error("input dimension {input} differs from output dimension {output}")]
    AsymmetricEnds { input: usize, output: usize },
    #[error("non-finite parameter in layer {layer}")]
    NonFiniteParameter { layer: usize },
    #[error("loss became non-finite at epoch {epoch} (divergent learning rate?)")]
    NonFiniteLoss { epoch: usize },
    #[error("training dataset is empty")]
    EmptyDataset,
}

impl NeuralNet {
    pub fn new(weights: Vec<DMatrix<f64>>, biases: Vec<DVector<f64>>) -> Result<Self, NetError> {
        assert!(!weights.is_empty(), "a network needs at least one layer");
        assert_eq!(weights.len(), biases.len());
        let mut prev = weights[0].ncols();
        for (layer, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != prev || w.nrows() != b.len() {
                return Err(NetError::InconsistentShape {
                    layer,
                    rows: w.nrows(),
                    cols: w.ncols(),
                    bias: b.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
                return Err(NetError::NonFiniteParameter { layer });
            }
            prev = w.nrows();
        }
        let net = Self { weights, biases };
        if net.input_dim() != net.output_dim() {
            return Err(NetError::AsymmetricEnds {
                input: net.input_dim(),
                output: net.output_dim(),
            });
        }
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights[self.weights.len() - 1].nrows()
    }

    /// Widths of the hidden layers.
    pub fn hidden_dims(&self) -> Vec<usize> {
        self.weights[..self.weights.len() - 1]
            .iter()
            .map(|w| w.nrows())
            .collect()
    }

    /// `[n, h_1, …, h_k, n]`.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.weights.iter().map(|w| w.nrows()));
        dims
    }

    /// Total number of hidden neurons `H = Σ h_i`.
    pub fn hidden_count(&self) -> usize {
        self.hidden_dims().iter().sum()
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        if x.len() != self.input_dim() {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut a = DVector::from_column_slice(x);
        let last = self.weights.len() - 1;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            a = w * a + b;
            if i < last {
                a.apply(|v| *v = v.max(0.0));
            }
        }
        Ok(a.as_slice().to_vec())
    }

    /// Pre-activation vectors of every hidden layer under exact forward
    /// evaluation (the quantities whose signs form the activation
    /// configuration).
    pub fn preactivations(&self, x: &[f64]) -> Result<Vec<DVector<f64>>, NetError> {
        if x.len() != self.input_dim() {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut a = DVector::from_column_slice(x);
        let mut out = Vec::with_capacity(self.weights.len() - 1);
        for (w, b) in self.weights[..self.weights.len() - 1]
            .iter()
            .zip(&self.biases)
        {
            let z = w * a + b;
            out.push(z.clone());
            a = z.map(|v| v.max(0.0));
        }
        Ok(out)
    }

    /// Sound enclosure of `forward` over a box, by interval bound
    /// propagation in centre–radius form: an affine layer maps
    /// `c ± r` to `(Wc + b) ± |W|r` exactly, ReLU clamps endpoints.
    pub fn interval_forward(&self, x: &[Interval]) -> Result<Vec<Interval>, NetError> {
        if x.len() != self.input_dim() {
            return Err(NetError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut center = DVector::from_iterator(x.len(), x.iter().map(|i| i.midpoint()));
        let mut radius = DVector::from_iterator(x.len(), x.iter().map(|i| i.radius()));
        let last = self.weights.len() - 1;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let new_center = w * &center + b;
            let new_radius = w.abs() * &radius;
            center = new_center;
            radius = new_radius;
            // Outward slack for the two rounded matrix-vector products.
            for (c, r) in center.iter().zip(radius.iter_mut()) {
                *r += (c.abs() + *r) * crate::interval::REL_SLACK + crate::interval::ABS_SLACK;
            }
            if i < last {
                for j in 0..center.len() {
                    let lo = (center[j] - radius[j]).max(0.0);
                    let hi = (center[j] + radius[j]).max(0.0);
                    center[j] = 0.5 * (lo + hi);
                    radius[j] = 0.5 * (hi - lo);
                }
            }
        }
        Ok(center
            .iter()
            .zip(radius.iter())
            .map(|(&c, &r)| Interval::new(c - r, c + r))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalBox;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    /// 1-1-1 net computing relu(x) (identity weights, zero biases).
    fn relu_net() -> NeuralNet {
        NeuralNet::new(
            vec![
                DMatrix::from_row_slice(1, 1, &[1.0]),
                DMatrix::from_row_slice(1, 1, &[1.0]),
            ],
            vec![DVector::from_column_slice(&[0.0]); 2],
        )
        .unwrap()
    }

    #[test]
    fn relu_kills_negative_input() {
        assert_eq!(relu_net().forward(&[-2.0]).unwrap(), vec![0.0]);
        assert_eq!(relu_net().forward(&[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn zero_weights_give_constant_output() {
        let net = NeuralNet::new(
            vec![
                DMatrix::zeros(3, 1),
                DMatrix::zeros(1, 3),
            ],
            vec![
                DVector::zeros(3),
                DVector::from_column_slice(&[7.5]),
            ],
        )
        .unwrap();
        assert_eq!(net.forward(&[123.0]).unwrap(), vec![7.5]);
        let out = net
            .interval_forward(&[Interval::new(-5.0, 5.0)])
            .unwrap();
        assert!(out[0].contains(7.5) && out[0].width() < 1e-12);
    }

    #[test]
    fn interval_relu_rule() {
        let out = relu_net()
            .interval_forward(&[Interval::new(-1.0, 2.0)])
            .unwrap();
        assert_relative_eq!(out[0].lo, 0.0, epsilon = 1e-12);
        assert_relative_eq!(out[0].hi, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn dimension_mismatch_detected() {
        assert!(matches!(
            relu_net().forward(&[1.0, 2.0]),
            Err(NetError::DimensionMismatch { .. })
        ));
    }

    /// Monte-Carlo containment: interval_forward encloses forward.
    #[test]
    fn interval_forward_contains_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let net = crate::train::random_net(&[2, 8, 2], &mut rng);
            let domain = IntervalBox::from_bounds(&[(-1.0, 1.0), (-1.0, 1.0)]);
            let enclosure = net.interval_forward(domain.axes()).unwrap();
            for _ in 0..100 {
                let x = domain.sample_uniform(&mut rng);
                let y = net.forward(&x).unwrap();
                for (out, iv) in y.iter().zip(&enclosure) {
                    assert!(iv.contains(*out), "{out} not in [{}, {}]", iv.lo, iv.hi);
                }
            }
            let _ = rng.random_range(0..2);
        }
    }
}
