//! Fully connected layer.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matmul::{matmul_nn, matmul_nt, matmul_tn};
use super::{NnError, Tensor};

/// `y = x W + b` with `W: [in, out]`, `b: [out]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Tensor,
}

#[derive(Clone, Debug)]
pub struct DenseGrads {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Dense {
    /// He-initialized weights `N(0, 2/fan_in)`, zero bias.
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let std = (2.0 / in_dim as f64).sqrt();
        let w: Vec<f64> =
            (0..in_dim * out_dim).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect();
        Dense {
            weight: Tensor::from_vec(&[in_dim, out_dim], w).expect("volume"),
            bias: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn out_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, NnError> {
        let (batch, in_dim) = match *x.shape() {
            [b, i] => (b, i),
            _ => {
                return Err(NnError::ShapeMismatch {
                    op: "dense_forward",
                    detail: format!("expected rank-2 input, got {:?}", x.shape()),
                })
            }
        };
        if in_dim != self.in_dim() {
            return Err(NnError::ShapeMismatch {
                op: "dense_forward",
                detail: format!("input width {} vs weight fan-in {}", in_dim, self.in_dim()),
            });
        }
        let out = self.out_dim();
        let mut y = Tensor::zeros(&[batch, out]);
        for r in 0..batch {
            y.row_mut(r).copy_from_slice(self.bias.data());
        }
        matmul_nn(y.data_mut(), x.data(), self.weight.data(), batch, in_dim, out);
        Ok(y)
    }

    /// Returns `(parameter grads, input grad)` for an upstream `grad_y: [batch, out]`.
    pub fn backward(&self, x: &Tensor, grad_y: &Tensor) -> Result<(DenseGrads, Tensor), NnError> {
        let (batch, in_dim) = (x.shape()[0], x.shape()[1]);
        let out = self.out_dim();
        if grad_y.shape() != [batch, out] {
            return Err(NnError::ShapeMismatch {
                op: "dense_backward",
                detail: format!("grad shape {:?}, expected [{batch}, {out}]", grad_y.shape()),
            });
        }
        let mut gw = Tensor::zeros(&[in_dim, out]);
        matmul_tn(gw.data_mut(), x.data(), grad_y.data(), batch, in_dim, out);
        let mut gb = Tensor::zeros(&[out]);
        for r in 0..batch {
            for (b, &g) in gb.data_mut().iter_mut().zip(grad_y.row(r)) {
                *b += g;
            }
        }
        let mut gx = Tensor::zeros(&[batch, in_dim]);
        matmul_nt(gx.data_mut(), grad_y.data(), self.weight.data(), batch, out, in_dim);
        Ok((DenseGrads { weight: gw, bias: gb }, gx))
    }
}
