//! Batch normalization over `[batch, features]` inputs.

use super::{NnError, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    Train,
    Eval,
}

/// Per-feature affine normalization.
///
/// Train mode normalizes with batch statistics (biased variance) and reports
/// them in the cache so the training loop can fold them into the running
/// averages; eval mode normalizes with the running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm {
    pub scale: Tensor,
    pub shift: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
    /// Fraction of the old running statistic retained per update.
    pub momentum: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct BatchNormCache {
    normalized: Tensor,
    inv_std: Vec<f64>,
    pub batch_mean: Vec<f64>,
    pub batch_var: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct BatchNormGrads {
    pub scale: Tensor,
    pub shift: Tensor,
}

impl BatchNorm {
    pub fn init(features: usize) -> Self {
        BatchNorm {
            scale: Tensor::from_vec(&[features], vec![1.0; features]).expect("volume"),
            shift: Tensor::zeros(&[features]),
            running_mean: Tensor::zeros(&[features]),
            running_var: Tensor::from_vec(&[features], vec![1.0; features]).expect("volume"),
            momentum: 0.9,
            epsilon: 1e-5,
        }
    }

    pub fn features(&self) -> usize {
        self.scale.len()
    }

    pub fn forward(&self, x: &Tensor, mode: NormMode) -> Result<(Tensor, Option<BatchNormCache>), NnError> {
        let (batch, features) = match *x.shape() {
            [b, f] if f == self.features() => (b, f),
            _ => {
                return Err(NnError::ShapeMismatch {
                    op: "batchnorm",
                    detail: format!("expected [batch, {}], got {:?}", self.features(), x.shape()),
                })
            }
        };
        match mode {
            NormMode::Eval => {
                let mut y = Tensor::zeros(&[batch, features]);
                for r in 0..batch {
                    for f in 0..features {
                        let inv = 1.0 / (self.running_var.data()[f] + self.epsilon).sqrt();
                        let xn = (x.row(r)[f] - self.running_mean.data()[f]) * inv;
                        y.row_mut(r)[f] = self.scale.data()[f] * xn + self.shift.data()[f];
                    }
                }
                Ok((y, None))
            }
            NormMode::Train => {
                if batch < 2 {
                    return Err(NnError::BatchTooSmall { batch });
                }
                let m = batch as f64;
                let mut mean = vec![0.0; features];
                for r in 0..batch {
                    for (s, &v) in mean.iter_mut().zip(x.row(r)) {
                        *s += v;
                    }
                }
                for s in &mut mean {
                    *s /= m;
                }
                let mut var = vec![0.0; features];
                for r in 0..batch {
                    for f in 0..features {
                        let d = x.row(r)[f] - mean[f];
                        var[f] += d * d;
                    }
                }
                for v in &mut var {
                    *v /= m;
                }
                let inv_std: Vec<f64> =
                    var.iter().map(|&v| 1.0 / (v + self.epsilon).sqrt()).collect();
                let mut normalized = Tensor::zeros(&[batch, features]);
                let mut y = Tensor::zeros(&[batch, features]);
                for r in 0..batch {
                    for f in 0..features {
                        let xn = (x.row(r)[f] - mean[f]) * inv_std[f];
                        normalized.row_mut(r)[f] = xn;
                        y.row_mut(r)[f] = self.scale.data()[f] * xn + self.shift.data()[f];
                    }
                }
                let cache = BatchNormCache { normalized, inv_std, batch_mean: mean, batch_var: var };
                Ok((y, Some(cache)))
            }
        }
    }

    /// Folds a training batch's statistics into the running averages.
    pub fn update_running(&mut self, cache: &BatchNormCache) {
        for f in 0..self.features() {
            let rm = self.running_mean.data()[f];
            self.running_mean.data_mut()[f] =
                self.momentum * rm + (1.0 - self.momentum) * cache.batch_mean[f];
            let rv = self.running_var.data()[f];
            self.running_var.data_mut()[f] =
                self.momentum * rv + (1.0 - self.momentum) * cache.batch_var[f];
        }
    }

    /// Train-mode backward through the batch statistics.
    pub fn backward(
        &self,
        cache: &BatchNormCache,
        grad_y: &Tensor,
    ) -> Result<(BatchNormGrads, Tensor), NnError> {
        let (batch, features) = (grad_y.shape()[0], grad_y.shape()[1]);
        if features != self.features() || grad_y.shape() != cache.normalized.shape() {
            return Err(NnError::ShapeMismatch {
                op: "batchnorm_backward",
                detail: format!("grad shape {:?}", grad_y.shape()),
            });
        }
        let m = batch as f64;
        let mut gscale = Tensor::zeros(&[features]);
        let mut gshift = Tensor::zeros(&[features]);
        let mut sum_gxn = vec![0.0; features];
        let mut sum_gxn_xn = vec![0.0; features];
        for r in 0..batch {
            for f in 0..features {
                let g = grad_y.row(r)[f];
                let xn = cache.normalized.row(r)[f];
                gscale.data_mut()[f] += g * xn;
                gshift.data_mut()[f] += g;
                let gxn = g * self.scale.data()[f];
                sum_gxn[f] += gxn;
                sum_gxn_xn[f] += gxn * xn;
            }
        }
        // dx = inv_std/m * (m*gxn - sum(gxn) - xn * sum(gxn*xn))
        let mut gx = Tensor::zeros(&[batch, features]);
        for r in 0..batch {
            for f in 0..features {
                let gxn = grad_y.row(r)[f] * self.scale.data()[f];
                let xn = cache.normalized.row(r)[f];
                gx.row_mut(r)[f] =
                    cache.inv_std[f] / m * (m * gxn - sum_gxn[f] - xn * sum_gxn_xn[f]);
            }
        }
        Ok((BatchNormGrads { scale: gscale, shift: gshift }, gx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_tensor(shape: &[usize], rng: &mut impl rand::Rng) -> Tensor {
        use rand::Rng;
        let len = shape.iter().product();
        let data = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
        Tensor::from_vec(shape, data).unwrap()
    }

    #[test]
    fn train_mode_normalizes_to_zero_mean_unit_var() {
        let mut rng = crate::rng::stream(7, "bn-norm");
        let mut bn = BatchNorm::init(3);
        bn.epsilon = 1e-12;
        let x = rand_tensor(&[16, 3], &mut rng);
        let (_, cache) = bn.forward(&x, NormMode::Train).unwrap();
        let xn = &cache.unwrap().normalized;
        for f in 0..3 {
            let mean: f64 = (0..16).map(|r| xn.row(r)[f]).sum::<f64>() / 16.0;
            let var: f64 = (0..16).map(|r| xn.row(r)[f].powi(2)).sum::<f64>() / 16.0;
            assert!(mean.abs() < 1e-9, "mean {mean}");
            assert!((var - 1.0).abs() < 1e-9, "var {var}");
        }
    }

    #[test]
    fn zero_variance_batch_yields_zero_not_nan() {
        let bn = BatchNorm::init(2);
        let x = Tensor::from_vec(&[3, 2], vec![5.0, -1.0, 5.0, -1.0, 5.0, -1.0]).unwrap();
        let (y, _) = bn.forward(&x, NormMode::Train).unwrap();
        for &v in y.data() {
            assert!(v.is_finite());
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn train_mode_requires_two_samples() {
        let bn = BatchNorm::init(2);
        let x = Tensor::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
        assert!(matches!(bn.forward(&x, NormMode::Train), Err(NnError::BatchTooSmall { .. })));
        assert!(bn.forward(&x, NormMode::Eval).is_ok());
    }

    #[test]
    fn eval_mode_uses_running_statistics() {
        let mut bn = BatchNorm::init(1);
        bn.running_mean.data_mut()[0] = 2.0;
        bn.running_var.data_mut()[0] = 4.0;
        bn.epsilon = 0.0;
        let x = Tensor::from_vec(&[1, 1], vec![4.0]).unwrap();
        let (y, _) = bn.forward(&x, NormMode::Eval).unwrap();
        assert!((y.data()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = crate::rng::stream(8, "bn-fd");
        let mut bn = BatchNorm::init(3);
        // Non-trivial affine parameters.
        for (i, v) in bn.scale.data_mut().iter_mut().enumerate() {
            *v = 0.5 + 0.3 * i as f64;
        }
        for (i, v) in bn.shift.data_mut().iter_mut().enumerate() {
            *v = -0.2 * i as f64;
        }
        let x = rand_tensor(&[5, 3], &mut rng);
        let wsum: Vec<f64> = (0..15).map(|i| ((i % 4) as f64 - 1.5) * 0.4).collect();
        let loss = |bn: &BatchNorm, xin: &Tensor| -> f64 {
            let (y, _) = bn.forward(xin, NormMode::Train).unwrap();
            y.data().iter().zip(&wsum).map(|(v, w)| v * w).sum()
        };
        let grad_y = Tensor::from_vec(&[5, 3], wsum.clone()).unwrap();
        let (_, cache) = bn.forward(&x, NormMode::Train).unwrap();
        let (grads, gx) = bn.backward(&cache.unwrap(), &grad_y).unwrap();

        let h = 1e-5;
        for idx in 0..x.len() {
            let mut xp = x.clone();
            xp.data_mut()[idx] += h;
            let mut xm = x.clone();
            xm.data_mut()[idx] -= h;
            let num = (loss(&bn, &xp) - loss(&bn, &xm)) / (2.0 * h);
            let ana = gx.data()[idx];
            assert!((num - ana).abs() / num.abs().max(1.0) < 1e-5, "x[{idx}]: {num} vs {ana}");
        }
        for idx in 0..3 {
            let mut bp = bn.clone();
            bp.scale.data_mut()[idx] += h;
            let mut bm = bn.clone();
            bm.scale.data_mut()[idx] -= h;
            let num = (loss(&bp, &x) - loss(&bm, &x)) / (2.0 * h);
            let ana = grads.scale.data()[idx];
            assert!((num - ana).abs() / num.abs().max(1.0) < 1e-5, "scale[{idx}]");

            let mut bp = bn.clone();
            bp.shift.data_mut()[idx] += h;
            let mut bm = bn.clone();
            bm.shift.data_mut()[idx] -= h;
            let num = (loss(&bp, &x) - loss(&bm, &x)) / (2.0 * h);
            let ana = grads.shift.data()[idx];
            assert!((num - ana).abs() / num.abs().max(1.0) < 1e-5, "shift[{idx}]");
        }
    }

    #[test]
    fn update_running_blends_with_momentum() {
        let mut bn = BatchNorm::init(1);
        bn.momentum = 0.75;
        let x = Tensor::from_vec(&[2, 1], vec![1.0, 3.0]).unwrap();
        let (_, cache) = bn.forward(&x, NormMode::Train).unwrap();
        bn.update_running(&cache.unwrap());
        // mean 2, var 1; running starts at (0, 1).
        assert!((bn.running_mean.data()[0] - 0.5).abs() < 1e-12);
        assert!((bn.running_var.data()[0] - 1.0).abs() < 1e-12);
    }
}
