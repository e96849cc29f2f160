//! 1-D convolution (cross-correlation) with zero padding and stride.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matmul::{matmul_nn, matmul_nt, matmul_tn};
use super::{NnError, Tensor};

/// Kernel `weight: [out_ch, in_ch, k]`, `bias: [out_ch]`.
///
/// Input is `[batch, in_ch, len]`; output length is
/// `(len + 2*padding - k) / stride + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1d {
    pub weight: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub padding: usize,
}

#[derive(Clone, Debug)]
pub struct Conv1dGrads {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Conv1d {
    /// He-initialized weights with `fan_in = in_ch * k`, zero bias.
    pub fn init(in_ch: usize, out_ch: usize, k: usize, stride: usize, padding: usize, rng: &mut impl Rng) -> Self {
        let fan_in = in_ch * k;
        let std = (2.0 / fan_in as f64).sqrt();
        let w: Vec<f64> =
            (0..out_ch * fan_in).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect();
        Conv1d {
            weight: Tensor::from_vec(&[out_ch, in_ch, k], w).expect("volume"),
            bias: Tensor::zeros(&[out_ch]),
            stride,
            padding,
        }
    }

    pub fn out_ch(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_ch(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[2]
    }

    pub fn out_len(&self, len: usize) -> Result<usize, NnError> {
        let padded = len + 2 * self.padding;
        if self.kernel() > padded {
            return Err(NnError::ShapeMismatch {
                op: "conv1d",
                detail: format!("kernel {} exceeds padded length {}", self.kernel(), padded),
            });
        }
        Ok((padded - self.kernel()) / self.stride + 1)
    }

    fn check_input(&self, x: &Tensor) -> Result<(usize, usize), NnError> {
        match *x.shape() {
            [b, c, l] if c == self.in_ch() => Ok((b, l)),
            _ => Err(NnError::ShapeMismatch {
                op: "conv1d",
                detail: format!(
                    "expected [batch, {}, len], got {:?}",
                    self.in_ch(),
                    x.shape()
                ),
            }),
        }
    }

    /// Zero-padded copy of one sample's channels, `[in_ch, len + 2*padding]`.
    fn pad_sample(&self, x: &Tensor, sample: usize, len: usize) -> Vec<f64> {
        let in_ch = self.in_ch();
        let padded = len + 2 * self.padding;
        let mut out = vec![0.0; in_ch * padded];
        let base = sample * in_ch * len;
        for i in 0..in_ch {
            let src = &x.data()[base + i * len..base + (i + 1) * len];
            out[i * padded + self.padding..i * padded + self.padding + len].copy_from_slice(src);
        }
        out
    }

    /// Column matrix `[in_ch*k, out_len]` with `cols[i*k+t][j] = xpad[i][j*stride+t]`.
    fn im2col(&self, xpad: &[f64], padded: usize, out_len: usize) -> Vec<f64> {
        let (in_ch, k, s) = (self.in_ch(), self.kernel(), self.stride);
        let mut cols = vec![0.0; in_ch * k * out_len];
        for i in 0..in_ch {
            let ch = &xpad[i * padded..(i + 1) * padded];
            for t in 0..k {
                let row = &mut cols[(i * k + t) * out_len..(i * k + t + 1) * out_len];
                if s == 1 {
                    row.copy_from_slice(&ch[t..t + out_len]);
                } else {
                    for (j, r) in row.iter_mut().enumerate() {
                        *r = ch[j * s + t];
                    }
                }
            }
        }
        cols
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, NnError> {
        let (batch, len) = self.check_input(x)?;
        let out_len = self.out_len(len)?;
        let (out_ch, kk) = (self.out_ch(), self.in_ch() * self.kernel());
        let padded = len + 2 * self.padding;
        let mut y = Tensor::zeros(&[batch, out_ch, out_len]);
        for sample in 0..batch {
            let xpad = self.pad_sample(x, sample, len);
            let cols = self.im2col(&xpad, padded, out_len);
            let ys = &mut y.data_mut()[sample * out_ch * out_len..(sample + 1) * out_ch * out_len];
            for o in 0..out_ch {
                ys[o * out_len..(o + 1) * out_len].fill(self.bias.data()[o]);
            }
            matmul_nn(ys, self.weight.data(), &cols, out_ch, kk, out_len);
        }
        Ok(y)
    }

    /// Returns `(parameter grads, input grad)` for `grad_y: [batch, out_ch, out_len]`.
    pub fn backward(&self, x: &Tensor, grad_y: &Tensor) -> Result<(Conv1dGrads, Tensor), NnError> {
        let (batch, len) = self.check_input(x)?;
        let out_len = self.out_len(len)?;
        let (out_ch, in_ch, k) = (self.out_ch(), self.in_ch(), self.kernel());
        let kk = in_ch * k;
        if grad_y.shape() != [batch, out_ch, out_len] {
            return Err(NnError::ShapeMismatch {
                op: "conv1d_backward",
                detail: format!(
                    "grad shape {:?}, expected [{batch}, {out_ch}, {out_len}]",
                    grad_y.shape()
                ),
            });
        }
        let padded = len + 2 * self.padding;
        let s = self.stride;
        let mut gw = Tensor::zeros(&[out_ch, in_ch, k]);
        let mut gb = Tensor::zeros(&[out_ch]);
        let mut gx = Tensor::zeros(&[batch, in_ch, len]);
        let mut gcols = vec![0.0; kk * out_len];
        for sample in 0..batch {
            let xpad = self.pad_sample(x, sample, len);
            let cols = self.im2col(&xpad, padded, out_len);
            let gy = &grad_y.data()[sample * out_ch * out_len..(sample + 1) * out_ch * out_len];

            matmul_nt(gw.data_mut(), gy, &cols, out_ch, out_len, kk);
            for o in 0..out_ch {
                gb.data_mut()[o] += gy[o * out_len..(o + 1) * out_len].iter().sum::<f64>();
            }

            gcols.fill(0.0);
            matmul_tn(&mut gcols, self.weight.data(), gy, out_ch, kk, out_len);
            // col2im: scatter column gradients back into the unpadded input.
            let gxs = &mut gx.data_mut()[sample * in_ch * len..(sample + 1) * in_ch * len];
            for i in 0..in_ch {
                for t in 0..k {
                    let row = &gcols[(i * k + t) * out_len..(i * k + t + 1) * out_len];
                    for (j, &g) in row.iter().enumerate() {
                        let p = j * s + t;
                        if p >= self.padding && p < self.padding + len {
                            gxs[i * len + (p - self.padding)] += g;
                        }
                    }
                }
            }
        }
        Ok((Conv1dGrads { weight: gw, bias: gb }, gx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct triple-loop convolution used as the oracle.
    fn naive_forward(c: &Conv1d, x: &Tensor) -> Tensor {
        let (batch, len) = (x.shape()[0], x.shape()[2]);
        let out_len = c.out_len(len).unwrap();
        let (out_ch, in_ch, k) = (c.out_ch(), c.in_ch(), c.kernel());
        let mut y = Tensor::zeros(&[batch, out_ch, out_len]);
        for b in 0..batch {
            for o in 0..out_ch {
                for j in 0..out_len {
                    let mut acc = c.bias.data()[o];
                    for i in 0..in_ch {
                        for t in 0..k {
                            let p = j * c.stride + t;
                            if p >= c.padding && p < c.padding + len {
                                let xv = x.data()[b * in_ch * len + i * len + (p - c.padding)];
                                acc += c.weight.data()[o * in_ch * k + i * k + t] * xv;
                            }
                        }
                    }
                    y.data_mut()[b * out_ch * out_len + o * out_len + j] = acc;
                }
            }
        }
        y
    }

    fn rand_tensor(shape: &[usize], rng: &mut impl rand::Rng) -> Tensor {
        let len = shape.iter().product();
        let data = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Tensor::from_vec(shape, data).unwrap()
    }

    #[test]
    fn kernel_one_identity() {
        let conv = Conv1d {
            weight: Tensor::from_vec(&[1, 1, 1], vec![1.0]).unwrap(),
            bias: Tensor::zeros(&[1]),
            stride: 1,
            padding: 0,
        };
        let x = Tensor::from_vec(&[1, 1, 5], vec![1., 2., 3., 4., 5.]).unwrap();
        assert_eq!(conv.forward(&x).unwrap(), x);
    }

    #[test]
    fn length_preserving_with_k3_pad1() {
        let mut rng = crate::rng::stream(1, "conv-len");
        let conv = Conv1d::init(2, 3, 3, 1, 1, &mut rng);
        let x = rand_tensor(&[2, 2, 7], &mut rng);
        let y = conv.forward(&x).unwrap();
        assert_eq!(y.shape(), &[2, 3, 7]);
    }

    #[test]
    fn output_length_formula() {
        let mut rng = crate::rng::stream(2, "conv-lenf");
        for (len, k, s, p) in [(10, 3, 1, 0), (10, 3, 2, 1), (6, 5, 1, 2), (4, 4, 2, 0)] {
            let conv = Conv1d::init(1, 1, k, s, p, &mut rng);
            let want = (len + 2 * p - k) / s + 1;
            assert_eq!(conv.out_len(len).unwrap(), want, "len={len} k={k} s={s} p={p}");
        }
    }

    #[test]
    fn matches_naive_oracle() {
        let mut rng = crate::rng::stream(3, "conv-oracle");
        for (in_ch, out_ch, k, s, p, len, batch) in
            [(1, 1, 1, 1, 0, 4, 1), (2, 3, 3, 1, 1, 9, 2), (3, 2, 4, 2, 1, 11, 3), (2, 4, 3, 3, 2, 8, 2)]
        {
            let conv = Conv1d::init(in_ch, out_ch, k, s, p, &mut rng);
            let x = rand_tensor(&[batch, in_ch, len], &mut rng);
            let got = conv.forward(&x).unwrap();
            let want = naive_forward(&conv, &x);
            for (a, b) in got.data().iter().zip(want.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = crate::rng::stream(4, "conv-fd");
        for (in_ch, out_ch, k, s, p, len, batch) in [(2, 3, 3, 1, 1, 6, 2), (1, 2, 2, 2, 0, 7, 2)] {
            let conv = Conv1d::init(in_ch, out_ch, k, s, p, &mut rng);
            let x = rand_tensor(&[batch, in_ch, len], &mut rng);
            let out_len = conv.out_len(len).unwrap();
            let wsum: Vec<f64> =
                (0..batch * out_ch * out_len).map(|i| ((i % 7) as f64 - 3.0) * 0.25).collect();
            let loss = |c: &Conv1d, xin: &Tensor| -> f64 {
                c.forward(xin).unwrap().data().iter().zip(&wsum).map(|(y, w)| y * w).sum()
            };
            let grad_y = Tensor::from_vec(&[batch, out_ch, out_len], wsum.clone()).unwrap();
            let (grads, gx) = conv.backward(&x, &grad_y).unwrap();

            let h = 1e-5;
            for idx in (0..conv.weight.len()).step_by(conv.weight.len() / 5 + 1) {
                let mut cp = conv.clone();
                cp.weight.data_mut()[idx] += h;
                let mut cm = conv.clone();
                cm.weight.data_mut()[idx] -= h;
                let num = (loss(&cp, &x) - loss(&cm, &x)) / (2.0 * h);
                let ana = grads.weight.data()[idx];
                assert!((num - ana).abs() / num.abs().max(1.0) < 1e-6, "w[{idx}]: {num} vs {ana}");
            }
            {
                let mut cp = conv.clone();
                cp.bias.data_mut()[0] += h;
                let mut cm = conv.clone();
                cm.bias.data_mut()[0] -= h;
                let num = (loss(&cp, &x) - loss(&cm, &x)) / (2.0 * h);
                assert!((num - grads.bias.data()[0]).abs() < 1e-6);
            }
            for idx in (0..x.len()).step_by(x.len() / 6 + 1) {
                let mut xp = x.clone();
                xp.data_mut()[idx] += h;
                let mut xm = x.clone();
                xm.data_mut()[idx] -= h;
                let num = (loss(&conv, &xp) - loss(&conv, &xm)) / (2.0 * h);
                let ana = gx.data()[idx];
                assert!((num - ana).abs() / num.abs().max(1.0) < 1e-6, "x[{idx}]: {num} vs {ana}");
            }
        }
    }

    #[test]
    fn k1_conv_equals_per_position_dense() {
        use crate::ndnn::dense::Dense;
        let mut rng = crate::rng::stream(5, "conv-dense");
        let (in_ch, out_ch, len, batch) = (3, 4, 5, 2);
        let conv = Conv1d::init(in_ch, out_ch, 1, 1, 0, &mut rng);
        // Dense with W[i][o] = conv.weight[o][i][0].
        let mut w = Tensor::zeros(&[in_ch, out_ch]);
        for o in 0..out_ch {
            for i in 0..in_ch {
                w.data_mut()[i * out_ch + o] = conv.weight.data()[o * in_ch + i];
            }
        }
        let dense = Dense { weight: w, bias: conv.bias.clone() };
        let x = rand_tensor(&[batch, in_ch, len], &mut rng);
        let y = conv.forward(&x).unwrap();
        for b in 0..batch {
            for j in 0..len {
                let xj: Vec<f64> = (0..in_ch).map(|i| x.data()[b * in_ch * len + i * len + j]).collect();
                let yj = dense.forward(&Tensor::from_vec(&[1, in_ch], xj).unwrap()).unwrap();
                for o in 0..out_ch {
                    let got = y.data()[b * out_ch * len + o * len + j];
                    assert!((got - yj.data()[o]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn kernel_larger_than_padded_input_errors() {
        let mut rng = crate::rng::stream(6, "conv-err");
        let conv = Conv1d::init(1, 1, 5, 1, 0, &mut rng);
        assert!(conv.out_len(3).is_err());
    }
}
