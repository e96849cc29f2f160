//! Elementwise activations with analytic backward passes.
//!
//! Forward functions return the activated tensor; backward functions take the
//! forward *input* (or output where noted) plus the upstream gradient and
//! return the downstream gradient. All forms are overflow-safe: `sigmoid` and
//! `softplus` never produce NaN/Inf for finite inputs.

use super::Tensor;

/// Probability clamp shared by sigmoid outputs and the adversarial losses.
pub const PROB_EPS: f64 = 1e-12;

/// Sigmoid saturated into `[PROB_EPS, 1 - PROB_EPS]` so the result is always
/// strictly inside (0, 1) and downstream logs stay finite.
#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `ln(1 + e^x)`, computed as `x + ln(1 + e^-x)` for positive `x`.
#[inline]
pub fn softplus_scalar(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn leaky_relu_scalar(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

fn map(x: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    let data = x.data().iter().map(|&v| f(v)).collect();
    Tensor::from_vec(x.shape(), data).expect("same volume")
}

fn map2(x: &Tensor, g: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    debug_assert_eq!(x.shape(), g.shape());
    let data = x.data().iter().zip(g.data()).map(|(&a, &b)| f(a, b)).collect();
    Tensor::from_vec(x.shape(), data).expect("same volume")
}

pub fn leaky_relu(x: &Tensor, slope: f64) -> Tensor {
    map(x, |v| leaky_relu_scalar(v, slope))
}

/// Gradient through leaky ReLU; `x` is the forward input.
pub fn leaky_relu_backward(x: &Tensor, grad_out: &Tensor, slope: f64) -> Tensor {
    map2(x, grad_out, |v, g| if v >= 0.0 { g } else { slope * g })
}

pub fn relu(x: &Tensor) -> Tensor {
    map(x, |v| v.max(0.0))
}

pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Tensor {
    map2(x, grad_out, |v, g| if v >= 0.0 { g } else { 0.0 })
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    map(x, sigmoid_scalar)
}

/// Gradient through sigmoid; `y` is the forward *output*.
pub fn sigmoid_backward_from_output(y: &Tensor, grad_out: &Tensor) -> Tensor {
    map2(y, grad_out, |s, g| g * s * (1.0 - s))
}

pub fn softplus(x: &Tensor) -> Tensor {
    map(x, softplus_scalar)
}

pub fn softplus_backward(x: &Tensor, grad_out: &Tensor) -> Tensor {
    map2(x, grad_out, |v, g| g * sigmoid_scalar(v))
}
