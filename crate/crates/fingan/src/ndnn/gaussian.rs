//! Factored Gaussian log-density over 2-D coordinates.

use super::{NnError, Tensor};

const LN_2PI: f64 = 1.8378770664093453;

/// Per-sample `log N(c | mu, diag(sigma^2))` summed over the two axes.
///
/// `c`, `mu`, `sigma` are `[batch, 2]`; the result is `[batch]`.
pub fn gaussian_log_density(c: &Tensor, mu: &Tensor, sigma: &Tensor) -> Result<Tensor, NnError> {
    check_shapes(c, mu, sigma)?;
    let batch = c.shape()[0];
    let mut out = Tensor::zeros(&[batch]);
    for r in 0..batch {
        let mut acc = 0.0;
        for d in 0..2 {
            let s = sigma.row(r)[d];
            let z = (c.row(r)[d] - mu.row(r)[d]) / s;
            acc += -s.ln() - 0.5 * LN_2PI - 0.5 * z * z;
        }
        out.data_mut()[r] = acc;
    }
    Ok(out)
}

/// Gradients of `sum_r grad_out[r] * log N(c_r | mu_r, sigma_r)` w.r.t. `mu`
/// and `sigma` (and `c`, returned last, for completeness).
pub fn gaussian_log_density_backward(
    c: &Tensor,
    mu: &Tensor,
    sigma: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor), NnError> {
    check_shapes(c, mu, sigma)?;
    let batch = c.shape()[0];
    if grad_out.shape() != [batch] {
        return Err(NnError::ShapeMismatch {
            op: "gaussian_log_density_backward",
            detail: format!("grad shape {:?}, expected [{batch}]", grad_out.shape()),
        });
    }
    let mut gmu = Tensor::zeros(&[batch, 2]);
    let mut gsigma = Tensor::zeros(&[batch, 2]);
    let mut gc = Tensor::zeros(&[batch, 2]);
    for r in 0..batch {
        let g = grad_out.data()[r];
        for d in 0..2 {
            let s = sigma.row(r)[d];
            let diff = c.row(r)[d] - mu.row(r)[d];
            gmu.row_mut(r)[d] = g * diff / (s * s);
            gsigma.row_mut(r)[d] = g * (diff * diff / (s * s * s) - 1.0 / s);
            gc.row_mut(r)[d] = -g * diff / (s * s);
        }
    }
    Ok((gmu, gsigma, gc))
}

fn check_shapes(c: &Tensor, mu: &Tensor, sigma: &Tensor) -> Result<(), NnError> {
    let batch = match *c.shape() {
        [b, 2] => b,
        _ => {
            return Err(NnError::ShapeMismatch {
                op: "gaussian_log_density",
                detail: format!("expected [batch, 2], got {:?}", c.shape()),
            })
        }
    };
    for (name, t) in [("mu", mu), ("sigma", sigma)] {
        if t.shape() != [batch, 2] {
            return Err(NnError::ShapeMismatch {
                op: "gaussian_log_density",
                detail: format!("{name} shape {:?}, expected [{batch}, 2]", t.shape()),
            });
        }
    }
    if sigma.data().iter().any(|&s| s <= 0.0) {
        return Err(NnError::NonPositiveSigma);
    }
    Ok(())
}
