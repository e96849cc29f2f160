//! Finite-difference gradient checking.

use rand::seq::index::sample;
use rand::Rng;

/// Compares an analytic gradient against central differences of `loss` on
/// `probe_count` randomly chosen coordinates and returns the worst relative
/// error.
///
/// `loss` must be a deterministic function of the flat parameter vector
/// (freeze any data batches and noise draws before calling). Relative error
/// uses `|num - ana| / max(|num| + |ana|, 1.0)` so near-zero gradients do not
/// blow up the ratio.
pub fn grad_check<F>(
    loss: F,
    params: &[f64],
    analytic_grad: &[f64],
    probe_count: usize,
    h: f64,
    rng: &mut impl Rng,
) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(params.len(), analytic_grad.len(), "gradient length mismatch");
    let n = params.len();
    let probes = probe_count.min(n);
    let indices = sample(rng, n, probes);
    let mut scratch = params.to_vec();
    let mut worst = 0.0f64;
    for idx in indices {
        let orig = scratch[idx];
        scratch[idx] = orig + h;
        let up = loss(&scratch);
        scratch[idx] = orig - h;
        let down = loss(&scratch);
        scratch[idx] = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = analytic_grad[idx];
        let rel = (numeric - analytic).abs() / (numeric.abs() + analytic.abs()).max(1.0);
        if rel > worst {
            worst = rel;
        }
    }
    worst
}
