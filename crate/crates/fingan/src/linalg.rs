//! Dense symmetric eigendecomposition for small matrices.
//!
//! The evaluation pipeline only ever decomposes per-RP RSS covariance
//! matrices (one row/column per radio unit, typically 6x6), so a cyclic
//! Jacobi sweep is both simple and accurate to machine precision.

/// Row-major square matrix view helpers.
#[inline]
fn at(m: &[f64], n: usize, i: usize, j: usize) -> f64 {
    m[i * n + j]
}

/// Eigendecomposition of a symmetric matrix: returns `(eigenvalues, V)` with
/// `M = V diag(vals) V^T`, `V` row-major with eigenvectors in columns,
/// eigenvalues ascending.
///
/// Panics if `m` is not square; symmetry is the caller's contract (the upper
/// triangle is mirrored internally).
pub fn sym_eigen(m: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(m.len(), n * n, "matrix must be n x n");
    // Work on a symmetrized copy so tiny asymmetries cannot bias a sweep.
    let mut a: Vec<f64> = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (at(m, n, i, j) + at(m, n, j, i));
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().fold(0.0f64, |s, &x| s.max(x.abs())).max(1e-300);
    let tol = 1e-15 * scale;

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + new_col] = v[r * n + old_col];
        }
    }
    (vals, vecs)
}

/// `C = A * B` for row-major `n x n` matrices.
pub fn matsquare_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            let av = a[i * n + l];
            for j in 0..n {
                c[i * n + j] += av * b[l * n + j];
            }
        }
    }
    c
}

/// Reconstructs `V diag(f(vals)) V^T`.
pub fn from_eigen(vals: &[f64], vecs: &[f64], n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        let fv = f(vals[k]);
        if fv == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = vecs[i * n + k];
            for j in 0..n {
                out[i * n + j] += fv * vik * vecs[j * n + k];
            }
        }
    }
    out
}
