//! Small dense matrix kernels.
//!
//! Everything in the engine (dense layers, conv1d via im2col) reduces to
//! `C += A * B` over row-major buffers. The kernel blocks 4 rows of `A`
//! against 4 rows of `B` so each `B` row loaded from cache feeds four
//! accumulator rows. Accumulation order is fixed, so results are
//! bit-reproducible run to run.

/// Unrolled dot product with four independent accumulators.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let a4 = &a[4 * i..4 * i + 4];
        let b4 = &b[4 * i..4 * i + 4];
        acc[0] += a4[0] * b4[0];
        acc[1] += a4[1] * b4[1];
        acc[2] += a4[2] * b4[2];
        acc[3] += a4[3] * b4[3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `c += s * b`, element-wise.
#[inline]
pub fn axpy(c: &mut [f64], s: f64, b: &[f64]) {
    debug_assert_eq!(c.len(), b.len());
    for (cv, &bv) in c.iter_mut().zip(b) {
        *cv += s * bv;
    }
}

#[inline]
fn axpy4(c: &mut [f64], s: [f64; 4], b0: &[f64], b1: &[f64], b2: &[f64], b3: &[f64]) {
    let n = c.len();
    let (b0, b1, b2, b3) = (&b0[..n], &b1[..n], &b2[..n], &b3[..n]);
    for i in 0..n {
        c[i] = s[0].mul_add(b0[i], s[1].mul_add(b1[i], s[2].mul_add(b2[i], s[3].mul_add(b3[i], c[i]))));
    }
}

/// Four `C` rows updated by four `B` rows at once: 16 fused products per
/// column while `B` stays register/L1 resident.
#[inline]
#[allow(clippy::too_many_arguments)]
fn block4x4(
    c0: &mut [f64],
    c1: &mut [f64],
    c2: &mut [f64],
    c3: &mut [f64],
    s: &[[f64; 4]; 4],
    b0: &[f64],
    b1: &[f64],
    b2: &[f64],
    b3: &[f64],
) {
    let n = c0.len();
    let (b0, b1, b2, b3) = (&b0[..n], &b1[..n], &b2[..n], &b3[..n]);
    let (c1, c2, c3) = (&mut c1[..n], &mut c2[..n], &mut c3[..n]);
    for j in 0..n {
        let (v0, v1, v2, v3) = (b0[j], b1[j], b2[j], b3[j]);
        c0[j] = s[0][0].mul_add(v0, s[0][1].mul_add(v1, s[0][2].mul_add(v2, s[0][3].mul_add(v3, c0[j]))));
        c1[j] = s[1][0].mul_add(v0, s[1][1].mul_add(v1, s[1][2].mul_add(v2, s[1][3].mul_add(v3, c1[j]))));
        c2[j] = s[2][0].mul_add(v0, s[2][1].mul_add(v1, s[2][2].mul_add(v2, s[2][3].mul_add(v3, c2[j]))));
        c3[j] = s[3][0].mul_add(v0, s[3][1].mul_add(v1, s[3][2].mul_add(v2, s[3][3].mul_add(v3, c3[j]))));
    }
}

/// `C += A * B` where `A` is `m×k`, `B` is `k×n`, `C` is `m×n`, all row-major.
pub fn matmul_nn(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    let k4 = k / 4 * 4;
    let mut i = 0;
    while i + 4 <= m {
        let (arow0, arow1, arow2, arow3) = (
            &a[i * k..(i + 1) * k],
            &a[(i + 1) * k..(i + 2) * k],
            &a[(i + 2) * k..(i + 3) * k],
            &a[(i + 3) * k..(i + 4) * k],
        );
        let (chunk, _) = c[i * n..].split_at_mut(4 * n);
        let (c0, rest) = chunk.split_at_mut(n);
        let (c1, rest) = rest.split_at_mut(n);
        let (c2, c3) = rest.split_at_mut(n);
        let mut l = 0;
        while l < k4 {
            let s = [
                [arow0[l], arow0[l + 1], arow0[l + 2], arow0[l + 3]],
                [arow1[l], arow1[l + 1], arow1[l + 2], arow1[l + 3]],
                [arow2[l], arow2[l + 1], arow2[l + 2], arow2[l + 3]],
                [arow3[l], arow3[l + 1], arow3[l + 2], arow3[l + 3]],
            ];
            block4x4(
                c0,
                c1,
                c2,
                c3,
                &s,
                &b[l * n..(l + 1) * n],
                &b[(l + 1) * n..(l + 2) * n],
                &b[(l + 2) * n..(l + 3) * n],
                &b[(l + 3) * n..(l + 4) * n],
            );
            l += 4;
        }
        while l < k {
            let brow = &b[l * n..(l + 1) * n];
            axpy(c0, arow0[l], brow);
            axpy(c1, arow1[l], brow);
            axpy(c2, arow2[l], brow);
            axpy(c3, arow3[l], brow);
            l += 1;
        }
        i += 4;
    }
    while i < m {
        let arow = &a[i * k..(i + 1) * k];
        let crow = &mut c[i * n..(i + 1) * n];
        let mut l = 0;
        while l < k4 {
            axpy4(
                crow,
                [arow[l], arow[l + 1], arow[l + 2], arow[l + 3]],
                &b[l * n..(l + 1) * n],
                &b[(l + 1) * n..(l + 2) * n],
                &b[(l + 2) * n..(l + 3) * n],
                &b[(l + 3) * n..(l + 4) * n],
            );
            l += 4;
        }
        while l < k {
            axpy(crow, arow[l], &b[l * n..(l + 1) * n]);
            l += 1;
        }
        i += 1;
    }
}

/// Row-major transpose of an `rows×cols` buffer.
pub fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    let mut t = vec![0.0; rows * cols];
    for i in 0..rows {
        let row = &a[i * cols..(i + 1) * cols];
        for (j, &v) in row.iter().enumerate() {
            t[j * rows + i] = v;
        }
    }
    t
}

/// `C += A * Bᵀ` where `A` is `m×k`, `B` is `n×k`, `C` is `m×n`.
pub fn matmul_nt(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    let bt = transpose(b, n, k);
    matmul_nn(c, a, &bt, m, k, n);
}

/// `C += Aᵀ * B` where `A` is `m×k`, `B` is `m×n`, `C` is `k×n`.
pub fn matmul_tn(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize) {
    let at = transpose(a, m, k);
    matmul_nn(c, &at, b, k, m, n);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn naive_nn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for l in 0..k {
                for j in 0..n {
                    c[i * n + j] += a[i * k + l] * b[l * n + j];
                }
            }
        }
        c
    }

    fn rand_vec(len: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn variants_match_naive_product() {
        let mut rng = crate::rng::stream(11, "matmul-test");
        for &(m, k, n) in
            &[(1, 1, 1), (3, 5, 7), (4, 8, 4), (6, 13, 9), (17, 66, 5), (8, 12, 16), (5, 4, 3)]
        {
            let a = rand_vec(m * k, &mut rng);
            let b = rand_vec(k * n, &mut rng);
            let want = naive_nn(&a, &b, m, k, n);

            let mut c = vec![0.0; m * n];
            matmul_nn(&mut c, &a, &b, m, k, n);
            let mut c_nt = vec![0.0; m * n];
            matmul_nt(&mut c_nt, &a, &transpose(&b, k, n), m, k, n);
            let mut c_tn = vec![0.0; m * n];
            matmul_tn(&mut c_tn, &transpose(&a, m, k), &b, k, m, n);

            for j in 0..m * n {
                assert!((c[j] - want[j]).abs() < 1e-12, "nn {m}x{k}x{n} at {j}");
                assert!((c_nt[j] - want[j]).abs() < 1e-12, "nt {m}x{k}x{n} at {j}");
                assert!((c_tn[j] - want[j]).abs() < 1e-12, "tn {m}x{k}x{n} at {j}");
            }
        }
    }

    #[test]
    fn accumulates_into_existing_values() {
        let a = [1.0, 2.0];
        let b = [3.0, 4.0];
        let mut c = [10.0];
        matmul_nn(&mut c, &a, &b, 1, 2, 1);
        assert_eq!(c[0], 10.0 + 11.0);
    }

    #[test]
    fn transpose_round_trips() {
        let mut rng = crate::rng::stream(12, "transpose-test");
        let a = rand_vec(5 * 7, &mut rng);
        assert_eq!(transpose(&transpose(&a, 5, 7), 7, 5), a);
    }

    #[test]
    fn dot_matches_scalar_loop() {
        let mut rng = crate::rng::stream(3, "dot-test");
        for len in [0, 1, 3, 4, 5, 63, 64, 66] {
            let a = rand_vec(len, &mut rng);
            let b = rand_vec(len, &mut rng);
            let want: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert!((dot(&a, &b) - want).abs() < 1e-12, "len {len}");
        }
    }
}
