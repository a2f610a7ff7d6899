//! Blocked matrix products for the batched trainer.
//!
//! Everything reduces to one shape: `out[i][j] = dot(lhs_i, rhs_j)` with both
//! operands row-major. The forward pass, the input-gradient pass (against
//! transposed weights), and the weight-gradient pass (against transposed
//! activations) are all this product with different operands, which keeps
//! the pinned dot-product reduction order identical everywhere.

use crate::simd;

/// lhs rows held in cache while the large rhs streams through.
const LHS_TILE: usize = 32;

/// out[a×b] = lhs[a×k] · rhs[b×k]^T, i.e. out[i*b + j] = dot(lhs_i, rhs_j).
pub(crate) fn matmul_nt(out: &mut [f64], lhs: &[f64], rhs: &[f64], a: usize, k: usize, b: usize) {
    debug_assert_eq!(out.len(), a * b);
    debug_assert_eq!(lhs.len(), a * k);
    debug_assert_eq!(rhs.len(), b * k);
    for i0 in (0..a).step_by(LHS_TILE) {
        let i1 = (i0 + LHS_TILE).min(a);
        let mut j = 0;
        while j + 4 <= b {
            let r = [
                &rhs[j * k..(j + 1) * k],
                &rhs[(j + 1) * k..(j + 2) * k],
                &rhs[(j + 2) * k..(j + 3) * k],
                &rhs[(j + 3) * k..(j + 4) * k],
            ];
            for i in i0..i1 {
                let d = simd::dot4(&lhs[i * k..(i + 1) * k], r);
                out[i * b + j..i * b + j + 4].copy_from_slice(&d);
            }
            j += 4;
        }
        while j < b {
            let rj = &rhs[j * k..(j + 1) * k];
            for i in i0..i1 {
                out[i * b + j] = simd::dot(&lhs[i * k..(i + 1) * k], rj);
            }
            j += 1;
        }
    }
}

/// Parallel [`matmul_nt`] splitting the rhs rows (and output columns) into
/// fixed chunks. Chunking is by a constant size, not by thread count, so the
/// output is identical regardless of scheduling (disjoint writes).
#[cfg(feature = "parallel")]
pub(crate) fn matmul_nt_par(
    out: &mut [f64],
    lhs: &[f64],
    rhs: &[f64],
    a: usize,
    k: usize,
    b: usize,
) {
    use rayon::prelude::*;
    // column chunks sized for a handful per thread on small machines
    const COL_CHUNK: usize = 128;
    if a * b * k < 1 << 21 || b < 2 * COL_CHUNK {
        return matmul_nt(out, lhs, rhs, a, k, b);
    }
    // Split the output into column bands. Each band's columns are
    // interleaved in `out`, so hand each worker a private band buffer and
    // scatter afterwards; the scatter is memory-bound but small relative to
    // the product itself.
    let bands: alloc::vec::Vec<(usize, alloc::vec::Vec<f64>)> = (0..b)
        .step_by(COL_CHUNK)
        .collect::<alloc::vec::Vec<_>>()
        .into_par_iter()
        .map(|j0| {
            let j1 = (j0 + COL_CHUNK).min(b);
            let mut band = alloc::vec![0.0; a * (j1 - j0)];
            matmul_nt(&mut band, lhs, &rhs[j0 * k..j1 * k], a, k, j1 - j0);
            (j0, band)
        })
        .collect();
    for (j0, band) in bands {
        let w = band.len() / a;
        for i in 0..a {
            out[i * b + j0..i * b + j0 + w].copy_from_slice(&band[i * w..(i + 1) * w]);
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn matmul_nt_par(
    out: &mut [f64],
    lhs: &[f64],
    rhs: &[f64],
    a: usize,
    k: usize,
    b: usize,
) {
    matmul_nt(out, lhs, rhs, a, k, b);
}

/// dst[j*a + i] = src[i*b + j] (a×b row-major → b×a row-major), tiled.
pub(crate) fn transpose(dst: &mut [f64], src: &[f64], a: usize, b: usize) {
    debug_assert_eq!(src.len(), a * b);
    debug_assert_eq!(dst.len(), a * b);
    const T: usize = 16;
    for i0 in (0..a).step_by(T) {
        let i1 = (i0 + T).min(a);
        for j0 in (0..b).step_by(T) {
            let j1 = (j0 + T).min(b);
            for i in i0..i1 {
                for j in j0..j1 {
                    dst[j * a + i] = src[i * b + j];
                }
            }
        }
    }
}

/// acc[j] += sum_i m[i*b + j] for each column j, rows in ascending order.
pub(crate) fn column_sums(acc: &mut [f64], m: &[f64], rows: usize, b: usize) {
    debug_assert_eq!(acc.len(), b);
    debug_assert_eq!(m.len(), rows * b);
    for i in 0..rows {
        simd::add_assign(acc, &m[i * b..(i + 1) * b]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use alloc::vec;
    use alloc::vec::Vec;

    fn naive_nt(lhs: &[f64], rhs: &[f64], a: usize, k: usize, b: usize) -> Vec<f64> {
        let mut out = vec![0.0; a * b];
        for i in 0..a {
            for j in 0..b {
                out[i * b + j] = simd::dot(&lhs[i * k..(i + 1) * k], &rhs[j * k..(j + 1) * k]);
            }
        }
        out
    }

    #[test]
    fn blocked_matches_naive_bitwise() {
        let mut rng = SeedStream::new(5);
        for (a, k, b) in [(3, 17, 5), (33, 100, 9), (7, 64, 130)] {
            let lhs: Vec<f64> = (0..a * k).map(|_| rng.normal()).collect();
            let rhs: Vec<f64> = (0..b * k).map(|_| rng.normal()).collect();
            let mut out = vec![0.0; a * b];
            matmul_nt(&mut out, &lhs, &rhs, a, k, b);
            let reference = naive_nt(&lhs, &rhs, a, k, b);
            for (x, y) in out.iter().zip(&reference) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            let mut out_par = vec![0.0; a * b];
            matmul_nt_par(&mut out_par, &lhs, &rhs, a, k, b);
            for (x, y) in out_par.iter().zip(&reference) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn parallel_path_is_bitwise_equal_on_large_shapes() {
        let mut rng = SeedStream::new(6);
        let (a, k, b) = (9, 257, 700);
        let lhs: Vec<f64> = (0..a * k).map(|_| rng.normal()).collect();
        let rhs: Vec<f64> = (0..b * k).map(|_| rng.normal()).collect();
        let mut seq = vec![0.0; a * b];
        matmul_nt(&mut seq, &lhs, &rhs, a, k, b);
        let mut par = vec![0.0; a * b];
        matmul_nt_par(&mut par, &lhs, &rhs, a, k, b);
        for (x, y) in par.iter().zip(&seq) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let mut rng = SeedStream::new(7);
        let (a, b) = (37, 21);
        let src: Vec<f64> = (0..a * b).map(|_| rng.normal()).collect();
        let mut t = vec![0.0; a * b];
        transpose(&mut t, &src, a, b);
        let mut back = vec![0.0; a * b];
        transpose(&mut back, &t, b, a);
        assert_eq!(src, back);
        assert_eq!(t[3 * a + 5], src[5 * b + 3]);
    }

    #[test]
    fn column_sums_accumulate_in_row_order() {
        let m = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut acc = vec![0.0; 2];
        column_sums(&mut acc, &m, 3, 2);
        assert_eq!(acc, vec![9.0, 12.0]);
    }
}
