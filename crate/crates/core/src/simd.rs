//! Deterministic dense-arithmetic kernels.
//!
//! Dot products are the only reduction in the hot paths, and floating-point
//! addition is not associative, so the reduction order is pinned by contract:
//! element `j` accumulates into lane `j % 16` with a fused multiply-add, and
//! the 16 lanes are combined pairwise as
//! `((l0+l1)+(l2+l3)) + ((l4+l5)+(l6+l7)) + ...` (see [`combine_lanes`]).
//! The scalar, AVX2, and AVX-512 implementations all realize exactly this
//! schedule, so results are bit-identical regardless of which path runs —
//! training a network on a machine with AVX-512 and replaying it on one
//! without must produce the same bytes.
//!
//! Elementwise updates ([`axpy`], [`add_assign`], [`scale`]) use separate
//! multiply and add (never contracted to FMA) so that autovectorized and
//! hand-vectorized code also agree bitwise.

use crate::math;

/// Number of striped accumulator lanes in the dot-product contract.
pub const DOT_LANES: usize = 16;

/// Which kernel implementation is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Scalar,
    #[cfg(target_arch = "x86_64")]
    Avx2,
    #[cfg(target_arch = "x86_64")]
    Avx512,
}

#[cfg(all(feature = "std", target_arch = "x86_64"))]
fn detect() -> Kernel {
    // SMNE_KERNEL=scalar|avx2|avx512 forces a path; used by the equivalence
    // tests and as an escape hatch.
    if let Ok(name) = std::env::var("SMNE_KERNEL") {
        match name.as_str() {
            "scalar" => return Kernel::Scalar,
            "avx2" if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma") => {
                return Kernel::Avx2
            }
            "avx512" if is_x86_feature_detected!("avx512f") => return Kernel::Avx512,
            _ => {}
        }
    }
    if is_x86_feature_detected!("avx512f") {
        Kernel::Avx512
    } else if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma") {
        Kernel::Avx2
    } else {
        Kernel::Scalar
    }
}

/// The kernel path selected for this process.
#[cfg(all(feature = "std", target_arch = "x86_64"))]
pub fn active_kernel() -> Kernel {
    static ACTIVE: std::sync::OnceLock<Kernel> = std::sync::OnceLock::new();
    *ACTIVE.get_or_init(detect)
}

#[cfg(not(all(feature = "std", target_arch = "x86_64")))]
pub fn active_kernel() -> Kernel {
    Kernel::Scalar
}

#[inline(always)]
fn combine_lanes(l: &[f64; DOT_LANES]) -> f64 {
    let a = (l[0] + l[1]) + (l[2] + l[3]);
    let b = (l[4] + l[5]) + (l[6] + l[7]);
    let c = (l[8] + l[9]) + (l[10] + l[11]);
    let d = (l[12] + l[13]) + (l[14] + l[15]);
    (a + b) + (c + d)
}

#[inline(always)]
fn dot_tail(lanes: &mut [f64; DOT_LANES], a: &[f64], b: &[f64], start: usize) {
    for j in start..a.len() {
        let lane = j % DOT_LANES;
        lanes[lane] = math::fma(a[j], b[j], lanes[lane]);
    }
}

fn dot_scalar(a: &[f64], b: &[f64]) -> f64 {
    let mut lanes = [0.0; DOT_LANES];
    dot_tail(&mut lanes, a, b, 0);
    combine_lanes(&lanes)
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use super::{combine_lanes, dot_tail, DOT_LANES};
    use core::arch::x86_64::*;

    #[target_feature(enable = "avx2,fma")]
    pub unsafe fn dot_avx2(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let main = n - n % DOT_LANES;
        let (ap, bp) = (a.as_ptr(), b.as_ptr());
        let mut acc0 = _mm256_setzero_pd();
        let mut acc1 = _mm256_setzero_pd();
        let mut acc2 = _mm256_setzero_pd();
        let mut acc3 = _mm256_setzero_pd();
        let mut j = 0;
        while j < main {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(ap.add(j)), _mm256_loadu_pd(bp.add(j)), acc0);
            acc1 = _mm256_fmadd_pd(
                _mm256_loadu_pd(ap.add(j + 4)),
                _mm256_loadu_pd(bp.add(j + 4)),
                acc1,
            );
            acc2 = _mm256_fmadd_pd(
                _mm256_loadu_pd(ap.add(j + 8)),
                _mm256_loadu_pd(bp.add(j + 8)),
                acc2,
            );
            acc3 = _mm256_fmadd_pd(
                _mm256_loadu_pd(ap.add(j + 12)),
                _mm256_loadu_pd(bp.add(j + 12)),
                acc3,
            );
            j += DOT_LANES;
        }
        let mut lanes = [0.0; DOT_LANES];
        _mm256_storeu_pd(lanes.as_mut_ptr(), acc0);
        _mm256_storeu_pd(lanes.as_mut_ptr().add(4), acc1);
        _mm256_storeu_pd(lanes.as_mut_ptr().add(8), acc2);
        _mm256_storeu_pd(lanes.as_mut_ptr().add(12), acc3);
        dot_tail(&mut lanes, a, b, main);
        combine_lanes(&lanes)
    }

    #[target_feature(enable = "avx512f")]
    pub unsafe fn dot_avx512(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let main = n - n % DOT_LANES;
        let (ap, bp) = (a.as_ptr(), b.as_ptr());
        let mut acc0 = _mm512_setzero_pd();
        let mut acc1 = _mm512_setzero_pd();
        let mut j = 0;
        while j < main {
            acc0 = _mm512_fmadd_pd(_mm512_loadu_pd(ap.add(j)), _mm512_loadu_pd(bp.add(j)), acc0);
            acc1 = _mm512_fmadd_pd(
                _mm512_loadu_pd(ap.add(j + 8)),
                _mm512_loadu_pd(bp.add(j + 8)),
                acc1,
            );
            j += DOT_LANES;
        }
        let mut lanes = [0.0; DOT_LANES];
        _mm512_storeu_pd(lanes.as_mut_ptr(), acc0);
        _mm512_storeu_pd(lanes.as_mut_ptr().add(8), acc1);
        dot_tail(&mut lanes, a, b, main);
        combine_lanes(&lanes)
    }

    /// Four dot products against a shared `x`, each following the lane
    /// contract independently. Register-blocks the rows so `x` is loaded
    /// once per block.
    #[target_feature(enable = "avx512f")]
    pub unsafe fn dot4_avx512(x: &[f64], w: [&[f64]; 4]) -> [f64; 4] {
        let n = x.len();
        let main = n - n % DOT_LANES;
        let xp = x.as_ptr();
        let wp = [w[0].as_ptr(), w[1].as_ptr(), w[2].as_ptr(), w[3].as_ptr()];
        let mut acc = [[_mm512_setzero_pd(); 2]; 4];
        let mut j = 0;
        while j < main {
            let x0 = _mm512_loadu_pd(xp.add(j));
            let x1 = _mm512_loadu_pd(xp.add(j + 8));
            for r in 0..4 {
                acc[r][0] = _mm512_fmadd_pd(x0, _mm512_loadu_pd(wp[r].add(j)), acc[r][0]);
                acc[r][1] = _mm512_fmadd_pd(x1, _mm512_loadu_pd(wp[r].add(j + 8)), acc[r][1]);
            }
            j += DOT_LANES;
        }
        let mut out = [0.0; 4];
        for r in 0..4 {
            let mut lanes = [0.0; DOT_LANES];
            _mm512_storeu_pd(lanes.as_mut_ptr(), acc[r][0]);
            _mm512_storeu_pd(lanes.as_mut_ptr().add(8), acc[r][1]);
            dot_tail(&mut lanes, x, w[r], main);
            out[r] = combine_lanes(&lanes);
        }
        out
    }

    /// Two dot products against a shared `x` (AVX2 register budget fits two
    /// rows of four accumulators).
    #[target_feature(enable = "avx2,fma")]
    pub unsafe fn dot2_avx2(x: &[f64], w0: &[f64], w1: &[f64]) -> [f64; 2] {
        let n = x.len();
        let main = n - n % DOT_LANES;
        let xp = x.as_ptr();
        let (p0, p1) = (w0.as_ptr(), w1.as_ptr());
        let mut acc = [[_mm256_setzero_pd(); 4]; 2];
        let mut j = 0;
        while j < main {
            let xv = [
                _mm256_loadu_pd(xp.add(j)),
                _mm256_loadu_pd(xp.add(j + 4)),
                _mm256_loadu_pd(xp.add(j + 8)),
                _mm256_loadu_pd(xp.add(j + 12)),
            ];
            for v in 0..4 {
                acc[0][v] = _mm256_fmadd_pd(xv[v], _mm256_loadu_pd(p0.add(j + 4 * v)), acc[0][v]);
                acc[1][v] = _mm256_fmadd_pd(xv[v], _mm256_loadu_pd(p1.add(j + 4 * v)), acc[1][v]);
            }
            j += DOT_LANES;
        }
        let mut out = [0.0; 2];
        for (r, wr) in [w0, w1].into_iter().enumerate() {
            let mut lanes = [0.0; DOT_LANES];
            for v in 0..4 {
                _mm256_storeu_pd(lanes.as_mut_ptr().add(4 * v), acc[r][v]);
            }
            dot_tail(&mut lanes, x, wr, main);
            out[r] = combine_lanes(&lanes);
        }
        out
    }

    /// acc[i] += s * x[i], separate multiply and add.
    #[target_feature(enable = "avx2")]
    pub unsafe fn axpy_avx2(acc: &mut [f64], s: f64, x: &[f64]) {
        let n = acc.len();
        let main = n - n % 4;
        let sv = _mm256_set1_pd(s);
        let ap = acc.as_mut_ptr();
        let xp = x.as_ptr();
        let mut j = 0;
        while j < main {
            let prod = _mm256_mul_pd(sv, _mm256_loadu_pd(xp.add(j)));
            _mm256_storeu_pd(ap.add(j), _mm256_add_pd(_mm256_loadu_pd(ap.add(j)), prod));
            j += 4;
        }
        for j in main..n {
            acc[j] += s * x[j];
        }
    }

    #[target_feature(enable = "avx512f")]
    pub unsafe fn axpy_avx512(acc: &mut [f64], s: f64, x: &[f64]) {
        let n = acc.len();
        let main = n - n % 8;
        let sv = _mm512_set1_pd(s);
        let ap = acc.as_mut_ptr();
        let xp = x.as_ptr();
        let mut j = 0;
        while j < main {
            let prod = _mm512_mul_pd(sv, _mm512_loadu_pd(xp.add(j)));
            _mm512_storeu_pd(ap.add(j), _mm512_add_pd(_mm512_loadu_pd(ap.add(j)), prod));
            j += 8;
        }
        for j in main..n {
            acc[j] += s * x[j];
        }
    }
}

/// Dot product of two equal-length slices under the 16-lane FMA contract.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    #[cfg(target_arch = "x86_64")]
    match active_kernel() {
        Kernel::Avx512 => return unsafe { x86::dot_avx512(a, b) },
        Kernel::Avx2 => return unsafe { x86::dot_avx2(a, b) },
        Kernel::Scalar => {}
    }
    dot_scalar(a, b)
}

/// Four dot products sharing one left operand; bit-identical to four `dot`
/// calls, but streams `x` once.
pub fn dot4(x: &[f64], w: [&[f64]; 4]) -> [f64; 4] {
    for row in &w {
        assert_eq!(x.len(), row.len(), "dot4: length mismatch");
    }
    #[cfg(target_arch = "x86_64")]
    match active_kernel() {
        Kernel::Avx512 => return unsafe { x86::dot4_avx512(x, w) },
        Kernel::Avx2 => {
            let a = unsafe { x86::dot2_avx2(x, w[0], w[1]) };
            let b = unsafe { x86::dot2_avx2(x, w[2], w[3]) };
            return [a[0], a[1], b[0], b[1]];
        }
        Kernel::Scalar => {}
    }
    [
        dot_scalar(x, w[0]),
        dot_scalar(x, w[1]),
        dot_scalar(x, w[2]),
        dot_scalar(x, w[3]),
    ]
}

/// acc[i] += s * x[i] (elementwise, never fused).
pub fn axpy(acc: &mut [f64], s: f64, x: &[f64]) {
    assert_eq!(acc.len(), x.len(), "axpy: length mismatch");
    #[cfg(target_arch = "x86_64")]
    match active_kernel() {
        Kernel::Avx512 => return unsafe { x86::axpy_avx512(acc, s, x) },
        Kernel::Avx2 => return unsafe { x86::axpy_avx2(acc, s, x) },
        Kernel::Scalar => {}
    }
    for (a, &v) in acc.iter_mut().zip(x) {
        *a += s * v;
    }
}

/// acc[i] += x[i].
pub fn add_assign(acc: &mut [f64], x: &[f64]) {
    assert_eq!(acc.len(), x.len(), "add_assign: length mismatch");
    for (a, &v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

/// v[i] *= s.
pub fn scale(v: &mut [f64], s: f64) {
    for x in v {
        *x *= s;
    }
}
