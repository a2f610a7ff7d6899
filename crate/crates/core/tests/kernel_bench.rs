//! Rough kernel throughput check, ignored by default.
//! Run with: cargo test -p smne-core --release --test kernel_bench -- --ignored --nocapture

use smne_core::simd;

#[test]
#[ignore]
fn fc1_sized_gemm_throughput() {
    let (rows, n, m) = (160usize, 6656usize, 1024usize);
    let x: Vec<f64> = (0..rows * n).map(|i| (i % 97) as f64 * 0.01).collect();
    let w: Vec<f64> = (0..m * n).map(|i| (i % 89) as f64 * 0.001).collect();
    let mut y = vec![0.0; rows * m];

    let start = std::time::Instant::now();
    let reps = 5;
    for _ in 0..reps {
        for i in (0..m).step_by(4) {
            let wr = [
                &w[i * n..(i + 1) * n],
                &w[(i + 1) * n..(i + 2) * n],
                &w[(i + 2) * n..(i + 3) * n],
                &w[(i + 3) * n..(i + 4) * n],
            ];
            for r in 0..rows {
                let d = simd::dot4(&x[r * n..(r + 1) * n], wr);
                for k in 0..4 {
                    y[r * m + i + k] = d[k];
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let flops = (2 * rows * n * m * reps) as f64;
    println!(
        "dot4 GEMM: {:.2} GFlop/s (kernel: {:?})",
        flops / secs / 1e9,
        simd::active_kernel()
    );

    // axpy streaming (gradW-style accumulation)
    let mut acc = vec![0.0; m * n];
    let start = std::time::Instant::now();
    let reps = 3;
    for _ in 0..reps {
        for r in 0..rows.min(24) {
            for i in 0..m {
                simd::axpy(&mut acc[i * n..(i + 1) * n], 1.0e-9, &x[r * n..(r + 1) * n]);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let flops = (2 * 24 * n * m * reps) as f64;
    println!("axpy stream: {:.2} GFlop/s", flops / secs / 1e9);
    let _ = y[0] + acc[0];
}
