//! Deterministic synthetic datasets used by the examples, tests, and
//! benchmarks. All generators are pure functions of their arguments.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::MultiViewDataset;

/// Two Gaussian blobs observed through two 2-D views.
///
/// The positive class (first `⌈n/2⌉` rows, label +1) is centered at the
/// origin in both views; the negative class sits at `(separation, 0)` in
/// view A and at `(0, separation)` in view B — the same geometry under two
/// different representations. `noise` is the per-axis standard deviation,
/// so `separation = 6·noise` gives a 6σ class gap.
///
/// # Panics
/// If `n < 2` or `noise` is not positive and finite.
pub fn two_view_blobs(n: usize, separation: f64, noise: f64, seed: u64) -> MultiViewDataset {
    assert!(n >= 2, "need at least one sample per class");
    let normal = Normal::new(0.0, noise).expect("noise must be positive and finite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_pos = n.div_ceil(2);
    let mut view_a = DMatrix::zeros(n, 2);
    let mut view_b = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let positive = i < n_pos;
        let (center_a, center_b) = if positive {
            ([0.0, 0.0], [0.0, 0.0])
        } else {
            ([separation, 0.0], [0.0, separation])
        };
        for j in 0..2 {
            view_a[(i, j)] = center_a[j] + normal.sample(&mut rng);
        }
        for j in 0..2 {
            view_b[(i, j)] = center_b[j] + normal.sample(&mut rng);
        }
        labels.push(if positive { 1 } else { -1 });
    }
    MultiViewDataset::new(view_a, view_b, labels).expect("generated data is valid")
}

/// The XOR cross: four clusters at (±1, ±1), with the diagonal pair
/// (+1,+1), (−1,−1) labeled +1 and the anti-diagonal pair labeled −1 — not
/// linearly separable by construction. Both views show the same pattern
/// with independent noise draws.
///
/// `per_cluster` points per cluster (4·per_cluster total); `noise` is the
/// per-axis standard deviation.
///
/// # Panics
/// If `per_cluster` is 0 or `noise` is not positive and finite.
pub fn xor_cross(per_cluster: usize, noise: f64, seed: u64) -> MultiViewDataset {
    assert!(per_cluster >= 1, "need at least one sample per cluster");
    let normal = Normal::new(0.0, noise).expect("noise must be positive and finite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clusters: [([f64; 2], i8); 4] = [
        ([1.0, 1.0], 1),
        ([-1.0, -1.0], 1),
        ([1.0, -1.0], -1),
        ([-1.0, 1.0], -1),
    ];
    let n = 4 * per_cluster;
    let mut view_a = DMatrix::zeros(n, 2);
    let mut view_b = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for (center, label) in clusters {
        for _ in 0..per_cluster {
            for j in 0..2 {
                view_a[(row, j)] = center[j] + normal.sample(&mut rng);
            }
            for j in 0..2 {
                view_b[(row, j)] = center[j] + normal.sample(&mut rng);
            }
            labels.push(label);
            row += 1;
        }
    }
    MultiViewDataset::new(view_a, view_b, labels).expect("generated data is valid")
}
