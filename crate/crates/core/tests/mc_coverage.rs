//! Repeated seeded experiments: the 3-standard-error interval should cover
//! the sparse-limit value in at least 95% of runs for k ≤ 2.
//! Expensive (20 × 200 graphs with 5·10⁶ edges); run with `--ignored`.

use lapsum_core::mc::{estimate_cumulants, within};

#[test]
#[ignore]
fn three_sigma_coverage_over_twenty_seeds() {
    let (n, cbar, reps) = (100_000, 100.0, 200);
    let mut covered = [0usize; 2];
    for seed in 0..20u64 {
        let est = estimate_cumulants(n, cbar, 2, reps, 1000 + seed).unwrap();
        if within(&est[0], 1.0 + 1.0 / cbar, 3.0) {
            covered[0] += 1;
        }
        if within(&est[1], est[1].target, 3.0) {
            covered[1] += 1;
        }
        println!(
            "seed {}: k1 {:.5} ± {:.5}, k2 {:.4} ± {:.4}",
            1000 + seed,
            est[0].normalized,
            est[0].normalized_std_error(),
            est[1].normalized,
            est[1].normalized_std_error()
        );
    }
    assert!(covered[0] >= 19, "k=1 coverage {}/20", covered[0]);
    assert!(covered[1] >= 19, "k=2 coverage {}/20", covered[1]);
}
