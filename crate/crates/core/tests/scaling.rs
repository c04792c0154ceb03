//! Greedy iteration time grows linearly in the instance size. Kept in its own
//! test binary so no other test competes for the CPU.

use std::time::Instant;

use dgseg::experiments::{gen_sdag, SyntheticInstance};
use dgseg::greedy::run_greedy;
use dgseg::{random_init, Penalties, SolveConfig, SolverKind};

/// Fastest of several single-scan runs.
fn scan_seconds(inst: &SyntheticInstance, k: usize) -> f64 {
    let cfg = SolveConfig {
        max_iters: 1,
        ..SolveConfig::new(SolverKind::Greedy)
    };
    let pen = Penalties::finite(0.5, 2.0);
    (0..7)
        .map(|rep| {
            let init = random_init(inst.graph.n(), k, rep).unwrap();
            let t = Instant::now();
            run_greedy(&inst.graph, &inst.features, &pen, init, &cfg).unwrap();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn doubling_n_roughly_doubles_iteration_time() {
    let (k, d) = (5, 10);
    // Edge probability scaled so the average degree stays fixed.
    let small = gen_sdag(4000, d, k, 0.01, 4.0 / 4000.0, 1).unwrap();
    let large = gen_sdag(8000, d, k, 0.01, 4.0 / 8000.0, 1).unwrap();
    scan_seconds(&small, k);
    let ratio = scan_seconds(&large, k) / scan_seconds(&small, k);
    assert!((1.5..=3.0).contains(&ratio), "time ratio {ratio}");
}
