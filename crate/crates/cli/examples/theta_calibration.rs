//! Sweeps the small-distortion constant θ. For each θ it prints the worst
//! exponent `log|Y|/log n` of the large-distortion stage (distortion θ/2)
//! and the mean size of the final `2 + ε` extraction.
//!
//!     cargo run --release -p metric-ramsey --example theta_calibration

use metric_ramsey_core::instances::{gen_hypercube, random_metric};
use metric_ramsey_core::metric::FiniteMetric;
use metric_ramsey_core::ramsey::{ramsey_extract, small_alpha_extract, DriverOptions};

fn main() {
    let mut inputs: Vec<(String, FiniteMetric)> = Vec::new();
    for n in [32, 64, 128, 256] {
        for seed in 0..3 {
            inputs.push((format!("random_metric n={n} seed={seed}"), random_metric(n, seed, 0)));
        }
    }
    for d in [5, 6, 7, 8] {
        inputs.push((format!("hypercube d={d}"), gen_hypercube(d).expect("small cube").1));
    }
    println!("theta,worst_stage_exponent,mean_final_size,eps");
    for theta in [8.0, 16.0, 32.0, 64.0, 128.0] {
        let opts = DriverOptions { theta, ..DriverOptions::default() };
        for eps in [0.25, 0.5] {
            let mut worst = f64::INFINITY;
            let mut total = 0usize;
            for (_, x) in &inputs {
                let stage = ramsey_extract(x, theta / 2.0, None, &opts).expect("alpha above 2");
                worst = worst.min((stage.len() as f64).ln() / (x.n() as f64).ln());
                total += small_alpha_extract(x, None, eps, 1.0, &opts).map_or(0, |r| r.len());
            }
            println!("{theta},{worst:.4},{:.2},{eps}", total as f64 / inputs.len() as f64);
        }
    }
}
