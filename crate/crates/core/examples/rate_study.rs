//! Prints optimal MISE and fitted log-log slopes for one design.
//!
//! Usage: `cargo run --release -p fofreg-core --example rate_study -- ALPHA BETA GAMMA [REPS]`

use std::time::Instant;

use fofreg_core::{run_study, DgpConfig, Estimator};

fn main() -> fofreg_core::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let get = |i: usize, d: f64| args.get(i).copied().unwrap_or(d);
    let mut cfg = DgpConfig::new(get(0, 1.2), get(1, 3.0), get(2, 3.0));
    cfg.reps = get(3, 100.0) as usize;
    let start = Instant::now();
    let res = run_study(
        &cfg,
        &[400, 800, 1600, 3200],
        20,
        &[Estimator::Single, Estimator::Double],
    )?;
    for s in &res.sweeps {
        println!(
            "{:<6} n={:<5} optimal={:<6} mise={:.5e}",
            s.estimator.name(),
            s.n,
            s.optimal.to_string(),
            s.optimal_mise
        );
    }
    for (e, s) in &res.slopes {
        if let Some(s) = s {
            println!(
                "{:<6} slope={:.4} (se {:.4}) theory={:.4}",
                e.name(),
                s.fitted,
                s.std_error,
                s.theory
            );
        }
    }
    println!(
        "region={} elapsed={:.1?}",
        res.region.name(),
        start.elapsed()
    );
    Ok(())
}
