//! Writes the noiseless rank-5 dataset used by the CLI tests.
//!
//! Usage: `cargo run -p fofreg-core --example rank5_fixture -- OUT_DIR`

use std::path::PathBuf;

use fofreg_core::io::{curves_to_csv, surface_to_csv, write_atomic, AxisMap};
use fofreg_core::simulation::{generate_dataset, rng_for, DgpConfig};

fn main() -> fofreg_core::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let mut cfg = DgpConfig::new(1.2, 3.0, 3.0);
    cfg.n = 100;
    cfg.noise_scale = 0.0;
    cfg.x_components = Some(5);
    cfg.b_support = Some(5);
    let data = generate_dataset(&cfg, &mut rng_for(20_240_501, 0))?;
    write_atomic(
        &out.join("rank5_x.csv"),
        &curves_to_csv(&data.xs, AxisMap::UNIT),
    )?;
    write_atomic(
        &out.join("rank5_y.csv"),
        &curves_to_csv(&data.ys, AxisMap::UNIT),
    )?;
    write_atomic(
        &out.join("rank5_truth.csv"),
        &surface_to_csv(&data.truth.surface, AxisMap::UNIT),
    )?;
    Ok(())
}
