//! Sparse-corruption robustness: n = 32, theta = 0.3, r = 10000, additive
//! corruptions of magnitude sigma on a random tenth of the entries.

use lpdict::experiment::{preset_table3, run_recovery_table, write_table_output};
use std::path::Path;

fn main() -> lpdict::Result<()> {
    std::fs::create_dir_all("out")?;
    let output = run_recovery_table(&preset_table3(42))?;
    for agg in &output.aggregates {
        println!(
            "p={} sigma={:.1} density=0.1: mean l4 {:.4}%",
            agg.p,
            agg.noise_sigma,
            100.0 * agg.mean_l4_error
        );
    }
    for p in write_table_output(Path::new("out/sparse_noise_table"), &output)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
