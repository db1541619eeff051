//! Noiseless scalability table (desk scale): n = 100, r = 40000,
//! p = 3, 4, 5, ten trials each. Writes CSV/JSON plus a replayable
//! manifest under ./out/. Expect a few minutes on a single core.

use lpdict::experiment::{preset_table1, run_recovery_table, write_table_output};
use std::path::Path;

fn main() -> lpdict::Result<()> {
    std::fs::create_dir_all("out")?;
    let grids = preset_table1(42, false);
    let output = run_recovery_table(&grids)?;
    for agg in &output.aggregates {
        println!(
            "n={} theta={} p={} r={}: mean l4 {:.4}% mean time {:.2}s",
            agg.n,
            agg.theta,
            agg.p,
            agg.samples,
            100.0 * agg.mean_l4_error,
            agg.mean_wall_time_s
        );
    }
    let paths = write_table_output(Path::new("out/noiseless_table"), &output)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}
