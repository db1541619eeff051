//! Success probability versus sample count for p = 3, 4, 5, 6 at n = 30,
//! theta = 0.3 (twenty trials per cell). The sample count needed for
//! reliable recovery grows steeply with the norm order. Expect a few
//! minutes on a single core.

use lpdict::experiment::{preset_phase, run_phase_transition, write_phase_output};
use std::path::Path;

fn main() -> lpdict::Result<()> {
    std::fs::create_dir_all("out")?;
    let output = run_phase_transition(&preset_phase(42))?;
    let mut current_p = 0;
    for cell in &output.cells {
        if cell.p != current_p {
            current_p = cell.p;
            println!("p = {current_p}:");
        }
        println!(
            "  r = {:>6}: {:>3.0}% recovered ({} / {})",
            cell.samples,
            100.0 * cell.success_rate,
            cell.successes,
            cell.trials
        );
    }
    for p in write_phase_output(Path::new("out/phase_transition"), &output)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
