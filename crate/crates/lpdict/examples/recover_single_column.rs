//! Recover a single dictionary column (the sphere case, one orthonormal
//! row) instead of the whole dictionary, and measure the distance to the
//! nearest signed column.

use lpdict::{
    gen_instance, gpm_solve, sphere_error, BernoulliGaussianSpec, DictionaryKind, NoiseSpec,
    SolverConfig,
};

fn main() -> lpdict::Result<()> {
    let (n, samples, theta, p) = (24, 8_000, 0.25, 3);
    let instance = gen_instance(
        n,
        samples,
        &BernoulliGaussianSpec::new(theta)?,
        DictionaryKind::RandomOrthogonal,
        &NoiseSpec::none(),
        11,
    )?;

    println!("recovering one column at a time (five random restarts):");
    for seed in 0..5u64 {
        let cfg = SolverConfig::gpm(p, seed)?;
        let (point, trace) = gpm_solve(&instance.observed.view(), 1, &cfg, Some(&instance))?;
        let err = sphere_error(&point.matrix().row(0), &instance.dictionary.view());
        // which column did this restart land on?
        let overlaps = point.matrix().dot(&instance.dictionary);
        let (column, _) = overlaps
            .row(0)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        println!(
            "  restart {seed}: column {column:>2}, distance {err:.3e}, {} iterations",
            trace.iterations_run
        );
    }
    Ok(())
}
