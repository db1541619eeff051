//! Generate one synthetic problem, recover the dictionary, and report the
//! alignment. The whole pipeline in a dozen lines.

use lpdict::{
    align, gen_instance, gpm_solve, population_max, BernoulliGaussianSpec, DictionaryKind,
    NoiseSpec, SolverConfig,
};

fn main() -> lpdict::Result<()> {
    let (n, samples, theta, p, seed) = (32, 10_000, 0.3, 3, 42);
    let instance = gen_instance(
        n,
        samples,
        &BernoulliGaussianSpec::new(theta)?,
        DictionaryKind::RandomOrthogonal,
        &NoiseSpec::none(),
        seed,
    )?;

    let mut cfg = SolverConfig::gpm(p, seed)?;
    cfg.record_trace = true;
    let (point, trace) = gpm_solve(&instance.observed.view(), n, &cfg, Some(&instance))?;
    let result = align(&point, &instance.dictionary.view())?;

    println!("n = {n}, r = {samples}, theta = {theta}, p = {p}");
    println!("iterations:      {} ({})", trace.iterations_run, trace.stop_reason);
    println!("quartic error:   {:.4}%", 100.0 * result.l4_error);
    println!("frobenius error: {:.6}", result.frob_error);
    println!(
        "per-entry objective {:.6} vs population value {:.6}",
        trace.final_objective / (n * samples) as f64,
        population_max(p, theta)?
    );
    Ok(())
}
