//! Fixed-point iteration versus fixed-step Riemannian gradient ascent on
//! the population sphere problem (theta = 0.3, p = 4). Both converge to a
//! signed basis vector; the fixed-point iteration needs far fewer steps.

use lpdict::{population_gpm, population_rgd, random_stiefel, ExpectationEngine};

fn iters_to(errors: &[f64], tol: f64) -> Option<usize> {
    errors.iter().position(|e| *e <= tol)
}

fn main() -> lpdict::Result<()> {
    let (n, theta, p) = (50usize, 0.3, 4u32);
    let engine = ExpectationEngine::closed_form_p4();
    println!("population iterations to reach error 1e-6 (n = {n}, theta = {theta}, p = {p}):");
    println!("start   fixed-point   gradient (step 1/4)");
    for seed in 0..5u64 {
        let a0 = random_stiefel(1, n, 100 + seed)?.into_matrix().row(0).to_owned();
        let (_, gpm) = population_gpm(&a0.view(), p, theta, &engine, 5_000, 1e-14)?;
        let (_, rgd) = population_rgd(&a0.view(), p, theta, &engine, 0.25, 5_000, 1e-14)?;
        println!(
            "{seed:>5}   {:>11}   {:>20}",
            iters_to(&gpm.error_series, 1e-6)
                .map(|v| v.to_string())
                .unwrap_or_else(|| "-".into()),
            iters_to(&rgd.error_series, 1e-6)
                .map(|v| v.to_string())
                .unwrap_or_else(|| "-".into()),
        );
    }
    Ok(())
}
