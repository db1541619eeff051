//! Slow, independent brute-force evaluators used only by tests and
//! acceptance runs: exact support expectations, exhaustive
//! signed-permutation search, and Monte Carlo moment estimates.
//!
//! Nothing here touches the production code paths it is used to verify.
//! The enumerations are written recursively (the main crate uses bitmask
//! loops) so the two routes stay independent.

// Validations are written as negated comparisons so NaN parameters fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("problem too large for brute force: {0}")]
    TooLarge(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Largest dimension accepted by the exact support enumeration.
pub const MAX_SUPPORT_DIM: usize = 20;

/// Largest dimension accepted by the exhaustive signed-permutation search.
pub const MAX_ALIGNMENT_DIM: usize = 6;

/// Functional of the random support evaluated by
/// [`exact_support_expectation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `E ‖a_Ω‖₂^k` — scalar.
    NormPower { k: u32 },
    /// `E ‖a_Ω‖₂^k · a_Ω` — vector (zero outside the support).
    NormPowerTimesCoordinate { k: u32 },
    /// `E (‖a_Ω‖₂² + eta²)^{p/2}` — scalar; the noisy population objective
    /// up to the Gaussian moment constant.
    NoisyPower { p: u32, eta: f64 },
}

/// Conditioning on coordinates forced into or out of the support.
#[derive(Debug, Clone, Default)]
pub struct Conditioning {
    pub force_in: Vec<usize>,
    pub force_out: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SupportExpectationQuery {
    pub a: Vec<f64>,
    pub functional: Functional,
    /// Inclusion probability of each unconditioned coordinate.
    pub theta: f64,
    pub conditioning: Conditioning,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpectationValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ExpectationValue {
    pub fn scalar(&self) -> f64 {
        match self {
            ExpectationValue::Scalar(v) => *v,
            ExpectationValue::Vector(_) => panic!("expected a scalar expectation"),
        }
    }

    pub fn vector(&self) -> &[f64] {
        match self {
            ExpectationValue::Vector(v) => v,
            ExpectationValue::Scalar(_) => panic!("expected a vector expectation"),
        }
    }
}

/// Exact expectation over the random support, by recursive enumeration of
/// the unconditioned coordinates. Weights are `theta^|Ω| (1−theta)^|Ωᶜ|`
/// over the free coordinates, which is already the renormalized conditional
/// law when conditioning is present.
pub fn exact_support_expectation(query: &SupportExpectationQuery) -> Result<ExpectationValue> {
    let n = query.a.len();
    if n > MAX_SUPPORT_DIM {
        return Err(OracleError::TooLarge(format!(
            "support enumeration limited to {MAX_SUPPORT_DIM} coordinates, got {n}"
        )));
    }
    if !(query.theta > 0.0 && query.theta < 1.0) {
        return Err(OracleError::InvalidParam(format!(
            "inclusion probability must lie in (0,1), got {}",
            query.theta
        )));
    }
    if let Functional::NoisyPower { eta, .. } = query.functional {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(OracleError::InvalidParam(format!(
                "noise level must be >= 0, got {eta}"
            )));
        }
    }
    for &idx in query
        .conditioning
        .force_in
        .iter()
        .chain(query.conditioning.force_out.iter())
    {
        if idx >= n {
            return Err(OracleError::InvalidParam(format!(
                "conditioned coordinate {idx} out of range"
            )));
        }
    }
    if query
        .conditioning
        .force_in
        .iter()
        .any(|i| query.conditioning.force_out.contains(i))
    {
        return Err(OracleError::InvalidParam(
            "a coordinate cannot be forced both in and out".into(),
        ));
    }

    let free: Vec<usize> = (0..n)
        .filter(|i| {
            !query.conditioning.force_in.contains(i) && !query.conditioning.force_out.contains(i)
        })
        .collect();

    let mut scalar_acc = 0.0;
    let mut vector_acc = vec![0.0; n];
    let mut support: Vec<usize> = query.conditioning.force_in.clone();
    recurse(
        &free,
        0,
        1.0,
        query,
        &mut support,
        &mut scalar_acc,
        &mut vector_acc,
    );

    Ok(match query.functional {
        Functional::NormPowerTimesCoordinate { .. } => ExpectationValue::Vector(vector_acc),
        _ => ExpectationValue::Scalar(scalar_acc),
    })
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    free: &[usize],
    depth: usize,
    weight: f64,
    query: &SupportExpectationQuery,
    support: &mut Vec<usize>,
    scalar_acc: &mut f64,
    vector_acc: &mut [f64],
) {
    if depth == free.len() {
        let sumsq: f64 = support.iter().map(|&i| query.a[i] * query.a[i]).sum();
        match query.functional {
            Functional::NormPower { k } => {
                *scalar_acc += weight * sumsq.sqrt().powi(k as i32);
            }
            Functional::NormPowerTimesCoordinate { k } => {
                let scale = weight * sumsq.sqrt().powi(k as i32);
                for &i in support.iter() {
                    vector_acc[i] += scale * query.a[i];
                }
            }
            Functional::NoisyPower { p, eta } => {
                *scalar_acc += weight * (sumsq + eta * eta).powf(p as f64 / 2.0);
            }
        }
        return;
    }
    let idx = free[depth];
    support.push(idx);
    recurse(
        free,
        depth + 1,
        weight * query.theta,
        query,
        support,
        scalar_acc,
        vector_acc,
    );
    support.pop();
    recurse(
        free,
        depth + 1,
        weight * (1.0 - query.theta),
        query,
        support,
        scalar_acc,
        vector_acc,
    );
}

/// Exact minimum of `‖Aᵀ − D₀ Π‖_F / ‖D₀‖_F` over all `2^n n!` signed
/// permutations, by literal enumeration.
pub fn exhaustive_alignment(a: &Array2<f64>, d0: &Array2<f64>) -> Result<f64> {
    let n = a.nrows();
    if n > MAX_ALIGNMENT_DIM {
        return Err(OracleError::TooLarge(format!(
            "signed-permutation search limited to {MAX_ALIGNMENT_DIM}, got {n}"
        )));
    }
    if a.ncols() != n || d0.nrows() != n || d0.ncols() != n {
        return Err(OracleError::InvalidParam("matrices must be square and equal".into()));
    }

    use itertools::Itertools;
    let at = a.t();
    let mut best = f64::INFINITY;
    for perm in (0..n).permutations(n) {
        for sign_mask in 0..(1u32 << n) {
            // column i of the candidate is sign_i * column perm[i] of D0
            let mut sq = 0.0;
            for i in 0..n {
                let sign = if sign_mask & (1 << i) != 0 { -1.0 } else { 1.0 };
                for row in 0..n {
                    let d = at[[row, i]] - sign * d0[[row, perm[i]]];
                    sq += d * d;
                }
            }
            best = best.min(sq);
        }
    }
    let d0_norm: f64 = d0.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(best.sqrt() / d0_norm)
}

/// Sample mean and standard error of `f` over `samples` draws.
pub fn mc_moment<F: FnMut(&mut ChaCha8Rng) -> f64>(
    samples: usize,
    seed: u64,
    mut f: F,
) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(OracleError::InvalidParam(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let v = f(&mut rng);
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    let stderr = (var / samples as f64).sqrt();
    Ok((mean, stderr))
}

/// Samplers for use with [`mc_moment`].
pub mod samplers {
    use super::*;

    /// `|g|^p` for a standard Gaussian `g`.
    pub fn abs_gaussian_pow(p: u32) -> impl FnMut(&mut ChaCha8Rng) -> f64 {
        move |rng| {
            let g: f64 = StandardNormal.sample(rng);
            g.abs().powi(p as i32)
        }
    }

    /// `|aᵀ y|^p` where `y = D₀ (b ∘ g)` with `b ~ Ber(theta)` and standard
    /// Gaussian `g`. Pass the precomputed row `q = aᵀ D₀` directly.
    pub fn bg_projection_pow(q: Array1<f64>, theta: f64, p: u32) -> impl FnMut(&mut ChaCha8Rng) -> f64 {
        move |rng| {
            let mut acc = 0.0;
            for &qi in q.iter() {
                if rng.random::<f64>() < theta {
                    let g: f64 = StandardNormal.sample(rng);
                    acc += qi * g;
                }
            }
            acc.abs().powi(p as i32)
        }
    }

    /// `|aᵀ y + e|^p` with `e ~ N(0, eta²)`: the Gaussian-noise variant of
    /// [`bg_projection_pow`] for a unit-norm `a`.
    pub fn noisy_bg_projection_pow(
        q: Array1<f64>,
        theta: f64,
        eta: f64,
        p: u32,
    ) -> impl FnMut(&mut ChaCha8Rng) -> f64 {
        move |rng| {
            let mut acc = 0.0;
            for &qi in q.iter() {
                if rng.random::<f64>() < theta {
                    let g: f64 = StandardNormal.sample(rng);
                    acc += qi * g;
                }
            }
            let e: f64 = StandardNormal.sample(rng);
            (acc + eta * e).abs().powi(p as i32)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn lone_coordinate_contributes_theta() {
        let q = SupportExpectationQuery {
            a: basis(5, 4),
            functional: Functional::NormPower { k: 2 },
            theta: 0.35,
            conditioning: Conditioning::default(),
        };
        let v = exact_support_expectation(&q).unwrap().scalar();
        assert!((v - 0.35).abs() <= 1e-15);
    }

    #[test]
    fn two_dimensional_second_moment_is_linear() {
        let (x, y, theta) = (0.8, -0.45, 0.27);
        let q = SupportExpectationQuery {
            a: vec![x, y],
            functional: Functional::NormPower { k: 2 },
            theta,
            conditioning: Conditioning::default(),
        };
        let v = exact_support_expectation(&q).unwrap().scalar();
        assert!((v - theta * (x * x + y * y)).abs() <= 1e-15);
    }

    #[test]
    fn noisy_power_two_case_closed_form() {
        let (theta, eta, p) = (0.3, 0.7, 5u32);
        let q = SupportExpectationQuery {
            a: basis(4, 3),
            functional: Functional::NoisyPower { p, eta },
            theta,
            conditioning: Conditioning::default(),
        };
        let v = exact_support_expectation(&q).unwrap().scalar();
        let expected = theta * (1.0 + eta * eta).powf(p as f64 / 2.0)
            + (1.0 - theta) * eta.powi(p as i32);
        assert!((v - expected).abs() <= 1e-14);
    }

    #[test]
    fn conditioning_obeys_the_tower_rule() {
        let a = vec![0.4, -0.3, 0.6, 0.2, -0.5];
        let theta = 0.3;
        let base = SupportExpectationQuery {
            a: a.clone(),
            functional: Functional::NormPower { k: 3 },
            theta,
            conditioning: Conditioning::default(),
        };
        let uncond = exact_support_expectation(&base).unwrap().scalar();
        let cond_in = exact_support_expectation(&SupportExpectationQuery {
            conditioning: Conditioning {
                force_in: vec![2],
                force_out: vec![],
            },
            ..base.clone()
        })
        .unwrap()
        .scalar();
        let cond_out = exact_support_expectation(&SupportExpectationQuery {
            conditioning: Conditioning {
                force_in: vec![],
                force_out: vec![2],
            },
            ..base.clone()
        })
        .unwrap()
        .scalar();
        let reconstructed = theta * cond_in + (1.0 - theta) * cond_out;
        assert!((uncond - reconstructed).abs() <= 1e-12);
    }

    #[test]
    fn rejects_oversized_and_inconsistent_queries() {
        let q = SupportExpectationQuery {
            a: vec![0.1; 21],
            functional: Functional::NormPower { k: 2 },
            theta: 0.5,
            conditioning: Conditioning::default(),
        };
        assert!(matches!(
            exact_support_expectation(&q),
            Err(OracleError::TooLarge(_))
        ));
        let q2 = SupportExpectationQuery {
            a: vec![0.1; 3],
            functional: Functional::NormPower { k: 2 },
            theta: 0.5,
            conditioning: Conditioning {
                force_in: vec![1],
                force_out: vec![1],
            },
        };
        assert!(exact_support_expectation(&q2).is_err());
    }

    #[test]
    fn exhaustive_alignment_trivial_and_rotated() {
        let d0 = Array2::<f64>::eye(3);
        let at = d0.t().to_owned();
        assert!(exhaustive_alignment(&at, &d0).unwrap() <= 1e-15);

        // 2-D: for a small rotation the identity permutation wins and the
        // minimum has the closed form 2 sin(eps/2).
        let eps = 0.1f64;
        let rot = ndarray::array![[eps.cos(), -eps.sin()], [eps.sin(), eps.cos()]];
        let d = Array2::<f64>::eye(2);
        let a = rot.t().to_owned(); // A = R^T so A^T = R
        let err = exhaustive_alignment(&a, &d).unwrap();
        let expected = 2.0 * (eps / 2.0).sin();
        assert!((err - expected).abs() <= 1e-12, "{err} vs {expected}");
    }

    #[test]
    fn exhaustive_alignment_rejects_large_inputs() {
        let d0 = Array2::<f64>::eye(7);
        assert!(matches!(
            exhaustive_alignment(&d0.clone(), &d0),
            Err(OracleError::TooLarge(_))
        ));
    }

    #[test]
    fn mc_moment_recovers_gaussian_fourth_moment() {
        let (mean, se) = mc_moment(1_000_000, 9, samplers::abs_gaussian_pow(4)).unwrap();
        assert!((mean - 3.0).abs() <= 3.0 * se, "mean {mean} se {se}");
        assert!(mc_moment(10, 0, samplers::abs_gaussian_pow(2)).is_err());
    }

    #[test]
    fn projected_moment_at_one_sparse_row_matches_closed_form() {
        // E|a^T y|^3 with the projected row supported on one coordinate:
        // gamma_3 * theta, gamma_3 = 2 sqrt(2) / sqrt(pi)
        let theta = 0.2;
        let q = Array1::from_vec(basis(6, 2));
        let (mean, se) = mc_moment(
            1_000_000,
            31,
            samplers::bg_projection_pow(q, theta, 3),
        )
        .unwrap();
        let gamma3 = 2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI.sqrt();
        let expected = gamma3 * theta;
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "mean {mean} vs {expected} (se {se})"
        );
    }
}
