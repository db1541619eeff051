//! Recovery-error metrics modulo the signed-permutation ambiguity, and the
//! signal-to-orthogonal diagnostics of the population iteration.
//!
//! Dictionary recovery is only identifiable up to permuting columns and
//! flipping their signs, so every error here is a minimum over that group.
//! The permutation is found by optimal assignment, never greedily: greedy
//! matching misreports the error on near-degenerate recoveries.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::assignment::max_weight_assignment;
use crate::error::{Error, Result};
use crate::solver::{expected_subset_norm_pow, ExpectationEngine};
use crate::stiefel::{orthonormality_defect, StiefelPoint};

/// Orthonormality slack accepted by [`align`].
pub const ALIGN_DEFECT_TOL: f64 = 1e-6;

/// Optimal signed-permutation alignment of a recovered frame with the truth.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentResult {
    /// `permutation[i]` is the dictionary column matched to row `i`.
    pub permutation: Vec<usize>,
    /// Sign applied to each matched column, `+1` or `-1`.
    pub signs: Vec<i8>,
    /// `min_Π ‖Aᵀ − D₀ Π‖_F / ‖D₀‖_F` over signed permutations.
    pub frob_error: f64,
    /// `1 − ‖A D₀‖₄⁴ / n`; zero iff the recovery is exact, and computed
    /// with exponent four regardless of the solver's norm order so results
    /// are comparable across methods.
    pub l4_error: f64,
}

/// Align a recovered point against an orthogonal dictionary.
pub fn align(a: &StiefelPoint, d0: &ArrayView2<f64>) -> Result<AlignmentResult> {
    align_matrices(&a.matrix().view(), d0)
}

/// [`align`] on raw matrices; both must be square, mutually sized, and
/// orthonormal to within [`ALIGN_DEFECT_TOL`].
pub fn align_matrices(a: &ArrayView2<f64>, d0: &ArrayView2<f64>) -> Result<AlignmentResult> {
    let n = a.nrows();
    if a.ncols() != n || d0.nrows() != n || d0.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "alignment needs square matrices of equal size, got {} x {} vs {} x {}",
            a.nrows(),
            a.ncols(),
            d0.nrows(),
            d0.ncols()
        )));
    }
    for m in [a, d0] {
        let defect = orthonormality_defect(m);
        if !(defect <= ALIGN_DEFECT_TOL) {
            return Err(Error::NotOrthonormal {
                defect,
                tol: ALIGN_DEFECT_TOL,
            });
        }
    }

    let product = a.dot(d0); // entry (i, j) = <row i of A, column j of D0>
    let weights: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| product[[i, j]].abs()).collect())
        .collect();
    let permutation = max_weight_assignment(&weights);
    let signs: Vec<i8> = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| if product[[i, j]] < 0.0 { -1 } else { 1 })
        .collect();

    // distance computed from the aligned difference itself; the
    // inner-product shortcut 2n - 2*matched loses half the digits near an
    // exact recovery
    let mut sq = 0.0;
    for (i, &j) in permutation.iter().enumerate() {
        let sign = signs[i] as f64;
        for row in 0..n {
            let d = a[[i, row]] - sign * d0[[row, j]];
            sq += d * d;
        }
    }
    let frob_error = sq.sqrt() / (n as f64).sqrt();
    let l4_error = l4_error_from_product(&product.view());

    Ok(AlignmentResult {
        permutation,
        signs,
        frob_error,
        l4_error,
    })
}

fn l4_error_from_product(product: &ArrayView2<f64>) -> f64 {
    let n = product.nrows() as f64;
    let quartic_mass: f64 = product.iter().map(|v| v * v * v * v).sum();
    (1.0 - quartic_mass / n).clamp(0.0, 1.0)
}

/// `1 − ‖A D₀‖₄⁴ / n` for a square recovered frame.
pub fn l4_alignment_error(a: &ArrayView2<f64>, d0: &ArrayView2<f64>) -> f64 {
    let product = a.dot(d0);
    l4_error_from_product(&product.view())
}

/// Distance from a unit vector to the nearest signed dictionary column:
/// `min_i min(‖a − dᵢ‖₂, ‖a + dᵢ‖₂)`.
pub fn sphere_error(a: &ArrayView1<f64>, d0: &ArrayView2<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for col in d0.columns() {
        let mut minus = 0.0;
        let mut plus = 0.0;
        for (x, d) in a.iter().zip(col.iter()) {
            minus += (x - d) * (x - d);
            plus += (x + d) * (x + d);
        }
        best = best.min(minus.min(plus));
    }
    best.sqrt()
}

/// Signal-to-orthogonal diagnostics of a vector toward one coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct SorDiagnostics {
    /// `a_target / ‖a_rest‖₂`; infinite (and flagged) when the orthogonal
    /// part vanishes exactly.
    pub sor: f64,
    /// `a_target / a_i` per coordinate; the target slot holds NaN.
    pub per_coordinate: Vec<f64>,
    /// Set when the orthogonal part is exactly zero.
    pub degenerate: bool,
}

/// Compute SOR diagnostics; ratios are invariant under positive scaling.
pub fn sor(a: &ArrayView1<f64>, target: usize) -> Result<SorDiagnostics> {
    let n = a.len();
    if target >= n {
        return Err(Error::InvalidParam(format!(
            "target {target} out of range for dimension {n}"
        )));
    }
    if a.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidParam("vector must be nonzero".into()));
    }
    let signal = a[target];
    let rest: f64 = a
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target)
        .map(|(_, v)| v * v)
        .sum::<f64>()
        .sqrt();
    let degenerate = rest == 0.0;
    let sor = if degenerate {
        f64::INFINITY.copysign(signal)
    } else {
        signal / rest
    };
    let per_coordinate = (0..n)
        .map(|i| if i == target { f64::NAN } else { signal / a[i] })
        .collect();
    Ok(SorDiagnostics {
        sor,
        per_coordinate,
        degenerate,
    })
}

/// Per-step multiplicative growth of `SOR_i` under the population
/// iteration:
///
/// `τᵢ(q) = (E‖[q_Ω', q_t]‖ᵏ − E‖[q_Ω', q_i]‖ᵏ)
///          / (θ/(1−θ) · E‖[q_Ω', q_i, q_t]‖ᵏ + E‖[q_Ω', q_i]‖ᵏ)`
///
/// with `k = p − 2` and `Ω'` ranging over the remaining coordinates. The
/// value is invariant under rescaling of `q`.
pub fn tau_i(
    q: &ArrayView1<f64>,
    i: usize,
    target: usize,
    theta: f64,
    p: u32,
    engine: &ExpectationEngine,
) -> Result<f64> {
    let n = q.len();
    if i >= n || target >= n {
        return Err(Error::InvalidParam(format!(
            "indices ({i}, {target}) out of range for dimension {n}"
        )));
    }
    if i == target {
        return Err(Error::InvalidParam(
            "growth factor is defined for coordinates other than the target".into(),
        ));
    }
    if p < 3 {
        return Err(Error::InvalidParam(format!("norm order must be >= 3, got {p}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "sparsity level must lie in (0,1), got {theta}"
        )));
    }
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() < 1e-8) {
        return Err(Error::InvalidParam(format!(
            "expected a unit vector, got norm {norm}"
        )));
    }

    let k = p - 2;
    let free: Vec<f64> = q
        .iter()
        .enumerate()
        .filter(|(idx, _)| *idx != i && *idx != target)
        .map(|(_, v)| *v)
        .collect();
    let qt2 = q[target] * q[target];
    let qi2 = q[i] * q[i];
    let with_target = expected_subset_norm_pow(&free, qt2, k, theta, engine)?;
    let with_i = expected_subset_norm_pow(&free, qi2, k, theta, engine)?;
    let with_both = expected_subset_norm_pow(&free, qt2 + qi2, k, theta, engine)?;
    Ok((with_target - with_i) / (theta / (1.0 - theta) * with_both + with_i))
}

/// Explicit signed-permutation matrix from an alignment, such that
/// `D₀ Π` best matches `Aᵀ`.
pub fn permutation_matrix(result: &AlignmentResult) -> Array2<f64> {
    let n = result.permutation.len();
    let mut pi = Array2::<f64>::zeros((n, n));
    for (i, &j) in result.permutation.iter().enumerate() {
        pi[[j, i]] = result.signs[i] as f64;
    }
    pi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::population_gradient;
    use crate::stiefel::random_stiefel;
    use ndarray::{array, Array1};

    #[test]
    fn align_identifies_exact_recovery() {
        let d0 = random_stiefel(5, 5, 1).unwrap().into_matrix();
        let a = StiefelPoint::new(d0.t().to_owned()).unwrap();
        let res = align(&a, &d0.view()).unwrap();
        assert!(res.frob_error <= 1e-12);
        assert!(res.l4_error <= 1e-12);
        assert_eq!(res.permutation, vec![0, 1, 2, 3, 4]);
        assert_eq!(res.signs, vec![1; 5]);
    }

    #[test]
    fn align_undoes_a_scramble() {
        let d0 = random_stiefel(4, 4, 2).unwrap().into_matrix();
        let at = d0.t().to_owned();
        // rows of A are rows 2,0,3,1 of D0^T with a sign flip on the second
        let order = [2usize, 0, 3, 1];
        let signs = [1.0, -1.0, 1.0, 1.0];
        let mut scrambled = Array2::<f64>::zeros((4, 4));
        for (dst, &src) in order.iter().enumerate() {
            for j in 0..4 {
                scrambled[[dst, j]] = signs[dst] * at[[src, j]];
            }
        }
        let a = StiefelPoint::new(scrambled).unwrap();
        let res = align(&a, &d0.view()).unwrap();
        assert!(res.frob_error <= 1e-12);
        assert!(res.l4_error <= 1e-12);
        assert_eq!(res.permutation, vec![2, 0, 3, 1]);
        assert_eq!(res.signs, vec![1, -1, 1, 1]);
    }

    #[test]
    fn frob_error_matches_explicit_reconstruction() {
        let d0 = random_stiefel(6, 6, 3).unwrap().into_matrix();
        let a = random_stiefel(6, 6, 4).unwrap();
        let res = align(&a, &d0.view()).unwrap();
        let pi = permutation_matrix(&res);
        let reconstructed = d0.dot(&pi);
        let diff = &a.matrix().t().to_owned() - &reconstructed;
        let dist = diff.iter().map(|v| v * v).sum::<f64>().sqrt() / 6f64.sqrt();
        assert!((dist - res.frob_error).abs() <= 1e-12);
    }

    #[test]
    fn align_rejects_bad_inputs() {
        let d0 = Array2::<f64>::eye(3);
        let skewed = array![[1.0, 0.2, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            align_matrices(&skewed.view(), &d0.view()),
            Err(Error::NotOrthonormal { .. })
        ));
        let rect = Array2::<f64>::eye(4);
        assert!(matches!(
            align_matrices(&d0.view(), &rect.view()),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn metric_consistency_zero_frob_iff_tiny_l4() {
        let d0 = random_stiefel(5, 5, 9).unwrap().into_matrix();
        let exact = StiefelPoint::new(d0.t().to_owned()).unwrap();
        let res = align(&exact, &d0.view()).unwrap();
        assert!(res.frob_error == 0.0 || res.frob_error <= 1e-12);
        assert!(res.l4_error <= 1e-10);

        let off = random_stiefel(5, 5, 10).unwrap();
        let res_off = align(&off, &d0.view()).unwrap();
        assert!(res_off.frob_error > 1e-3);
        assert!(res_off.l4_error > 1e-6);
    }

    #[test]
    fn sphere_error_handles_signs_and_angles() {
        let d0 = random_stiefel(6, 6, 5).unwrap().into_matrix();
        let col = d0.column(3).to_owned();
        assert!(sphere_error(&col.view(), &d0.view()) <= 1e-12);
        let neg = col.mapv(|v| -v);
        assert!(sphere_error(&neg.view(), &d0.view()) <= 1e-12);

        // n = 2, identity dictionary, 45 degrees off both axes
        let d = Array2::<f64>::eye(2);
        let a = array![std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        let expected = (2.0 - 2.0f64.sqrt()).sqrt();
        assert!((sphere_error(&a.view(), &d.view()) - expected).abs() <= 1e-12);
    }

    #[test]
    fn sor_examples_and_identity() {
        let n = 4;
        let mut e = Array1::<f64>::zeros(n);
        e[n - 1] = 1.0;
        let diag = sor(&e.view(), n - 1).unwrap();
        assert!(diag.degenerate);
        assert!(diag.sor.is_infinite() && diag.sor > 0.0);

        let a = array![std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        let diag = sor(&a.view(), 1).unwrap();
        assert!((diag.sor - 1.0).abs() <= 1e-12);
        // squared distance identity for a positive signal coordinate
        let predicted = 2.0 - 2.0 * (diag.sor * diag.sor / (diag.sor * diag.sor + 1.0)).sqrt();
        let direct = (a[0] - 0.0).powi(2) + (a[1] - 1.0).powi(2);
        assert!((predicted - direct).abs() <= 1e-12);

        // exact scale invariance
        let scaled = a.mapv(|v| 3.5 * v);
        let diag_scaled = sor(&scaled.view(), 1).unwrap();
        assert_eq!(diag.sor, diag_scaled.sor);
        assert_eq!(diag.per_coordinate[0], diag_scaled.per_coordinate[0]);

        assert!(sor(&Array1::<f64>::zeros(3).view(), 0).is_err());
        assert!(sor(&a.view(), 5).is_err());
    }

    fn random_unit(n: usize, seed: u64) -> Array1<f64> {
        random_stiefel(1, n, seed).unwrap().into_matrix().row(0).to_owned()
    }

    #[test]
    fn tau_vanishes_for_tied_coordinates() {
        let mut q = random_unit(6, 21);
        // force q_i = q_target, renormalize
        q[0] = q[5];
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        q.mapv_inplace(|v| v / norm);
        let tau = tau_i(&q.view(), 0, 5, 0.3, 3, &ExpectationEngine::exact()).unwrap();
        assert!(tau.abs() <= 1e-12, "tau {tau}");
    }

    #[test]
    fn tau_stays_in_band_when_target_dominates() {
        for seed in 0..50u64 {
            let q = random_unit(7, 300 + seed);
            let target = crate::solver::dominant_coordinate(&q.view());
            let theta = 0.15 + 0.1 * (seed % 7) as f64;
            let p = 3 + (seed % 4) as u32;
            for i in 0..7 {
                if i == target {
                    continue;
                }
                let tau = tau_i(&q.view(), i, target, theta, p, &ExpectationEngine::exact())
                    .unwrap();
                assert!(
                    (-1e-12..=(1.0 - theta) / theta + 1e-12).contains(&tau),
                    "tau {tau} outside band at theta {theta}"
                );
            }
        }
    }

    #[test]
    fn one_population_step_multiplies_sor_by_growth_factor() {
        let engine = ExpectationEngine::exact();
        for seed in 0..10u64 {
            let q = random_unit(6, 600 + seed);
            let target = crate::solver::dominant_coordinate(&q.view());
            let g = population_gradient(&q.view(), 4, 0.3, &engine).unwrap();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let next = g.mapv(|v| v / norm);
            let before = sor(&q.view(), target).unwrap();
            let after = sor(&next.view(), target).unwrap();
            for i in 0..6 {
                if i == target {
                    continue;
                }
                let tau = tau_i(&q.view(), i, target, 0.3, 4, &engine).unwrap();
                let predicted = before.per_coordinate[i] * (1.0 + tau);
                let actual = after.per_coordinate[i];
                assert!(
                    (predicted - actual).abs() <= 1e-10 * actual.abs().max(1.0),
                    "seed {seed} coord {i}: predicted {predicted} vs {actual}"
                );
            }
        }
    }

    #[test]
    fn tau_is_monotone_in_signal_and_orthogonal_coordinates() {
        let engine = ExpectationEngine::exact();
        let base = vec![0.3, 0.25, 0.2, 0.35, 0.4, 0.3, 0.25, 0.2];
        let normalize = |v: &[f64]| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            Array1::from_iter(v.iter().map(|x| x / norm))
        };
        // growing the target coordinate grows tau
        let mut last = -f64::INFINITY;
        for t in [0.45, 0.55, 0.7, 0.9, 1.2] {
            let mut v = base.clone();
            v[7] = t;
            let q = normalize(&v);
            let tau = tau_i(&q.view(), 0, 7, 0.3, 5, &engine).unwrap();
            assert!(tau > last, "tau not increasing in signal coordinate");
            last = tau;
        }
        // growing the competing coordinate shrinks tau
        let mut last = f64::INFINITY;
        for t in [0.05, 0.15, 0.25, 0.35, 0.44] {
            let mut v = base.clone();
            v[7] = 0.45;
            v[0] = t;
            let q = normalize(&v);
            let tau = tau_i(&q.view(), 0, 7, 0.3, 5, &engine).unwrap();
            assert!(tau < last, "tau not decreasing in orthogonal coordinate");
            last = tau;
        }
    }

    #[test]
    fn tau_engines_agree() {
        let q = random_unit(7, 88);
        let target = crate::solver::dominant_coordinate(&q.view());
        let i = (target + 1) % 7;
        let exact = tau_i(&q.view(), i, target, 0.3, 4, &ExpectationEngine::exact()).unwrap();
        let closed =
            tau_i(&q.view(), i, target, 0.3, 4, &ExpectationEngine::closed_form_p4()).unwrap();
        assert!((exact - closed).abs() <= 1e-12);
        let mc = tau_i(
            &q.view(),
            i,
            target,
            0.3,
            4,
            &ExpectationEngine::monte_carlo(400_000, 9),
        )
        .unwrap();
        assert!((exact - mc).abs() <= 0.02, "exact {exact} vs mc {mc}");
    }

    #[test]
    fn tau_rejects_bad_arguments() {
        let q = random_unit(5, 77);
        let engine = ExpectationEngine::exact();
        assert!(tau_i(&q.view(), 2, 2, 0.3, 4, &engine).is_err());
        assert!(tau_i(&q.view(), 0, 9, 0.3, 4, &engine).is_err());
        assert!(tau_i(&q.view(), 0, 2, 0.0, 4, &engine).is_err());
        let unnormalized = Array1::from_vec(vec![1.0, 1.0, 1.0]);
        assert!(tau_i(&unnormalized.view(), 0, 2, 0.3, 4, &engine).is_err());
    }
}
