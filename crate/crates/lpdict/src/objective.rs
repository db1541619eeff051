//! The entrywise lp objective `‖A Y‖_p^p`, its gradient, and the Gaussian
//! moment constants that pin down its population value.
//!
//! Powers are integer (`p ≥ 3`) and computed by repeated multiplication, so
//! the odd/even distinction is exact. The entry transform of the gradient,
//! `x ↦ |x|^{p−1} sign(x)`, is continuous at zero for all supported `p`.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::stiefel::StiefelPoint;

/// How objective values are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Normalization {
    /// `‖A Y‖_p^p` as is.
    Raw,
    /// Divided by the entry count `n · r`; population-comparable.
    PerEntry,
}

/// Objective parameters: the norm order and the reporting scale.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ObjectiveSpec {
    pub p: u32,
    pub normalization: Normalization,
}

impl ObjectiveSpec {
    pub fn new(p: u32, normalization: Normalization) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParam(format!("norm order must be >= 3, got {p}")));
        }
        Ok(Self { p, normalization })
    }

    pub fn raw(p: u32) -> Result<Self> {
        Self::new(p, Normalization::Raw)
    }

    pub fn per_entry(p: u32) -> Result<Self> {
        Self::new(p, Normalization::PerEntry)
    }
}

#[inline]
pub(crate) fn abs_pow(x: f64, p: u32) -> f64 {
    x.abs().powi(p as i32)
}

/// `x ↦ |x|^{p−1} sign(x)` with `sign(0) = 0`.
#[inline]
pub(crate) fn signed_pow(x: f64, p: u32) -> f64 {
    x.abs().powi(p as i32 - 1).copysign(x)
}

/// Sum of `|z|^p` over all entries.
///
/// Rows are accumulated left to right and the per-row totals are reduced in
/// sorted order, so the value is bit-reproducible and exactly invariant
/// under row permutations and sign flips of `z`.
pub(crate) fn abs_pow_sum(z: &ArrayView2<f64>, p: u32) -> f64 {
    let mut row_sums: Vec<f64> = z
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|&v| abs_pow(v, p)).sum())
        .collect();
    row_sums.sort_unstable_by(f64::total_cmp);
    row_sums.iter().sum()
}

/// Entrywise `|z|^{p−1} sign(z)`.
pub(crate) fn score_matrix(z: &ArrayView2<f64>, p: u32) -> Array2<f64> {
    z.mapv(|v| signed_pow(v, p))
}

fn check_shapes(a: &StiefelPoint, y: &ArrayView2<f64>) -> Result<()> {
    if a.ambient_dim() != y.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "point is {} x {} but data has {} rows",
            a.rows(),
            a.ambient_dim(),
            y.nrows()
        )));
    }
    Ok(())
}

/// `Σᵢⱼ |(A Y)ᵢⱼ|^p`, divided by `n·r` under per-entry normalization.
pub fn objective(a: &StiefelPoint, y: &ArrayView2<f64>, spec: &ObjectiveSpec) -> Result<f64> {
    check_shapes(a, y)?;
    let z = a.matrix().dot(y);
    let raw = abs_pow_sum(&z.view(), spec.p);
    Ok(match spec.normalization {
        Normalization::Raw => raw,
        Normalization::PerEntry => raw / (y.nrows() * y.ncols()) as f64,
    })
}

/// Euclidean gradient `(|A Y|^{∘(p−1)} ∘ sign(A Y)) Yᵀ`, scaled like the
/// objective it differentiates.
pub fn gradient(a: &StiefelPoint, y: &ArrayView2<f64>, spec: &ObjectiveSpec) -> Result<Array2<f64>> {
    check_shapes(a, y)?;
    let z = a.matrix().dot(y);
    let score = score_matrix(&z.view(), spec.p);
    let mut g = score.dot(&y.t());
    g.mapv_inplace(|v| v * spec.p as f64);
    if spec.normalization == Normalization::PerEntry {
        let scale = 1.0 / (y.nrows() * y.ncols()) as f64;
        g.mapv_inplace(|v| v * scale);
    }
    Ok(g)
}

/// p-th absolute moment of a centered Gaussian with standard deviation
/// `sigma`: `σ^p 2^{p/2} Γ((p+1)/2) / √π`.
///
/// Evaluated in closed form: `(p−1)!!` for even `p` and
/// `√(2/π) · 2^{(p−1)/2} · ((p−1)/2)!` for odd `p`.
pub fn gamma_p(p: u32, sigma: f64) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidParam("moment order must be >= 1".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParam(format!(
            "gaussian scale must be positive and finite, got {sigma}"
        )));
    }
    let std_moment = if p.is_multiple_of(2) {
        // (p-1)!! = 1 * 3 * ... * (p-1)
        let mut acc = 1.0f64;
        let mut k = 1u32;
        while k < p {
            acc *= k as f64;
            k += 2;
        }
        acc
    } else {
        // sqrt(2/pi) * 2^{(p-1)/2} * ((p-1)/2)!
        let half = (p - 1) / 2;
        let mut acc = (2.0 / std::f64::consts::PI).sqrt();
        for j in 1..=half {
            acc *= 2.0 * j as f64;
        }
        acc
    };
    Ok(sigma.powi(p as i32) * std_moment)
}

/// Per-entry population objective at the true dictionary: `γ_p · θ`.
pub fn population_max(p: u32, theta: f64) -> Result<f64> {
    if p < 3 {
        return Err(Error::InvalidParam(format!("norm order must be >= 3, got {p}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "sparsity level must lie in (0,1), got {theta}"
        )));
    }
    Ok(gamma_p(p, 1.0)? * theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stiefel::random_stiefel;
    use ndarray::array;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn objective_matches_hand_arithmetic() {
        let a = StiefelPoint::new(Array2::eye(2)).unwrap();
        let y = array![[1.0, 0.0], [0.0, 2.0]];
        let spec = ObjectiveSpec::raw(3).unwrap();
        assert_eq!(objective(&a, &y.view(), &spec).unwrap(), 9.0);

        let e1 = StiefelPoint::new(array![[1.0, 0.0]]).unwrap();
        let y2 = array![[3.0], [4.0]];
        let spec4 = ObjectiveSpec::raw(4).unwrap();
        assert_eq!(objective(&e1, &y2.view(), &spec4).unwrap(), 81.0);
    }

    #[test]
    fn objective_rejects_incompatible_shapes() {
        let a = StiefelPoint::new(Array2::eye(2)).unwrap();
        let y = Array2::<f64>::zeros((3, 4));
        let spec = ObjectiveSpec::raw(3).unwrap();
        assert!(matches!(
            objective(&a, &y.view(), &spec),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn spec_rejects_small_p() {
        assert!(ObjectiveSpec::raw(2).is_err());
        assert!(ObjectiveSpec::raw(3).is_ok());
    }

    #[test]
    fn signed_pow_handles_odd_orders_and_zero() {
        // p = 3: x|x| at x = -2
        assert_eq!(signed_pow(-2.0, 3), -4.0);
        // p = 4: plain cube
        assert_eq!(signed_pow(-2.0, 4), -8.0);
        assert_eq!(signed_pow(1.5, 4), 1.5f64 * 1.5 * 1.5);
        assert_eq!(signed_pow(0.0, 5), 0.0);
    }

    #[test]
    fn gradient_agrees_with_finite_differences() {
        let mut rng = crate::rng::substream(2024, "fd-check");
        let mut worst: f64 = 0.0;
        for case in 0..50u64 {
            let p = 3 + (case % 4) as u32;
            let spec = ObjectiveSpec::raw(p).unwrap();
            let a = random_stiefel(3, 6, 900 + case).unwrap();
            let y = Array2::from_shape_fn((6, 20), |_| {
                StandardNormal.sample(&mut rng)
            });
            let g = gradient(&a, &y.view(), &spec).unwrap();
            let h = 1e-5;
            for probe in 0..6 {
                let (i, k) = (probe % 3, (probe * 2 + 1) % 6);
                let mut plus = a.matrix().clone();
                plus[[i, k]] += h;
                let mut minus = a.matrix().clone();
                minus[[i, k]] -= h;
                // evaluate the raw sum directly; the perturbed matrix is no
                // longer orthonormal and that is fine for a directional check
                let f = |m: &Array2<f64>| abs_pow_sum(&m.dot(&y).view(), p);
                let fd = (f(&plus) - f(&minus)) / (2.0 * h);
                let denom = fd.abs().max(1.0);
                worst = worst.max((g[[i, k]] - fd).abs() / denom);
            }
        }
        assert!(worst <= 1e-5, "max relative fd error {worst}");
    }

    #[test]
    fn gamma_p_matches_known_moments() {
        assert!((gamma_p(2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gamma_p(4, 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((gamma_p(6, 1.0).unwrap() - 15.0).abs() < 1e-15);
        let g3 = 2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI.sqrt();
        assert!((gamma_p(3, 1.0).unwrap() - g3).abs() < 1e-15);
        assert!((gamma_p(3, 1.0).unwrap() - 1.595769121605731).abs() < 1e-12);
        // explicit gamma-function form, checked against the closed forms
        for p in 1..=8u32 {
            let direct = 2f64.powf(p as f64 / 2.0) * gamma_fn((p as f64 + 1.0) / 2.0)
                / std::f64::consts::PI.sqrt();
            assert!((gamma_p(p, 1.0).unwrap() - direct).abs() < 1e-12 * direct.max(1.0));
        }
        // scale dependence
        assert!((gamma_p(3, 2.0).unwrap() - 8.0 * g3).abs() < 1e-12);
        assert!(gamma_p(0, 1.0).is_err());
        assert!(gamma_p(3, 0.0).is_err());
    }

    // Lanczos-free gamma for integer and half-integer arguments only.
    fn gamma_fn(x: f64) -> f64 {
        if (x - x.round()).abs() < 1e-12 {
            let mut acc = 1.0;
            let mut k = x.round() as u64;
            while k > 1 {
                k -= 1;
                acc *= k as f64;
            }
            acc
        } else {
            // half-integer: gamma(1/2) = sqrt(pi), gamma(x+1) = x gamma(x)
            let mut acc = std::f64::consts::PI.sqrt();
            let mut t = 0.5;
            while t + 1.0 <= x + 1e-12 {
                acc *= t;
                t += 1.0;
            }
            acc
        }
    }

    #[test]
    fn population_max_examples() {
        assert!((population_max(4, 0.3).unwrap() - 0.9).abs() < 1e-15);
        let expected = gamma_p(3, 1.0).unwrap() * 0.1;
        assert!((population_max(3, 0.1).unwrap() - expected).abs() < 1e-15);
        assert!((population_max(3, 0.1).unwrap() - 0.1595769121605731).abs() < 1e-12);
        assert!(population_max(3, 0.0).is_err());
        assert!(population_max(3, 1.0).is_err());
    }

    #[test]
    fn objective_is_invariant_under_signed_permutations() {
        let mut rng = crate::rng::substream(77, "signed-perm");
        let a = random_stiefel(4, 4, 50).unwrap();
        let y = Array2::from_shape_fn((4, 30), |_| StandardNormal.sample(&mut rng));
        let spec = ObjectiveSpec::raw(5).unwrap();
        let base = objective(&a, &y.view(), &spec).unwrap();

        // permute rows and flip a couple of signs
        let perm = [2usize, 0, 3, 1];
        let signs = [1.0, -1.0, -1.0, 1.0];
        let mut permuted = Array2::<f64>::zeros((4, 4));
        for (dst, &src) in perm.iter().enumerate() {
            for j in 0..4 {
                permuted[[dst, j]] = signs[dst] * a.matrix()[[src, j]];
            }
        }
        let pa = StiefelPoint::new(permuted).unwrap();
        assert_eq!(objective(&pa, &y.view(), &spec).unwrap(), base);
    }

    #[test]
    fn objective_commutes_with_rotations() {
        let mut rng = crate::rng::substream(78, "rotation");
        let a = random_stiefel(3, 5, 51).unwrap();
        let q = random_stiefel(5, 5, 52).unwrap();
        let y = Array2::from_shape_fn((5, 40), |_| StandardNormal.sample(&mut rng));
        let spec = ObjectiveSpec::raw(3).unwrap();

        let qy = q.matrix().dot(&y);
        let lhs = objective(&a, &qy.view(), &spec).unwrap();
        let aq = StiefelPoint::new(a.matrix().dot(q.matrix())).unwrap();
        let rhs = objective(&aq, &y.view(), &spec).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }
}
