//! Row-orthonormal matrices and the polar decomposition.
//!
//! Points live in the row convention: an `m × n` matrix `A` with
//! `A Aᵀ = I_m`, i.e. `Aᵀ` has orthonormal columns. The sphere is the
//! `m = 1` case and the orthogonal group is `m = n`.
//!
//! The central primitive is [`polar`]: for any `C` the orthonormal factor
//! `U = W Vᵀ` of the thin SVD `C = W Σ Vᵀ` maximizes `⟨S, C⟩` over all
//! row-orthonormal `S` of the same shape, with maximum `Σᵢ σᵢ(C)`. The
//! fixed-point solver is built entirely on this fact.

use ndarray::{Array2, ArrayView2};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

/// Frobenius tolerance under which a matrix counts as row-orthonormal.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Relative singular-value threshold below which the polar factor is
/// considered non-unique.
pub const RANK_DEFICIENCY_RTOL: f64 = 1e-12;

/// An `m × n` matrix with orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint {
    data: Array2<f64>,
}

impl StiefelPoint {
    /// Wrap a matrix, checking `1 ≤ m ≤ n` and `‖A Aᵀ − I‖_F ≤ 1e-10`.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (m, n) = data.dim();
        if m == 0 || m > n {
            return Err(Error::InvalidShape(format!(
                "need 1 <= rows <= cols, got {m} x {n}"
            )));
        }
        let defect = orthonormality_defect(&data.view());
        if !defect.is_finite() || defect > ORTHONORMALITY_TOL {
            return Err(Error::NotOrthonormal {
                defect,
                tol: ORTHONORMALITY_TOL,
            });
        }
        Ok(Self { data })
    }

    /// Wrap a matrix that is orthonormal by construction (polar output).
    pub(crate) fn from_orthonormal(data: Array2<f64>) -> Self {
        debug_assert!(orthonormality_defect(&data.view()) <= 1e-8);
        Self { data }
    }

    /// Number of orthonormal rows.
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    /// Ambient dimension (row length).
    pub fn ambient_dim(&self) -> usize {
        self.data.ncols()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.data
    }

    /// Consume and return the underlying matrix.
    pub fn into_matrix(self) -> Array2<f64> {
        self.data
    }

    /// `‖A Aᵀ − I‖_F` for this point.
    pub fn defect(&self) -> f64 {
        orthonormality_defect(&self.data.view())
    }
}

/// Outcome of the polar decomposition `C = U P`.
#[derive(Debug, Clone)]
pub struct PolarResult {
    /// The `m × n` orthonormal factor `U = W Vᵀ`.
    pub orthonormal_factor: Array2<f64>,
    /// Singular values of `C`, descending.
    pub singular_values: Vec<f64>,
    /// `⟨U, C⟩ = Σᵢ σᵢ(C)`, the maximal linear alignment.
    pub alignment: f64,
    /// Set when `min σ < 1e-12 · max σ`; the factor is then non-unique and
    /// the SVD-as-computed choice is returned deterministically.
    pub rank_deficient: bool,
}

/// Polar factor of an `m × n` matrix, `m ≤ n`.
///
/// Returns the maximizer of `⟨S, C⟩` over row-orthonormal `S`. A nearly
/// rank-deficient input is not an error (the solver hits those at saddle
/// points); it is reported through [`PolarResult::rank_deficient`].
pub fn polar(c: &ArrayView2<f64>) -> Result<PolarResult> {
    let (m, n) = c.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidShape(format!(
            "polar needs 1 <= rows <= cols, got {m} x {n}"
        )));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    let mat = nalgebra::DMatrix::from_row_iterator(m, n, c.iter().cloned());
    let svd = mat.svd(true, true);
    let (w, vt) = (
        svd.u.expect("svd requested u"),
        svd.v_t.expect("svd requested v_t"),
    );
    let u = w * vt; // m x n with orthonormal rows

    let mut singular_values: Vec<f64> = svd.singular_values.iter().cloned().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    let alignment = singular_values.iter().sum();
    let max_sv = singular_values.first().copied().unwrap_or(0.0);
    let min_sv = singular_values.last().copied().unwrap_or(0.0);
    let rank_deficient = min_sv < RANK_DEFICIENCY_RTOL * max_sv || max_sv == 0.0;

    let orthonormal_factor = Array2::from_shape_fn((m, n), |(i, j)| u[(i, j)]);
    Ok(PolarResult {
        orthonormal_factor,
        singular_values,
        alignment,
        rank_deficient,
    })
}

/// Haar-random point: the polar factor of an `m × n` standard Gaussian
/// matrix. Deterministic for a given seed.
pub fn random_stiefel(m: usize, n: usize, seed: u64) -> Result<StiefelPoint> {
    if m == 0 || m > n {
        return Err(Error::InvalidShape(format!(
            "need 1 <= rows <= cols, got {m} x {n}"
        )));
    }
    let mut rng = rng::substream(seed, "stiefel-init");
    let gauss = Array2::from_shape_fn((m, n), |_| StandardNormal.sample(&mut rng));
    let factor = polar(&gauss.view())?.orthonormal_factor;
    Ok(StiefelPoint::from_orthonormal(factor))
}

/// `‖A Aᵀ − I_m‖_F` for an arbitrary matrix.
pub fn orthonormality_defect(a: &ArrayView2<f64>) -> f64 {
    let m = a.nrows();
    let gram = a.dot(&a.t());
    let mut sq = 0.0;
    for i in 0..m {
        for j in 0..m {
            let d = gram[[i, j]] - if i == j { 1.0 } else { 0.0 };
            sq += d * d;
        }
    }
    sq.sqrt()
}

/// Frobenius distance between two equally shaped matrices.
pub(crate) fn frobenius_distance(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
