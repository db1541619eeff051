//! Fixed-point and gradient solvers over row-orthonormal matrices.
//!
//! The workhorse is the generalized power method: each step replaces the
//! iterate by the polar factor of the objective gradient, which maximizes
//! the linear surrogate `⟨S, ∇f⟩` over the feasible set. Because the
//! objective is convex in the ambient space, the surrogate maximization can
//! never decrease the objective, so the traced values are non-decreasing.
//!
//! The population variants iterate on the sphere with the data expectation
//! taken analytically: over random supports either exactly (enumeration),
//! in closed form (fourth-order objective), or by Monte Carlo.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::metrics;
use crate::objective::{abs_pow_sum, score_matrix};
use crate::rng;
use crate::stiefel::{frobenius_distance, orthonormality_defect, polar, random_stiefel, StiefelPoint};
use crate::synth::DictionaryInstance;

/// Iterate-feasibility threshold; one extra polar step is applied if a
/// solver iterate drifts beyond it.
const FEASIBILITY_TOL: f64 = 1e-8;

/// Largest dimension for which exact support enumeration is allowed.
pub const MAX_ENUMERATION_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gpm,
    Rgd,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Gpm => write!(f, "gpm"),
            Method::Rgd => write!(f, "rgd"),
        }
    }
}

/// Knobs shared by the empirical solvers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: u32,
    pub max_iters: usize,
    /// Stop when the relative objective change falls below this.
    pub tol_obj: f64,
    /// Stop when the Frobenius step between iterates falls below this.
    pub tol_iterate: f64,
    pub seed: u64,
    pub record_trace: bool,
    pub method: Method,
    /// Fixed ascent step for the Riemannian baseline.
    pub rgd_step: f64,
}

impl SolverConfig {
    pub fn new(p: u32, method: Method, seed: u64) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParam(format!("norm order must be >= 3, got {p}")));
        }
        Ok(Self {
            p,
            max_iters: 10_000,
            tol_obj: 1e-12,
            tol_iterate: 1e-10,
            seed,
            record_trace: false,
            method,
            rgd_step: 0.25,
        })
    }

    pub fn gpm(p: u32, seed: u64) -> Result<Self> {
        Self::new(p, Method::Gpm, seed)
    }

    pub fn rgd(p: u32, seed: u64) -> Result<Self> {
        Self::new(p, Method::Rgd, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.p < 3 {
            return Err(Error::InvalidParam("norm order must be >= 3".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParam("max_iters must be >= 1".into()));
        }
        if !(self.tol_obj > 0.0 && self.tol_iterate > 0.0) {
            return Err(Error::InvalidParam("tolerances must be positive".into()));
        }
        if !(self.rgd_step > 0.0) {
            return Err(Error::InvalidParam("step size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ObjectiveTolerance,
    IterateTolerance,
    MaxIters,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::ObjectiveTolerance => write!(f, "tol_obj"),
            StopReason::IterateTolerance => write!(f, "tol_iterate"),
            StopReason::MaxIters => write!(f, "max_iters"),
        }
    }
}

/// Per-run diagnostics. Series are populated only with `record_trace`.
#[derive(Debug, Clone, Serialize)]
pub struct SolverTrace {
    /// Raw objective at every visited iterate (including the initial one).
    pub objective_series: Vec<f64>,
    /// Error versus ground truth per iterate, when a truth was supplied:
    /// the quartic alignment error for square iterates, the minimal
    /// signed-coordinate distance on the sphere.
    pub error_series: Vec<f64>,
    /// Signal-to-orthogonal ratio per iterate (population runs only),
    /// as a magnitude: `|a_target| / ‖a_rest‖`.
    pub sor_series: Vec<f64>,
    /// Successive error ratios (population runs only).
    pub error_ratio_series: Vec<f64>,
    /// Seconds per iteration.
    pub wall_times: Vec<f64>,
    /// Orthonormality defect of every visited iterate.
    pub defect_series: Vec<f64>,
    /// Iterations at which the gradient was nearly rank-deficient and the
    /// polar factor therefore non-unique.
    pub rank_deficient_iters: Vec<usize>,
    pub iterations_run: usize,
    pub stop_reason: StopReason,
    /// Raw objective at the returned point (recorded even without trace).
    pub final_objective: f64,
}

impl SolverTrace {
    fn new() -> Self {
        Self {
            objective_series: Vec::new(),
            error_series: Vec::new(),
            sor_series: Vec::new(),
            error_ratio_series: Vec::new(),
            wall_times: Vec::new(),
            defect_series: Vec::new(),
            rank_deficient_iters: Vec::new(),
            iterations_run: 0,
            stop_reason: StopReason::MaxIters,
            final_objective: f64::NAN,
        }
    }
}

fn truth_error(a: &ArrayView2<f64>, truth: Option<&DictionaryInstance>) -> Option<f64> {
    let inst = truth?;
    let d0 = &inst.dictionary;
    if a.nrows() == a.ncols() && a.nrows() == d0.nrows() {
        Some(metrics::l4_alignment_error(a, &d0.view()))
    } else if a.nrows() == 1 {
        Some(metrics::sphere_error(&a.row(0), &d0.view()))
    } else {
        None
    }
}

/// Generalized power method from a Haar-random start drawn from the seed.
pub fn gpm_solve(
    y: &ArrayView2<f64>,
    m: usize,
    cfg: &SolverConfig,
    truth: Option<&DictionaryInstance>,
) -> Result<(StiefelPoint, SolverTrace)> {
    let a0 = random_stiefel(m, y.nrows(), rng::derive_seed(cfg.seed, "gpm-init"))?;
    gpm_solve_from(&a0, y, cfg, truth)
}

/// Generalized power method from an explicit starting point.
pub fn gpm_solve_from(
    a0: &StiefelPoint,
    y: &ArrayView2<f64>,
    cfg: &SolverConfig,
    truth: Option<&DictionaryInstance>,
) -> Result<(StiefelPoint, SolverTrace)> {
    cfg.validate()?;
    if cfg.method != Method::Gpm {
        return Err(Error::InvalidParam(
            "config method must be gpm for gpm_solve".into(),
        ));
    }
    if a0.ambient_dim() != y.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "start has ambient dimension {} but data has {} rows",
            a0.ambient_dim(),
            y.nrows()
        )));
    }

    let p = cfg.p;
    let mut a = a0.matrix().clone();
    let mut trace = SolverTrace::new();
    let mut prev_obj: Option<f64> = None;
    let mut pending_stop: Option<StopReason> = None;

    loop {
        let started = Instant::now();
        let z = a.dot(y);
        let f = abs_pow_sum(&z.view(), p);
        trace.final_objective = f;
        if cfg.record_trace {
            trace.objective_series.push(f);
            trace.defect_series.push(orthonormality_defect(&a.view()));
            if let Some(err) = truth_error(&a.view(), truth) {
                trace.error_series.push(err);
            }
        }

        if let Some(reason) = pending_stop {
            trace.stop_reason = reason;
            break;
        }
        if let Some(fp) = prev_obj {
            if (f - fp).abs() <= cfg.tol_obj * fp.abs().max(1.0) {
                trace.stop_reason = StopReason::ObjectiveTolerance;
                break;
            }
        }
        if trace.iterations_run >= cfg.max_iters {
            trace.stop_reason = StopReason::MaxIters;
            break;
        }
        prev_obj = Some(f);

        let score = score_matrix(&z.view(), p);
        let g = score.dot(&y.t());
        if g.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroGradient);
        }
        let pol = polar(&g.view())?;
        if pol.rank_deficient {
            trace.rank_deficient_iters.push(trace.iterations_run);
        }
        let mut next = pol.orthonormal_factor;
        if orthonormality_defect(&next.view()) > FEASIBILITY_TOL {
            next = polar(&next.view())?.orthonormal_factor;
        }
        let step = frobenius_distance(&a.view(), &next.view());
        a = next;
        trace.iterations_run += 1;
        if cfg.record_trace {
            trace.wall_times.push(started.elapsed().as_secs_f64());
        }
        if step <= cfg.tol_iterate {
            pending_stop = Some(StopReason::IterateTolerance);
        }
    }

    Ok((StiefelPoint::from_orthonormal(a), trace))
}

/// Fixed-step Riemannian gradient ascent from a Haar-random start.
pub fn rgd_solve(
    y: &ArrayView2<f64>,
    m: usize,
    cfg: &SolverConfig,
    truth: Option<&DictionaryInstance>,
) -> Result<(StiefelPoint, SolverTrace)> {
    let a0 = random_stiefel(m, y.nrows(), rng::derive_seed(cfg.seed, "rgd-init"))?;
    rgd_solve_from(&a0, y, cfg, truth)
}

/// Riemannian gradient ascent with fixed step and polar retraction.
///
/// The ascent direction is the tangent projection of the per-entry
/// normalized objective gradient: `G̃ = G − sym(G Aᵀ) A`, which reduces to
/// `G − ⟨a, G⟩ a` on the sphere.
pub fn rgd_solve_from(
    a0: &StiefelPoint,
    y: &ArrayView2<f64>,
    cfg: &SolverConfig,
    truth: Option<&DictionaryInstance>,
) -> Result<(StiefelPoint, SolverTrace)> {
    cfg.validate()?;
    if cfg.method != Method::Rgd {
        return Err(Error::InvalidParam(
            "config method must be rgd for rgd_solve".into(),
        ));
    }
    if a0.ambient_dim() != y.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "start has ambient dimension {} but data has {} rows",
            a0.ambient_dim(),
            y.nrows()
        )));
    }

    let p = cfg.p;
    let entry_scale = p as f64 / (y.nrows() * y.ncols()) as f64;
    let mut a = a0.matrix().clone();
    let mut trace = SolverTrace::new();
    let mut prev_obj: Option<f64> = None;
    let mut pending_stop: Option<StopReason> = None;

    loop {
        let started = Instant::now();
        let z = a.dot(y);
        let f = abs_pow_sum(&z.view(), p);
        trace.final_objective = f;
        if cfg.record_trace {
            trace.objective_series.push(f);
            trace.defect_series.push(orthonormality_defect(&a.view()));
            if let Some(err) = truth_error(&a.view(), truth) {
                trace.error_series.push(err);
            }
        }

        if let Some(reason) = pending_stop {
            trace.stop_reason = reason;
            break;
        }
        if let Some(fp) = prev_obj {
            if (f - fp).abs() <= cfg.tol_obj * fp.abs().max(1.0) {
                trace.stop_reason = StopReason::ObjectiveTolerance;
                break;
            }
        }
        if trace.iterations_run >= cfg.max_iters {
            trace.stop_reason = StopReason::MaxIters;
            break;
        }
        prev_obj = Some(f);

        let score = score_matrix(&z.view(), p);
        let mut g = score.dot(&y.t());
        g.mapv_inplace(|v| v * entry_scale);
        if g.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroGradient);
        }
        let tangent = project_to_tangent(&a, &g);
        let proposal = &a + &tangent.mapv(|v| v * cfg.rgd_step);
        let pol = polar(&proposal.view())?;
        if pol.rank_deficient {
            trace.rank_deficient_iters.push(trace.iterations_run);
        }
        let next = pol.orthonormal_factor;
        let step = frobenius_distance(&a.view(), &next.view());
        a = next;
        trace.iterations_run += 1;
        if cfg.record_trace {
            trace.wall_times.push(started.elapsed().as_secs_f64());
        }
        if step <= cfg.tol_iterate {
            pending_stop = Some(StopReason::IterateTolerance);
        }
    }

    Ok((StiefelPoint::from_orthonormal(a), trace))
}

/// Tangent projection at a row-orthonormal `a`: `g − sym(g aᵀ) a`.
pub(crate) fn project_to_tangent(a: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
    let ga = g.dot(&a.t());
    let sym = (&ga + &ga.t()).mapv(|v| 0.5 * v);
    g - &sym.dot(a)
}

/// Dispatch on `cfg.method`.
pub fn solve(
    y: &ArrayView2<f64>,
    m: usize,
    cfg: &SolverConfig,
    truth: Option<&DictionaryInstance>,
) -> Result<(StiefelPoint, SolverTrace)> {
    match cfg.method {
        Method::Gpm => gpm_solve(y, m, cfg, truth),
        Method::Rgd => rgd_solve(y, m, cfg, truth),
    }
}

/// How expectations over random supports are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineMode {
    /// Sum over all `2^n` supports; requires dimension <= 20.
    ExactEnumeration,
    /// Closed form available for the fourth-order objective.
    ClosedFormP4,
    /// Sample supports afresh.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationEngine {
    pub mode: EngineMode,
    /// Sample count for the Monte Carlo mode.
    pub mc_samples: usize,
    pub seed: u64,
}

impl ExpectationEngine {
    pub fn exact() -> Self {
        Self {
            mode: EngineMode::ExactEnumeration,
            mc_samples: 0,
            seed: 0,
        }
    }

    pub fn closed_form_p4() -> Self {
        Self {
            mode: EngineMode::ClosedFormP4,
            mc_samples: 0,
            seed: 0,
        }
    }

    pub fn monte_carlo(mc_samples: usize, seed: u64) -> Self {
        Self {
            mode: EngineMode::MonteCarlo,
            mc_samples,
            seed,
        }
    }

    fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

fn check_sphere_inputs(p: u32, theta: f64) -> Result<()> {
    if p < 3 {
        return Err(Error::InvalidParam(format!("norm order must be >= 3, got {p}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParam(format!(
            "sparsity level must lie in (0,1), got {theta}"
        )));
    }
    Ok(())
}

/// `‖v_S‖` raised to `k`, where `sumsq` already aggregates the squares.
#[inline]
fn norm_pow(sumsq: f64, k: u32) -> f64 {
    if k.is_multiple_of(2) {
        sumsq.powi((k / 2) as i32)
    } else {
        sumsq.sqrt().powi(k as i32)
    }
}

fn support_probabilities(n: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut th = vec![1.0; n + 1];
    let mut om = vec![1.0; n + 1];
    for i in 1..=n {
        th[i] = th[i - 1] * theta;
        om[i] = om[i - 1] * (1.0 - theta);
    }
    (th, om)
}

/// `E_S (Σ_{j∈S} free_j² + extra_sq)^{k/2}` over a random subset `S` of the
/// free coordinates, each included independently with probability `theta`.
pub(crate) fn expected_subset_norm_pow(
    free: &[f64],
    extra_sq: f64,
    k: u32,
    theta: f64,
    engine: &ExpectationEngine,
) -> Result<f64> {
    let n = free.len();
    match engine.mode {
        EngineMode::ExactEnumeration => {
            if n > MAX_ENUMERATION_DIM {
                return Err(Error::EngineMismatch(format!(
                    "exact enumeration limited to {MAX_ENUMERATION_DIM} coordinates, got {n}"
                )));
            }
            let (th, om) = support_probabilities(n, theta);
            let mut acc = 0.0;
            for mask in 0..(1u64 << n) {
                let included = mask.count_ones() as usize;
                let mut sumsq = extra_sq;
                let mut bits = mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    sumsq += free[i] * free[i];
                    bits &= bits - 1;
                }
                acc += th[included] * om[n - included] * norm_pow(sumsq, k);
            }
            Ok(acc)
        }
        EngineMode::ClosedFormP4 => {
            if k != 2 {
                return Err(Error::EngineMismatch(
                    "closed form only available for the fourth-order objective".into(),
                ));
            }
            let free_sumsq: f64 = free.iter().map(|v| v * v).sum();
            Ok(theta * free_sumsq + extra_sq)
        }
        EngineMode::MonteCarlo => {
            if engine.mc_samples == 0 {
                return Err(Error::InvalidParam("mc_samples must be >= 1".into()));
            }
            let mut rng = rng::substream(engine.seed, "subset-norm");
            let mut acc = 0.0;
            for _ in 0..engine.mc_samples {
                let mut sumsq = extra_sq;
                for v in free {
                    if rng.random::<f64>() < theta {
                        sumsq += v * v;
                    }
                }
                acc += norm_pow(sumsq, k);
            }
            Ok(acc / engine.mc_samples as f64)
        }
    }
}

/// Population ascent direction on the sphere: `E_Ω[‖a_Ω‖^{p−2} a_Ω]`.
///
/// The positive constant relating this to the true population gradient is
/// dropped; it cancels under the sphere normalization of the fixed-point
/// iteration.
pub fn population_gradient(
    a: &ArrayView1<f64>,
    p: u32,
    theta: f64,
    engine: &ExpectationEngine,
) -> Result<Array1<f64>> {
    check_sphere_inputs(p, theta)?;
    let n = a.len();
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParam(format!(
            "expected a unit vector, got norm {norm}"
        )));
    }
    let k = p - 2;
    match engine.mode {
        EngineMode::ExactEnumeration => {
            if n > MAX_ENUMERATION_DIM {
                return Err(Error::EngineMismatch(format!(
                    "exact enumeration limited to {MAX_ENUMERATION_DIM} coordinates, got {n}"
                )));
            }
            let (th, om) = support_probabilities(n, theta);
            let mut out = Array1::<f64>::zeros(n);
            for mask in 0..(1u64 << n) {
                let included = mask.count_ones() as usize;
                let weight = th[included] * om[n - included];
                let mut sumsq = 0.0;
                let mut bits = mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    sumsq += a[i] * a[i];
                    bits &= bits - 1;
                }
                let scale = weight * norm_pow(sumsq, k);
                let mut bits = mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    out[i] += scale * a[i];
                    bits &= bits - 1;
                }
            }
            Ok(out)
        }
        EngineMode::ClosedFormP4 => {
            if p != 4 {
                return Err(Error::EngineMismatch(format!(
                    "closed form requires the fourth-order objective, got p = {p}"
                )));
            }
            let total_sumsq: f64 = a.iter().map(|v| v * v).sum();
            Ok(Array1::from_shape_fn(n, |i| {
                let ai = a[i];
                ai * (theta * theta * (total_sumsq - ai * ai) + theta * ai * ai)
            }))
        }
        EngineMode::MonteCarlo => {
            if engine.mc_samples == 0 {
                return Err(Error::InvalidParam("mc_samples must be >= 1".into()));
            }
            let mut rng = rng::substream(engine.seed, "population-gradient");
            let mut out = Array1::<f64>::zeros(n);
            let mut mask = vec![false; n];
            for _ in 0..engine.mc_samples {
                let mut sumsq = 0.0;
                for (i, flag) in mask.iter_mut().enumerate() {
                    *flag = rng.random::<f64>() < theta;
                    if *flag {
                        sumsq += a[i] * a[i];
                    }
                }
                let scale = norm_pow(sumsq, k);
                for (i, flag) in mask.iter().enumerate() {
                    if *flag {
                        out[i] += scale * a[i];
                    }
                }
            }
            Ok(out / engine.mc_samples as f64)
        }
    }
}

fn sphere_trace_record(a: &Array1<f64>, target: usize, trace: &mut SolverTrace) {
    let target_abs = a[target].abs();
    let rest: f64 = a
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target)
        .map(|(_, v)| v * v)
        .sum::<f64>()
        .sqrt();
    let sor = if rest == 0.0 {
        f64::INFINITY
    } else {
        target_abs / rest
    };
    trace.sor_series.push(sor);

    let max_abs = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).min(1.0);
    let err = (2.0 - 2.0 * max_abs).max(0.0).sqrt();
    if let Some(prev) = trace.error_series.last() {
        if *prev > 1e-300 {
            trace.error_ratio_series.push(err / prev);
        } else {
            trace.error_ratio_series.push(f64::NAN);
        }
    }
    trace.error_series.push(err);
}

fn unit_start(a0: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let norm = a0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm.is_finite() && (norm - 1.0).abs() < 1e-8) {
        return Err(Error::InvalidParam(format!(
            "starting point must be a unit vector, got norm {norm}"
        )));
    }
    Ok(a0.mapv(|v| v / norm))
}

/// Population fixed-point iteration on the sphere:
/// `a ← g / ‖g‖` with `g = E_Ω[‖a_Ω‖^{p−2} a_Ω]`.
///
/// The trace carries the signal-to-orthogonal ratio toward the dominant
/// starting coordinate, the minimal signed-coordinate error, and the
/// successive error ratios. For a generic start the iteration converges to
/// a signed basis vector.
pub fn population_gpm(
    a0: &ArrayView1<f64>,
    p: u32,
    theta: f64,
    engine: &ExpectationEngine,
    max_iters: usize,
    tol: f64,
) -> Result<(Array1<f64>, SolverTrace)> {
    check_sphere_inputs(p, theta)?;
    let mut a = unit_start(a0)?;
    let target = dominant_coordinate(&a.view());
    let mut trace = SolverTrace::new();
    sphere_trace_record(&a, target, &mut trace);

    for iter in 0..max_iters {
        let engine_t = engine.with_seed(rng::derive_seed_indexed(engine.seed, "iteration", iter as u64));
        let g = population_gradient(&a.view(), p, theta, &engine_t)?;
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroGradient);
        }
        let next = g.mapv(|v| v / norm);
        let step: f64 = next
            .iter()
            .zip(a.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        a = next;
        trace.iterations_run += 1;
        sphere_trace_record(&a, target, &mut trace);
        if step <= tol {
            trace.stop_reason = StopReason::IterateTolerance;
            return Ok((a, trace));
        }
    }
    trace.stop_reason = StopReason::MaxIters;
    Ok((a, trace))
}

/// Population Riemannian gradient ascent on the sphere with a fixed step,
/// the baseline the fixed-point iteration is compared against.
///
/// Uses the fully scaled population gradient `p·γ_p·E_Ω[‖a_Ω‖^{p−2} a_Ω]`
/// so the step size has the conventional meaning.
pub fn population_rgd(
    a0: &ArrayView1<f64>,
    p: u32,
    theta: f64,
    engine: &ExpectationEngine,
    step_size: f64,
    max_iters: usize,
    tol: f64,
) -> Result<(Array1<f64>, SolverTrace)> {
    check_sphere_inputs(p, theta)?;
    if !(step_size > 0.0) {
        return Err(Error::InvalidParam("step size must be positive".into()));
    }
    let scale = p as f64 * crate::objective::gamma_p(p, 1.0)?;
    let mut a = unit_start(a0)?;
    let target = dominant_coordinate(&a.view());
    let mut trace = SolverTrace::new();
    sphere_trace_record(&a, target, &mut trace);

    for iter in 0..max_iters {
        let engine_t = engine.with_seed(rng::derive_seed_indexed(engine.seed, "iteration", iter as u64));
        let g = population_gradient(&a.view(), p, theta, &engine_t)?.mapv(|v| v * scale);
        let radial: f64 = g.iter().zip(a.iter()).map(|(x, y)| x * y).sum();
        let tangent = &g - &a.mapv(|v| v * radial);
        let proposal = &a + &tangent.mapv(|v| v * step_size);
        let norm = proposal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroGradient);
        }
        let next = proposal.mapv(|v| v / norm);
        let step: f64 = next
            .iter()
            .zip(a.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        a = next;
        trace.iterations_run += 1;
        sphere_trace_record(&a, target, &mut trace);
        if step <= tol {
            trace.stop_reason = StopReason::IterateTolerance;
            return Ok((a, trace));
        }
    }
    trace.stop_reason = StopReason::MaxIters;
    Ok((a, trace))
}

/// Index of the largest-magnitude coordinate.
pub fn dominant_coordinate(a: &ArrayView1<f64>) -> usize {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, v) in a.iter().enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::population_max;
    use crate::synth::{gen_instance, BernoulliGaussianSpec, DictionaryKind, NoiseSpec};
    use ndarray::array;

    fn assert_monotone_and_feasible(trace: &SolverTrace, point: &StiefelPoint) {
        for w in trace.objective_series.windows(2) {
            assert!(
                w[1] >= w[0] - 1e-9 * w[0].abs(),
                "objective decreased: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(point.defect() <= 1e-8);
    }

    #[test]
    fn gpm_fixed_point_on_orthogonal_data() {
        let y = Array2::eye(4).mapv(|v: f64| v * 2.5);
        let a0 = StiefelPoint::new(Array2::eye(4)).unwrap();
        let mut cfg = SolverConfig::gpm(3, 0).unwrap();
        cfg.record_trace = true;
        let (point, trace) = gpm_solve_from(&a0, &y.view(), &cfg, None).unwrap();
        assert!(frobenius_distance(&point.matrix().view(), &Array2::eye(4).view()) < 1e-12);
        assert_eq!(trace.stop_reason, StopReason::IterateTolerance);
        assert_monotone_and_feasible(&trace, &point);
    }

    #[test]
    fn gpm_reaches_population_objective_level() {
        let inst = gen_instance(
            6,
            500,
            &BernoulliGaussianSpec::new(0.2).unwrap(),
            DictionaryKind::RandomOrthogonal,
            &NoiseSpec::none(),
            41,
        )
        .unwrap();
        let mut cfg = SolverConfig::gpm(4, 41).unwrap();
        cfg.record_trace = true;
        let (point, trace) = gpm_solve(&inst.observed.view(), 6, &cfg, Some(&inst)).unwrap();
        assert_monotone_and_feasible(&trace, &point);
        let per_entry = trace.final_objective / (6.0 * 500.0);
        let target = population_max(4, 0.2).unwrap();
        assert!(
            (per_entry - target).abs() <= 0.1 * target,
            "per-entry objective {per_entry} vs population {target}"
        );
    }

    #[test]
    fn gpm_is_deterministic() {
        let inst = gen_instance(
            8,
            400,
            &BernoulliGaussianSpec::new(0.3).unwrap(),
            DictionaryKind::RandomOrthogonal,
            &NoiseSpec::none(),
            3,
        )
        .unwrap();
        let mut cfg = SolverConfig::gpm(3, 77).unwrap();
        cfg.record_trace = true;
        let (p1, t1) = gpm_solve(&inst.observed.view(), 8, &cfg, None).unwrap();
        let (p2, t2) = gpm_solve(&inst.observed.view(), 8, &cfg, None).unwrap();
        assert_eq!(p1.matrix(), p2.matrix());
        assert_eq!(t1.objective_series, t2.objective_series);
        assert_eq!(t1.iterations_run, t2.iterations_run);
    }

    #[test]
    fn gpm_rejects_degenerate_data() {
        let y = Array2::<f64>::zeros((4, 10));
        let cfg = SolverConfig::gpm(3, 0).unwrap();
        assert!(matches!(
            gpm_solve(&y.view(), 4, &cfg, None),
            Err(Error::ZeroGradient)
        ));
    }

    #[test]
    fn gpm_recovers_partial_frames() {
        // m < n: every recovered row matches a distinct dictionary column
        let inst = gen_instance(
            8,
            4000,
            &BernoulliGaussianSpec::new(0.2).unwrap(),
            DictionaryKind::RandomOrthogonal,
            &NoiseSpec::none(),
            55,
        )
        .unwrap();
        let cfg = SolverConfig::gpm(4, 55).unwrap();
        let (point, _) = gpm_solve(&inst.observed.view(), 3, &cfg, Some(&inst)).unwrap();
        let overlap = point.matrix().dot(&inst.dictionary); // 3 x 8
        let mut used = [false; 8];
        for row in overlap.rows() {
            let (best, best_abs) = row
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(best_abs > 0.99, "row overlap {best_abs}");
            assert!(!used[best], "column {best} matched twice");
            used[best] = true;
        }
    }

    #[test]
    fn rgd_tangent_is_orthogonal_on_sphere() {
        let mut rng = crate::rng::substream(9, "tangency");
        for seed in 0..10u64 {
            let a = random_stiefel(1, 6, seed).unwrap();
            let g = Array2::from_shape_fn((1, 6), |_| {
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
            });
            let t = project_to_tangent(a.matrix(), &g);
            let dot: f64 = t.iter().zip(a.matrix().iter()).map(|(x, y)| x * y).sum();
            assert!(dot.abs() <= 1e-10, "tangent component {dot}");
            // m = 1 reduction: g - <a,g> a
            let radial: f64 = g.iter().zip(a.matrix().iter()).map(|(x, y)| x * y).sum();
            let direct = &g - &a.matrix().mapv(|v| v * radial);
            assert!(frobenius_distance(&t.view(), &direct.view()) < 1e-12);
        }
    }

    #[test]
    fn rgd_fixed_point_on_orthogonal_data() {
        let y = Array2::eye(5).mapv(|v: f64| v * 1.5);
        let a0 = StiefelPoint::new(
            Array2::from_shape_fn((1, 5), |(_, j)| if j == 4 { 1.0 } else { 0.0 }),
        )
        .unwrap();
        let cfg = SolverConfig::rgd(4, 0).unwrap();
        let (point, trace) = rgd_solve_from(&a0, &y.view(), &cfg, None).unwrap();
        assert!(frobenius_distance(&point.matrix().view(), &a0.matrix().view()) < 1e-12);
        assert!(trace.iterations_run <= 1);
    }

    #[test]
    fn rgd_converges_on_small_problem() {
        let inst = gen_instance(
            6,
            3000,
            &BernoulliGaussianSpec::new(0.25).unwrap(),
            DictionaryKind::RandomOrthogonal,
            &NoiseSpec::none(),
            8,
        )
        .unwrap();
        let mut cfg = SolverConfig::rgd(4, 8).unwrap();
        cfg.max_iters = 3000;
        let (point, _trace) = rgd_solve(&inst.observed.view(), 6, &cfg, Some(&inst)).unwrap();
        let err = metrics::l4_alignment_error(&point.matrix().view(), &inst.dictionary.view());
        assert!(err < 0.05, "l4 error {err}");
    }

    #[test]
    fn population_gradient_at_basis_vector_is_theta_scaled() {
        let n = 6;
        let mut a = Array1::<f64>::zeros(n);
        a[n - 1] = 1.0;
        for engine in [
            ExpectationEngine::exact(),
            ExpectationEngine::closed_form_p4(),
            ExpectationEngine::monte_carlo(20_000, 4),
        ] {
            let g = population_gradient(&a.view(), 4, 0.35, &engine).unwrap();
            for i in 0..n - 1 {
                assert_eq!(g[i], 0.0);
            }
            let tol = if engine.mode == EngineMode::MonteCarlo {
                0.02
            } else {
                1e-12
            };
            assert!((g[n - 1] - 0.35).abs() <= tol, "engine {:?}", engine.mode);
        }
    }

    #[test]
    fn closed_form_matches_enumeration() {
        let a = array![0.6, 0.0, 0.8];
        let exact =
            population_gradient(&a.view(), 4, 0.5, &ExpectationEngine::exact()).unwrap();
        let closed =
            population_gradient(&a.view(), 4, 0.5, &ExpectationEngine::closed_form_p4()).unwrap();
        for (x, y) in exact.iter().zip(closed.iter()) {
            assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
        // third engine pair: sampling against the closed form
        let mc = population_gradient(
            &a.view(),
            4,
            0.5,
            &ExpectationEngine::monte_carlo(300_000, 3),
        )
        .unwrap();
        for (x, y) in closed.iter().zip(mc.iter()) {
            assert!((x - y).abs() <= 0.01, "{x} vs {y}");
        }
    }

    #[test]
    fn monte_carlo_matches_enumeration_within_error() {
        let mut a = Array1::from_vec(vec![
            0.31, -0.22, 0.14, 0.47, -0.06, 0.52, 0.33, -0.41, 0.11, 0.19,
        ]);
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        a.mapv_inplace(|v| v / norm);
        let exact =
            population_gradient(&a.view(), 3, 0.3, &ExpectationEngine::exact()).unwrap();
        let samples = 1_000_000;
        let mc = population_gradient(
            &a.view(),
            3,
            0.3,
            &ExpectationEngine::monte_carlo(samples, 17),
        )
        .unwrap();
        // generous three-standard-error band; per-coordinate values are O(theta)
        for (i, (x, y)) in exact.iter().zip(mc.iter()).enumerate() {
            let se = 1.0 / (samples as f64).sqrt(); // |summand| <= 1
            assert!((x - y).abs() <= 3.0 * se, "coord {i}: {x} vs {y}");
        }
    }

    #[test]
    fn engine_mismatches_are_reported() {
        let a = array![1.0, 0.0, 0.0];
        assert!(matches!(
            population_gradient(&a.view(), 3, 0.3, &ExpectationEngine::closed_form_p4()),
            Err(Error::EngineMismatch(_))
        ));
        let big = Array1::from_shape_fn(25, |i| if i == 0 { 1.0 } else { 0.0 });
        assert!(matches!(
            population_gradient(&big.view(), 3, 0.3, &ExpectationEngine::exact()),
            Err(Error::EngineMismatch(_))
        ));
    }

    #[test]
    fn population_gpm_fixed_points_are_signed_basis_vectors() {
        let n = 8;
        for (idx, sign) in [(n - 1, 1.0f64), (2, -1.0f64)] {
            let mut a0 = Array1::<f64>::zeros(n);
            a0[idx] = sign;
            let (a, trace) = population_gpm(
                &a0.view(),
                3,
                0.2,
                &ExpectationEngine::exact(),
                50,
                1e-14,
            )
            .unwrap();
            assert!(trace.error_series[0] <= 1e-12);
            let mut expected = Array1::<f64>::zeros(n);
            expected[idx] = sign;
            let dist: f64 = (&a - &expected).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(dist <= 1e-12);
        }
    }

    #[test]
    fn population_gpm_converges_to_dominant_coordinate() {
        let a0 = crate::stiefel::random_stiefel(1, 10, 12)
            .unwrap()
            .into_matrix()
            .row(0)
            .to_owned();
        let target = dominant_coordinate(&a0.view());
        let (a, trace) = population_gpm(
            &a0.view(),
            4,
            0.25,
            &ExpectationEngine::exact(),
            400,
            1e-14,
        )
        .unwrap();
        let err = trace.error_series.last().unwrap();
        assert!(*err <= 1e-10, "final error {err}");
        assert_eq!(dominant_coordinate(&a.view()), target);
        // SOR grows monotonically toward the attained basis vector
        for w in trace.sor_series.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn population_engines_agree_along_iterations() {
        let a0 = crate::stiefel::random_stiefel(1, 9, 41)
            .unwrap()
            .into_matrix()
            .row(0)
            .to_owned();
        let (a_exact, _) = population_gpm(
            &a0.view(),
            4,
            0.3,
            &ExpectationEngine::exact(),
            25,
            1e-13,
        )
        .unwrap();
        let (a_closed, _) = population_gpm(
            &a0.view(),
            4,
            0.3,
            &ExpectationEngine::closed_form_p4(),
            25,
            1e-13,
        )
        .unwrap();
        let dist: f64 = (&a_exact - &a_closed)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        assert!(dist <= 1e-10, "engine trajectory divergence {dist}");
    }

    #[test]
    fn population_rgd_is_slower_than_gpm() {
        let a0 = crate::stiefel::random_stiefel(1, 50, 90)
            .unwrap()
            .into_matrix()
            .row(0)
            .to_owned();
        let engine = ExpectationEngine::closed_form_p4();
        let iters_to = |trace: &SolverTrace| {
            trace
                .error_series
                .iter()
                .position(|e| *e <= 1e-6)
                .unwrap_or(usize::MAX)
        };
        let (_, gpm_trace) =
            population_gpm(&a0.view(), 4, 0.3, &engine, 2000, 1e-14).unwrap();
        let (_, rgd_trace) =
            population_rgd(&a0.view(), 4, 0.3, &engine, 0.25, 2000, 1e-14).unwrap();
        let g = iters_to(&gpm_trace);
        let r = iters_to(&rgd_trace);
        assert!(
            g < r,
            "fixed-point iterations {g} should beat gradient iterations {r}"
        );
    }
}
