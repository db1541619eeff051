//! Seeded experiment sweeps: recovery tables, phase transitions, and
//! population-dynamics traces, emitted as CSV and JSON with a replayable
//! manifest.
//!
//! Every (cell, trial) task derives its seed from the base seed and the
//! cell's parameter values, runs independently on the thread pool, and is
//! written in a fixed order, so reruns reproduce the deterministic fields
//! of every row regardless of thread count. Wall-clock columns are
//! measurements and naturally vary between runs.

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::metrics::{align, tau_i};
use crate::rng;
use crate::solver::{
    dominant_coordinate, population_gpm, solve, ExpectationEngine, Method, SolverConfig,
};
use crate::stiefel::random_stiefel;
use crate::synth::{gen_instance, BernoulliGaussianSpec, DictionaryKind, NoiseKind, NoiseSpec};

/// Tolerances and caps forwarded to [`SolverConfig`] for every trial.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverSettings {
    pub max_iters: usize,
    pub tol_obj: f64,
    pub tol_iterate: f64,
    pub rgd_step: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol_obj: 1e-12,
            tol_iterate: 1e-10,
            rgd_step: 0.25,
        }
    }
}

fn default_dict_kind() -> DictionaryKind {
    DictionaryKind::RandomOrthogonal
}

fn default_threshold() -> f64 {
    0.01
}

/// Cartesian sweep over problem parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub n: Vec<usize>,
    pub theta: Vec<f64>,
    pub p: Vec<u32>,
    pub samples: Vec<usize>,
    pub noise: Vec<NoiseSpec>,
    pub method: Vec<Method>,
    #[serde(default = "default_dict_kind")]
    pub dict_kind: DictionaryKind,
    pub trials: usize,
    pub base_seed: u64,
    /// Quartic alignment error under which a trial counts as recovered.
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    #[serde(default)]
    pub solver: SolverSettings,
}

impl ExperimentGrid {
    /// Single-cell template with common defaults, to be widened per axis.
    pub fn single(n: usize, theta: f64, p: u32, samples: usize, base_seed: u64) -> Self {
        Self {
            n: vec![n],
            theta: vec![theta],
            p: vec![p],
            samples: vec![samples],
            noise: vec![NoiseSpec::none()],
            method: vec![Method::Gpm],
            dict_kind: default_dict_kind(),
            trials: 10,
            base_seed,
            success_threshold: default_threshold(),
            solver: SolverSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("n", self.n.is_empty()),
            ("theta", self.theta.is_empty()),
            ("p", self.p.is_empty()),
            ("samples", self.samples.is_empty()),
            ("noise", self.noise.is_empty()),
            ("method", self.method.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidParam(format!("axis '{name}' is empty")));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidParam("trials must be >= 1".into()));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::InvalidParam("success threshold must be positive".into()));
        }
        Ok(())
    }

    /// Cells in the fixed nested order n, theta, p, samples, noise, method.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &theta in &self.theta {
                for &p in &self.p {
                    for &samples in &self.samples {
                        for &noise in &self.noise {
                            for &method in &self.method {
                                out.push(Cell {
                                    n,
                                    theta,
                                    p,
                                    samples,
                                    noise,
                                    method,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub theta: f64,
    pub p: u32,
    pub samples: usize,
    pub noise: NoiseSpec,
    pub method: Method,
}

/// Per-trial seed: a stable hash of the base seed, the cell's parameter
/// values, and the trial index.
pub fn cell_trial_seed(base_seed: u64, cell: &Cell, trial: usize) -> u64 {
    let mut h = rng::derive_seed(base_seed, "experiment-trial");
    h = rng::fold(h, cell.n as u64);
    h = rng::fold(h, cell.theta.to_bits());
    h = rng::fold(h, cell.p as u64);
    h = rng::fold(h, cell.samples as u64);
    h = rng::fold(
        h,
        match cell.noise.kind {
            NoiseKind::None => 0,
            NoiseKind::Gaussian => 1,
            NoiseKind::Sparse => 2,
        },
    );
    h = rng::fold(h, cell.noise.sigma.to_bits());
    h = rng::fold(h, cell.noise.vartheta.to_bits());
    h = rng::fold(
        h,
        match cell.method {
            Method::Gpm => 0,
            Method::Rgd => 1,
        },
    );
    rng::fold(h, trial as u64)
}

/// One trial outcome; reproducible bit-for-bit from (cell, seed) except for
/// the wall-clock measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub theta: f64,
    pub p: u32,
    pub samples: usize,
    pub noise_kind: String,
    pub noise_sigma: f64,
    pub vartheta: f64,
    pub method: String,
    pub trial: usize,
    pub seed: u64,
    pub l4_error: f64,
    pub frob_error: f64,
    pub iterations: usize,
    pub stop_reason: String,
    pub wall_time_s: f64,
    pub success: bool,
    /// Error message when the trial failed; the run continues.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Per-cell aggregate over trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub theta: f64,
    pub p: u32,
    pub samples: usize,
    pub noise_kind: String,
    pub noise_sigma: f64,
    pub vartheta: f64,
    pub method: String,
    pub trials: usize,
    pub mean_l4_error: f64,
    pub mean_frob_error: f64,
    pub mean_iterations: f64,
    pub mean_wall_time_s: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub grids: Vec<ExperimentGrid>,
}

impl Manifest {
    fn new(command: &str, grids: &[ExperimentGrid]) -> Self {
        Self {
            tool: "lpdict".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            grids: grids.to_vec(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Serialize)]
pub struct TableOutput {
    pub manifest: Manifest,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseCellRow {
    pub n: usize,
    pub theta: f64,
    pub p: u32,
    pub samples: usize,
    pub noise_kind: String,
    pub noise_sigma: f64,
    pub vartheta: f64,
    pub method: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_l4_error: f64,
}

#[derive(Debug, Serialize)]
pub struct PhaseOutput {
    pub manifest: Manifest,
    pub cells: Vec<PhaseCellRow>,
    pub rows: Vec<ResultRow>,
}

fn run_cell_trial(grid: &ExperimentGrid, cell: &Cell, trial: usize) -> ResultRow {
    let seed = cell_trial_seed(grid.base_seed, cell, trial);
    let mut row = ResultRow {
        n: cell.n,
        theta: cell.theta,
        p: cell.p,
        samples: cell.samples,
        noise_kind: cell.noise.kind.to_string(),
        noise_sigma: cell.noise.sigma,
        vartheta: cell.noise.vartheta,
        method: cell.method.to_string(),
        trial,
        seed,
        l4_error: f64::NAN,
        frob_error: f64::NAN,
        iterations: 0,
        stop_reason: String::new(),
        wall_time_s: f64::NAN,
        success: false,
        note: None,
    };

    let attempt = || -> Result<(f64, f64, usize, String, f64)> {
        let bg = BernoulliGaussianSpec::new(cell.theta)?;
        let instance = gen_instance(
            cell.n,
            cell.samples,
            &bg,
            grid.dict_kind,
            &cell.noise,
            rng::derive_seed(seed, "instance"),
        )?;
        let mut cfg = SolverConfig::new(cell.p, cell.method, rng::derive_seed(seed, "solver"))?;
        cfg.max_iters = grid.solver.max_iters;
        cfg.tol_obj = grid.solver.tol_obj;
        cfg.tol_iterate = grid.solver.tol_iterate;
        cfg.rgd_step = grid.solver.rgd_step;

        let started = Instant::now();
        let (point, trace) = solve(&instance.observed.view(), cell.n, &cfg, Some(&instance))?;
        let wall = started.elapsed().as_secs_f64();
        let alignment = align(&point, &instance.dictionary.view())?;
        Ok((
            alignment.l4_error,
            alignment.frob_error,
            trace.iterations_run,
            trace.stop_reason.to_string(),
            wall,
        ))
    };

    match attempt() {
        Ok((l4, frob, iterations, stop_reason, wall)) => {
            row.l4_error = l4;
            row.frob_error = frob;
            row.iterations = iterations;
            row.stop_reason = stop_reason;
            row.wall_time_s = wall;
            row.success = l4 <= grid.success_threshold;
        }
        Err(err) => {
            row.note = Some(err.to_string());
        }
    }
    row
}

fn run_grids(grids: &[ExperimentGrid]) -> Result<Vec<ResultRow>> {
    if grids.is_empty() {
        return Err(Error::InvalidParam("no grids to run".into()));
    }
    for grid in grids {
        grid.validate()?;
    }
    let mut tasks: Vec<(usize, &ExperimentGrid, Cell, usize)> = Vec::new();
    let mut order = 0usize;
    for grid in grids {
        for cell in grid.cells() {
            for trial in 0..grid.trials {
                tasks.push((order, grid, cell, trial));
                order += 1;
            }
        }
    }
    let mut rows: Vec<(usize, ResultRow)> = tasks
        .par_iter()
        .map(|(idx, grid, cell, trial)| (*idx, run_cell_trial(grid, cell, *trial)))
        .collect();
    rows.sort_by_key(|(idx, _)| *idx);
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

fn aggregate(rows: &[ResultRow], trials_per_cell: usize) -> Vec<AggregateRow> {
    rows.chunks(trials_per_cell)
        .map(|chunk| {
            let k = chunk.len() as f64;
            let first = &chunk[0];
            AggregateRow {
                n: first.n,
                theta: first.theta,
                p: first.p,
                samples: first.samples,
                noise_kind: first.noise_kind.clone(),
                noise_sigma: first.noise_sigma,
                vartheta: first.vartheta,
                method: first.method.clone(),
                trials: chunk.len(),
                mean_l4_error: chunk.iter().map(|r| r.l4_error).sum::<f64>() / k,
                mean_frob_error: chunk.iter().map(|r| r.frob_error).sum::<f64>() / k,
                mean_iterations: chunk.iter().map(|r| r.iterations as f64).sum::<f64>() / k,
                mean_wall_time_s: chunk.iter().map(|r| r.wall_time_s).sum::<f64>() / k,
                success_rate: chunk.iter().filter(|r| r.success).count() as f64 / k,
            }
        })
        .collect()
}

fn aggregate_grids(grids: &[ExperimentGrid], rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for grid in grids {
        let count = grid.cells().len() * grid.trials;
        out.extend(aggregate(&rows[offset..offset + count], grid.trials));
        offset += count;
    }
    out
}

/// Run every cell x trial of the given grids: generate, solve, align.
pub fn run_recovery_table(grids: &[ExperimentGrid]) -> Result<TableOutput> {
    let rows = run_grids(grids)?;
    let aggregates = aggregate_grids(grids, &rows);
    Ok(TableOutput {
        manifest: Manifest::new("table", grids),
        rows,
        aggregates,
    })
}

/// Run the grids and report per-cell recovery probabilities.
pub fn run_phase_transition(grids: &[ExperimentGrid]) -> Result<PhaseOutput> {
    let rows = run_grids(grids)?;
    let mut cells = Vec::new();
    let mut offset = 0usize;
    for grid in grids {
        let count = grid.cells().len() * grid.trials;
        for chunk in rows[offset..offset + count].chunks(grid.trials) {
            let first = &chunk[0];
            let successes = chunk.iter().filter(|r| r.success).count();
            cells.push(PhaseCellRow {
                n: first.n,
                theta: first.theta,
                p: first.p,
                samples: first.samples,
                noise_kind: first.noise_kind.clone(),
                noise_sigma: first.noise_sigma,
                vartheta: first.vartheta,
                method: first.method.clone(),
                trials: chunk.len(),
                successes,
                success_rate: successes as f64 / chunk.len() as f64,
                mean_l4_error: chunk.iter().map(|r| r.l4_error).sum::<f64>() / chunk.len() as f64,
            });
        }
        offset += count;
    }
    Ok(PhaseOutput {
        manifest: Manifest::new("phase", grids),
        cells,
        rows,
    })
}

/// Outcome of rerunning a stored manifest.
pub enum ReplayOutput {
    Table(TableOutput),
    Phase(PhaseOutput),
}

pub fn replay_manifest(manifest: &Manifest) -> Result<ReplayOutput> {
    match manifest.command.as_str() {
        "table" => Ok(ReplayOutput::Table(run_recovery_table(&manifest.grids)?)),
        "phase" => Ok(ReplayOutput::Phase(run_phase_transition(&manifest.grids)?)),
        other => Err(Error::InvalidParam(format!(
            "manifest command '{other}' is not replayable"
        ))),
    }
}

/// Parameters of a population-dynamics trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub n: usize,
    pub theta: f64,
    pub p: u32,
    pub engine: ExpectationEngine,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsRow {
    pub iter: usize,
    pub sphere_error: f64,
    pub sor: f64,
    pub error_ratio: f64,
    /// Constant per run: predicted cap on iterations to reach SOR > 1.
    pub t_tau_bound: f64,
}

#[derive(Debug, Serialize)]
pub struct DynamicsOutput {
    pub params: DynamicsParams,
    pub version: String,
    pub target: usize,
    /// Minimal per-coordinate growth factor at the start.
    pub tau_min: f64,
    pub t_tau_bound: f64,
    /// First iteration with SOR > 1, if reached.
    pub sor_crossing: Option<usize>,
    pub rows: Vec<DynamicsRow>,
}

/// Trace the population iteration from a random start and report the
/// per-iteration diagnostics together with the growth-factor bound.
pub fn run_population_dynamics(params: &DynamicsParams) -> Result<DynamicsOutput> {
    let a0: Array1<f64> = random_stiefel(1, params.n, rng::derive_seed(params.seed, "dynamics-start"))?
        .into_matrix()
        .row(0)
        .to_owned();
    let target = dominant_coordinate(&a0.view());

    let mut tau_min = f64::INFINITY;
    for i in 0..params.n {
        if i == target {
            continue;
        }
        let tau = tau_i(&a0.view(), i, target, params.theta, params.p, &params.engine)?;
        tau_min = tau_min.min(tau);
    }
    let t_tau_bound = if tau_min > 0.0 {
        (params.n as f64).sqrt().ln() / (1.0 + tau_min).ln()
    } else {
        f64::INFINITY
    };

    let (_, trace) = population_gpm(
        &a0.view(),
        params.p,
        params.theta,
        &params.engine,
        params.max_iters,
        params.tol,
    )?;

    let rows: Vec<DynamicsRow> = trace
        .error_series
        .iter()
        .enumerate()
        .map(|(iter, err)| DynamicsRow {
            iter,
            sphere_error: *err,
            sor: trace.sor_series[iter],
            error_ratio: if iter == 0 {
                f64::NAN
            } else {
                trace.error_ratio_series[iter - 1]
            },
            t_tau_bound,
        })
        .collect();
    let sor_crossing = trace.sor_series.iter().position(|s| *s > 1.0);

    Ok(DynamicsOutput {
        params: params.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        target,
        tau_min,
        t_tau_bound,
        sor_crossing,
        rows,
    })
}

/// 17 significant digits, enough to reproduce the f64 bit pattern.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

const TABLE_HEADER: [&str; 18] = [
    "kind",
    "n",
    "theta",
    "p",
    "samples",
    "noise_kind",
    "noise_sigma",
    "vartheta",
    "method",
    "trial",
    "seed",
    "l4_error",
    "frob_error",
    "iterations",
    "stop_reason",
    "wall_time_s",
    "success",
    "note",
];

fn row_record(row: &ResultRow) -> Vec<String> {
    vec![
        "trial".into(),
        row.n.to_string(),
        fmt_f64(row.theta),
        row.p.to_string(),
        row.samples.to_string(),
        row.noise_kind.clone(),
        fmt_f64(row.noise_sigma),
        fmt_f64(row.vartheta),
        row.method.clone(),
        row.trial.to_string(),
        row.seed.to_string(),
        fmt_f64(row.l4_error),
        fmt_f64(row.frob_error),
        row.iterations.to_string(),
        row.stop_reason.clone(),
        fmt_f64(row.wall_time_s),
        row.success.to_string(),
        row.note.clone().unwrap_or_default(),
    ]
}

fn aggregate_record(agg: &AggregateRow) -> Vec<String> {
    vec![
        "mean".into(),
        agg.n.to_string(),
        fmt_f64(agg.theta),
        agg.p.to_string(),
        agg.samples.to_string(),
        agg.noise_kind.clone(),
        fmt_f64(agg.noise_sigma),
        fmt_f64(agg.vartheta),
        agg.method.clone(),
        agg.trials.to_string(),
        String::new(),
        fmt_f64(agg.mean_l4_error),
        fmt_f64(agg.mean_frob_error),
        fmt_f64(agg.mean_iterations),
        String::new(),
        fmt_f64(agg.mean_wall_time_s),
        fmt_f64(agg.success_rate),
        String::new(),
    ]
}

fn write_manifest(stem: &Path, manifest: &Manifest) -> Result<PathBuf> {
    let path = stem.with_extension("manifest.json");
    let mut file = std::fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut file, manifest)?;
    file.write_all(b"\n")?;
    Ok(path)
}

/// Write `<stem>.csv` (trial rows then per-cell mean rows), `<stem>.json`
/// (manifest + rows + aggregates), and `<stem>.manifest.json`.
pub fn write_table_output(stem: &Path, output: &TableOutput) -> Result<Vec<PathBuf>> {
    let csv_path = stem.with_extension("csv");
    let mut writer = csv::Writer::from_path(&csv_path)?;
    writer.write_record(TABLE_HEADER)?;
    for row in &output.rows {
        writer.write_record(row_record(row))?;
    }
    for agg in &output.aggregates {
        writer.write_record(aggregate_record(agg))?;
    }
    writer.flush()?;

    let json_path = stem.with_extension("json");
    let mut file = std::fs::File::create(&json_path)?;
    serde_json::to_writer_pretty(&mut file, output)?;
    file.write_all(b"\n")?;

    let manifest_path = write_manifest(stem, &output.manifest)?;
    Ok(vec![csv_path, json_path, manifest_path])
}

/// Write `<stem>.csv` (per-cell success rates), `<stem>.rows.csv` (raw
/// trials), `<stem>.json`, and `<stem>.manifest.json`.
pub fn write_phase_output(stem: &Path, output: &PhaseOutput) -> Result<Vec<PathBuf>> {
    let csv_path = stem.with_extension("csv");
    let mut writer = csv::Writer::from_path(&csv_path)?;
    writer.write_record([
        "n",
        "theta",
        "p",
        "samples",
        "noise_kind",
        "noise_sigma",
        "vartheta",
        "method",
        "trials",
        "successes",
        "success_rate",
        "mean_l4_error",
    ])?;
    for cell in &output.cells {
        writer.write_record([
            cell.n.to_string(),
            fmt_f64(cell.theta),
            cell.p.to_string(),
            cell.samples.to_string(),
            cell.noise_kind.clone(),
            fmt_f64(cell.noise_sigma),
            fmt_f64(cell.vartheta),
            cell.method.clone(),
            cell.trials.to_string(),
            cell.successes.to_string(),
            fmt_f64(cell.success_rate),
            fmt_f64(cell.mean_l4_error),
        ])?;
    }
    writer.flush()?;

    let rows_path = {
        let mut name = stem.file_name().unwrap_or_default().to_os_string();
        name.push(".rows.csv");
        stem.with_file_name(name)
    };
    let mut writer = csv::Writer::from_path(&rows_path)?;
    writer.write_record(TABLE_HEADER)?;
    for row in &output.rows {
        writer.write_record(row_record(row))?;
    }
    writer.flush()?;

    let json_path = stem.with_extension("json");
    let mut file = std::fs::File::create(&json_path)?;
    serde_json::to_writer_pretty(&mut file, output)?;
    file.write_all(b"\n")?;

    let manifest_path = write_manifest(stem, &output.manifest)?;
    Ok(vec![csv_path, rows_path, json_path, manifest_path])
}

/// Write `<stem>.csv` (one row per iteration) and `<stem>.json`.
pub fn write_dynamics_output(stem: &Path, output: &DynamicsOutput) -> Result<Vec<PathBuf>> {
    let csv_path = stem.with_extension("csv");
    let mut writer = csv::Writer::from_path(&csv_path)?;
    writer.write_record(["iter", "sphere_error", "sor", "error_ratio", "t_tau_bound"])?;
    for row in &output.rows {
        writer.write_record([
            row.iter.to_string(),
            fmt_f64(row.sphere_error),
            fmt_f64(row.sor),
            fmt_f64(row.error_ratio),
            fmt_f64(row.t_tau_bound),
        ])?;
    }
    writer.flush()?;

    let json_path = stem.with_extension("json");
    let mut file = std::fs::File::create(&json_path)?;
    serde_json::to_writer_pretty(&mut file, output)?;
    file.write_all(b"\n")?;
    Ok(vec![csv_path, json_path])
}

/// Noiseless scalability rows at desk scale (sample count tied to the
/// dimension); `large` adds the multi-minute rows.
pub fn preset_table1(base_seed: u64, large: bool) -> Vec<ExperimentGrid> {
    let mut sizes = vec![(100usize, 40_000usize)];
    if large {
        sizes.push((200, 80_000));
        sizes.push((400, 160_000));
    }
    sizes
        .into_iter()
        .map(|(n, samples)| {
            let mut grid = ExperimentGrid::single(n, 0.1, 3, samples, base_seed);
            grid.theta = vec![0.1, 0.3];
            grid.p = vec![3, 4, 5];
            grid
        })
        .collect()
}

/// Gaussian-noise robustness sweep.
pub fn preset_table2(base_seed: u64) -> Vec<ExperimentGrid> {
    let mut grid = ExperimentGrid::single(32, 0.3, 3, 10_000, base_seed);
    grid.p = vec![3, 4];
    grid.noise = [0.0, 0.2, 0.4, 0.6]
        .into_iter()
        .map(|sigma| NoiseSpec::gaussian(sigma).expect("valid noise"))
        .collect();
    vec![grid]
}

/// Sparse-corruption robustness sweep.
pub fn preset_table3(base_seed: u64) -> Vec<ExperimentGrid> {
    let mut grid = ExperimentGrid::single(32, 0.3, 3, 10_000, base_seed);
    grid.p = vec![3, 4];
    grid.noise = [0.5, 1.0, 1.5]
        .into_iter()
        .map(|sigma| NoiseSpec::sparse(sigma, 0.1).expect("valid noise"))
        .collect();
    vec![grid]
}

/// Success-probability sweep over sample counts and norm orders.
pub fn preset_phase(base_seed: u64) -> Vec<ExperimentGrid> {
    let mut grid = ExperimentGrid::single(30, 0.3, 3, 1_000, base_seed);
    grid.p = vec![3, 4, 5, 6];
    grid.samples = vec![300, 600, 1_250, 2_500, 5_000, 10_000, 20_000, 40_000];
    grid.trials = 20;
    vec![grid]
}
