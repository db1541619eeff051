//! Command-line harness around the library: instance generation, single
//! solves, recovery tables, phase transitions, population dynamics, and
//! timing runs. Results are written as CSV/JSON with a replayable manifest.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use lpdict::experiment::{
    self, fmt_f64, preset_phase, preset_table1, preset_table2, preset_table3, ExperimentGrid,
    Manifest, ReplayOutput, SolverSettings,
};
use lpdict::{
    align, gen_instance, solve, BernoulliGaussianSpec, DictionaryInstance, DictionaryKind,
    EngineMode, Error, ExpectationEngine, Method, NoiseSpec, SolverConfig,
};

#[derive(Parser)]
#[command(
    name = "lpdict",
    version,
    about = "Orthogonal dictionary recovery by lp-norm maximization",
    after_help = "Thread count: --threads beats the LPDICT_THREADS environment variable; \
                  the default uses all cores. Value lists accept commas (3,4,5) and sample \
                  sweeps also accept doubling ranges (1000:16000)."
)]
struct Cli {
    /// Base seed for all randomness.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output path (stem for table/phase/dynamics; file for gen/solve).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Primary output format where a choice applies.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads (default: LPDICT_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Bin,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DictArg {
    Identity,
    Random,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    None,
    Gaussian,
    Sparse,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gpm,
    Rgd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Exact,
    ClosedFormP4,
    MonteCarlo,
}

/// Shared instance-shape flags for `gen` and `solve`.
#[derive(Args)]
struct InstanceArgs {
    /// Dictionary dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Number of observed samples (columns).
    #[arg(long)]
    samples: Option<usize>,
    /// Sparsity level: probability that a coefficient is nonzero.
    #[arg(long)]
    theta: Option<f64>,
    /// Standard deviation of the Gaussian coefficient factor.
    #[arg(long, default_value_t = 1.0)]
    bg_sigma: f64,
    #[arg(long, value_enum, default_value_t = DictArg::Random)]
    dict: DictArg,
    #[arg(long, value_enum, default_value_t = NoiseArg::None)]
    noise: NoiseArg,
    /// Noise scale.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Sparse-corruption density.
    #[arg(long, default_value_t = 0.1)]
    vartheta: f64,
}

impl InstanceArgs {
    fn noise_spec(&self) -> Result<NoiseSpec, Error> {
        match self.noise {
            NoiseArg::None => Ok(NoiseSpec::none()),
            NoiseArg::Gaussian => NoiseSpec::gaussian(self.sigma),
            NoiseArg::Sparse => NoiseSpec::sparse(self.sigma, self.vartheta),
        }
    }

    fn dict_kind(&self) -> DictionaryKind {
        match self.dict {
            DictArg::Identity => DictionaryKind::Identity,
            DictArg::Random => DictionaryKind::RandomOrthogonal,
        }
    }

    fn build(&self, seed: u64) -> Result<DictionaryInstance, Error> {
        let n = self
            .n
            .ok_or_else(|| Error::InvalidParam("--n is required".into()))?;
        let samples = self
            .samples
            .ok_or_else(|| Error::InvalidParam("--samples is required".into()))?;
        let theta = self
            .theta
            .ok_or_else(|| Error::InvalidParam("--theta is required".into()))?;
        let bg = BernoulliGaussianSpec::with_sigma(theta, self.bg_sigma)?;
        gen_instance(n, samples, &bg, self.dict_kind(), &self.noise_spec()?, seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance and write it as a binary or JSON container.
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Generate (or load) one instance, run a solver, report the recovery.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Load an instance container instead of generating one.
        #[arg(long, conflicts_with_all = ["n", "samples", "theta"])]
        instance_file: Option<PathBuf>,
        /// Norm order of the objective.
        #[arg(long)]
        p: u32,
        /// Rows to recover (default: the whole dictionary).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum, default_value_t = MethodArg::Gpm)]
        method: MethodArg,
        #[arg(long, default_value_t = 0.25)]
        rgd_step: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol_obj: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol_iterate: f64,
        /// Include per-iteration series in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Recovery-error table over a parameter sweep.
    Table {
        /// Shipped sweep: table1 (noiseless), table2 (gaussian), table3 (sparse).
        #[arg(long, conflicts_with = "replay")]
        preset: Option<String>,
        /// Include multi-minute large rows in table1.
        #[arg(long)]
        large: bool,
        /// Rerun a stored manifest.
        #[arg(long)]
        replay: Option<PathBuf>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Success-probability sweep (phase transition).
    Phase {
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Success threshold on the quartic alignment error.
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Population-iteration trace with growth-factor diagnostics.
    Dynamics {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        #[arg(long, default_value_t = 4)]
        p: u32,
        #[arg(long, value_enum, default_value_t = EngineArg::ClosedFormP4)]
        engine: EngineArg,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
    /// Time repeated solves of one configuration.
    Bench {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        #[arg(long, default_value_t = 40_000)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
}

/// Custom sweep axes; any omitted axis falls back to the preset/defaults.
#[derive(Args)]
struct SweepArgs {
    /// Dimensions, comma-separated.
    #[arg(long)]
    n: Option<String>,
    /// Sparsity levels, comma-separated.
    #[arg(long)]
    theta: Option<String>,
    /// Norm orders, comma-separated.
    #[arg(long)]
    p: Option<String>,
    /// Sample counts: comma list or doubling range `lo:hi`.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    /// Noise scales, comma-separated.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    vartheta: f64,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Error> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidParam(format!("cannot parse {what} value '{tok}'")))
        })
        .collect()
}

/// `lo:hi` doubles from `lo` and always includes `hi`; otherwise a comma list.
fn parse_samples(text: &str) -> Result<Vec<usize>, Error> {
    if let Some((lo, hi)) = text.split_once(':') {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParam(format!("bad sample bound '{lo}'")))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParam(format!("bad sample bound '{hi}'")))?;
        if lo == 0 || hi < lo {
            return Err(Error::InvalidParam(format!("bad sample range '{text}'")));
        }
        let mut out = Vec::new();
        let mut v = lo;
        while v < hi {
            out.push(v);
            v *= 2;
        }
        out.push(hi);
        Ok(out)
    } else {
        parse_list(text, "samples")
    }
}

fn sweep_to_grids(sweep: &SweepArgs, base_seed: u64, phase: bool) -> Result<Vec<ExperimentGrid>, Error> {
    let mut grid = if phase {
        preset_phase(base_seed).remove(0)
    } else {
        ExperimentGrid::single(32, 0.3, 3, 10_000, base_seed)
    };
    if let Some(text) = &sweep.n {
        grid.n = parse_list(text, "n")?;
    }
    if let Some(text) = &sweep.theta {
        grid.theta = parse_list(text, "theta")?;
    }
    if let Some(text) = &sweep.p {
        grid.p = parse_list(text, "p")?;
    }
    if let Some(text) = &sweep.samples {
        grid.samples = parse_samples(text)?;
    }
    if let Some(noise) = sweep.noise {
        let sigmas: Vec<f64> = match &sweep.sigma {
            Some(text) => parse_list(text, "sigma")?,
            None => vec![0.0],
        };
        grid.noise = match noise {
            NoiseArg::None => vec![NoiseSpec::none()],
            NoiseArg::Gaussian => sigmas
                .into_iter()
                .map(NoiseSpec::gaussian)
                .collect::<Result<_, _>>()?,
            NoiseArg::Sparse => sigmas
                .into_iter()
                .map(|s| NoiseSpec::sparse(s, sweep.vartheta))
                .collect::<Result<_, _>>()?,
        };
    }
    if let Some(method) = sweep.method {
        grid.method = vec![match method {
            MethodArg::Gpm => Method::Gpm,
            MethodArg::Rgd => Method::Rgd,
        }];
    }
    if let Some(trials) = sweep.trials {
        grid.trials = trials;
    }
    grid.solver = SolverSettings {
        max_iters: sweep.max_iters,
        ..SolverSettings::default()
    };
    Ok(vec![grid])
}

#[derive(Serialize)]
struct SolveReport {
    config: serde_json::Value,
    n: usize,
    samples: usize,
    m: usize,
    seed: u64,
    l4_error: Option<f64>,
    frob_error: Option<f64>,
    sphere_error: Option<f64>,
    iterations: usize,
    stop_reason: String,
    final_objective: f64,
    per_entry_objective: f64,
    wall_time_s: f64,
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective_series: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_series: Option<Vec<f64>>,
}

fn sniff_instance(path: &Path) -> Result<DictionaryInstance, Error> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"LPDICT") {
        DictionaryInstance::read_binary(&mut bytes.as_slice())
    } else {
        DictionaryInstance::read_json(&mut bytes.as_slice())
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let threads = cli.threads.or_else(|| {
        std::env::var("LPDICT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(threads) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Gen { instance } => {
            let inst = instance.build(cli.seed)?;
            let out = cli
                .out
                .ok_or_else(|| Error::InvalidParam("--out is required for gen".into()))?;
            let mut file = std::fs::File::create(&out)?;
            match cli.format {
                Some(OutputFormat::Json) => inst.write_json(&mut file)?,
                Some(OutputFormat::Csv) => {
                    return Err(Error::InvalidParam(
                        "instances are containers, use --format bin or json".into(),
                    ))
                }
                _ => inst.write_binary(&mut file)?,
            }
            eprintln!(
                "wrote {} ({} x {}, noise {})",
                out.display(),
                inst.dimension(),
                inst.sample_count(),
                inst.noise.kind
            );
        }
        Command::Solve {
            instance,
            instance_file,
            p,
            m,
            method,
            rgd_step,
            max_iters,
            tol_obj,
            tol_iterate,
            trace,
        } => {
            let inst = match &instance_file {
                Some(path) => sniff_instance(path)?,
                None => instance.build(cli.seed)?,
            };
            let n = inst.dimension();
            let m = m.unwrap_or(n);
            let mut cfg = SolverConfig::new(
                p,
                match method {
                    MethodArg::Gpm => Method::Gpm,
                    MethodArg::Rgd => Method::Rgd,
                },
                cli.seed,
            )?;
            cfg.max_iters = max_iters;
            cfg.tol_obj = tol_obj;
            cfg.tol_iterate = tol_iterate;
            cfg.rgd_step = rgd_step;
            cfg.record_trace = trace;

            let started = Instant::now();
            let (point, solver_trace) = solve(&inst.observed.view(), m, &cfg, Some(&inst))?;
            let wall = started.elapsed().as_secs_f64();

            let (mut l4, mut frob, mut sphere) = (None, None, None);
            if m == n {
                let alignment = align(&point, &inst.dictionary.view())?;
                l4 = Some(alignment.l4_error);
                frob = Some(alignment.frob_error);
            } else if m == 1 {
                sphere = Some(lpdict::sphere_error(
                    &point.matrix().row(0),
                    &inst.dictionary.view(),
                ));
            }
            let report = SolveReport {
                config: serde_json::to_value(&cfg)?,
                n,
                samples: inst.sample_count(),
                m,
                seed: cli.seed,
                l4_error: l4,
                frob_error: frob,
                sphere_error: sphere,
                iterations: solver_trace.iterations_run,
                stop_reason: solver_trace.stop_reason.to_string(),
                final_objective: solver_trace.final_objective,
                per_entry_objective: solver_trace.final_objective
                    / (m * inst.sample_count()) as f64,
                wall_time_s: wall,
                version: env!("CARGO_PKG_VERSION").into(),
                objective_series: trace.then(|| solver_trace.objective_series.clone()),
                error_series: trace.then(|| solver_trace.error_series.clone()),
            };
            let text = serde_json::to_string_pretty(&report)?;
            match &cli.out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
        }
        Command::Table {
            preset,
            large,
            replay,
            sweep,
        } => {
            let stem = cli.out.unwrap_or_else(|| PathBuf::from("table_results"));
            let output = if let Some(manifest_path) = replay {
                match experiment::replay_manifest(&Manifest::load(&manifest_path)?)? {
                    ReplayOutput::Table(t) => t,
                    ReplayOutput::Phase(_) => {
                        return Err(Error::InvalidParam(
                            "manifest describes a phase run, use `phase --replay`".into(),
                        ))
                    }
                }
            } else {
                let grids = match preset.as_deref() {
                    Some("table1") => preset_table1(cli.seed, large),
                    Some("table2") => preset_table2(cli.seed),
                    Some("table3") => preset_table3(cli.seed),
                    Some(other) => {
                        return Err(Error::InvalidParam(format!(
                            "unknown preset '{other}' (expected table1, table2, table3)"
                        )))
                    }
                    None => sweep_to_grids(&sweep, cli.seed, false)?,
                };
                experiment::run_recovery_table(&grids)?
            };
            let paths = experiment::write_table_output(&stem, &output)?;
            for agg in &output.aggregates {
                println!(
                    "n={} theta={} p={} r={} noise={}({}) {}: mean l4 {:.4}% frob {:.4} iters {:.1} time {:.3}s",
                    agg.n,
                    agg.theta,
                    agg.p,
                    agg.samples,
                    agg.noise_kind,
                    agg.noise_sigma,
                    agg.method,
                    100.0 * agg.mean_l4_error,
                    agg.mean_frob_error,
                    agg.mean_iterations,
                    agg.mean_wall_time_s
                );
            }
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Phase {
            replay,
            threshold,
            sweep,
        } => {
            let stem = cli.out.unwrap_or_else(|| PathBuf::from("phase_results"));
            let output = if let Some(manifest_path) = replay {
                match experiment::replay_manifest(&Manifest::load(&manifest_path)?)? {
                    ReplayOutput::Phase(p) => p,
                    ReplayOutput::Table(_) => {
                        return Err(Error::InvalidParam(
                            "manifest describes a table run, use `table --replay`".into(),
                        ))
                    }
                }
            } else {
                let mut grids = sweep_to_grids(&sweep, cli.seed, true)?;
                for grid in &mut grids {
                    grid.trials = sweep.trials.unwrap_or(20);
                    grid.success_threshold = threshold;
                }
                experiment::run_phase_transition(&grids)?
            };
            let paths = experiment::write_phase_output(&stem, &output)?;
            for cell in &output.cells {
                println!(
                    "n={} theta={} p={} r={}: success {}/{} ({:.0}%)",
                    cell.n,
                    cell.theta,
                    cell.p,
                    cell.samples,
                    cell.successes,
                    cell.trials,
                    100.0 * cell.success_rate
                );
            }
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Dynamics {
            n,
            theta,
            p,
            engine,
            mc_samples,
            iters,
            tol,
        } => {
            let stem = cli.out.unwrap_or_else(|| PathBuf::from("dynamics_results"));
            let engine = match engine {
                EngineArg::Exact => ExpectationEngine::exact(),
                EngineArg::ClosedFormP4 => ExpectationEngine::closed_form_p4(),
                EngineArg::MonteCarlo => ExpectationEngine::monte_carlo(mc_samples, cli.seed),
            };
            if engine.mode == EngineMode::ClosedFormP4 && p != 4 {
                return Err(Error::InvalidParam(
                    "closed-form-p4 engine requires --p 4; use exact or monte-carlo".into(),
                ));
            }
            let params = experiment::DynamicsParams {
                n,
                theta,
                p,
                engine,
                seed: cli.seed,
                max_iters: iters,
                tol,
            };
            let output = experiment::run_population_dynamics(&params)?;
            let paths = experiment::write_dynamics_output(&stem, &output)?;
            println!(
                "target {} tau_min {} bound {} iterations {} final error {}",
                output.target,
                fmt_f64(output.tau_min),
                fmt_f64(output.t_tau_bound),
                output.rows.len() - 1,
                fmt_f64(output.rows.last().map(|r| r.sphere_error).unwrap_or(f64::NAN))
            );
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Bench {
            n,
            theta,
            samples,
            p,
            reps,
        } => {
            let bg = BernoulliGaussianSpec::new(theta)?;
            let mut rows = Vec::new();
            for rep in 0..reps {
                let seed = lpdict::rng::derive_seed_indexed(cli.seed, "bench", rep as u64);
                let inst = gen_instance(
                    n,
                    samples,
                    &bg,
                    DictionaryKind::RandomOrthogonal,
                    &NoiseSpec::none(),
                    seed,
                )?;
                let cfg = SolverConfig::gpm(p, seed)?;
                let started = Instant::now();
                let (point, trace) = solve(&inst.observed.view(), n, &cfg, Some(&inst))?;
                let wall = started.elapsed().as_secs_f64();
                let alignment = align(&point, &inst.dictionary.view())?;
                println!(
                    "rep {rep}: {wall:.3}s {} iterations l4 {:.4}%",
                    trace.iterations_run,
                    100.0 * alignment.l4_error
                );
                rows.push(serde_json::json!({
                    "rep": rep,
                    "seed": seed,
                    "wall_time_s": wall,
                    "iterations": trace.iterations_run,
                    "l4_error": alignment.l4_error,
                }));
            }
            if let Some(out) = &cli.out {
                let report = serde_json::json!({
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": {"n": n, "theta": theta, "samples": samples, "p": p, "reps": reps, "seed": cli.seed},
                    "rows": rows,
                });
                std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
                eprintln!("wrote {}", out.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
