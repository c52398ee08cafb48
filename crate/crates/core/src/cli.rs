//! Command-line front end. Exit codes: 0 success, 2 validation, 3 divergence,
//! 4 schema or I/O, 1 internal numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximation::{check_td_condition, projected_system};
use crate::chain::stationary_distribution;
use crate::families::{generate_example, ExampleFamily};
use crate::learners::{
    run_average_cost, run_lspe, run_td, sample_trajectory, LearnerTrace, RecursionConfig, StepSchedule, DEFAULT_EPSILON,
};
use crate::report::{analyze, analyze_pair, validation_failures, ProblemDocument};
use crate::spectral::{perron_pair, Normalization};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_SCHEMA_IO: i32 = 4;

/// Environment variable capping the sweep worker pool.
pub const WORKERS_ENV: &str = "RISKBOUND_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "riskbound",
    version,
    about = "Risk-sensitive policy evaluation: exact and approximate costs, error bounds, learners"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a problem document and emit a JSON report.
    Analyze {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one recursion along a simulated trajectory; writes a trace CSV and prints a JSON summary.
    Simulate {
        spec: PathBuf,
        #[arg(long, value_enum)]
        alg: Algorithm,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Keep every k-th row of the trace (the last row is always kept).
        #[arg(long, default_value_t = 1)]
        thin: usize,
        #[arg(long, value_enum, default_value_t = ScheduleKind::Harmonic)]
        schedule: ScheduleKind,
        /// Step-size numerator `a`.
        #[arg(long = "step-a", default_value_t = 1.0)]
        step_a: f64,
        /// Harmonic offset `b`.
        #[arg(long = "step-b", default_value_t = 100.0)]
        step_b: f64,
        /// Polynomial exponent `κ`.
        #[arg(long, default_value_t = 0.75)]
        kappa: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Write a problem document for one of the example families.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyKind,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        qprime: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a family over a parameter grid; one CSV row per grid point.
    Sweep {
        #[arg(long, value_enum)]
        family: FamilyKind,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        qprime: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Avg,
    Lspe,
    Td,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleKind {
    Harmonic,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Constant,
    Diagonal,
    Corner,
    Primed,
    Shift,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Schema { .. } | Error::Io(_) => EXIT_SCHEMA_IO,
        Error::Diverged { .. } => EXIT_DIVERGED,
        Error::Numerical { .. } => EXIT_INTERNAL,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Analyze { spec, out } => cmd_analyze(&spec, out.as_deref()),
        Command::Simulate {
            spec,
            alg,
            horizon,
            seed,
            out,
            thin,
            schedule,
            step_a,
            step_b,
            kappa,
            epsilon,
        } => {
            let schedule = match schedule {
                ScheduleKind::Harmonic => StepSchedule::Harmonic { a: step_a, b: step_b },
                ScheduleKind::Polynomial => StepSchedule::Polynomial { a: step_a, kappa },
            };
            let opts = SimulateOptions {
                alg,
                horizon,
                seed,
                thin,
                schedule,
                epsilon,
            };
            let summary = cmd_simulate(&spec, &opts, &out)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
            Ok(if summary.diverged { EXIT_DIVERGED } else { EXIT_OK })
        }
        Command::Generate {
            family,
            s,
            p,
            q,
            qprime,
            eps,
            out,
        } => {
            let fam = family_from_args(family, p, q, qprime, eps)?;
            let doc = ProblemDocument::from_pair(&generate_example(fam, s)?);
            emit(&doc.to_json(), out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            family,
            s,
            p,
            q,
            qprime,
            eps,
            out,
        } => {
            let grid = sweep_grid(family, &s, &p, &q, &qprime, &eps)?;
            let csv = sweep_csv(&run_sweep(&grid, worker_limit())?);
            emit(&csv, out.as_deref())?;
            Ok(EXIT_OK)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

pub fn cmd_analyze(spec: &Path, out: Option<&Path>) -> Result<i32> {
    let doc = ProblemDocument::load(spec)?;
    if let Some(report) = validation_failures(&doc)? {
        eprintln!("error: chain validation failed: {}", report.failures());
        return Ok(EXIT_VALIDATION);
    }
    let report = analyze(&doc)?;
    emit(&report.to_json(), out)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub alg: Algorithm,
    pub horizon: usize,
    pub seed: u64,
    pub thin: usize,
    pub schedule: StepSchedule,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub algorithm: Algorithm,
    pub horizon: usize,
    pub seed: u64,
    pub target: Option<f64>,
    pub final_estimate: Option<f64>,
    pub rel_error: Option<f64>,
    pub diverged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Runs the recursion and writes the trace CSV to `out`. Divergence is
/// reported in the summary, not as an error.
pub fn cmd_simulate(spec: &Path, opts: &SimulateOptions, out: &Path) -> Result<SimulationSummary> {
    if opts.horizon == 0 || opts.thin == 0 {
        return Err(Error::Validation("horizon and thin must be at least 1".into()));
    }
    let doc = ProblemDocument::load(spec)?;
    let chain = doc
        .learner_chain()?
        .ok_or_else(|| Error::Validation("simulation needs a chain (P and c, or A)".into()))?;
    let traj = sample_trajectory(&chain, opts.horizon, opts.seed);
    let cfg = RecursionConfig {
        schedule: opts.schedule,
        epsilon: opts.epsilon,
        seed: opts.seed,
        ..RecursionConfig::default()
    };
    let need_phi = || {
        doc.features()?
            .ok_or_else(|| Error::Validation(format!("--alg {:?} needs Phi in the document", opts.alg).to_lowercase()))
    };
    let mut note = None;
    let result = match opts.alg {
        Algorithm::Avg => {
            let pi = stationary_distribution(&chain)?;
            let costs = chain.state_costs();
            let target = pi.pi.iter().zip(costs.iter()).map(|(p, c)| p * c).sum();
            run_average_cost(&traj, &costs, &opts.schedule, Some(target), opts.seed)
        }
        Algorithm::Lspe => {
            let phi = need_phi()?;
            if !phi.flags().dagger {
                return Err(Error::Validation(
                    "Phi must be nonnegative with orthogonal columns for the projected recursion".into(),
                ));
            }
            let sys = projected_system(&chain, &phi)?;
            if !sys.irreducible {
                note = Some("projected matrix is reducible; the limit is not certified".to_string());
            }
            run_lspe(&traj, &chain, &phi, Some(sys.mu), &cfg)
        }
        Algorithm::Td => {
            let phi = need_phi()?;
            let pi = stationary_distribution(&chain)?;
            let target = if check_td_condition(&phi, &pi) {
                let gamma = crate::chain::multiplicative_matrix(&chain)?.entries;
                Some(perron_pair(&gamma.view(), Normalization::L1Unit)?.value)
            } else {
                note = Some("Phi Phi^T != D^-1; no certified target".to_string());
                None
            };
            run_td(&traj, &chain, &phi, target, &cfg)
        }
    };
    match result {
        Ok(trace) => {
            std::fs::write(out, trace_csv(&trace, opts.thin))?;
            Ok(SimulationSummary {
                algorithm: opts.alg,
                horizon: opts.horizon,
                seed: opts.seed,
                target: trace.target,
                final_estimate: trace.final_estimate(),
                rel_error: trace.final_abs_rel_error,
                diverged: false,
                diverged_at: None,
                note,
            })
        }
        Err(Error::Diverged { step, norm }) => {
            std::fs::write(out, "n,estimate,target,abs_error\n")?;
            Ok(SimulationSummary {
                algorithm: opts.alg,
                horizon: opts.horizon,
                seed: opts.seed,
                target: None,
                final_estimate: None,
                rel_error: None,
                diverged: true,
                diverged_at: Some(step),
                note: Some(format!("parameter norm {norm:e} exceeded the divergence threshold")),
            })
        }
        Err(e) => Err(e),
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// `n,estimate,target,abs_error` with `n` counted from 1.
pub fn trace_csv(trace: &LearnerTrace, thin: usize) -> String {
    let mut out = String::from("n,estimate,target,abs_error\n");
    let last = trace.estimates.len();
    for (k, &e) in trace.estimates.iter().enumerate() {
        let n = k + 1;
        if n % thin.max(1) != 0 && n != last {
            continue;
        }
        let err = trace.target.map(|t| (e - t).abs());
        let _ = writeln!(out, "{n},{},{},{}", fmt_float(e), fmt_opt(trace.target), fmt_opt(err));
    }
    out
}

fn family_from_args(
    kind: FamilyKind,
    p: Option<f64>,
    q: Option<f64>,
    qprime: Option<f64>,
    eps: Option<f64>,
) -> Result<ExampleFamily> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Error::Validation(format!("--{name} is required for this family")))
    };
    Ok(match kind {
        FamilyKind::Constant => ExampleFamily::Constant {
            p: need(p, "p")?,
            q: need(q, "q")?,
        },
        FamilyKind::Diagonal => ExampleFamily::Diagonal {
            p: need(p, "p")?,
            q: need(q, "q")?,
        },
        FamilyKind::Corner => ExampleFamily::Corner {
            p: need(p, "p")?,
            q: need(q, "q")?,
        },
        FamilyKind::Primed => ExampleFamily::Primed {
            p: need(p, "p")?,
            q: need(q, "q")?,
            qprime: need(qprime, "qprime")?,
        },
        FamilyKind::Shift => ExampleFamily::Shift { eps: need(eps, "eps")? },
    })
}

/// Cartesian product of the parameter lists relevant to `kind`.
pub fn sweep_grid(
    kind: FamilyKind,
    s: &[usize],
    p: &[f64],
    q: &[f64],
    qprime: &[f64],
    eps: &[f64],
) -> Result<Vec<(usize, ExampleFamily)>> {
    let opt = |v: &[f64]| -> Vec<Option<f64>> {
        if v.is_empty() {
            vec![None]
        } else {
            v.iter().copied().map(Some).collect()
        }
    };
    let mut grid = Vec::new();
    for &n in s {
        for &pp in &opt(p) {
            for &qq in &opt(q) {
                for &qp in &opt(qprime) {
                    for &e in &opt(eps) {
                        let fam = family_from_args(kind, pp, qq, qp, e)?;
                        fam.validate()?;
                        if !grid.contains(&(n, fam)) {
                            grid.push((n, fam));
                        }
                    }
                }
            }
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: usize,
    pub family: ExampleFamily,
    pub lambda: f64,
    pub mu: f64,
    pub actual: Option<f64>,
    pub spectral_variation: Option<f64>,
    pub bapat_ratio: Option<f64>,
    pub lindqvist_lower: Option<f64>,
    pub lindqvist_additive: Option<f64>,
    pub operator_norm: Option<f64>,
    pub normal_gap: f64,
    pub eigen_gap: Option<f64>,
}

impl SweepRow {
    fn key(&self) -> [f64; 5] {
        let (p, q, qp, e) = family_params(&self.family);
        [
            self.s as f64,
            p.unwrap_or(0.0),
            q.unwrap_or(0.0),
            qp.unwrap_or(0.0),
            e.unwrap_or(0.0),
        ]
    }
}

fn family_params(f: &ExampleFamily) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    match *f {
        ExampleFamily::Constant { p, q } | ExampleFamily::Diagonal { p, q } | ExampleFamily::Corner { p, q } => {
            (Some(p), Some(q), None, None)
        }
        ExampleFamily::Primed { p, q, qprime } => (Some(p), Some(q), Some(qprime), None),
        ExampleFamily::Shift { eps } => (None, None, None, Some(eps)),
    }
}

pub fn sweep_point(s: usize, family: ExampleFamily) -> Result<SweepRow> {
    let pair = generate_example(family, s)?;
    let summary = analyze_pair(&pair.a, &pair.b)?;
    let gap = summary.normal_matrix;
    let row = match summary.bounds {
        Some(r) => SweepRow {
            s,
            family,
            lambda: r.lambda,
            mu: r.mu,
            actual: Some(r.actual),
            spectral_variation: r.spectral_variation.value,
            bapat_ratio: r.bapat_ratio.value,
            lindqvist_lower: r.lindqvist_lower.value,
            lindqvist_additive: r.lindqvist_additive.value,
            operator_norm: r.operator_norm.value,
            normal_gap: gap.value,
            eigen_gap: gap.eigen_gap,
        },
        None => {
            let lambda = crate::spectral::spectral_radius_nonnegative(&pair.a.view())?;
            let mu = crate::spectral::spectral_radius_nonnegative(&pair.b.view())?;
            SweepRow {
                s,
                family,
                lambda,
                mu,
                actual: None,
                spectral_variation: None,
                bapat_ratio: None,
                lindqvist_lower: None,
                lindqvist_additive: None,
                operator_norm: None,
                normal_gap: gap.value,
                eigen_gap: gap.eigen_gap,
            }
        }
    };
    Ok(row)
}

pub fn worker_limit() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Evaluates the grid on at most `workers` threads; rows are sorted by `(s, params)`.
pub fn run_sweep(grid: &[(usize, ExampleFamily)], workers: Option<usize>) -> Result<Vec<SweepRow>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
    let mut rows = pool.install(|| {
        grid.par_iter()
            .map(|&(s, fam)| sweep_point(s, fam))
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by(|a, b| {
        a.key()
            .iter()
            .zip(b.key().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(rows)
}

pub const SWEEP_HEADER: &str = "family,s,p,q,qprime,eps,lambda,mu,actual,spectral_variation,bapat_ratio,lindqvist_lower,lindqvist_additive,operator_norm,normal_gap,eigen_gap";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let (p, q, qp, e) = family_params(&r.family);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.family.name(),
            r.s,
            fmt_opt(p),
            fmt_opt(q),
            fmt_opt(qp),
            fmt_opt(e),
            fmt_float(r.lambda),
            fmt_float(r.mu),
            fmt_opt(r.actual),
            fmt_opt(r.spectral_variation),
            fmt_opt(r.bapat_ratio),
            fmt_opt(r.lindqvist_lower),
            fmt_opt(r.lindqvist_additive),
            fmt_opt(r.operator_norm),
            fmt_float(r.normal_gap),
            fmt_opt(r.eigen_gap),
        );
    }
    out
}
