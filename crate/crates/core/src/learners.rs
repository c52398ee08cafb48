//! Chain simulation and the three stochastic-approximation recursions:
//! the average-cost tracker, the projected (LSPE-style) eigenvalue recursion
//! and the risk-sensitive TD recursion.
//!
//! All randomness comes from a ChaCha8 stream seeded with a `u64`, so a run is
//! reproducible bit-for-bit from `(chain, Φ, schedule, seed)`.

use ndarray::{Array1, Array2};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approximation::FeatureMatrix;
use crate::chain::ChainSpec;
use crate::linalg::l1;
use crate::spectral::solve_gram;
use crate::{Error, Result};

/// Default lower guard on the normalizing estimate `φᵀ(i0)r`.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Ridge added to the feature Gram accumulator.
pub const RIDGE: f64 = 1e-8;
/// Updates wait until the Gram accumulator's condition number is below this.
pub const MAX_CONDITION: f64 = 1e8;
/// Parameter norm treated as divergence.
pub const DIVERGENCE_NORM: f64 = 1e9;

/// Robbins–Monro step sizes. `n` is the 1-based update index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    /// `a / (n + b)`
    Harmonic { a: f64, b: f64 },
    /// `a / n^κ` with `κ ∈ (1/2, 1]`
    Polynomial { a: f64, kappa: f64 },
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Harmonic { a: 1.0, b: 100.0 }
    }
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::Harmonic { a, b } if a > 0.0 && b >= 0.0 && b.is_finite() && a.is_finite() => Ok(()),
            StepSchedule::Polynomial { a, kappa } if a > 0.0 && a.is_finite() && kappa > 0.5 && kappa <= 1.0 => Ok(()),
            other => Err(Error::Domain(format!(
                "{other:?} violates the Robbins-Monro parameter ranges"
            ))),
        }
    }

    pub fn step(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            StepSchedule::Harmonic { a, b } => a / (n + b),
            StepSchedule::Polynomial { a, kappa } => a / n.powf(kappa),
        }
    }
}

/// Time series of a recursion's scalar estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerTrace {
    /// Estimate after each of the `horizon` updates.
    pub estimates: Vec<f64>,
    /// Analytic limit, when one is certified.
    pub target: Option<f64>,
    /// Parameter vectors every `param_stride` updates (empty when not requested).
    pub params: Vec<Vec<f64>>,
    pub param_stride: usize,
    pub seed: u64,
    /// `|final − target| / |target|`, or the absolute error when the target is zero.
    pub final_abs_rel_error: Option<f64>,
    /// First update applied (later than 1 when the recursion waited on its accumulators).
    pub first_update: usize,
}

impl LearnerTrace {
    fn new(estimates: Vec<f64>, target: Option<f64>, seed: u64) -> Self {
        let final_abs_rel_error = match (estimates.last(), target) {
            (Some(&e), Some(t)) if t != 0.0 => Some((e - t).abs() / t.abs()),
            (Some(&e), Some(t)) => Some((e - t).abs()),
            _ => None,
        };
        Self {
            estimates,
            target,
            params: Vec::new(),
            param_stride: 0,
            seed,
            final_abs_rel_error,
            first_update: 1,
        }
    }

    pub fn final_estimate(&self) -> Option<f64> {
        self.estimates.last().copied()
    }
}

/// `X_0` uniform, `X_{m+1} ~ P(·|X_m)`; returns `horizon + 1` states.
pub fn sample_trajectory(chain: &ChainSpec, horizon: usize, seed: u64) -> Vec<usize> {
    let s = chain.states();
    let cdf: Vec<Vec<f64>> = chain
        .transition()
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(horizon + 1);
    let mut x = rng.random_range(0..s);
    states.push(x);
    for _ in 0..horizon {
        let u: f64 = rng.random::<f64>() * cdf[x][s - 1];
        x = cdf[x].iter().position(|&c| u < c).unwrap_or_else(|| {
            // u can only reach the top of the cdf through rounding; take the last
            // state with positive probability.
            chain
                .transition()
                .row(x)
                .iter()
                .rposition(|&p| p > 0.0)
                .expect("stochastic row")
        });
        states.push(x);
    }
    states
}

/// `θ_{n+1} = θ_n + a(n)[c(X_n) − θ_n]` over state costs `c(i) := c(i,i)`,
/// started at `θ_0 = c(X_0)`. The target is `Σ_i π_i c(i)` when supplied.
pub fn run_average_cost(
    trajectory: &[usize],
    costs: &Array1<f64>,
    schedule: &StepSchedule,
    target: Option<f64>,
    seed: u64,
) -> Result<LearnerTrace> {
    schedule.validate()?;
    if trajectory.len() < 2 {
        return Err(Error::Domain("trajectory needs at least one transition".into()));
    }
    let mut theta = costs[trajectory[0]];
    let mut estimates = Vec::with_capacity(trajectory.len() - 1);
    for (n, &x) in trajectory[..trajectory.len() - 1].iter().enumerate() {
        theta += schedule.step(n + 1) * (costs[x] - theta);
        estimates.push(theta);
    }
    Ok(LearnerTrace::new(estimates, target, seed))
}

/// Options shared by the two eigenvalue recursions.
#[derive(Debug, Clone)]
pub struct RecursionConfig {
    pub schedule: StepSchedule,
    pub epsilon: f64,
    /// Initial parameter; all ones when `None`.
    pub initial: Option<Array1<f64>>,
    /// Record the parameter vector every this many updates (0 = never).
    pub param_stride: usize,
    pub seed: u64,
}

impl Default for RecursionConfig {
    fn default() -> Self {
        Self {
            schedule: StepSchedule::default(),
            epsilon: DEFAULT_EPSILON,
            initial: None,
            param_stride: 0,
            seed: 0,
        }
    }
}

fn check_inputs(
    trajectory: &[usize],
    chain: &ChainSpec,
    phi: &FeatureMatrix,
    cfg: &RecursionConfig,
) -> Result<Array1<f64>> {
    cfg.schedule.validate()?;
    if trajectory.len() < 2 {
        return Err(Error::Domain("trajectory needs at least one transition".into()));
    }
    if phi.states() != chain.states() {
        return Err(Error::Dimension(format!(
            "features cover {} states, chain has {}",
            phi.states(),
            chain.states()
        )));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(Error::Domain("epsilon guard must be positive".into()));
    }
    let init = cfg.initial.clone().unwrap_or_else(|| Array1::ones(phi.features()));
    if init.len() != phi.features() {
        return Err(Error::Dimension(
            "initial parameter length differs from feature count".into(),
        ));
    }
    Ok(init)
}

/// One-norm condition number of a small SPD matrix, or infinity when singular.
fn condition_number(g: &Array2<f64>) -> f64 {
    let m = g.nrows();
    match solve_gram(&g.view(), &Array2::eye(m).view()) {
        Ok(inv) => {
            let n1 = |a: &Array2<f64>| {
                a.columns()
                    .into_iter()
                    .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            };
            n1(g) * n1(&inv)
        }
        Err(_) => f64::INFINITY,
    }
}

/// `r_{n+1} = r_n + a(n)(B_n⁻¹A_n / max(φᵀ(i0)r_n, ε) − I) r_n` with
/// `A_n = Σ exp(c(X_m,X_{m+1})) φ(X_m)φᵀ(X_{m+1})`, `B_n = Σ φ(X_m)φᵀ(X_m) + ridge·I`.
///
/// `r_n` is held until `B_n` is well conditioned. `target` is normally the
/// projected Perron value `μ`.
pub fn run_lspe(
    trajectory: &[usize],
    chain: &ChainSpec,
    phi: &FeatureMatrix,
    target: Option<f64>,
    cfg: &RecursionConfig,
) -> Result<LearnerTrace> {
    let mut r = check_inputs(trajectory, chain, phi, cfg)?;
    let m = phi.features();
    let f = phi.matrix();
    let i0 = chain.i0();
    let c = chain.costs();
    let mut a_acc = Array2::<f64>::zeros((m, m));
    let mut b_acc = Array2::<f64>::eye(m) * RIDGE;
    let mut ready = false;
    let mut first_update = 0;
    let mut estimates = Vec::with_capacity(trajectory.len() - 1);
    let mut params = Vec::new();

    for n in 0..trajectory.len() - 1 {
        let (x, x_next) = (trajectory[n], trajectory[n + 1]);
        let fx = f.row(x);
        let fy = f.row(x_next);
        let w = c[[x, x_next]].exp();
        for p in 0..m {
            if fx[p] == 0.0 {
                continue;
            }
            for q in 0..m {
                a_acc[[p, q]] += w * fx[p] * fy[q];
                b_acc[[p, q]] += fx[p] * fx[q];
            }
        }
        if !ready && condition_number(&b_acc) <= MAX_CONDITION {
            ready = true;
            first_update = n + 1;
        }
        if ready {
            let ba = solve_gram(&b_acc.view(), &a_acc.view())?;
            let denom = f.row(i0).dot(&r).max(cfg.epsilon);
            let drift = ba.dot(&r) / denom - &r;
            r.scaled_add(cfg.schedule.step(n + 1), &drift);
            let norm = l1(&r);
            if !norm.is_finite() || norm > DIVERGENCE_NORM {
                return Err(Error::Diverged { step: n + 1, norm });
            }
        }
        estimates.push(f.row(i0).dot(&r));
        if cfg.param_stride > 0 && (n + 1) % cfg.param_stride == 0 {
            params.push(r.to_vec());
        }
    }
    let mut trace = LearnerTrace::new(estimates, target, cfg.seed);
    trace.params = params;
    trace.param_stride = cfg.param_stride;
    trace.first_update = first_update.max(1);
    Ok(trace)
}

/// `θ_{n+1} = θ_n + a(n)[exp(c(X_n,X_{n+1})) φᵀ(X_{n+1})θ_n / max(φᵀ(i0)θ_n, ε) − φᵀ(X_n)θ_n] φ(X_n)`.
///
/// `target` should be `λ` only when `ΦΦᵀ = D⁻¹`; otherwise pass `None`.
pub fn run_td(
    trajectory: &[usize],
    chain: &ChainSpec,
    phi: &FeatureMatrix,
    target: Option<f64>,
    cfg: &RecursionConfig,
) -> Result<LearnerTrace> {
    let mut theta = check_inputs(trajectory, chain, phi, cfg)?;
    let f = phi.matrix();
    let i0 = chain.i0();
    let c = chain.costs();
    let mut estimates = Vec::with_capacity(trajectory.len() - 1);
    let mut params = Vec::new();
    for n in 0..trajectory.len() - 1 {
        let (x, x_next) = (trajectory[n], trajectory[n + 1]);
        let denom = f.row(i0).dot(&theta).max(cfg.epsilon);
        let td = c[[x, x_next]].exp() * f.row(x_next).dot(&theta) / denom - f.row(x).dot(&theta);
        theta.scaled_add(cfg.schedule.step(n + 1) * td, &f.row(x));
        let norm = l1(&theta);
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            return Err(Error::Diverged { step: n + 1, norm });
        }
        estimates.push(f.row(i0).dot(&theta));
        if cfg.param_stride > 0 && (n + 1) % cfg.param_stride == 0 {
            params.push(theta.to_vec());
        }
    }
    let mut trace = LearnerTrace::new(estimates, target, cfg.seed);
    trace.params = params;
    trace.param_stride = cfg.param_stride;
    Ok(trace)
}
