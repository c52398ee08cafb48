//! Finite Markov chains with exponential running costs.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::linalg::{ensure_finite, ensure_square, is_irreducible, period, positive_digraph, solve_linear};
use crate::{Error, Result};

/// Row sums must equal one within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Largest cost accepted before `exp` is considered out of range.
pub const MAX_COST: f64 = 700.0;

const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_ITER: usize = 1_000_000;
const STATIONARY_RESIDUAL: f64 = 1e-10;
const DIRECT_SOLVE_MAX_STATES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainValidationReport {
    pub row_stochastic: bool,
    pub irreducible: bool,
    pub aperiodic: bool,
    pub strictly_positive: bool,
}

impl ChainValidationReport {
    pub fn is_valid(&self) -> bool {
        self.row_stochastic && self.irreducible && self.aperiodic
    }

    pub fn failures(&self) -> String {
        let mut out = Vec::new();
        if !self.row_stochastic {
            out.push("row_stochastic: false");
        }
        if !self.irreducible {
            out.push("irreducible: false");
        }
        if !self.aperiodic {
            out.push("aperiodic: false");
        }
        out.join(", ")
    }
}

/// Checks the structural hypotheses on a transition matrix.
pub fn validate_chain(p: &ArrayView2<f64>) -> Result<ChainValidationReport> {
    let n = ensure_square(p, "P")?;
    ensure_finite(p, "P")?;
    let in_range = p.iter().all(|&v| (0.0..=1.0).contains(&v));
    let sums_ok = p.rows().into_iter().all(|r| (r.sum() - 1.0).abs() <= ROW_SUM_TOL);
    let irreducible = is_irreducible(p);
    // The period is only meaningful on a single strongly connected component.
    let aperiodic = irreducible && period(&positive_digraph(p)) == 1;
    let strictly_positive = p.iter().all(|&v| v > 0.0);
    debug_assert!(n >= 1);
    Ok(ChainValidationReport {
        row_stochastic: in_range && sums_ok,
        irreducible,
        aperiodic,
        strictly_positive,
    })
}

/// A validated evaluation instance: transition matrix, cost matrix and the
/// distinguished state `i0` (0-based).
#[derive(Debug, Clone)]
pub struct ChainSpec {
    p: Array2<f64>,
    c: Array2<f64>,
    i0: usize,
    report: ChainValidationReport,
}

impl ChainSpec {
    pub fn new(p: Array2<f64>, c: Array2<f64>, i0: usize) -> Result<Self> {
        let s = ensure_square(&p.view(), "P")?;
        if s < 2 {
            return Err(Error::Dimension(format!("need at least 2 states, got {s}")));
        }
        if c.dim() != p.dim() {
            return Err(Error::Dimension(format!(
                "cost matrix is {:?}, expected {:?}",
                c.dim(),
                p.dim()
            )));
        }
        ensure_finite(&c.view(), "c")?;
        if i0 >= s {
            return Err(Error::Dimension(format!("i0 = {i0} outside 0..{s}")));
        }
        let report = validate_chain(&p.view())?;
        if !report.is_valid() {
            return Err(Error::Validation(report.failures()));
        }
        Ok(Self { p, c, i0, report })
    }

    /// Like [`ChainSpec::new`] with `i0` chosen as the most visited state
    /// (lowest index on ties).
    pub fn with_default_i0(p: Array2<f64>, c: Array2<f64>) -> Result<Self> {
        let mut chain = Self::new(p, c, 0)?;
        let pi = stationary_distribution(&chain)?;
        chain.i0 = pi.most_visited();
        Ok(chain)
    }

    /// Chain whose multiplicative matrix is exactly `a`: rows of `a` are
    /// normalized into transition probabilities and each row's scale is
    /// absorbed into a constant cost `ln(rowsum_i)`.
    pub fn from_multiplicative(a: &ArrayView2<f64>) -> Result<Self> {
        let s = ensure_square(a, "A")?;
        let mut p = a.to_owned();
        let mut c = Array2::zeros((s, s));
        for (i, mut row) in p.rows_mut().into_iter().enumerate() {
            let sum: f64 = row.sum();
            if !(sum > 0.0) {
                return Err(Error::Domain(format!("row {i} of A has no positive mass")));
            }
            row.mapv_inplace(|v| v / sum);
            c.row_mut(i).fill(sum.ln());
        }
        Self::with_default_i0(p, c)
    }

    pub fn states(&self) -> usize {
        self.p.nrows()
    }

    pub fn transition(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn costs(&self) -> &Array2<f64> {
        &self.c
    }

    pub fn i0(&self) -> usize {
        self.i0
    }

    pub fn set_i0(&mut self, i0: usize) -> Result<()> {
        if i0 >= self.states() {
            return Err(Error::Dimension(format!("i0 = {i0} outside 0..{}", self.states())));
        }
        self.i0 = i0;
        Ok(())
    }

    pub fn validation(&self) -> ChainValidationReport {
        self.report
    }

    /// State costs `c(i) := c(i,i)` used by the average-cost recursion.
    pub fn state_costs(&self) -> Array1<f64> {
        self.c.diag().to_owned()
    }
}

/// `γ_ij = exp(c(i,j)) p(j|i)`.
#[derive(Debug, Clone)]
pub struct MultiplicativeMatrix {
    pub entries: Array2<f64>,
    pub positive: bool,
}

pub fn multiplicative_matrix(chain: &ChainSpec) -> Result<MultiplicativeMatrix> {
    if let Some(((i, j), v)) = chain.c.indexed_iter().find(|(_, &v)| v > MAX_COST) {
        return Err(Error::Range(format!(
            "c[{i}][{j}] = {v} exceeds {MAX_COST}; exp would overflow"
        )));
    }
    let entries = ndarray::Zip::from(&chain.c)
        .and(&chain.p)
        .map_collect(|&c, &p| if p > 0.0 { c.exp() * p } else { 0.0 });
    let positive = entries.iter().all(|&v| v > 0.0);
    Ok(MultiplicativeMatrix { entries, positive })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    pub fn as_array(&self) -> Array1<f64> {
        Array1::from(self.pi.clone())
    }

    /// `D = diag(π)`.
    pub fn diag(&self) -> Array2<f64> {
        Array2::from_diag(&self.as_array())
    }

    pub fn most_visited(&self) -> usize {
        self.pi
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                },
            )
            .0
    }
}

fn stationary_residual(p: &ArrayView2<f64>, pi: &Array1<f64>) -> f64 {
    (&p.t().dot(pi) - pi).iter().map(|v| v.abs()).sum()
}

/// Stationary distribution by power iteration on `Pᵀ`, falling back to a
/// dense solve of `(Pᵀ - I)π = 0, Σπ = 1` for small chains.
pub fn stationary_distribution(chain: &ChainSpec) -> Result<StationaryDistribution> {
    let p = chain.p.view();
    let s = chain.states();
    let mut pi = Array1::from_elem(s, 1.0 / s as f64);
    let mut step = f64::INFINITY;
    for _ in 0..STATIONARY_MAX_ITER {
        let mut next = p.t().dot(&pi);
        next /= next.sum();
        step = next.iter().zip(pi.iter()).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if step <= STATIONARY_TOL {
            break;
        }
    }
    let mut residual = stationary_residual(&p, &pi);
    if (step > STATIONARY_TOL || residual > STATIONARY_RESIDUAL) && s <= DIRECT_SOLVE_MAX_STATES {
        pi = direct_stationary(&p)?;
        residual = stationary_residual(&p, &pi);
    }
    if residual > STATIONARY_RESIDUAL || step.is_nan() {
        return Err(Error::numerical("stationary distribution did not converge", residual));
    }
    Ok(StationaryDistribution { pi: pi.to_vec() })
}

fn direct_stationary(p: &ArrayView2<f64>) -> Result<Array1<f64>> {
    let s = p.nrows();
    // Replace the last balance equation by the normalization.
    let mut a = p.t().to_owned();
    a.diag_mut().mapv_inplace(|v| v - 1.0);
    a.row_mut(s - 1).fill(1.0);
    let mut rhs = Array2::zeros((s, 1));
    rhs[[s - 1, 0]] = 1.0;
    let x = solve_linear(&a.view(), &rhs.view())?;
    Ok(x.column(0).to_owned())
}
