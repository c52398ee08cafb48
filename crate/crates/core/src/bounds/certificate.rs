//! Certificate that `λ = μ` even though `C∘P ≠ ΠM`.
//!
//! Condition one asks for `λ0 > 0` and positive `β` with
//! `δ_ij = λ0 γ_ij β_i / β_j`; it is solved in log-space by fixing `β_1 = 1`,
//! reading `λ0` off entry `(1,1)` and `β` off the first column, and then
//! checking every entry. Condition two is the weighted log identity
//! `Σ γ_ij x_i y_j (ln δ_ij − ln γ_ij) = 0`, reported divided by `Σ γ_ij x_i y_j = λ`.

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::spectral::spectral_radius_nonnegative;
use crate::{Error, Result};

/// Relative entrywise tolerance for condition one.
pub const CONDITION_ONE_TOL: f64 = 1e-9;
/// Tolerance for the normalized log identity of condition two.
pub const CONDITION_TWO_TOL: f64 = 1e-10;
/// A certified instance must have `|λ − μ|/λ` below this.
pub const CERTIFIED_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOne {
    pub holds: bool,
    pub lambda0: f64,
    pub beta: Vec<f64>,
    /// Largest `|δ_ij − λ0 γ_ij β_i/β_j| / δ_ij`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionTwo {
    pub holds: bool,
    /// `Σ γ_ij x_i y_j (ln δ_ij − ln γ_ij) / Σ γ_ij x_i y_j`.
    pub log_identity_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroErrorCertificate {
    pub condition1: ConditionOne,
    pub condition2: ConditionTwo,
    pub certified: bool,
    /// `|λ − μ| / λ` measured on the inputs.
    pub relative_gap: f64,
}

/// `x`, `y` are Perron vectors of `γ` with `<x, y> = 1`.
pub fn zero_error_certificate(
    gamma: &ArrayView2<f64>,
    delta: &ArrayView2<f64>,
    x: &ArrayView1<f64>,
    y: &ArrayView1<f64>,
) -> Result<ZeroErrorCertificate> {
    let s = gamma.nrows();
    if gamma.dim() != (s, s) || delta.dim() != (s, s) || x.len() != s || y.len() != s || s == 0 {
        return Err(Error::Dimension("gamma, delta, x and y disagree on size".into()));
    }
    for (name, m) in [("gamma", gamma), ("delta", delta)] {
        if let Some(((i, j), v)) = m.indexed_iter().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::Domain(format!("{name}[{i}][{j}] = {v} is not positive")));
        }
    }
    let log_gap = |i: usize, j: usize| delta[[i, j]].ln() - gamma[[i, j]].ln();

    let u = log_gap(0, 0);
    let log_beta: Vec<f64> = (0..s).map(|i| log_gap(i, 0) - u).collect();
    let mut residual = 0.0f64;
    for i in 0..s {
        for j in 0..s {
            let model = (u + log_beta[i] - log_beta[j]).exp() * gamma[[i, j]];
            residual = residual.max((delta[[i, j]] - model).abs() / delta[[i, j]]);
        }
    }
    let condition1 = ConditionOne {
        holds: residual <= CONDITION_ONE_TOL,
        lambda0: u.exp(),
        beta: log_beta.iter().map(|b| b.exp()).collect(),
        residual,
    };

    let mut weighted = 0.0;
    let mut weight = 0.0;
    for i in 0..s {
        for j in 0..s {
            let w = gamma[[i, j]] * x[i] * y[j];
            weighted += w * log_gap(i, j);
            weight += w;
        }
    }
    let log_identity_gap = weighted / weight;
    let condition2 = ConditionTwo {
        holds: log_identity_gap.abs() <= CONDITION_TWO_TOL,
        log_identity_gap,
    };

    let lambda = spectral_radius_nonnegative(gamma)?;
    let mu = spectral_radius_nonnegative(delta)?;
    let relative_gap = (lambda - mu).abs() / lambda;
    let certified = condition1.holds && condition2.holds;
    if certified && relative_gap > CERTIFIED_GAP_TOL {
        return Err(Error::numerical(
            "certificate holds but the Perron values differ",
            relative_gap,
        ));
    }
    Ok(ZeroErrorCertificate {
        condition1,
        condition2,
        certified,
        relative_gap,
    })
}
