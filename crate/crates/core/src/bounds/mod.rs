//! Error `ln(λ/μ)` between the Perron values of two nonnegative matrices and
//! the upper bounds on it.
//!
//! Generic functions take a pair `(A, B)` in the orientation `r(A) ≥ r(B)`.
//! [`BoundReport::compute`] orients an arbitrary pair itself: when `r(A) < r(B)`
//! the same formulas are applied with the roles exchanged and the swap is
//! recorded in [`Direction`].
//!
//! Everything is evaluated in log-space. A term `a ln(a/b)` with `a = 0` is
//! zero; `a > 0` with `b = 0` makes the ratio-type bounds inapplicable.
//!
//! The norm is the ℓ1-induced operator norm throughout, including the
//! normal-matrix diagnostic, whose classical statement uses the spectral norm.
//! That diagnostic is therefore reported but never treated as a bound.

mod certificate;
mod rl;

pub use certificate::{zero_error_certificate, ConditionOne, ConditionTwo, ZeroErrorCertificate};
pub use rl::{check_rl_conditions, rl_expanded_bounds, ExpandedBounds, RlConditions};

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::linalg::{ensure_square, is_nonnegative};
use crate::spectral::{
    induced_one_norm, is_normal, perron_pair, row_sum_bracket, spectral_radius_nonnegative, Normalization, PerronPair,
};
use crate::{Error, Result};

/// Slack allowed when checking that a bound dominates the actual error.
pub const SOUNDNESS_TOL: f64 = 1e-10;
/// Slack allowed in the ordering verdicts.
pub const ORDERING_TOL: f64 = 1e-12;
/// Relative tolerance when comparing entries for the structural hypotheses.
pub const ENTRY_MATCH_TOL: f64 = 1e-10;

/// Signed `ln λ − ln μ`.
pub fn actual_error(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(mu > 0.0) {
        return Err(Error::Domain(format!(
            "Perron values must be positive (lambda = {lambda}, mu = {mu})"
        )));
    }
    Ok(lambda.ln() - mu.ln())
}

/// `ln(1 + e^t)` without overflow.
fn ln_one_plus_exp(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `ln(1 + (‖A‖+‖B‖)^{1-1/s} ‖A−B‖^{1/s} / μ)`.
pub fn spectral_variation_bound(a: &ArrayView2<f64>, b: &ArrayView2<f64>, mu: f64) -> Result<f64> {
    let s = pair_size(a, b)?;
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu = {mu} must be positive")));
    }
    let na = induced_one_norm(a)?;
    let nb = induced_one_norm(b)?;
    let nd = induced_one_norm(&(a - b).view())?;
    if nd == 0.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / s as f64;
    let t = (1.0 - inv) * (na + nb).ln() + inv * nd.ln() - mu.ln();
    Ok(ln_one_plus_exp(t))
}

fn pair_size(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Result<usize> {
    let s = ensure_square(a, "A")?;
    if b.dim() != (s, s) {
        return Err(Error::Dimension(format!("B is {:?}, A is {s}x{s}", b.dim())));
    }
    Ok(s)
}

fn check_biorthogonal(x: &ArrayView1<f64>, y: &ArrayView1<f64>, s: usize) -> Result<()> {
    if x.len() != s || y.len() != s {
        return Err(Error::Dimension("Perron vectors do not match the matrix size".into()));
    }
    let ip = x.dot(y);
    if (ip - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "Perron vectors must satisfy <x, y> = 1, got {ip}"
        )));
    }
    Ok(())
}

/// `Σ_ij (a_ij x_i y_j / r(A)) ln(a_ij / b_ij)`: the logarithm of the
/// weighted-geometric ratio bound for positive matrices.
pub fn bapat_ratio_bound(a: &ArrayView2<f64>, b: &ArrayView2<f64>, perron: &PerronPair) -> Result<f64> {
    let s = pair_size(a, b)?;
    let x = perron.left_vec();
    let y = perron.right_vec();
    check_biorthogonal(&x.view(), &y.view(), s)?;
    let mut acc = 0.0;
    for ((i, j), &aij) in a.indexed_iter() {
        if aij == 0.0 {
            continue;
        }
        let bij = b[[i, j]];
        if !(bij > 0.0) {
            return Err(Error::Domain(format!(
                "b[{i}][{j}] = {bij} is not positive where a[{i}][{j}] = {aij}"
            )));
        }
        acc += aij * x[i] * y[j] * (aij.ln() - bij.ln());
    }
    Ok(acc / perron.value)
}

/// `L = Σ_i x_i y_i (a_ii − b_ii) + Σ_{i≠j} a_ij x_i y_j ln(a_ij/b_ij)`.
pub fn lindqvist_quantity(
    a: &ArrayView2<f64>,
    b: &ArrayView2<f64>,
    x: &ArrayView1<f64>,
    y: &ArrayView1<f64>,
) -> Result<f64> {
    let s = pair_size(a, b)?;
    check_biorthogonal(x, y, s)?;
    let mut l = 0.0;
    for ((i, j), &aij) in a.indexed_iter() {
        let bij = b[[i, j]];
        if i == j {
            l += x[i] * y[i] * (aij - bij);
        } else if aij != 0.0 {
            if !(bij > 0.0) {
                return Err(Error::Domain(format!(
                    "off-diagonal b[{i}][{j}] = {bij} is not positive where a[{i}][{j}] = {aij}"
                )));
            }
            l += aij * x[i] * y[j] * (aij.ln() - bij.ln());
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: Option<f64>,
    pub valid: bool,
}

/// `ln r(A) − ln(r(A) − L)`, valid exactly when `r(A) > L`.
pub fn lindqvist_lower_bound(r_a: f64, l: f64) -> LowerBound {
    if r_a > l {
        LowerBound {
            value: Some(r_a.ln() - (r_a - l).ln()),
            valid: true,
        }
    } else {
        LowerBound {
            value: None,
            valid: false,
        }
    }
}

/// `ln(1 + L/μ)`.
pub fn lindqvist_additive_bound(mu: f64, l: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu = {mu} must be positive")));
    }
    let z = l / mu;
    if !(z > -1.0) {
        return Err(Error::Domain(format!("1 + L/mu = {} is not positive", 1.0 + z)));
    }
    Ok(z.ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormBound {
    pub value: f64,
    /// `α(Aᵀ) = max_i 1/(x_{Aᵀ})_i` for the ℓ1-normalized left Perron vector.
    pub alpha: f64,
    pub diff_norm: f64,
}

/// `ln(1 + α(Aᵀ) ‖A − B‖ / μ)` for nonnegative irreducible `A`.
pub fn operator_norm_bound(a: &ArrayView2<f64>, b: &ArrayView2<f64>, mu: f64) -> Result<OperatorNormBound> {
    pair_size(a, b)?;
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu = {mu} must be positive")));
    }
    let pair = perron_pair(a, Normalization::L1Unit)?;
    let alpha = pair.left.iter().fold(0.0f64, |m, &v| m.max(1.0 / v));
    let diff_norm = induced_one_norm(&(a - b).view())?;
    Ok(OperatorNormBound {
        value: (alpha * diff_norm / mu).ln_1p(),
        alpha,
        diff_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGap {
    /// `‖A − B‖`
    pub value: f64,
    /// `|r(A) − r(B)|`, when both matrices are nonnegative.
    pub eigen_gap: Option<f64>,
    /// `AAᵀ = AᵀA` within `1e-10`.
    pub normal: bool,
    /// Whether `|r(A) − r(B)| ≤ ‖A − B‖` held on this instance.
    pub inequality_holds: Option<bool>,
}

/// Diagnostic comparison of the eigenvalue gap with `‖A − B‖`. Only binding for normal `A`.
pub fn normal_matrix_gap(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Result<NormalGap> {
    pair_size(a, b)?;
    let value = induced_one_norm(&(a - b).view())?;
    let normal = is_normal(a, 1e-10);
    let eigen_gap = if is_nonnegative(a) && is_nonnegative(b) {
        Some((spectral_radius_nonnegative(a)? - spectral_radius_nonnegative(b)?).abs())
    } else {
        None
    };
    Ok(NormalGap {
        value,
        eigen_gap,
        normal,
        inequality_holds: eigen_gap.map(|g| g <= value + 1e-12),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionEleven {
    /// `r(A) > L`
    pub holds: bool,
    pub min_row_sum: f64,
    /// `min_i Σ_j a_ij ≤ r(A)`; automatic for nonnegative matrices, checked anyway.
    pub row_sum_clause: bool,
}

/// Necessary and sufficient condition for the ratio form of the lower
/// Lindqvist bound, plus the row-sum side clause.
pub fn check_condition_11(a: &ArrayView2<f64>, l: f64, r_a: f64) -> ConditionEleven {
    let (min_row_sum, _) = row_sum_bracket(a);
    ConditionEleven {
        holds: r_a > l,
        min_row_sum,
        row_sum_clause: min_row_sum <= r_a * (1.0 + 1e-10),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `λ > μ`; bounds apply to `(A, B)` as given.
    LambdaGreater,
    /// `λ < μ`; bounds were computed with `A` and `B` exchanged.
    MuGreater,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: Option<f64>,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl BoundValue {
    fn ok(value: f64) -> Self {
        Self {
            value: Some(value),
            valid: true,
            note: None,
        }
    }

    fn invalid(note: impl Into<String>) -> Self {
        Self {
            value: None,
            valid: false,
            note: Some(note.into()),
        }
    }

    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Self::ok(v),
            Err(e) => Self::invalid(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEntry {
    pub value: Option<f64>,
    pub alpha: Option<f64>,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub a: f64,
    pub b: f64,
    pub diff: f64,
}

/// Structural hypotheses of the comparison lemmas, read off `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonHypotheses {
    /// `b_ii = a_ii` for all `i`.
    pub diag_match: bool,
    /// `b_ij = a_ij` for all `i ≠ j`.
    pub offdiag_match: bool,
    /// Some `b_ii ≠ a_ii`.
    pub diag_differs: bool,
}

impl ComparisonHypotheses {
    pub fn from_pair(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Self {
        let same = |x: f64, y: f64| (x - y).abs() <= ENTRY_MATCH_TOL * x.abs().max(y.abs());
        let mut diag_match = true;
        let mut offdiag_match = true;
        for ((i, j), &aij) in a.indexed_iter() {
            let eq = same(aij, b[[i, j]]);
            if i == j {
                diag_match &= eq;
            } else {
                offdiag_match &= eq;
            }
        }
        Self {
            diag_match,
            offdiag_match,
            diag_differs: !diag_match,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Hypotheses of the comparison hold and both bounds are available.
    pub applicable: bool,
    pub holds: Option<bool>,
    /// Value of the claimed-larger bound minus the claimed-smaller one.
    pub margin: Option<f64>,
}

impl Verdict {
    fn na() -> Self {
        Self {
            applicable: false,
            holds: None,
            margin: None,
        }
    }

    fn check(larger: f64, smaller: f64) -> Self {
        let margin = larger - smaller;
        Self {
            applicable: true,
            holds: Some(margin >= -ORDERING_TOL),
            margin: Some(margin),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orderings {
    /// Additive bound ≤ lower bound whenever the latter is valid.
    pub lemma2: Verdict,
    /// Ratio bound ≤ lower bound when diagonals match.
    pub lemma3: Verdict,
    /// Lower bound ≤ ratio bound when off-diagonals match and a diagonal differs.
    pub lemma4: Verdict,
}

/// Ordering verdicts between the ratio, lower and additive bounds.
pub fn compare_bounds(report: &BoundReport, hyp: &ComparisonHypotheses) -> Orderings {
    let lower = report.lindqvist_lower.value.filter(|_| report.lindqvist_lower.valid);
    let additive = report
        .lindqvist_additive
        .value
        .filter(|_| report.lindqvist_additive.valid);
    let ratio = report.bapat_ratio.value.filter(|_| report.bapat_ratio.valid);
    let lemma2 = match (lower, additive) {
        (Some(lo), Some(ad)) => Verdict::check(lo, ad),
        _ => Verdict::na(),
    };
    let lemma3 = match (lower, ratio) {
        (Some(lo), Some(r)) if hyp.diag_match => Verdict::check(lo, r),
        _ => Verdict::na(),
    };
    let lemma4 = match (lower, ratio) {
        (Some(lo), Some(r)) if hyp.offdiag_match && hyp.diag_differs => Verdict::check(r, lo),
        _ => Verdict::na(),
    };
    Orderings { lemma2, lemma3, lemma4 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindqvistCheck {
    pub l: f64,
    /// `r(A) − r(B)` in the oriented pair.
    pub eigen_gap: f64,
    /// `L ≥ r(A) − r(B) − 1e-10`
    pub holds: bool,
}

/// Actual error plus every bound, validity flag and intermediate quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lambda: f64,
    pub mu: f64,
    pub direction: Direction,
    /// Signed `ln(λ/μ)`.
    pub actual: f64,
    /// `|ln(λ/μ)|`: the quantity the oriented bounds dominate.
    pub actual_oriented: f64,
    pub norms: Norms,
    pub spectral_variation: BoundValue,
    pub bapat_ratio: BoundValue,
    pub lindqvist_lower: BoundValue,
    pub lindqvist_additive: BoundValue,
    pub operator_norm: OperatorNormEntry,
    pub normal_matrix: NormalGap,
    /// Lindqvist quantity for the oriented pair.
    pub l: Option<f64>,
    pub l_check: Option<LindqvistCheck>,
    pub condition_11: Option<ConditionEleven>,
    pub hypotheses: ComparisonHypotheses,
    pub orderings: Orderings,
    /// For every column `j` some `b_ij > a_ij` (original orientation).
    pub column_exceedance: bool,
}

impl BoundReport {
    /// Full report for two nonnegative matrices with positive spectral radii.
    pub fn compute(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Result<Self> {
        pair_size(a, b)?;
        if !is_nonnegative(a) || !is_nonnegative(b) {
            return Err(Error::Domain("bounds require nonnegative matrices".into()));
        }
        let lambda = spectral_radius_nonnegative(a)?;
        let mu = spectral_radius_nonnegative(b)?;
        let actual = actual_error(lambda, mu)?;
        let direction = if lambda > mu {
            Direction::LambdaGreater
        } else if lambda < mu {
            Direction::MuGreater
        } else {
            Direction::Equal
        };
        let (big, small, r_big, r_small) = match direction {
            Direction::MuGreater => (b, a, mu, lambda),
            _ => (a, b, lambda, mu),
        };

        let norms = Norms {
            a: induced_one_norm(a)?,
            b: induced_one_norm(b)?,
            diff: induced_one_norm(&(a - b).view())?,
        };
        let spectral_variation = BoundValue::from_result(spectral_variation_bound(big, small, r_small));

        let mut l_value = None;
        let mut l_check = None;
        let mut condition_11 = None;
        let (bapat_ratio, lindqvist_lower, lindqvist_additive) = match perron_pair(big, Normalization::Biorthogonal) {
            Ok(pair) => {
                let ratio = BoundValue::from_result(bapat_ratio_bound(big, small, &pair));
                let x = Array1::from(pair.left.clone());
                let y = Array1::from(pair.right.clone());
                match lindqvist_quantity(big, small, &x.view(), &y.view()) {
                    Ok(l) => {
                        l_value = Some(l);
                        l_check = Some(LindqvistCheck {
                            l,
                            eigen_gap: r_big - r_small,
                            holds: l >= r_big - r_small - SOUNDNESS_TOL,
                        });
                        condition_11 = Some(check_condition_11(big, l, pair.value));
                        let lower = lindqvist_lower_bound(pair.value, l);
                        let lower = if lower.valid {
                            BoundValue::ok(lower.value.expect("valid lower bound"))
                        } else {
                            BoundValue::invalid("r(A) <= L")
                        };
                        (
                            ratio,
                            lower,
                            BoundValue::from_result(lindqvist_additive_bound(r_small, l)),
                        )
                    }
                    Err(e) => {
                        let invalid = BoundValue::invalid(e.to_string());
                        (ratio, invalid.clone(), invalid)
                    }
                }
            }
            Err(Error::Structure(msg)) => {
                let invalid = BoundValue::invalid(format!("larger-eigenvalue matrix: {msg}"));
                (invalid.clone(), invalid.clone(), invalid)
            }
            Err(e) => return Err(e),
        };

        let operator_norm = match operator_norm_bound(big, small, r_small) {
            Ok(ob) => OperatorNormEntry {
                value: Some(ob.value),
                alpha: Some(ob.alpha),
                valid: true,
                note: None,
            },
            Err(Error::Structure(msg)) => OperatorNormEntry {
                value: None,
                alpha: None,
                valid: false,
                note: Some(msg),
            },
            Err(e) => return Err(e),
        };

        let hypotheses = ComparisonHypotheses::from_pair(a, b);
        let column_exceedance = (0..a.ncols()).all(|j| (0..a.nrows()).any(|i| b[[i, j]] > a[[i, j]]));
        let mut report = Self {
            lambda,
            mu,
            direction,
            actual,
            actual_oriented: actual.abs(),
            norms,
            spectral_variation,
            bapat_ratio,
            lindqvist_lower,
            lindqvist_additive,
            operator_norm,
            normal_matrix: normal_matrix_gap(a, b)?,
            l: l_value,
            l_check,
            condition_11,
            hypotheses,
            orderings: Orderings {
                lemma2: Verdict::na(),
                lemma3: Verdict::na(),
                lemma4: Verdict::na(),
            },
            column_exceedance,
        };
        report.orderings = compare_bounds(&report, &hypotheses);
        Ok(report)
    }

    /// Valid bounds as `(name, value)` pairs.
    pub fn valid_bounds(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        let mut push = |name, b: &BoundValue| {
            if let (true, Some(v)) = (b.valid, b.value) {
                out.push((name, v));
            }
        };
        push("spectral_variation", &self.spectral_variation);
        push("bapat_ratio", &self.bapat_ratio);
        push("lindqvist_lower", &self.lindqvist_lower);
        push("lindqvist_additive", &self.lindqvist_additive);
        if let (true, Some(v)) = (self.operator_norm.valid, self.operator_norm.value) {
            out.push(("operator_norm", v));
        }
        out
    }

    /// Names of valid bounds that fall below the actual error by more than `tol`.
    pub fn violations(&self, tol: f64) -> Vec<&'static str> {
        self.valid_bounds()
            .into_iter()
            .filter(|(_, v)| *v < self.actual_oriented - tol)
            .map(|(n, _)| n)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn constant(s: usize, v: f64) -> Array2<f64> {
        Array2::from_elem((s, s), v)
    }

    fn diagonal(s: usize, p: f64, q: f64) -> Array2<f64> {
        let mut a = constant(s, q);
        a.diag_mut().fill(p);
        a
    }

    #[test]
    fn actual_error_examples() {
        assert_eq!(actual_error(2.0, 2.0).unwrap(), 0.0);
        let (q, eps, s) = (1.0, 0.01, 7.0);
        let e = actual_error((q + eps) * s, q * s).unwrap();
        assert!((e - (eps / q).ln_1p()).abs() < 1e-14);
        assert!(actual_error(0.0, 1.0).is_err());
    }

    #[test]
    fn identical_matrices_give_zero_everywhere() {
        let a = array![[0.5, 0.2, 0.3], [0.1, 0.7, 0.4], [0.3, 0.3, 0.3]];
        let r = BoundReport::compute(&a.view(), &a.view()).unwrap();
        assert_eq!(r.actual, 0.0);
        assert_eq!(r.direction, Direction::Equal);
        assert_eq!(r.spectral_variation.value, Some(0.0));
        assert!(r.bapat_ratio.value.unwrap().abs() < 1e-15);
        assert!(r.l.unwrap().abs() < 1e-15);
        assert!(r.lindqvist_lower.value.unwrap().abs() < 1e-15);
        assert!(r.lindqvist_additive.value.unwrap().abs() < 1e-15);
        assert!(r.condition_11.unwrap().holds);
        assert_eq!(r.normal_matrix.value, 0.0);
    }

    #[test]
    fn constant_family_ratio_bound_is_exact() {
        for s in [2usize, 3, 9, 30] {
            let a = constant(s, 1.01);
            let b = constant(s, 1.0);
            let r = BoundReport::compute(&a.view(), &b.view()).unwrap();
            assert!((r.bapat_ratio.value.unwrap() - r.actual).abs() < 1e-12);
            assert!(r.orderings.lemma2.holds.unwrap());
        }
    }

    #[test]
    fn diagonal_only_perturbation_collapses_l() {
        let a = array![[2.0, 1.0, 0.5], [0.3, 1.0, 0.2], [0.4, 0.6, 1.5]];
        let mut b = a.clone();
        b.diag_mut().assign(&array![1.0, 0.8, 1.2]);
        let pair = perron_pair(&a.view(), Normalization::Biorthogonal).unwrap();
        let x = pair.left_vec();
        let y = pair.right_vec();
        let l = lindqvist_quantity(&a.view(), &b.view(), &x.view(), &y.view()).unwrap();
        let expected: f64 = (0..3).map(|i| x[i] * y[i] * (a[[i, i]] - b[[i, i]])).sum();
        assert!((l - expected).abs() < 1e-15);
        let r = BoundReport::compute(&a.view(), &b.view()).unwrap();
        assert!(r.hypotheses.offdiag_match && r.hypotheses.diag_differs);
        assert!(r.orderings.lemma4.applicable && r.orderings.lemma4.holds.unwrap());
    }

    #[test]
    fn condition_11_fails_when_b_collapses() {
        let a = array![[1.0, 2.0], [3.0, 1.0]];
        let b = a.mapv(|v| v * 1e-6);
        let r = BoundReport::compute(&a.view(), &b.view()).unwrap();
        assert!(!r.condition_11.unwrap().holds);
        assert!(!r.lindqvist_lower.valid);
        assert!(r.lindqvist_lower.value.is_none());
        // The additive form does not need condition 11.
        assert!(r.lindqvist_additive.valid);
    }

    #[test]
    fn lemma3_setting() {
        let (s, p, q) = (6, 1.8, 1.0);
        let mut a = constant(s, p);
        a.diag_mut().fill(q);
        let b = constant(s, q);
        let r = BoundReport::compute(&a.view(), &b.view()).unwrap();
        assert!(r.condition_11.unwrap().holds);
        assert!(r.hypotheses.diag_match);
        assert!(r.orderings.lemma3.applicable && r.orderings.lemma3.holds.unwrap());
    }

    #[test]
    fn zero_entry_in_b_makes_ratio_inapplicable() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let b = array![[1.0, 0.0], [1.0, 0.5]];
        let r = BoundReport::compute(&a.view(), &b.view()).unwrap();
        assert!(!r.bapat_ratio.valid);
        assert!(r.bapat_ratio.note.as_deref().unwrap().contains("b[0][1]"));
        assert!(!r.lindqvist_lower.valid);
        assert!(r.spectral_variation.valid && r.operator_norm.valid);
    }

    #[test]
    fn swapped_orientation() {
        let a = constant(3, 1.0);
        let b = constant(3, 1.2);
        let r = BoundReport::compute(&a.view(), &b.view()).unwrap();
        assert_eq!(r.direction, Direction::MuGreater);
        assert!(r.actual < 0.0);
        assert!((r.bapat_ratio.value.unwrap() - r.actual_oriented).abs() < 1e-12);
        assert!(r.violations(SOUNDNESS_TOL).is_empty());
    }

    #[test]
    fn operator_bound_with_equal_column_sums_has_alpha_s() {
        let s = 8;
        let a = diagonal(s, 1.3, 1.0);
        let b = constant(s, 1.0);
        let ob = operator_norm_bound(&a.view(), &b.view(), s as f64).unwrap();
        assert!((ob.alpha - s as f64).abs() < 1e-10);
        assert!((ob.value - 1.3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn operator_bound_rejects_reducible() {
        let a = array![[1.0, 0.0], [0.3, 0.7]];
        assert!(matches!(
            operator_norm_bound(&a.view(), &a.view(), 1.0),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn normal_gap_symmetric_constant_is_tight() {
        let s = 5;
        let a = constant(s, 1.1);
        let b = constant(s, 1.0);
        let g = normal_matrix_gap(&a.view(), &b.view()).unwrap();
        assert!(g.normal);
        assert!((g.value - 0.5).abs() < 1e-12);
        assert!((g.eigen_gap.unwrap() - 0.5).abs() < 1e-12);
        let g = normal_matrix_gap(&a.view(), &a.view()).unwrap();
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn spectral_bound_handles_huge_ratios() {
        let a = constant(2, 1e300);
        let b = constant(2, 1e-300);
        let v = spectral_variation_bound(&a.view(), &b.view(), 2e-300).unwrap();
        assert!(v.is_finite() && v > 1000.0);
    }
}
