//! Bounds and comparison conditions written out in chain quantities
//! (`c(i,j)`, `p(j|i)`, `π`, `Φ`) under (⋆) with a positive transition matrix.
//!
//! These are computed from the chain directly, not from `ΠM`, so they serve as
//! an independent route to the generic forms in the parent module.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::ENTRY_MATCH_TOL;
use crate::approximation::FeatureMatrix;
use crate::chain::{ChainSpec, StationaryDistribution};
use crate::{Error, Result};

/// Row-wise ingredients of `δ_ij` under (⋆).
struct StarTerms {
    /// `k(i)`
    k: Vec<usize>,
    /// `φ_k(i)(i)`
    f: Vec<f64>,
    /// `Σ_m φ_k(m)² π_m` per feature column.
    norm: Vec<f64>,
    /// `γ_ij = exp(c(i,j)) p(j|i)` evaluated from the chain.
    gamma: Array2<f64>,
}

impl StarTerms {
    fn new(chain: &ChainSpec, phi: &FeatureMatrix, pi: &StationaryDistribution) -> Result<Self> {
        let k = phi
            .active_columns()
            .ok_or_else(|| Error::Precondition("features must have exactly one positive entry per row".into()))?;
        if !chain.validation().strictly_positive {
            return Err(Error::Precondition(
                "transition matrix must be strictly positive".into(),
            ));
        }
        let s = chain.states();
        if phi.states() != s || pi.pi.len() != s {
            return Err(Error::Dimension(
                "chain, features and distribution disagree on the state count".into(),
            ));
        }
        let m = phi.matrix();
        let f: Vec<f64> = (0..s).map(|i| m[[i, k[i]]]).collect();
        let mut norm = vec![0.0; phi.features()];
        for l in 0..s {
            norm[k[l]] += f[l] * f[l] * pi.pi[l];
        }
        let gamma = Array2::from_shape_fn((s, s), |(i, j)| {
            chain.costs()[[i, j]].exp() * chain.transition()[[i, j]]
        });
        Ok(Self { k, f, norm, gamma })
    }

    /// `Σ_{l: k(l)=col, l ∉ skip} φ_col(l) π_l γ_lj`
    fn mixture(&self, pi: &[f64], col: usize, j: usize, skip: Option<usize>) -> f64 {
        (0..pi.len())
            .filter(|&l| self.k[l] == col && Some(l) != skip)
            .map(|l| self.f[l] * pi[l] * self.gamma[[l, j]])
            .sum()
    }
}

/// The three bounds in expanded chain form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpandedBounds {
    pub ratio: f64,
    pub l: f64,
    pub lower: Option<f64>,
    pub additive: f64,
}

/// Expanded ratio, lower and additive bounds for `A = C∘P`, `B = ΠM`.
///
/// `x`, `y` are the left and right Perron vectors of `C∘P` with `<x, y> = 1`.
pub fn rl_expanded_bounds(
    chain: &ChainSpec,
    phi: &FeatureMatrix,
    pi: &StationaryDistribution,
    x: &ArrayView1<f64>,
    y: &ArrayView1<f64>,
    lambda: f64,
    mu: f64,
) -> Result<ExpandedBounds> {
    let t = StarTerms::new(chain, phi, pi)?;
    let s = chain.states();
    let (c, p) = (chain.costs(), chain.transition());
    let mut ratio = 0.0;
    let mut l = 0.0;
    for i in 0..s {
        let col = t.k[i];
        for j in 0..s {
            let g = t.gamma[[i, j]];
            let log_ratio =
                c[[i, j]] + p[[i, j]].ln() - t.f[i].ln() - t.mixture(&pi.pi, col, j, None).ln() + t.norm[col].ln();
            ratio += g * x[i] * y[j] * log_ratio;
            if i == j {
                let delta_ii = t.f[i] * t.mixture(&pi.pi, col, i, None) / t.norm[col];
                l += x[i] * y[i] * (g - delta_ii);
            } else {
                l += g * x[i] * y[j] * log_ratio;
            }
        }
    }
    ratio /= lambda;
    let lower = (lambda > l).then(|| lambda.ln() - (lambda - l).ln());
    let z = l / mu;
    if !(z > -1.0) {
        return Err(Error::Domain(format!("1 + L/mu = {} is not positive", 1.0 + z)));
    }
    Ok(ExpandedBounds {
        ratio,
        l,
        lower,
        additive: z.ln_1p(),
    })
}

/// Sufficient conditions for the comparison lemmas, evaluated entrywise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlConditions {
    /// `min_i Σ_j γ_ij > L` (expanded validity of the lower bound).
    pub as1: bool,
    /// Diagonal match: `δ_ii = γ_ii` for every `i`.
    pub as2: bool,
    /// Off-diagonal match: `δ_ij = γ_ij` for every `i ≠ j`.
    pub as3: bool,
    /// Some `γ_ii` exceeds every other entry of column `i`.
    pub as5: bool,
    /// Some `γ_ii` is below every other entry of column `i`.
    pub as6: bool,
    pub min_row_sum: f64,
    pub l: f64,
}

fn same(lhs: f64, rhs: f64, scale: f64) -> bool {
    (lhs - rhs).abs() <= ENTRY_MATCH_TOL * scale.max(lhs.abs()).max(rhs.abs())
}

pub fn check_rl_conditions(
    chain: &ChainSpec,
    phi: &FeatureMatrix,
    pi: &StationaryDistribution,
    x: &ArrayView1<f64>,
    y: &ArrayView1<f64>,
    lambda: f64,
    mu: f64,
) -> Result<RlConditions> {
    let t = StarTerms::new(chain, phi, pi)?;
    let s = chain.states();
    let mut as2 = true;
    let mut as3 = true;
    for i in 0..s {
        let col = t.k[i];
        let reduced_norm = t.norm[col] - t.f[i] * t.f[i] * pi.pi[i];
        for j in 0..s {
            let lhs = t.gamma[[i, j]] * reduced_norm;
            let rhs = t.f[i] * t.mixture(&pi.pi, col, j, Some(i));
            let ok = same(lhs, rhs, t.gamma[[i, j]] * t.norm[col]);
            if i == j {
                as2 &= ok;
            } else {
                as3 &= ok;
            }
        }
    }
    let gamma = &t.gamma;
    let column_others = |i: usize| (0..s).filter(move |&l| l != i).map(move |l| gamma[[l, i]]);
    let as5 = (0..s).any(|i| t.gamma[[i, i]] > column_others(i).fold(f64::NEG_INFINITY, f64::max));
    let as6 = (0..s).any(|i| t.gamma[[i, i]] < column_others(i).fold(f64::INFINITY, f64::min));
    let min_row_sum = t
        .gamma
        .rows()
        .into_iter()
        .map(|r| r.sum())
        .fold(f64::INFINITY, f64::min);
    let expanded = rl_expanded_bounds(chain, phi, pi, x, y, lambda, mu)?;
    Ok(RlConditions {
        as1: min_row_sum > expanded.l,
        as2,
        as3,
        as5,
        as6,
        min_row_sum,
        l: expanded.l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximation::projected_system;
    use crate::chain::stationary_distribution;
    use crate::spectral::{perron_pair, Normalization};
    use ndarray::array;

    #[test]
    fn identity_features_match_everything() {
        let p = array![[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.4, 0.4, 0.2]];
        let c = array![[0.1, -0.2, 0.4], [0.3, 0.0, -0.1], [0.2, 0.5, 0.1]];
        let chain = ChainSpec::new(p, c, 0).unwrap();
        let phi = FeatureMatrix::identity(3);
        let sys = projected_system(&chain, &phi).unwrap();
        let pair = perron_pair(&sys.gamma.view(), Normalization::Biorthogonal).unwrap();
        let (x, y) = (pair.left_vec(), pair.right_vec());
        let cond = check_rl_conditions(&chain, &phi, &sys.pi, &x.view(), &y.view(), pair.value, sys.mu).unwrap();
        assert!(cond.as2 && cond.as3);
        let e = rl_expanded_bounds(&chain, &phi, &sys.pi, &x.view(), &y.view(), pair.value, sys.mu).unwrap();
        assert!(e.ratio.abs() < 1e-14 && e.l.abs() < 1e-14 && e.additive.abs() < 1e-14);
    }

    #[test]
    fn column_constant_gamma_satisfies_offdiagonal_match() {
        // p(j|i) ∝ w_j exp(-c(i,j)); the row normalizer is folded back into the
        // costs so every column of γ is constant.
        let w = [0.2, 0.5, 0.3];
        let c = array![[0.0, 0.1, 0.2], [0.3, 0.0, 0.1], [0.2, 0.4, 0.0]];
        let p = ndarray::Array2::from_shape_fn((3, 3), |(i, j)| w[j] * f64::exp(-c[[i, j]]));
        let mut p_norm = p.clone();
        let mut c_norm = c.clone();
        for i in 0..3 {
            let sum: f64 = p.row(i).sum();
            p_norm.row_mut(i).mapv_inplace(|v| v / sum);
            c_norm.row_mut(i).mapv_inplace(|v| v + sum.ln());
        }
        let chain = ChainSpec::new(p_norm, c_norm, 0).unwrap();
        let g = crate::chain::multiplicative_matrix(&chain).unwrap().entries;
        for j in 0..3 {
            assert!((g[[0, j]] - g[[1, j]]).abs() < 1e-14 && (g[[0, j]] - g[[2, j]]).abs() < 1e-14);
        }
        let pi = stationary_distribution(&chain).unwrap();
        let phi = FeatureMatrix::constant(3);
        let pair = perron_pair(&g.view(), Normalization::Biorthogonal).unwrap();
        let sys = projected_system(&chain, &phi).unwrap();
        let (x, y) = (pair.left_vec(), pair.right_vec());
        let cond = check_rl_conditions(&chain, &phi, &pi, &x.view(), &y.view(), pair.value, sys.mu).unwrap();
        assert!(cond.as3 && cond.as2);
    }

    #[test]
    fn dominant_diagonal_sets_as5() {
        let p = array![[0.8, 0.1, 0.1], [0.2, 0.5, 0.3], [0.3, 0.3, 0.4]];
        let chain = ChainSpec::new(p, ndarray::Array2::zeros((3, 3)), 0).unwrap();
        let phi = FeatureMatrix::constant(3);
        let sys = projected_system(&chain, &phi).unwrap();
        let pair = perron_pair(&sys.gamma.view(), Normalization::Biorthogonal).unwrap();
        let (x, y) = (pair.left_vec(), pair.right_vec());
        let cond = check_rl_conditions(&chain, &phi, &sys.pi, &x.view(), &y.view(), pair.value, sys.mu).unwrap();
        assert!(cond.as5);
        assert!(!cond.as2);
    }

    #[test]
    fn requires_positive_chain() {
        let p = array![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
        let chain = ChainSpec::new(p, ndarray::Array2::zeros((3, 3)), 0).unwrap();
        let pi = stationary_distribution(&chain).unwrap();
        let v = ndarray::Array1::from_elem(3, 1.0 / 3.0_f64.sqrt());
        assert!(matches!(
            rl_expanded_bounds(&chain, &FeatureMatrix::constant(3), &pi, &v.view(), &v.view(), 1.0, 1.0),
            Err(Error::Precondition(_))
        ));
    }
}
