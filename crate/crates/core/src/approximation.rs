//! Linear function approximation: feature checks, the D-weighted projection
//! `Π = Φ(ΦᵀDΦ)⁻¹ΦᵀD`, the projected matrix `Q = Π(C∘P)` and its Perron value `μ`.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::chain::{multiplicative_matrix, stationary_distribution, ChainSpec, StationaryDistribution};
use crate::linalg::{ensure_finite, is_irreducible};
use crate::spectral::{perron_pair, solve_gram, spectral_radius_nonnegative, Normalization, PerronPair};
use crate::{Error, Result};

/// Relative tolerance for column orthogonality.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Entrywise tolerance for `ΦΦᵀ = D⁻¹`.
pub const TD_CONDITION_TOL: f64 = 1e-10;
/// Negative entries of `Q` smaller than this (relative to its largest entry)
/// are rounding noise and are set to zero.
const NEGATIVE_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureFlags {
    /// Nonnegative entries and mutually orthogonal columns.
    pub dagger: bool,
    /// Every row has exactly one positive entry, all others zero.
    pub star: bool,
    /// `ΦΦᵀ = D⁻¹`; `None` until evaluated against a stationary distribution.
    pub td_condition: Option<bool>,
}

/// The `s × M` basis matrix with row `i` holding the features `φ(i)`.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    phi: Array2<f64>,
    flags: FeatureFlags,
}

impl FeatureMatrix {
    pub fn new(phi: Array2<f64>) -> Result<Self> {
        let (s, m) = phi.dim();
        if s == 0 || m == 0 {
            return Err(Error::Dimension(format!("feature matrix is {s}x{m}")));
        }
        ensure_finite(&phi.view(), "Phi")?;
        let flags = check_assumptions(&phi.view());
        Ok(Self { phi, flags })
    }

    pub fn identity(s: usize) -> Self {
        Self::new(Array2::eye(s)).expect("identity features are valid")
    }

    /// Single feature equal to one in every state.
    pub fn constant(s: usize) -> Self {
        Self::new(Array2::ones((s, 1))).expect("constant feature is valid")
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.phi
    }

    pub fn states(&self) -> usize {
        self.phi.nrows()
    }

    pub fn features(&self) -> usize {
        self.phi.ncols()
    }

    pub fn flags(&self) -> FeatureFlags {
        self.flags
    }

    /// Flags with the TD condition evaluated against `pi`.
    pub fn assess(&self, pi: &StationaryDistribution) -> FeatureFlags {
        FeatureFlags {
            td_condition: Some(check_td_condition(self, pi)),
            ..self.flags
        }
    }

    /// Column holding the positive entry of each row, when (⋆) holds.
    pub fn active_columns(&self) -> Option<Vec<usize>> {
        if !self.flags.star {
            return None;
        }
        Some(
            self.phi
                .rows()
                .into_iter()
                .map(|row| row.iter().position(|&v| v > 0.0).expect("star row"))
                .collect(),
        )
    }
}

pub fn check_assumptions(phi: &ArrayView2<f64>) -> FeatureFlags {
    let nonnegative = phi.iter().all(|&v| v >= 0.0);
    let cols: Vec<_> = phi.axis_iter(Axis(1)).collect();
    let mut orthogonal = true;
    'outer: for a in 0..cols.len() {
        for b in (a + 1)..cols.len() {
            let ip = cols[a].dot(&cols[b]);
            let scale = cols[a].dot(&cols[a]).sqrt() * cols[b].dot(&cols[b]).sqrt();
            if ip.abs() > ORTHOGONALITY_TOL * scale {
                orthogonal = false;
                break 'outer;
            }
        }
    }
    let star = phi
        .rows()
        .into_iter()
        .all(|row| row.iter().filter(|&&v| v > 0.0).count() == 1 && row.iter().all(|&v| v >= 0.0));
    FeatureFlags {
        dagger: nonnegative && orthogonal,
        star,
        td_condition: None,
    }
}

/// `ΦΦᵀ = diag(1/π_i)` within [`TD_CONDITION_TOL`] entrywise.
pub fn check_td_condition(phi: &FeatureMatrix, pi: &StationaryDistribution) -> bool {
    if phi.states() != pi.pi.len() {
        return false;
    }
    let outer = phi.phi.dot(&phi.phi.t());
    outer.indexed_iter().all(|((i, j), &v)| {
        let target = if i == j { 1.0 / pi.pi[i] } else { 0.0 };
        (v - target).abs() <= TD_CONDITION_TOL
    })
}

fn weighted_gram(phi: &ArrayView2<f64>, pi: &[f64]) -> Array2<f64> {
    let mut dphi = phi.to_owned();
    for (mut row, &w) in dphi.rows_mut().into_iter().zip(pi) {
        row *= w;
    }
    phi.t().dot(&dphi)
}

/// Columns that are linearly dependent on earlier ones under the D-weighted
/// inner product.
fn dependent_columns(phi: &ArrayView2<f64>, pi: &[f64]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut dependent = Vec::new();
    for k in 0..phi.ncols() {
        let mut trial = kept.clone();
        trial.push(k);
        let sub = phi.select(Axis(1), &trial);
        let g = weighted_gram(&sub.view(), pi);
        let rhs = Array2::eye(trial.len());
        if solve_gram(&g.view(), &rhs.view()).is_ok() {
            kept = trial;
        } else {
            dependent.push(k);
        }
    }
    dependent
}

/// `Π = Φ(ΦᵀDΦ)⁻¹ΦᵀD`.
pub fn projection(phi: &FeatureMatrix, pi: &StationaryDistribution) -> Result<Array2<f64>> {
    let s = phi.states();
    if pi.pi.len() != s {
        return Err(Error::Dimension(format!(
            "features cover {s} states, distribution has {}",
            pi.pi.len()
        )));
    }
    let g = weighted_gram(&phi.phi.view(), &pi.pi);
    let mut phit_d = phi.phi.t().to_owned();
    for (mut col, &w) in phit_d.columns_mut().into_iter().zip(&pi.pi) {
        col *= w;
    }
    let coef = match solve_gram(&g.view(), &phit_d.view()) {
        Ok(c) => c,
        Err(Error::Rank(msg)) => {
            let dep = dependent_columns(&phi.phi.view(), &pi.pi);
            return Err(Error::Rank(format!(
                "feature columns {dep:?} are linearly dependent ({msg})"
            )));
        }
        Err(e) => return Err(e),
    };
    Ok(phi.phi.dot(&coef))
}

/// The projected system `Q = Π(C∘P)` and its Perron value.
#[derive(Debug, Clone)]
pub struct ProjectedSystem {
    pub pi: StationaryDistribution,
    /// `Π`
    pub projection: Array2<f64>,
    /// `C∘P`
    pub gamma: Array2<f64>,
    /// `Q = ΠM`; its entries are the `δ_ij`.
    pub q: Array2<f64>,
    /// Spectral radius of `Q`.
    pub mu: f64,
    pub irreducible: bool,
    /// Perron pair of `Q` when it is irreducible.
    pub perron: Option<PerronPair>,
    pub warnings: Vec<String>,
}

impl ProjectedSystem {
    pub fn delta(&self) -> &Array2<f64> {
        &self.q
    }
}

pub fn projected_system(chain: &ChainSpec, phi: &FeatureMatrix) -> Result<ProjectedSystem> {
    if phi.states() != chain.states() {
        return Err(Error::Dimension(format!(
            "features cover {} states, chain has {}",
            phi.states(),
            chain.states()
        )));
    }
    let pi = stationary_distribution(chain)?;
    let gamma = multiplicative_matrix(chain)?.entries;
    let proj = projection(phi, &pi)?;
    let mut q = proj.dot(&gamma);
    let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    q.mapv_inplace(|v| {
        if v < 0.0 && -v <= NEGATIVE_NOISE * scale {
            0.0
        } else {
            v
        }
    });
    if let Some(((i, j), v)) = q.indexed_iter().find(|(_, &v)| v < 0.0) {
        return Err(Error::Domain(format!(
            "projected matrix has negative entry Q[{i}][{j}] = {v:e}; features violate nonnegativity/orthogonality"
        )));
    }
    let mut warnings = Vec::new();
    let irreducible = is_irreducible(&q.view());
    let (mu, perron) = if irreducible {
        let pair = perron_pair(&q.view(), Normalization::L1Unit)?;
        (pair.value, Some(pair))
    } else {
        warnings.push(
            "projected matrix is reducible; mu is its spectral radius and the learner limit is not certified"
                .to_string(),
        );
        (spectral_radius_nonnegative(&q.view())?, None)
    };
    if !(mu > 0.0) {
        return Err(Error::Domain("projected matrix has zero spectral radius".into()));
    }
    Ok(ProjectedSystem {
        pi,
        projection: proj,
        gamma,
        q,
        mu,
        irreducible,
        perron,
        warnings,
    })
}

/// Entries of `ΠM` from the row-wise closed form available under (⋆):
/// `δ_ij = φ_k(i)(i) Σ_l φ_k(i)(l) π_l γ_lj / Σ_m φ_k(i)(m)² π_m`.
pub fn delta_closed_form(
    gamma: &ArrayView2<f64>,
    pi: &StationaryDistribution,
    phi: &FeatureMatrix,
) -> Result<Array2<f64>> {
    let k = phi
        .active_columns()
        .ok_or_else(|| Error::Precondition("closed form needs exactly one positive feature per row".into()))?;
    let s = phi.states();
    if gamma.dim() != (s, s) || pi.pi.len() != s {
        return Err(Error::Dimension("gamma, pi and Phi disagree on the state count".into()));
    }
    let f = &phi.phi;
    let m = phi.features();
    // Per-column weighted norm and weighted mixture of γ rows.
    let mut norms = vec![0.0; m];
    let mut mix = Array2::<f64>::zeros((m, s));
    for l in 0..s {
        let col = k[l];
        let w = f[[l, col]] * pi.pi[l];
        norms[col] += f[[l, col]] * w;
        mix.row_mut(col).scaled_add(w, &gamma.row(l));
    }
    Ok(Array2::from_shape_fn((s, s), |(i, j)| {
        f[[i, k[i]]] * mix[[k[i], j]] / norms[k[i]]
    }))
}

/// Single feature `φ_i = x_i / π_i` built from the left Perron vector of `C∘P`;
/// with it the projected Perron value equals `λ`.
pub fn lemma1_features(gamma: &ArrayView2<f64>, pi: &StationaryDistribution) -> Result<FeatureMatrix> {
    let pair = perron_pair(gamma, Normalization::L1Unit)?;
    if pi.pi.len() != pair.left.len() {
        return Err(Error::Dimension("distribution length differs from matrix size".into()));
    }
    if let Some(i) = pi.pi.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Precondition(format!("pi[{i}] is not positive")));
    }
    let col: Vec<f64> = pair.left.iter().zip(&pi.pi).map(|(x, p)| x / p).collect();
    FeatureMatrix::new(Array2::from_shape_vec((col.len(), 1), col).expect("column shape"))
}
