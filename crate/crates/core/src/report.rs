//! Problem documents (JSON in) and analysis reports (JSON out).
//!
//! A document describes a chain (`P`, `c`, optional 1-based `i0`, optional
//! `Phi`), a raw matrix pair (`A`, `B`), or both. Family generators write both:
//! the pair for the generic bounds and a companion chain for the learners.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::approximation::{projected_system, FeatureFlags, FeatureMatrix};
use crate::bounds::{
    check_rl_conditions, normal_matrix_gap, rl_expanded_bounds, zero_error_certificate, BoundReport, ExpandedBounds,
    NormalGap, RlConditions, ZeroErrorCertificate,
};
use crate::chain::{multiplicative_matrix, stationary_distribution, validate_chain, ChainSpec, ChainValidationReport};
use crate::families::{family_asymptotics, ExampleFamily, ExamplePair, FamilyAsymptotics};
use crate::linalg::{from_rows, to_rows};
use crate::spectral::{perron_pair, Normalization};
use crate::{Error, Result};

/// On-disk problem description. Matrices are row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    /// 1-based distinguished state; defaults to the most visited state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i0: Option<usize>,
    #[serde(rename = "Phi", default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<f64>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<ExampleFamily>,
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// Document for a generated family: the pair plus, when `A` has no empty
    /// row, its row-normalized companion chain.
    pub fn from_pair(pair: &ExamplePair) -> Self {
        let mut doc = Self {
            s: Some(pair.states()),
            a: Some(to_rows(&pair.a.view())),
            b: Some(to_rows(&pair.b.view())),
            family: Some(pair.family),
            ..Self::default()
        };
        if let Some(chain) = pair.companion_chain() {
            doc.p = Some(to_rows(&chain.transition().view()));
            doc.c = Some(to_rows(&chain.costs().view()));
            doc.i0 = Some(chain.i0() + 1);
        }
        doc
    }

    pub fn from_chain(chain: &ChainSpec, phi: Option<&FeatureMatrix>) -> Self {
        Self {
            s: Some(chain.states()),
            p: Some(to_rows(&chain.transition().view())),
            c: Some(to_rows(&chain.costs().view())),
            i0: Some(chain.i0() + 1),
            phi: phi.map(|f| to_rows(&f.matrix().view())),
            ..Self::default()
        }
    }

    fn check_size(&self, what: &str, m: &Array2<f64>) -> Result<()> {
        match self.s {
            Some(s) if m.nrows() != s => Err(Error::Schema {
                path: what.into(),
                message: format!("has {} rows but s = {s}", m.nrows()),
            }),
            _ => Ok(()),
        }
    }

    fn matrix(&self, what: &str, rows: &Option<Vec<Vec<f64>>>) -> Result<Option<Array2<f64>>> {
        rows.as_ref()
            .map(|r| {
                let m = from_rows(r).map_err(|e| Error::Schema {
                    path: what.into(),
                    message: e.to_string(),
                })?;
                self.check_size(what, &m)?;
                Ok(m)
            })
            .transpose()
    }

    /// Raw transition matrix, for validation reporting before construction.
    pub fn transition(&self) -> Result<Option<Array2<f64>>> {
        self.matrix("P", &self.p)
    }

    /// The chain described by `P`/`c`.
    pub fn chain(&self) -> Result<Option<ChainSpec>> {
        let p = self.matrix("P", &self.p)?;
        let c = self.matrix("c", &self.c)?;
        let chain = match (p, c) {
            (Some(p), Some(c)) => Some(match self.i0 {
                Some(0) => {
                    return Err(Error::Schema {
                        path: "i0".into(),
                        message: "states are numbered from 1".into(),
                    })
                }
                Some(i0) => ChainSpec::new(p, c, i0 - 1)?,
                None => ChainSpec::with_default_i0(p, c)?,
            }),
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::Schema {
                    path: if self.p.is_some() { "c" } else { "P" }.into(),
                    message: "P and c must be given together".into(),
                })
            }
            (None, None) => None,
        };
        Ok(chain)
    }

    /// The chain for simulation: `P`/`c` when present, otherwise the
    /// row-normalized companion of `A`.
    pub fn learner_chain(&self) -> Result<Option<ChainSpec>> {
        if let Some(chain) = self.chain()? {
            return Ok(Some(chain));
        }
        match self.matrix("A", &self.a)? {
            Some(a) => Ok(Some(ChainSpec::from_multiplicative(&a.view())?)),
            None => Ok(None),
        }
    }

    pub fn features(&self) -> Result<Option<FeatureMatrix>> {
        self.matrix("Phi", &self.phi)?.map(FeatureMatrix::new).transpose()
    }

    pub fn pair(&self) -> Result<Option<(Array2<f64>, Array2<f64>)>> {
        match (self.matrix("A", &self.a)?, self.matrix("B", &self.b)?) {
            (Some(a), Some(b)) => Ok(Some((a, b))),
            (None, None) => Ok(None),
            _ => Err(Error::Schema {
                path: if self.a.is_some() { "B" } else { "A" }.into(),
                message: "A and B must be given together".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub states: usize,
    /// 1-based.
    pub i0: usize,
    pub validation: ChainValidationReport,
    pub stationary: Vec<f64>,
    /// `λ`, Perron value of `C∘P`.
    pub lambda: f64,
    /// `ln λ`
    pub risk_sensitive_cost: f64,
    /// Right Perron vector `V`, ℓ1-normalized.
    pub v: Vec<f64>,
    /// `Σ π_i c(i,i)`
    pub average_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSummary {
    pub features: usize,
    pub flags: FeatureFlags,
    pub mu: f64,
    /// `ln μ`
    pub approximate_cost: f64,
    pub q_irreducible: bool,
    pub bounds: BoundReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ZeroErrorCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rl_conditions: Option<RlConditions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expanded: Option<ExpandedBounds>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    /// Absent when either matrix has zero spectral radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundReport>,
    pub normal_matrix: NormalGap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximation: Option<ApproximationSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<ExampleFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotics: Option<FamilyAsymptotics>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Validation failure with the offending flags, for exit-code mapping.
pub fn validation_failures(doc: &ProblemDocument) -> Result<Option<ChainValidationReport>> {
    match doc.transition()? {
        Some(p) => {
            let report = validate_chain(&p.view())?;
            Ok((!report.is_valid()).then_some(report))
        }
        None => Ok(None),
    }
}

pub fn analyze_chain(chain: &ChainSpec) -> Result<ChainSummary> {
    let pi = stationary_distribution(chain)?;
    let gamma = multiplicative_matrix(chain)?.entries;
    let pair = perron_pair(&gamma.view(), Normalization::L1Unit)?;
    let average_cost = pi.pi.iter().zip(chain.state_costs()).map(|(p, c)| p * c).sum();
    Ok(ChainSummary {
        states: chain.states(),
        i0: chain.i0() + 1,
        validation: chain.validation(),
        stationary: pi.pi.clone(),
        lambda: pair.value,
        risk_sensitive_cost: pair.value.ln(),
        v: pair.right,
        average_cost,
    })
}

pub fn analyze_approximation(chain: &ChainSpec, phi: &FeatureMatrix) -> Result<ApproximationSummary> {
    let sys = projected_system(chain, phi)?;
    let flags = phi.assess(&sys.pi);
    let bounds = BoundReport::compute(&sys.gamma.view(), &sys.q.view())?;
    let gamma_pair = perron_pair(&sys.gamma.view(), Normalization::Biorthogonal)?;
    let (x, y) = (gamma_pair.left_vec(), gamma_pair.right_vec());
    let certificate = if sys.q.iter().all(|&v| v > 0.0) {
        Some(zero_error_certificate(
            &sys.gamma.view(),
            &sys.q.view(),
            &x.view(),
            &y.view(),
        )?)
    } else {
        None
    };
    let (rl_conditions, expanded) = if flags.star && chain.validation().strictly_positive {
        (
            Some(check_rl_conditions(
                chain,
                phi,
                &sys.pi,
                &x.view(),
                &y.view(),
                gamma_pair.value,
                sys.mu,
            )?),
            Some(rl_expanded_bounds(
                chain,
                phi,
                &sys.pi,
                &x.view(),
                &y.view(),
                gamma_pair.value,
                sys.mu,
            )?),
        )
    } else {
        (None, None)
    };
    Ok(ApproximationSummary {
        features: phi.features(),
        flags,
        mu: sys.mu,
        approximate_cost: sys.mu.ln(),
        q_irreducible: sys.irreducible,
        bounds,
        certificate,
        rl_conditions,
        expanded,
        warnings: sys.warnings,
    })
}

pub fn analyze_pair(a: &Array2<f64>, b: &Array2<f64>) -> Result<PairSummary> {
    let normal_matrix = normal_matrix_gap(&a.view(), &b.view())?;
    let (bounds, note) = match BoundReport::compute(&a.view(), &b.view()) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::Domain(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(PairSummary {
        bounds,
        normal_matrix,
        note,
    })
}

/// Runs every analysis the document supports.
pub fn analyze(doc: &ProblemDocument) -> Result<AnalysisReport> {
    let chain = doc.chain()?;
    let phi = doc.features()?;
    let (chain_summary, approximation) = match &chain {
        Some(chain) => {
            let summary = analyze_chain(chain)?;
            let approx = phi.as_ref().map(|f| analyze_approximation(chain, f)).transpose()?;
            (Some(summary), approx)
        }
        None if phi.is_some() => {
            return Err(Error::Schema {
                path: "Phi".into(),
                message: "features need a chain (P and c)".into(),
            })
        }
        None => (None, None),
    };
    let pair = doc.pair()?.map(|(a, b)| analyze_pair(&a, &b)).transpose()?;
    let asymptotics = match (doc.family, doc.s) {
        (Some(f), Some(s)) => Some(family_asymptotics(f, s)?),
        _ => None,
    };
    Ok(AnalysisReport {
        chain: chain_summary,
        approximation,
        pair,
        family: doc.family,
        asymptotics,
    })
}
