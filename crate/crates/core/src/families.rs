//! Parametric example matrices whose bounds have closed-form large-`s` limits.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExampleFamily {
    /// `A` all `p`, `B` all `q`.
    Constant { p: f64, q: f64 },
    /// `A` with diagonal `p` and off-diagonal `q`, `B` all `q`.
    Diagonal { p: f64, q: f64 },
    /// `A` with `p` at `(1,1)` and `q` elsewhere, `B` all `q`.
    Corner { p: f64, q: f64 },
    /// Diagonal `A` against `B` all `q'`.
    Primed { p: f64, q: f64, qprime: f64 },
    /// Superdiagonal ones against the same matrix with `ε` in the bottom-left corner.
    Shift { eps: f64 },
}

impl ExampleFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ExampleFamily::Constant { .. } => "constant",
            ExampleFamily::Diagonal { .. } => "diagonal",
            ExampleFamily::Corner { .. } => "corner",
            ExampleFamily::Primed { .. } => "primed",
            ExampleFamily::Shift { .. } => "shift",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ExampleFamily::Constant { p, q } | ExampleFamily::Diagonal { p, q } | ExampleFamily::Corner { p, q } => {
                p > q && q > 0.0 && p.is_finite()
            }
            ExampleFamily::Primed { p, q, qprime } => {
                p > q && q > 0.0 && qprime > q && p.is_finite() && qprime.is_finite()
            }
            ExampleFamily::Shift { eps } => eps > 0.0 && eps < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "{self:?} violates the family's parameter constraints"
            )))
        }
    }
}

/// Matrix pair produced by a family, with `A` the matrix whose eigenvalue is `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExamplePair {
    pub family: ExampleFamily,
    pub a: Array2<f64>,
    pub b: Array2<f64>,
}

impl ExamplePair {
    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    /// Row-normalized chain with `C∘P = A`, or `None` when `A` has an empty row.
    pub fn companion_chain(&self) -> Option<ChainSpec> {
        ChainSpec::from_multiplicative(&self.a.view()).ok()
    }
}

pub fn generate_example(family: ExampleFamily, s: usize) -> Result<ExamplePair> {
    family.validate()?;
    if s < 2 {
        return Err(Error::Validation(format!("family size must be at least 2, got {s}")));
    }
    let diagonal = |p: f64, q: f64| {
        let mut a = Array2::from_elem((s, s), q);
        a.diag_mut().fill(p);
        a
    };
    let (a, b) = match family {
        ExampleFamily::Constant { p, q } => (Array2::from_elem((s, s), p), Array2::from_elem((s, s), q)),
        ExampleFamily::Diagonal { p, q } => (diagonal(p, q), Array2::from_elem((s, s), q)),
        ExampleFamily::Corner { p, q } => {
            let mut a = Array2::from_elem((s, s), q);
            a[[0, 0]] = p;
            (a, Array2::from_elem((s, s), q))
        }
        ExampleFamily::Primed { p, q, qprime } => (diagonal(p, q), Array2::from_elem((s, s), qprime)),
        ExampleFamily::Shift { eps } => {
            let mut a = Array2::zeros((s, s));
            for i in 0..s - 1 {
                a[[i, i + 1]] = 1.0;
            }
            let mut b = a.clone();
            b[[s - 1, 0]] = eps;
            (a, b)
        }
    };
    Ok(ExamplePair { family, a, b })
}

/// Closed-form values for a family at size `s`; `None` where no closed form is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyAsymptotics {
    pub lambda: f64,
    pub mu: f64,
    /// `|λ − μ|`
    pub eigen_gap: f64,
    /// `ln(λ/μ)` when both are positive.
    pub actual: Option<f64>,
    /// Spectral variation bound at this `s` under the induced 1-norm.
    pub spectral_variation: Option<f64>,
    /// Its `s → ∞` limit.
    pub spectral_variation_limit: Option<f64>,
    pub operator_norm: Option<f64>,
}

pub fn family_asymptotics(family: ExampleFamily, s: usize) -> Result<FamilyAsymptotics> {
    family.validate()?;
    let n = s as f64;
    let variation =
        |na: f64, nb: f64, nd: f64, mu: f64| ((na + nb).powf(1.0 - 1.0 / n) * nd.powf(1.0 / n) / mu).ln_1p();
    let out = match family {
        ExampleFamily::Constant { p, q } => {
            let (lambda, mu) = (p * n, q * n);
            FamilyAsymptotics {
                lambda,
                mu,
                eigen_gap: lambda - mu,
                actual: Some((p / q).ln()),
                spectral_variation: Some(variation(p * n, q * n, (p - q) * n, mu)),
                spectral_variation_limit: Some((2.0 + p / q).ln()),
                // Equal column sums give α = s; ‖A − B‖ = (p − q)s.
                operator_norm: Some((n * (p - q) * n / mu).ln_1p()),
            }
        }
        ExampleFamily::Diagonal { p, q } => {
            let (lambda, mu) = (p + (n - 1.0) * q, q * n);
            FamilyAsymptotics {
                lambda,
                mu,
                eigen_gap: lambda - mu,
                actual: Some((lambda / mu).ln()),
                spectral_variation: Some(variation(lambda, mu, p - q, mu)),
                spectral_variation_limit: Some(3f64.ln()),
                operator_norm: Some((p / q).ln()),
            }
        }
        ExampleFamily::Corner { p, q } => {
            // Perron value of q·J + (p − q)e₁e₁ᵀ: the larger root of
            // t² − (qs + d)t + dq(s − 1) = 0 with d = p − q.
            let d = p - q;
            let tr = q * n + d;
            let lambda = 0.5 * (tr + (tr * tr - 4.0 * d * q * (n - 1.0)).sqrt());
            let mu = q * n;
            FamilyAsymptotics {
                lambda,
                mu,
                eigen_gap: lambda - mu,
                actual: Some((lambda / mu).ln()),
                spectral_variation: Some(variation(mu + d, mu, d, mu)),
                spectral_variation_limit: Some(3f64.ln()),
                operator_norm: None,
            }
        }
        ExampleFamily::Primed { p, q, qprime } => {
            let (lambda, mu) = (p + (n - 1.0) * q, qprime * n);
            let diff = (p - qprime).abs() + (n - 1.0) * (qprime - q);
            FamilyAsymptotics {
                lambda,
                mu,
                eigen_gap: (lambda - mu).abs(),
                actual: Some((lambda / mu).ln()),
                // Bounds are oriented so the smaller radius is the denominator.
                spectral_variation: Some(variation(lambda, mu, diff, lambda.min(mu))),
                spectral_variation_limit: None,
                operator_norm: Some((n * diff / lambda.min(mu)).ln_1p()),
            }
        }
        ExampleFamily::Shift { eps } => {
            let mu = eps.powf(1.0 / n);
            FamilyAsymptotics {
                lambda: 0.0,
                mu,
                eigen_gap: mu,
                actual: None,
                spectral_variation: None,
                spectral_variation_limit: None,
                operator_norm: None,
            }
        }
    };
    Ok(out)
}
