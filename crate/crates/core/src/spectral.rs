//! Perron–Frobenius machinery and the norms used by the bounds.
//!
//! Leading eigenpairs come from power iteration on `A/m + ρI`, where `m` is the
//! largest entry of `A` and `ρ = max_i a_ii/m + 1`. The shift makes every
//! irreducible matrix primitive, so periodic matrices converge too, and the
//! eigenvectors are those of `A`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::linalg::{
    ensure_finite, ensure_square, is_irreducible, is_nonnegative, l1, positive_digraph, principal_submatrix,
    solve_linear, strongly_connected_components,
};
use crate::{Error, Result};

/// Successive-iterate tolerance (ℓ1) for power iteration.
pub const POWER_TOL: f64 = 1e-13;
/// Iteration cap for power iteration.
pub const POWER_MAX_ITER: usize = 1_000_000;
/// Relative ℓ1 residual accepted for a Perron eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Both vectors have unit ℓ1 norm.
    L1Unit,
    /// Right vector has unit ℓ1 norm, left vector scaled so that `<x, y> = 1`.
    Biorthogonal,
}

/// Perron value with its positive left and right eigenvectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerronPair {
    pub value: f64,
    /// `A y = r y`
    pub right: Vec<f64>,
    /// `xᵀ A = r xᵀ`
    pub left: Vec<f64>,
    pub normalization: Normalization,
}

impl PerronPair {
    pub fn right_vec(&self) -> Array1<f64> {
        Array1::from(self.right.clone())
    }

    pub fn left_vec(&self) -> Array1<f64> {
        Array1::from(self.left.clone())
    }
}

/// Dominant positive eigenvector of a nonnegative irreducible matrix, ℓ1-normalized,
/// together with its eigenvalue.
fn power_vector(a: &ArrayView2<f64>) -> Result<(f64, Array1<f64>)> {
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |m, &v| m.max(v));
    if scale == 0.0 {
        return Err(Error::Structure("matrix is zero".into()));
    }
    let mut shifted = a.mapv(|v| v / scale);
    let rho = shifted.diag().iter().fold(0.0f64, |m, &v| m.max(v)) + 1.0;
    shifted.diag_mut().mapv_inplace(|d| d + rho);

    let mut v = Array1::from_elem(n, 1.0 / n as f64);
    let mut converged = false;
    let mut last_step = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let mut w = shifted.dot(&v);
        let norm = l1(&w);
        w /= norm;
        last_step = w.iter().zip(v.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        v = w;
        if last_step <= POWER_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical("power iteration hit its iteration cap", last_step));
    }
    // Summing both sides of Av = rv avoids subtracting the shift.
    let av = a.dot(&v);
    let value = av.sum() / v.sum();
    let residual = av.iter().zip(v.iter()).map(|(x, y)| (x - value * y).abs()).sum::<f64>();
    if residual > RESIDUAL_TOL * value.max(f64::MIN_POSITIVE) {
        return Err(Error::numerical("Perron residual above tolerance", residual));
    }
    Ok((value, v))
}

fn check_nonnegative_square(a: &ArrayView2<f64>) -> Result<()> {
    ensure_square(a, "matrix")?;
    ensure_finite(a, "matrix")?;
    if !is_nonnegative(a) {
        return Err(Error::Domain("matrix has negative entries".into()));
    }
    Ok(())
}

/// Perron value and eigenvectors of a nonnegative irreducible matrix.
pub fn perron_pair(a: &ArrayView2<f64>, normalization: Normalization) -> Result<PerronPair> {
    check_nonnegative_square(a)?;
    if !is_irreducible(a) {
        return Err(Error::Structure("matrix is reducible".into()));
    }
    let (value, right) = power_vector(a)?;
    let (_, left) = power_vector(&a.t())?;
    let left = match normalization {
        Normalization::L1Unit => left,
        Normalization::Biorthogonal => biorthogonalize(&left.view(), &right.view())?.0,
    };
    Ok(PerronPair {
        value,
        right: right.to_vec(),
        left: left.to_vec(),
        normalization,
    })
}

/// Rescales `x` so that `<x, y> = 1`.
pub fn biorthogonalize(x: &ArrayView1<f64>, y: &ArrayView1<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "vectors have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let ip = x.dot(y);
    if !(ip > 0.0) || !ip.is_finite() {
        return Err(Error::Domain(format!("inner product {ip} is not positive")));
    }
    Ok((x.mapv(|v| v / ip), y.to_owned()))
}

/// Spectral radius of a nonnegative matrix, reducible or not.
///
/// The spectrum of a nonnegative matrix is the union of the spectra of the
/// diagonal blocks of its Frobenius normal form, so the radius is the largest
/// Perron value over the strongly connected components (a trivial component
/// contributes its diagonal entry).
pub fn spectral_radius_nonnegative(a: &ArrayView2<f64>) -> Result<f64> {
    check_nonnegative_square(a)?;
    let comps = strongly_connected_components(&positive_digraph(a));
    let mut radius = 0.0f64;
    for comp in comps {
        let r = if comp.len() == 1 {
            a[[comp[0], comp[0]]]
        } else {
            let block = principal_submatrix(a, &comp);
            power_vector(&block.view())?.0
        };
        radius = radius.max(r);
    }
    Ok(radius)
}

/// ℓ1-induced operator norm: the largest absolute column sum.
pub fn induced_one_norm(a: &ArrayView2<f64>) -> Result<f64> {
    ensure_finite(a, "matrix")?;
    Ok(a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Solves `G X = rhs` for a symmetric positive-definite Gram matrix.
///
/// Fails with a rank error when `G` is singular or indefinite, which for a
/// weighted feature Gram matrix means the feature columns are dependent.
pub fn solve_gram(g: &ArrayView2<f64>, rhs: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let m = ensure_square(g, "Gram matrix")?;
    ensure_finite(g, "Gram matrix")?;
    let scale = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for i in 0..m {
        for j in (i + 1)..m {
            if (g[[i, j]] - g[[j, i]]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::Domain(format!("Gram matrix not symmetric at ({i},{j})")));
            }
        }
    }
    check_positive_definite(g, scale)?;
    let x = solve_linear(g, rhs)?;
    let resid = (&g.dot(&x) - rhs).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let rhs_scale = rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if resid > 1e-10 * rhs_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::numerical("Gram solve residual above tolerance", resid));
    }
    Ok(x)
}

/// Cholesky pass used only to detect a non-positive pivot.
fn check_positive_definite(g: &ArrayView2<f64>, scale: f64) -> Result<()> {
    let m = g.nrows();
    let mut l = Array2::<f64>::zeros((m, m));
    for j in 0..m {
        let d = g[[j, j]] - (0..j).map(|k| l[[j, k]] * l[[j, k]]).sum::<f64>();
        if !(d > 1e-14 * scale) {
            return Err(Error::Rank(format!(
                "Gram matrix is singular or indefinite (pivot {j} = {d:e})"
            )));
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..m {
            let s = g[[i, j]] - (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum::<f64>();
            l[[i, j]] = s / d;
        }
    }
    Ok(())
}

/// Row-sum bracket `min_i Σ_j a_ij ≤ r(A) ≤ max_i Σ_j a_ij`.
pub fn row_sum_bracket(a: &ArrayView2<f64>) -> (f64, f64) {
    a.rows()
        .into_iter()
        .map(|r| r.sum())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)))
}

/// `AAᵀ = AᵀA` entrywise within `tol` relative to the largest entry of `AAᵀ`.
pub fn is_normal(a: &ArrayView2<f64>, tol: f64) -> bool {
    let aat = a.dot(&a.t());
    let ata = a.t().dot(a);
    let scale = aat.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    crate::linalg::max_abs_diff(&aat.view(), &ata.view()) <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn symmetric_circulant() {
        let a = array![[2.0, 1.0], [1.0, 2.0]];
        let p = perron_pair(&a.view(), Normalization::L1Unit).unwrap();
        assert!((p.value - 3.0).abs() < 1e-14);
        for v in p.right.iter().chain(p.left.iter()) {
            assert!((v - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_matrix_value_is_ps() {
        for s in [2usize, 7, 40] {
            let a = Array2::from_elem((s, s), 0.3);
            let p = perron_pair(&a.view(), Normalization::Biorthogonal).unwrap();
            assert!((p.value - 0.3 * s as f64).abs() < 1e-12);
            let ip: f64 = p.left.iter().zip(&p.right).map(|(x, y)| x * y).sum();
            assert!((ip - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_irreducible_matrix_converges() {
        let a = array![[0.0, 2.0], [0.5, 0.0]];
        let p = perron_pair(&a.view(), Normalization::L1Unit).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reducible_matrix_is_a_structure_error() {
        let a = array![[1.0, 0.0], [0.3, 0.7]];
        assert!(matches!(
            perron_pair(&a.view(), Normalization::L1Unit),
            Err(Error::Structure(_))
        ));
        assert!((spectral_radius_nonnegative(&a.view()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nilpotent_shift_has_zero_radius() {
        let mut a = Array2::zeros((5, 5));
        for i in 0..4 {
            a[[i, i + 1]] = 1.0;
        }
        assert_eq!(spectral_radius_nonnegative(&a.view()).unwrap(), 0.0);
    }

    #[test]
    fn biorthogonalize_examples() {
        let (x, _) = biorthogonalize(&array![1.0, 1.0].view(), &array![1.0, 1.0].view()).unwrap();
        assert_eq!(x.to_vec(), vec![0.5, 0.5]);
        let (x, _) = biorthogonalize(&array![2.0, 0.5].view(), &array![1.0, 2.0].view()).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 6.0).abs() < 1e-15);
        assert!(matches!(
            biorthogonalize(&array![1.0, 0.0].view(), &array![0.0, 1.0].view()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn induced_norm_examples() {
        let s = 6;
        let a = Array2::from_elem((s, s), 1.25);
        assert!((induced_one_norm(&a.view()).unwrap() - 7.5).abs() < 1e-14);
        assert_eq!(induced_one_norm(&Array2::eye(4).view()).unwrap(), 1.0);
        let b = Array2::from_elem((s, s), 1.0);
        assert!((induced_one_norm(&(&a - &b).view()).unwrap() - 1.5).abs() < 1e-14);
        let bad = array![[1.0, f64::NAN]];
        assert!(induced_one_norm(&bad.view()).is_err());
    }

    #[test]
    fn gram_examples() {
        let rhs = array![[1.0, 2.0], [3.0, 4.0]];
        let x = solve_gram(&Array2::eye(2).view(), &rhs.view()).unwrap();
        assert_eq!(x, rhs);
        let x = solve_gram(&array![[2.0, 0.0], [0.0, 4.0]].view(), &array![[2.0], [4.0]].view()).unwrap();
        assert!((x[[0, 0]] - 1.0).abs() < 1e-15 && (x[[1, 0]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_or_indefinite_gram_is_rank_error() {
        let rhs = array![[1.0], [1.0]];
        let singular = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(solve_gram(&singular.view(), &rhs.view()), Err(Error::Rank(_))));
        let indefinite = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(
            solve_gram(&indefinite.view(), &rhs.view()),
            Err(Error::Rank(_))
        ));
    }
}
