//! Independent oracles and seeded instance generators shared by the
//! integration and acceptance tests. Nothing here calls the crate's own
//! eigen or projection code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Characteristic polynomial coefficients `c_0..c_n` (monic, `c_0 = 1`) of
/// `det(tI − A) = Σ c_k t^{n−k}` by Faddeev–LeVerrier.
pub fn char_poly(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let am = to_na(a);
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = &am * &m + DMatrix::identity(n, n) * coeffs[k - 1];
        let c = -(&am * &m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    // Polish each root with Newton steps on the polynomial.
    let deriv: Vec<f64> = coeffs[..n]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (n - k) as f64)
        .collect();
    let eval_d = |z: Complex64| deriv.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = eval_d(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

/// Spectral radius from the characteristic-polynomial roots.
pub fn radius_by_char_poly(a: &Array2<f64>) -> f64 {
    poly_roots(&char_poly(a)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral radius from nalgebra's real Schur form.
pub fn radius_by_schur(a: &Array2<f64>) -> f64 {
    to_na(a)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `π` from `(Pᵀ − I)π = 0`, `Σπ = 1` by LU.
pub fn stationary_by_lu(p: &Array2<f64>) -> Vec<f64> {
    let s = p.nrows();
    let mut m = to_na(p).transpose() - DMatrix::identity(s, s);
    for j in 0..s {
        m[(s - 1, j)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::zeros(s);
    rhs[s - 1] = 1.0;
    m.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

/// `Π(C∘P)` with `Π = Φ(ΦᵀDΦ)⁻¹ΦᵀD` formed by explicit inversion.
pub fn projected_by_inverse(gamma: &Array2<f64>, pi: &[f64], phi: &Array2<f64>) -> Array2<f64> {
    let f = to_na(phi);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(pi));
    let gram = f.transpose() * &d * &f;
    let proj = &f * gram.try_inverse().expect("full column rank") * f.transpose() * &d;
    from_na(&(proj * to_na(gamma)))
}

/// Row-stochastic matrix with entries bounded below by `floor / s` before normalization.
pub fn random_positive_transition(rng: &mut ChaCha8Rng, s: usize) -> Array2<f64> {
    let mut p = Array2::from_shape_fn((s, s), |_| rng.random_range(0.05..1.0));
    for mut row in p.rows_mut() {
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    p
}

pub fn random_costs(rng: &mut ChaCha8Rng, s: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((s, s), |_| rng.random_range(-scale..scale))
}

/// `s × m` features with exactly one positive entry per row and every column used.
pub fn random_star_features(rng: &mut ChaCha8Rng, s: usize, m: usize) -> Array2<f64> {
    assert!(m >= 1 && m <= s);
    let mut states: Vec<usize> = (0..s).collect();
    for i in (1..s).rev() {
        let j = rng.random_range(0..=i);
        states.swap(i, j);
    }
    let mut phi = Array2::zeros((s, m));
    for (rank, &state) in states.iter().enumerate() {
        let col = if rank < m { rank } else { rng.random_range(0..m) };
        phi[[state, col]] = rng.random_range(0.5..2.0);
    }
    phi
}

/// Doubly stochastic and strictly positive: a mixture of the uniform kernel and random permutations.
pub fn random_doubly_stochastic(rng: &mut ChaCha8Rng, s: usize, perms: usize) -> Array2<f64> {
    let mut weights: Vec<f64> = (0..=perms).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut p = Array2::from_elem((s, s), weights[0] / s as f64);
    for &w in &weights[1..] {
        let mut perm: Vec<usize> = (0..s).collect();
        for i in (1..s).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        for (i, &j) in perm.iter().enumerate() {
            p[[i, j]] += w;
        }
    }
    p
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
