//! Small dense helpers and graph tests on the positive-entry digraph.

use ndarray::{Array1, Array2, ArrayView2};

use crate::{Error, Result};

/// Builds a dense matrix from row vectors, rejecting ragged input.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, expected {m}",
            r.len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((n, m), flat).map_err(|e| Error::Dimension(e.to_string()))
}

pub fn to_rows(a: &ArrayView2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn ensure_square(a: &ArrayView2<f64>, what: &str) -> Result<usize> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::Dimension(format!("{what} is {n}x{m}, expected square")));
    }
    if n == 0 {
        return Err(Error::Dimension(format!("{what} is empty")));
    }
    Ok(n)
}

pub fn ensure_finite(a: &ArrayView2<f64>, what: &str) -> Result<()> {
    if let Some(((i, j), v)) = a.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Domain(format!("{what}[{i}][{j}] = {v} is not finite")));
    }
    Ok(())
}

pub fn is_nonnegative(a: &ArrayView2<f64>) -> bool {
    a.iter().all(|&v| v >= 0.0)
}

pub fn identity(n: usize) -> Array2<f64> {
    Array2::eye(n)
}

pub fn l1(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Adjacency lists of the digraph with an edge `i -> j` whenever `a[i][j] > 0`.
pub fn positive_digraph(a: &ArrayView2<f64>) -> Vec<Vec<usize>> {
    a.rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// Strongly connected components (Tarjan, iterative). Components are returned
/// in reverse topological order; vertices within a component are sorted.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (vertex, position in its adjacency list)
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = work.last_mut() {
            let v = top.0;
            if top.1 < adj[v].len() {
                let w = adj[v][top.1];
                top.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components
}

pub fn is_irreducible(a: &ArrayView2<f64>) -> bool {
    strongly_connected_components(&positive_digraph(a)).len() == 1
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of an irreducible digraph: the gcd of `level(u) + 1 - level(v)` over
/// all edges, with levels from a BFS rooted at vertex 0.
pub fn period(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut level = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    level[0] = 0;
    queue.push_back(0);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0usize;
    for (u, succ) in adj.iter().enumerate() {
        if level[u] == usize::MAX {
            continue;
        }
        for &v in succ {
            if level[v] == usize::MAX {
                continue;
            }
            let d = (level[u] + 1).abs_diff(level[v]);
            g = gcd(g, d);
        }
    }
    g
}

/// Solves `a x = rhs` by Gaussian elimination with partial pivoting.
/// A pivot below `1e-14` times the largest entry of `a` is reported as a rank error.
pub fn solve_linear(a: &ArrayView2<f64>, rhs: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = ensure_square(a, "coefficient matrix")?;
    if rhs.nrows() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            rhs.nrows()
        )));
    }
    let k = rhs.ncols();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Rank("coefficient matrix is zero".into()));
    }
    let mut m = a.to_owned();
    let mut x = rhs.to_owned();
    for col in 0..n {
        let (piv, best) =
            (col..n)
                .map(|r| (r, m[[r, col]].abs()))
                .fold((col, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= 1e-14 * scale {
            return Err(Error::Rank(format!("pivot {col} vanishes ({best:e})")));
        }
        if piv != col {
            for j in 0..n {
                m.swap([col, j], [piv, j]);
            }
            for j in 0..k {
                x.swap([col, j], [piv, j]);
            }
        }
        let d = m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[[r, j]] -= f * m[[col, j]];
            }
            for j in 0..k {
                x[[r, j]] -= f * x[[col, j]];
            }
        }
    }
    for col in (0..n).rev() {
        for j in 0..k {
            let mut acc = x[[col, j]];
            for c in (col + 1)..n {
                acc -= m[[col, c]] * x[[c, j]];
            }
            x[[col, j]] = acc / m[[col, col]];
        }
    }
    Ok(x)
}

/// Principal submatrix on the given (sorted) index set.
pub fn principal_submatrix(a: &ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| a[[idx[i], idx[j]]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn scc_splits_absorbing_state() {
        let a = array![[1.0, 0.0], [0.3, 0.7]];
        let comps = strongly_connected_components(&positive_digraph(&a.view()));
        assert_eq!(comps.len(), 2);
        assert!(!is_irreducible(&a.view()));
    }

    #[test]
    fn period_of_cycle_and_lazy_cycle() {
        let cycle = array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
        assert_eq!(period(&positive_digraph(&cycle.view())), 3);
        let mut lazy = cycle.clone();
        lazy[[1, 1]] = 0.5;
        lazy[[1, 2]] = 0.5;
        assert_eq!(period(&positive_digraph(&lazy.view())), 1);
        let two = array![
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0]
        ];
        assert_eq!(period(&positive_digraph(&two.view())), 2);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(matches!(
            from_rows(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn deep_chain_does_not_overflow_stack() {
        let n = 20_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        assert_eq!(strongly_connected_components(&adj).len(), 1);
    }
}
