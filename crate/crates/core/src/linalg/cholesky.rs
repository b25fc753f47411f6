use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Envelope (profile) Cholesky factorization `P A P^T = L L^T` under a
/// reverse Cuthill-McKee ordering. Fill stays inside the row envelope.
#[derive(Clone, Debug)]
pub struct SparseCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for (j_old, _) in a.row(old) {
                let j = inv[j_old];
                if j < i {
                    first[i] = first[i].min(j);
                } else if i < j {
                    first[j] = first[j].min(i);
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            offset.push(total);
            total += i - first[i] + 1;
        }
        offset.push(total);

        let mut values = vec![0.0; total];
        for old in 0..n {
            let i = inv[old];
            for (j_old, v) in a.row(old) {
                let j = inv[j_old];
                if j <= i {
                    values[offset[i] + j - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = values.split_at_mut(offset[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let row_j = &done[offset[j]..offset[j] + j - fj + 1];
                let k0 = fi.max(fj);
                let s: f64 = (k0..j).map(|k| row_i[k - fi] * row_j[k - fj]).sum();
                row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
            }
            let s: f64 = row_i[..i - fi].iter().map(|x| x * x).sum();
            let d = row_i[i - fi] - s;
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(Self { perm, first, offset, values })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            let s: f64 = (fi..i).map(|k| row[k - fi] * y[k]).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for k in fi..i {
                y[k] -= row[k - fi] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity graph of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree = |i: usize| adj[i].len();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree(i), i)).unwrap();
        let start = pseudo_peripheral(&adj, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree(w), w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Last-level minimum-degree node after repeated breadth-first sweeps.
fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    loop {
        let levels = bfs_levels(adj, node);
        let depth = *levels.iter().flatten().max().unwrap_or(&0);
        if depth <= ecc && ecc > 0 {
            return node;
        }
        ecc = depth;
        let candidate = levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(depth))
            .map(|(i, _)| i)
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap_or(node);
        if candidate == node {
            return node;
        }
        node = candidate;
    }
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let l = level[v].unwrap();
        for &w in &adj[v] {
            if level[w].is_none() {
                level[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random sparse SPD matrix: graph Laplacian plus a positive diagonal.
    fn random_spd(n: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.add(i, i, rng.gen_range(0.1..1.0));
        }
        for _ in 0..3 * n {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            let w = rng.gen_range(0.1..2.0);
            t.add(i, i, w);
            t.add(j, j, w);
            t.add(i, j, -w);
            t.add(j, i, -w);
        }
        t.build()
    }

    #[test]
    fn matches_dense_solve() {
        for seed in 0..5 {
            let a = random_spd(60, seed);
            let b: Vec<f64> = (0..60).map(|i| (i as f64).cos()).collect();
            let x = SparseCholesky::factor(&a).unwrap().solve(&b);
            let dense = a.to_dense().cholesky().unwrap();
            let xd = dense.solve(&nalgebra::DVector::from_vec(b.clone()));
            for i in 0..60 {
                assert!((x[i] - xd[i]).abs() < 1e-10 * (1.0 + xd[i].abs()));
            }
        }
    }

    #[test]
    fn rcm_is_a_permutation_and_shrinks_band() {
        // a path graph numbered badly
        let n = 40;
        let label = |k: usize| (k * 17) % n;
        let mut t = TripletBuilder::new(n, n);
        for k in 0..n {
            t.add(label(k), label(k), 2.0);
            if k + 1 < n {
                t.add(label(k), label(k + 1), -1.0);
                t.add(label(k + 1), label(k), -1.0);
            }
        }
        let a = t.build();
        let mut p = reverse_cuthill_mckee(&a);
        let chol = SparseCholesky::factor(&a).unwrap();
        assert_eq!(chol.envelope_size(), 2 * n - 1);
        p.sort();
        assert_eq!(p, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut t = TripletBuilder::new(2, 2);
        t.add(0, 0, 1.0);
        t.add(1, 1, -1.0);
        assert!(matches!(SparseCholesky::factor(&t.build()), Err(Error::NotPositiveDefinite { .. })));
    }
}
