//! Simplicial sparse LDL' factorization with a reverse Cuthill-McKee
//! fill-reducing permutation. Up-looking, elimination-tree based; the
//! numeric phase follows the classic LDL formulation.

use super::{LinAlgError, SparseSymMatrix};

/// Reusable factorization of an SPD matrix: P A P' = L D L' with unit
/// lower-triangular L. Immutable once computed; `solve` takes `&self`
/// and owns its scratch space, so concurrent solves are safe.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// perm[new] = old vertex index.
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
    /// Strictly lower triangle of L in CSC layout; unit diagonal implied.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    l_values: Vec<f64>,
    diag: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(a: &SparseSymMatrix) -> Result<Self, LinAlgError> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(&a.pattern_adjacency());
        let mut perm_inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            perm_inv[old] = new;
        }

        // Permuted matrix in upper-triangle CSC form: column k holds the
        // entries (i, k) with i <= k, rows sorted ascending.
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in a.lower_entries() {
            let (pi, pj) = (perm_inv[i], perm_inv[j]);
            let (r, c) = (pi.min(pj), pi.max(pj));
            cols[c].push((r, v));
        }
        for col in &mut cols {
            col.sort_unstable_by_key(|&(r, _)| r);
        }

        // Symbolic phase: elimination tree and per-column counts.
        let none = usize::MAX;
        let mut parent = vec![none; n];
        let mut flag = vec![none; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &(i0, _) in &cols[k] {
                let mut i = i0;
                while i < k && flag[i] != k {
                    if parent[i] == none {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        let total = col_ptr[n];

        // Numeric phase: up-looking, one row of L per step via a sparse
        // triangular solve against the already-computed columns.
        let mut row_idx = vec![0usize; total];
        let mut l_values = vec![0.0f64; total];
        let mut diag = vec![0.0f64; n];
        let mut y = vec![0.0f64; n];
        let mut pattern = vec![0usize; n];
        let mut used = vec![0usize; n]; // entries filled so far per column
        let mut flag = vec![none; n];

        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for &(i0, v) in &cols[k] {
                if i0 > k {
                    continue;
                }
                y[i0] += v;
                let mut len = 0;
                let mut i = i0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = pattern[len];
                }
            }

            diag[k] = y[k];
            y[k] = 0.0;
            for t in top..n {
                let i = pattern[t];
                let yi = y[i];
                y[i] = 0.0;
                let p2 = col_ptr[i] + used[i];
                for p in col_ptr[i]..p2 {
                    y[row_idx[p]] -= l_values[p] * yi;
                }
                let d_i = diag[i];
                let l_ki = yi / d_i;
                diag[k] -= l_ki * yi;
                row_idx[p2] = k;
                l_values[p2] = l_ki;
                used[i] += 1;
            }
            if diag[k] <= 0.0 || !diag[k].is_finite() {
                return Err(LinAlgError::NotPositiveDefinite {
                    index: perm[k],
                    pivot: diag[k],
                });
            }
        }

        Ok(Self {
            n,
            perm,
            perm_inv,
            col_ptr,
            row_idx,
            l_values,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve A x = b for the matrix this factor was computed from.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinAlgError> {
        if b.len() != self.n {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let mut z: Vec<f64> = (0..self.n).map(|k| b[self.perm[k]]).collect();
        // L y = z
        for j in 0..self.n {
            let yj = z[j];
            if yj != 0.0 {
                for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                    z[self.row_idx[p]] -= self.l_values[p] * yj;
                }
            }
        }
        // D w = y
        for j in 0..self.n {
            z[j] /= self.diag[j];
        }
        // L' x = w
        for j in (0..self.n).rev() {
            let mut acc = z[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc -= self.l_values[p] * z[self.row_idx[p]];
            }
            z[j] = acc;
        }
        let mut x = vec![0.0; self.n];
        for k in 0..self.n {
            x[self.perm[k]] = z[k];
        }
        Ok(x)
    }

    /// The fill-reducing permutation (new index -> old index).
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn permutation_inverse(&self) -> &[usize] {
        &self.perm_inv
    }

    /// Nonzeros in the strictly lower triangle of L.
    pub fn fill_nnz(&self) -> usize {
        self.l_values.len()
    }
}

/// Reverse Cuthill-McKee ordering of an undirected graph given as sorted
/// adjacency lists. Returns perm with perm[new] = old.
fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];

    // Components in index order keeps the permutation deterministic.
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(adj, start);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(root);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| (adj[u].len(), u));
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }

    order.reverse();
    order
}

/// George-Liu pseudo-peripheral node: walk to a min-degree node in the
/// deepest BFS level until the eccentricity stops growing.
fn pseudo_peripheral(adj: &[Vec<usize>], start: usize) -> usize {
    let mut root = start;
    let (mut depth, mut last_level) = bfs_levels(adj, root);
    loop {
        let candidate = *last_level
            .iter()
            .min_by_key(|&&v| (adj[v].len(), v))
            .expect("nonempty level");
        let (d, level) = bfs_levels(adj, candidate);
        if d > depth {
            depth = d;
            root = candidate;
            last_level = level;
        } else {
            return if d == depth { candidate } else { root };
        }
    }
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut depth = 0;
    let mut last_level = vec![root];
    let mut current = Vec::new();
    while let Some(v) = queue.pop_front() {
        if dist[v] > depth {
            depth = dist[v];
            last_level = std::mem::take(&mut current);
        }
        current.push(v);
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if !current.is_empty() {
        depth = current.iter().map(|&v| dist[v]).max().unwrap_or(depth);
        last_level = current;
    }
    (depth, last_level)
}
