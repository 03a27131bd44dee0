//! Sparse symmetric matrices and a reusable direct SPD factorization.
//!
//! Matrices are assembled once from triplets and factored once; the
//! factor is then shared across many right-hand sides, which is where
//! all the repeated-solve pipelines in this crate spend their time.

mod cholesky;

pub use cholesky::CholeskyFactor;

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinAlgError {
    #[error("triplet ({row}, {col}) out of range for dimension {dim}")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("asymmetric input at ({row}, {col}): lower {lower}, upper {upper}")]
    AsymmetricInput { row: usize, col: usize, lower: f64, upper: f64 },
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// How a triplet list encodes the off-diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripletLayout {
    /// Each off-diagonal pair appears once, in either orientation.
    LowerOnly,
    /// Both (i, j) and (j, i) appear; they must agree within 1e-12.
    FullSymmetric,
}

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Symmetric sparse matrix; only the lower triangle is stored, in CSR
/// layout with sorted column indices and no explicit zeros.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Assemble from (row, col, value) triplets; duplicates are summed
    /// and exact zeros dropped after summation.
    pub fn assemble(
        n: usize,
        triplets: &[(usize, usize, f64)],
        layout: TripletLayout,
    ) -> Result<Self, LinAlgError> {
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(LinAlgError::IndexOutOfRange { row: i, col: j, dim: n });
            }
        }

        // Canonicalize to the lower triangle, tracking which orientation
        // each off-diagonal contribution came from so FullSymmetric input
        // can be checked for symmetry after duplicate summation.
        let mut low: Vec<(usize, usize, f64, bool)> = triplets
            .iter()
            .map(|&(i, j, v)| {
                if i >= j {
                    (i, j, v, true)
                } else {
                    (j, i, v, false)
                }
            })
            .collect();
        low.sort_by_key(|&(i, j, _, from_lower)| (i, j, !from_lower));

        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(low.len());
        let mut k = 0;
        while k < low.len() {
            let (i, j, _, _) = low[k];
            let mut lower_sum = 0.0;
            let mut upper_sum = 0.0;
            let mut saw_upper = false;
            while k < low.len() && low[k].0 == i && low[k].1 == j {
                if low[k].3 {
                    lower_sum += low[k].2;
                } else {
                    upper_sum += low[k].2;
                    saw_upper = true;
                }
                k += 1;
            }
            let value = match layout {
                TripletLayout::LowerOnly => lower_sum + upper_sum,
                TripletLayout::FullSymmetric => {
                    if i == j {
                        lower_sum
                    } else {
                        if !saw_upper
                            || (lower_sum - upper_sum).abs()
                                > SYMMETRY_TOLERANCE * 1f64.max(lower_sum.abs()).max(upper_sum.abs())
                        {
                            return Err(LinAlgError::AsymmetricInput {
                                row: i,
                                col: j,
                                lower: lower_sum,
                                upper: upper_sum,
                            });
                        }
                        0.5 * (lower_sum + upper_sum)
                    }
                }
            };
            if value != 0.0 {
                merged.push((i, j, value));
            }
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = merged.iter().map(|&(_, j, _)| j).collect();
        let values = merged.iter().map(|&(_, _, v)| v).collect();

        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::assemble(n, &triplets, TripletLayout::LowerOnly).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries (lower triangle including diagonal).
    pub fn nnz_lower(&self) -> usize {
        self.values.len()
    }

    /// Iterate stored entries as (row, col, value) with col <= row.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    /// Entry (i, j), zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let row = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(p) => self.values[self.row_ptr[r] + p],
            Err(_) => 0.0,
        }
    }

    /// y = A x, expanding the symmetric part on the fly.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                let v = self.values[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// x' A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        x.iter().zip(&ax).map(|(a, b)| a * b).sum()
    }

    /// Row sums (useful for nullspace checks on Laplacians).
    pub fn row_sums(&self) -> Vec<f64> {
        self.matvec(&vec![1.0; self.n])
    }

    /// a * A + b * B over the merged sparsity pattern.
    pub fn linear_combination(a: f64, ma: &Self, b: f64, mb: &Self) -> Result<Self, LinAlgError> {
        if ma.n != mb.n {
            return Err(LinAlgError::DimensionMismatch { expected: ma.n, got: mb.n });
        }
        let mut triplets = Vec::with_capacity(ma.nnz_lower() + mb.nnz_lower());
        triplets.extend(ma.lower_entries().map(|(i, j, v)| (i, j, a * v)));
        triplets.extend(mb.lower_entries().map(|(i, j, v)| (i, j, b * v)));
        Self::assemble(ma.n, &triplets, TripletLayout::LowerOnly)
    }

    /// Rewrite row and column `k` to the identity, keeping symmetry.
    /// Used to pin one unknown of a semidefinite system.
    pub fn with_pinned_index(&self, k: usize) -> Self {
        let mut triplets: Vec<(usize, usize, f64)> = self
            .lower_entries()
            .filter(|&(i, j, _)| i != k && j != k)
            .collect();
        triplets.push((k, k, 1.0));
        Self::assemble(self.n, &triplets, TripletLayout::LowerOnly)
            .expect("pinning preserves validity")
    }

    /// Adjacency lists of the off-diagonal pattern.
    pub(crate) fn pattern_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, _) in self.lower_entries() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        adj
    }

    /// Factor the matrix; fails unless it is positive definite.
    pub fn factorize(&self) -> Result<CholeskyFactor, LinAlgError> {
        CholeskyFactor::new(self)
    }

    /// MatrixMarket coordinate output (symmetric, lower triangle).
    pub fn write_matrix_market(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz_lower())?;
        for (i, j, v) in self.lower_entries() {
            writeln!(out, "{} {} {}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}
