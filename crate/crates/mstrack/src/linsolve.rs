//! Sparse matrix storage and the direct linear solve.
//!
//! Assembly produces triplets; `SparseMat` stores them as CSR for products
//! and quadratic forms, and `solve_sparse` hands a square system to a sparse
//! LU factorization.

use crate::error::{Error, Result};

/// Compressed-sparse-row matrix; duplicate triplets are summed on build.
#[derive(Clone, Debug)]
pub struct SparseMat {
    nrows: usize,
    ncols: usize,
    row_starts: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMat {
    pub fn from_triplets(nrows: usize, ncols: usize, trips: &[(usize, usize, f64)]) -> SparseMat {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in trips {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            counts[r + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; trips.len()];
        let mut vals = vec![0.0; trips.len()];
        for &(r, c, v) in trips {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        }
        // Sort each row by column and merge duplicates in place.
        let mut row_starts = vec![0usize; nrows + 1];
        let mut out_cols = Vec::with_capacity(trips.len());
        let mut out_vals = Vec::with_capacity(trips.len());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            scratch.clear();
            scratch.extend(
                cols[counts[r]..counts[r + 1]]
                    .iter()
                    .copied()
                    .zip(vals[counts[r]..counts[r + 1]].iter().copied()),
            );
            scratch.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in scratch.iter() {
                match out_cols.last() {
                    Some(&lc) if lc == c && out_cols.len() > row_starts[r] => {
                        *out_vals.last_mut().unwrap() += v;
                    }
                    _ => {
                        out_cols.push(c);
                        out_vals.push(v);
                    }
                }
            }
            row_starts[r + 1] = out_cols.len();
        }
        SparseMat {
            nrows,
            ncols,
            row_starts,
            col_idx: out_cols,
            vals: out_vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for i in self.row_starts[r]..self.row_starts[r + 1] {
                acc += self.vals[i] * x[self.col_idx[i]];
            }
            y[r] = acc;
        }
        y
    }

    /// x' A y.
    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        self.mul_vec(y).iter().zip(x).map(|(ay, x)| ay * x).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_starts[r]..self.row_starts[r + 1])
                .map(move |i| (r, self.col_idx[i], self.vals[i]))
        })
    }

    pub fn transpose(&self) -> SparseMat {
        let trips: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v)).collect();
        SparseMat::from_triplets(self.ncols, self.nrows, &trips)
    }

    /// Sum of each column; used to audit coupling-matrix mass exactness.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.ncols];
        for (_, c, v) in self.entries() {
            s[c] += v;
        }
        s
    }
}

/// Caps the factorization's internal parallelism and returns the effective
/// thread count. This build of the solver backend is sequential, which keeps
/// runs bit-reproducible; any requested cap therefore resolves to 1.
pub fn configure_parallelism(max_threads: usize) -> usize {
    assert!(max_threads >= 1, "thread cap must be at least 1");
    faer::set_global_parallelism(faer::Par::Seq);
    1
}

/// Solves the square sparse system given by `trips` for possibly several
/// right-hand sides (concatenated column-major), via sparse LU.
pub fn solve_sparse(n: usize, trips: &[(usize, usize, f64)], rhs: &[f64]) -> Result<Vec<f64>> {
    let mut solver = BlockSolver::new(n, trips)?;
    solver.refactor_solve(trips, rhs)
}

/// Direct solver for a sequence of square systems sharing one sparsity
/// pattern, such as the fixed-point iterates within a time step: the matrix
/// structure and the symbolic factorization are computed once, repeat solves
/// only scatter new values and refactor numerically.
pub struct BlockSolver {
    n: usize,
    mat: faer::sparse::SparseColMat<usize, f64>,
    /// Pattern of the constructing triplets, kept to validate reuse.
    pattern: Vec<(usize, usize)>,
    /// Value slot in `mat` each constructing triplet accumulates into.
    slots: Vec<usize>,
    symbolic: faer::sparse::linalg::solvers::SymbolicLu<usize>,
}

impl BlockSolver {
    /// Builds the matrix structure and analyzes it symbolically.
    pub fn new(n: usize, trips: &[(usize, usize, f64)]) -> Result<BlockSolver> {
        use faer::sparse::{SparseColMat, Triplet};
        let faer_trips: Vec<Triplet<usize, usize, f64>> = trips
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &faer_trips)
            .map_err(|e| Error::Solver(format!("sparse assembly failed: {e:?}")))?;
        let pattern: Vec<(usize, usize)> = trips.iter().map(|&(r, c, _)| (r, c)).collect();
        let col_ptr = mat.col_ptr().to_vec();
        let row_idx = mat.row_idx().to_vec();
        let slots = pattern
            .iter()
            .map(|&(r, c)| {
                let range = col_ptr[c]..col_ptr[c + 1];
                let pos = row_idx[range.clone()]
                    .binary_search(&r)
                    .expect("triplet row missing from assembled pattern");
                range.start + pos
            })
            .collect();
        let symbolic = faer::sparse::linalg::solvers::SymbolicLu::try_new(mat.symbolic())
            .map_err(|e| Error::Solver(format!("symbolic factorization failed: {e:?}")))?;
        Ok(BlockSolver {
            n,
            mat,
            pattern,
            slots,
            symbolic,
        })
    }

    /// Refactors with the values of `trips` (which must repeat the pattern
    /// given to `new`) and solves for the stacked right-hand sides.
    pub fn refactor_solve(
        &mut self,
        trips: &[(usize, usize, f64)],
        rhs: &[f64],
    ) -> Result<Vec<f64>> {
        use faer::linalg::solvers::Solve;
        assert_eq!(rhs.len() % self.n, 0, "rhs length must be a multiple of n");
        assert_eq!(trips.len(), self.pattern.len(), "pattern size changed");
        let vals = self.mat.val_mut();
        vals.fill(0.0);
        for (i, &(r, c, v)) in trips.iter().enumerate() {
            assert!((r, c) == self.pattern[i], "pattern changed at triplet {i}");
            vals[self.slots[i]] += v;
        }
        let n = self.n;
        let ncols = rhs.len() / n;
        // The factorization panics on an exactly zero pivot instead of
        // returning an error; convert both failure modes into a solver error.
        let lu = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            faer::sparse::linalg::solvers::Lu::try_new_with_symbolic(self.symbolic.clone(), self.mat.as_ref())
        }))
        .map_err(|_| Error::Solver("sparse LU hit a zero pivot".into()))?
        .map_err(|e| Error::Solver(format!("sparse LU failed: {e:?}")))?;
        let b = faer::Mat::<f64>::from_fn(n, ncols, |i, j| rhs[j * n + i]);
        let x = lu.solve(&b);
        let mut out = vec![0.0; rhs.len()];
        for j in 0..ncols {
            for i in 0..n {
                out[j * n + i] = x[(i, j)];
            }
        }
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::Solver("solution contains non-finite entries".into()));
        }
        Ok(out)
    }
}
