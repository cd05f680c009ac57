//! Sparse matrices and linear solvers for the per-stage systems.
//!
//! Stage matrices are symmetric but not guaranteed definite (the reaction
//! term can shift eigenvalues past zero), so the iterative path is a
//! minimum-residual Krylov method with diagonal preconditioning. A dense
//! LU factorization serves as the direct path for small systems and as an
//! independent cross-check in tests.

use alloc::vec;
use alloc::vec::Vec;

/// Relative tolerance for verifying the symmetry flag at construction.
const SYMMETRY_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinAlgError {
    /// Vector length does not match the matrix dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// CSR structure violated (monotone row pointers, sorted unique columns,
    /// indices in range).
    InvalidStructure(&'static str),
    /// Matrix flagged symmetric but a_ij != a_ji beyond tolerance.
    NotSymmetric { row: usize, col: usize },
    /// A matrix or vector entry is NaN or infinite.
    NonFinite,
    /// Solver configuration violates its invariants.
    InvalidConfig(&'static str),
    /// Iterative solve did not reach the residual target.
    NoConvergence { iterations: usize, residual: f64 },
    /// Zero pivot during LU factorization.
    Singular { pivot_row: usize },
}

impl core::fmt::Display for LinAlgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinAlgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            LinAlgError::InvalidStructure(what) => write!(f, "invalid sparse structure: {what}"),
            LinAlgError::NotSymmetric { row, col } => {
                write!(f, "matrix flagged symmetric but entry ({row}, {col}) disagrees with its transpose")
            }
            LinAlgError::NonFinite => write!(f, "non-finite value"),
            LinAlgError::InvalidConfig(what) => write!(f, "invalid solver config: {what}"),
            LinAlgError::NoConvergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations, residual {residual:e}")
            }
            LinAlgError::Singular { pivot_row } => {
                write!(f, "singular matrix: zero pivot at row {pivot_row}")
            }
        }
    }
}

impl core::error::Error for LinAlgError {}

/// Compressed sparse row matrix.
///
/// Invariants (checked at construction): row pointers are monotone and span
/// the value array; column indices are strictly increasing within each row;
/// all values are finite; when `symmetric` is set, a_ij == a_ji within a
/// relative tolerance of 1e-13.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Wraps raw CSR arrays after validating every structural invariant.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
        symmetric: bool,
    ) -> Result<Self, LinAlgError> {
        if row_ptr.len() != n_rows + 1 {
            return Err(LinAlgError::InvalidStructure("row_ptr length must be n_rows + 1"));
        }
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(LinAlgError::InvalidStructure("row_ptr must span the entry arrays"));
        }
        for i in 0..n_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(LinAlgError::InvalidStructure("row_ptr must be monotone"));
            }
            let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &c) in row.iter().enumerate() {
                if c >= n_cols {
                    return Err(LinAlgError::InvalidStructure("column index out of range"));
                }
                if k > 0 && row[k - 1] >= c {
                    return Err(LinAlgError::InvalidStructure(
                        "column indices must be strictly increasing within a row",
                    ));
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LinAlgError::NonFinite);
        }
        let m = SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values, symmetric };
        if symmetric {
            m.verify_symmetry()?;
        }
        Ok(m)
    }

    /// Builds a matrix from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
        symmetric: bool,
    ) -> Result<Self, LinAlgError> {
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(LinAlgError::InvalidStructure("triplet index out of range"));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut counts = vec![0usize; n_rows];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut last = None;
        for &(r, c, v) in &sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists for repeated key") += v;
            } else {
                counts[r] += 1;
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for i in 0..n_rows {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        Self::from_csr(n_rows, n_cols, row_ptr, col_idx, values, symmetric)
    }

    /// Diagonal matrix with the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinAlgError> {
        let n = diag.len();
        Self::from_csr(n, n, (0..=n).collect(), (0..n).collect(), diag.to_vec(), true)
    }

    fn verify_symmetry(&self) -> Result<(), LinAlgError> {
        if self.n_rows != self.n_cols {
            return Err(LinAlgError::InvalidStructure("symmetric matrix must be square"));
        }
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let a_ij = self.values[k];
                let a_ji = self.get(j, i);
                let scale = 1.0_f64.max(a_ij.abs()).max(a_ji.abs());
                if (a_ij - a_ji).abs() > SYMMETRY_RTOL * scale {
                    return Err(LinAlgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Entry (i, j), zero when not stored. Binary search within the row.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// y = A x, written into a caller buffer. Sequential row-major
    /// accumulation, so results are deterministic.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), LinAlgError> {
        if x.len() != self.n_cols {
            return Err(LinAlgError::DimensionMismatch { expected: self.n_cols, got: x.len() });
        }
        if y.len() != self.n_rows {
            return Err(LinAlgError::DimensionMismatch { expected: self.n_rows, got: y.len() });
        }
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        Ok(())
    }

    /// Sum of scaled matrices with identical dimensions: sum c_k * A_k.
    ///
    /// Patterns need not match; rows are merged by column index. The result
    /// is flagged symmetric only when every term is.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<SparseMatrix, LinAlgError> {
        let first = match terms.first() {
            Some(&(_, m)) => m,
            None => return Err(LinAlgError::InvalidStructure("empty linear combination")),
        };
        let (n_rows, n_cols) = (first.n_rows, first.n_cols);
        for &(_, m) in terms {
            if m.n_rows != n_rows || m.n_cols != n_cols {
                return Err(LinAlgError::DimensionMismatch { expected: n_rows, got: m.n_rows });
            }
        }
        let symmetric = terms.iter().all(|&(_, m)| m.symmetric);
        let nnz_bound: usize = terms.iter().map(|&(_, m)| m.nnz()).sum();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(nnz_bound);
        let mut values = Vec::with_capacity(nnz_bound);
        row_ptr.push(0);
        // per-row k-way merge over the terms' sorted column lists
        let mut cursors = vec![0usize; terms.len()];
        for i in 0..n_rows {
            for (t, &(_, m)) in terms.iter().enumerate() {
                cursors[t] = m.row_ptr[i];
            }
            loop {
                let mut next_col = usize::MAX;
                for (t, &(_, m)) in terms.iter().enumerate() {
                    if cursors[t] < m.row_ptr[i + 1] {
                        next_col = next_col.min(m.col_idx[cursors[t]]);
                    }
                }
                if next_col == usize::MAX {
                    break;
                }
                let mut acc = 0.0;
                for (t, &(c, m)) in terms.iter().enumerate() {
                    if cursors[t] < m.row_ptr[i + 1] && m.col_idx[cursors[t]] == next_col {
                        acc += c * m.values[cursors[t]];
                        cursors[t] += 1;
                    }
                }
                col_idx.push(next_col);
                values.push(acc);
            }
            row_ptr.push(col_idx.len());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LinAlgError::NonFinite);
        }
        // invariants hold by construction; skip re-verifying symmetry, which
        // is inherited from the terms
        Ok(SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values, symmetric })
    }
}

/// Sparse matrix-vector product A x.
pub fn spmv(a: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>, LinAlgError> {
    let mut y = vec![0.0; a.n_rows()];
    a.mul_vec_into(x, &mut y)?;
    Ok(y)
}

/// Linear solve strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// Preconditioned minimum-residual Krylov iteration (symmetric systems,
    /// indefinite allowed).
    #[default]
    Iterative,
    /// Dense LU with partial pivoting; practical for small systems only.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Accepted solves satisfy ||A x - rhs|| <= rel_tol * ||rhs||.
    pub rel_tol: f64,
    pub max_iters: usize,
    pub method: SolverMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rel_tol: 1e-10, max_iters: 5000, method: SolverMethod::Iterative }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), LinAlgError> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(LinAlgError::InvalidConfig("rel_tol must be positive and finite"));
        }
        if self.max_iters == 0 {
            return Err(LinAlgError::InvalidConfig("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Solution vector plus solve statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True 2-norm of A x - rhs, recomputed after the solve.
    pub residual: f64,
}

/// Solves A x = rhs to the configured relative residual.
///
/// `x0` seeds the iterative method (time steppers pass the previous time
/// level); the direct method ignores it. The returned residual is always the
/// recomputed true residual, not an internal estimate.
pub fn solve_linear(
    a: &SparseMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<SolveResult, LinAlgError> {
    cfg.validate()?;
    if a.n_rows() != a.n_cols() {
        return Err(LinAlgError::InvalidStructure("solve requires a square matrix"));
    }
    if rhs.len() != a.n_rows() {
        return Err(LinAlgError::DimensionMismatch { expected: a.n_rows(), got: rhs.len() });
    }
    if let Some(x0) = x0 {
        if x0.len() != a.n_rows() {
            return Err(LinAlgError::DimensionMismatch { expected: a.n_rows(), got: x0.len() });
        }
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(LinAlgError::NonFinite);
    }
    match cfg.method {
        SolverMethod::Iterative => minres(a, rhs, x0, cfg),
        SolverMethod::Direct => {
            let lu = DenseLu::factor(a)?;
            let x = lu.solve(rhs)?;
            let mut r = vec![0.0; rhs.len()];
            a.mul_vec_into(&x, &mut r)?;
            let residual = norm2_diff(&r, rhs);
            Ok(SolveResult { x, iterations: 0, residual })
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn norm2_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    libm::sqrt(acc)
}

/// Minimum-residual iteration for symmetric (possibly indefinite) systems,
/// with Jacobi preconditioning.
///
/// Follows the Paige-Saunders recurrence. The internal stopping estimate
/// lives in the preconditioned norm; every candidate solution is accepted
/// only after its true residual passes the `rel_tol` contract, and the
/// estimate target tightens when the check fails.
pub fn minres(
    a: &SparseMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<SolveResult, LinAlgError> {
    let n = a.n_rows();
    let norm_b = norm2(rhs);
    if norm_b == 0.0 {
        // unique solution of a nonsingular system; singular systems also
        // accept it
        return Ok(SolveResult { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }
    let target_true = cfg.rel_tol * norm_b;

    // Jacobi preconditioner, disabled when the diagonal is unusable
    let diag = a.diagonal();
    let usable = diag.iter().all(|&d| d.is_finite() && d > 0.0);
    let (inv_diag, diag_max): (Vec<f64>, f64) = if usable {
        let dmax = diag.iter().fold(0.0_f64, |m, &d| m.max(d));
        (diag.iter().map(|&d| 1.0 / d).collect(), dmax)
    } else {
        (vec![1.0; n], 1.0)
    };
    // ||r||_2 <= sqrt(diag_max) * ||r||_precond bounds the true residual by
    // the estimate, so this trigger is conservative
    let mut trigger = target_true / libm::sqrt(diag_max);

    let mut x: Vec<f64> = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let mut r1 = vec![0.0; n];
    a.mul_vec_into(&x, &mut r1)?;
    for i in 0..n {
        r1[i] = rhs[i] - r1[i];
    }
    let mut y: Vec<f64> = (0..n).map(|i| r1[i] * inv_diag[i]).collect();
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 {
        return Err(LinAlgError::InvalidStructure("preconditioner lost positivity"));
    }
    let beta1 = libm::sqrt(beta1_sq);
    if beta1 == 0.0 {
        let residual = norm2(&r1);
        return Ok(SolveResult { x, iterations: 0, residual });
    }

    let mut r2 = r1.clone();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];

    let (mut oldb, mut beta) = (0.0_f64, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0_f64, 0.0_f64, beta1);
    let (mut cs, mut sn) = (-1.0_f64, 0.0_f64);
    let mut tnorm2 = 0.0_f64;
    let mut best_residual = f64::INFINITY;

    for itn in 1..=cfg.max_iters {
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = y[i] * s;
        }
        a.mul_vec_into(&v, &mut y)?;
        if itn >= 2 {
            let c = beta / oldb;
            for i in 0..n {
                y[i] -= c * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        for i in 0..n {
            y[i] -= c * r2[i];
        }
        core::mem::swap(&mut r1, &mut r2);
        core::mem::swap(&mut r2, &mut y);
        for i in 0..n {
            y[i] = r2[i] * inv_diag[i];
        }
        oldb = beta;
        let beta_sq = dot(&r2, &y).max(0.0);
        beta = libm::sqrt(beta_sq);
        tnorm2 += alfa * alfa + oldb * oldb + beta_sq;

        // plane rotation of the tridiagonal factorization
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = libm::sqrt(gbar * gbar + beta_sq).max(f64::MIN_POSITIVE);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        core::mem::swap(&mut w1, &mut w2);
        core::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }

        let lanczos_exhausted = beta <= f64::EPSILON * libm::sqrt(tnorm2);
        if phibar <= trigger || lanczos_exhausted || itn == cfg.max_iters {
            let mut ax = vec![0.0; n];
            a.mul_vec_into(&x, &mut ax)?;
            let residual = norm2_diff(&ax, rhs);
            best_residual = best_residual.min(residual);
            if residual <= target_true {
                return Ok(SolveResult { x, iterations: itn, residual });
            }
            if lanczos_exhausted || itn == cfg.max_iters {
                return Err(LinAlgError::NoConvergence {
                    iterations: itn,
                    residual: best_residual,
                });
            }
            // estimate was optimistic; demand more before re-checking
            trigger = (trigger * 0.25).min(phibar * 0.25);
        }
    }
    Err(LinAlgError::NoConvergence { iterations: cfg.max_iters, residual: best_residual })
}

/// Dense LU factorization with partial pivoting.
///
/// Factor once, solve many right-hand sides. Intended for small systems
/// (stage matrices on coarse test meshes, cross-checks of the iterative
/// path); memory is O(n^2).
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self, LinAlgError> {
        if a.n_rows() != a.n_cols() {
            return Err(LinAlgError::InvalidStructure("LU requires a square matrix"));
        }
        let n = a.n_rows();
        let mut lu = vec![0.0; n * n];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                lu[i * n + a.col_idx[k]] = a.values[k];
            }
        }
        Self::factor_dense(n, lu)
    }

    /// Factors a row-major dense matrix in place.
    pub fn factor_dense(n: usize, mut lu: Vec<f64>) -> Result<Self, LinAlgError> {
        if lu.len() != n * n {
            return Err(LinAlgError::DimensionMismatch { expected: n * n, got: lu.len() });
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut pmax = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(LinAlgError::Singular { pivot_row: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                for j in k + 1..n {
                    lu[i * n + j] -= m * lu[k * n + j];
                }
            }
        }
        Ok(DenseLu { n, lu, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinAlgError> {
        if rhs.len() != self.n {
            return Err(LinAlgError::DimensionMismatch { expected: self.n, got: rhs.len() });
        }
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn identity(n: usize) -> SparseMatrix {
        SparseMatrix::from_diagonal(&vec![1.0; n]).unwrap()
    }

    /// Symmetric test matrix with off-diagonal coupling, SPD by diagonal
    /// dominance.
    fn spd_tridiagonal(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t, true).unwrap()
    }

    #[test]
    fn triplets_merge_and_sort() {
        let m = SparseMatrix::from_triplets(
            2,
            3,
            &[(1, 2, 5.0), (0, 1, 2.0), (1, 2, 1.5), (0, 0, 1.0)],
            false,
        )
        .unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 2), 6.5);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn structural_validation() {
        assert_eq!(
            SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)], false),
            Err(LinAlgError::InvalidStructure("triplet index out of range"))
        );
        // duplicate columns in raw CSR
        assert!(
            SparseMatrix::from_csr(1, 2, vec![0, 2], vec![1, 1], vec![1.0, 2.0], false).is_err()
        );
        // unsorted columns
        assert!(
            SparseMatrix::from_csr(1, 3, vec![0, 2], vec![2, 0], vec![1.0, 2.0], false).is_err()
        );
        // non-monotone row_ptr
        assert!(
            SparseMatrix::from_csr(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 2.0], false).is_err()
        );
        // NaN entry
        assert_eq!(
            SparseMatrix::from_triplets(1, 1, &[(0, 0, f64::NAN)], false),
            Err(LinAlgError::NonFinite)
        );
    }

    #[test]
    fn symmetry_flag_is_verified() {
        let asym = &[(0, 1, 1.0), (1, 0, 2.0), (0, 0, 1.0), (1, 1, 1.0)];
        assert_eq!(
            SparseMatrix::from_triplets(2, 2, asym, true),
            Err(LinAlgError::NotSymmetric { row: 0, col: 1 })
        );
        assert!(SparseMatrix::from_triplets(2, 2, asym, false).is_ok());
        // within relative tolerance passes
        let near = &[(0, 1, 1.0), (1, 0, 1.0 + 1e-14), (0, 0, 1.0), (1, 1, 1.0)];
        assert!(SparseMatrix::from_triplets(2, 2, near, true).is_ok());
    }

    #[test]
    fn spmv_identity_and_known_product() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(spmv(&identity(3), &x).unwrap(), x);

        let m = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)], false)
            .unwrap();
        assert_eq!(spmv(&m, &[1.0, 2.0, 3.0]).unwrap(), vec![7.0, -2.0]);
        assert_eq!(
            spmv(&m, &[1.0, 2.0]).unwrap_err(),
            LinAlgError::DimensionMismatch { expected: 3, got: 2 }
        );
    }

    #[test]
    fn linear_combination_matches_dense_arithmetic() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 3.0), (2, 2, 4.0)],
            true,
        )
        .unwrap();
        let b = SparseMatrix::from_triplets(3, 3, &[(0, 2, 1.0), (2, 0, 1.0), (1, 1, -1.0)], true)
            .unwrap();
        let c = SparseMatrix::linear_combination(&[(2.0, &a), (-0.5, &b)]).unwrap();
        assert!(c.is_symmetric());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c.get(i, j), 2.0 * a.get(i, j) - 0.5 * b.get(i, j));
            }
        }
        // mismatched dimensions rejected
        let d = identity(2);
        assert!(SparseMatrix::linear_combination(&[(1.0, &a), (1.0, &d)]).is_err());
    }

    #[test]
    fn diagonal_and_row_sums() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 3.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 5.0)],
            true,
        )
        .unwrap();
        assert_eq!(m.diagonal(), vec![3.0, 5.0]);
        assert_eq!(m.row_sums(), vec![4.0, 6.0]);
    }

    #[test]
    fn minres_solves_spd_system() {
        let a = spd_tridiagonal(50);
        let ones = vec![1.0; 50];
        let rhs = spmv(&a, &ones).unwrap();
        let cfg = SolverConfig::default();
        let res = solve_linear(&a, &rhs, None, &cfg).unwrap();
        assert!(res.residual <= cfg.rel_tol * norm2(&rhs));
        for (xi, ei) in res.x.iter().zip(&ones) {
            assert!((xi - ei).abs() < 1e-9);
        }
    }

    #[test]
    fn minres_handles_symmetric_indefinite() {
        // eigenvalues of both signs
        let diag: Vec<f64> = vec![3.0, -2.0, 1.0, -0.5, 4.0, -1.0, 2.5, -3.5];
        let mut t: Vec<(usize, usize, f64)> =
            diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        for i in 0..7 {
            t.push((i, i + 1, 0.25));
            t.push((i + 1, i, 0.25));
        }
        let a = SparseMatrix::from_triplets(8, 8, &t, true).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rhs: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = SolverConfig::default();
        let res = solve_linear(&a, &rhs, None, &cfg).unwrap();
        assert!(res.residual <= cfg.rel_tol * norm2(&rhs));
    }

    #[test]
    fn residual_contract_verified_against_spmv() {
        let a = spd_tridiagonal(30);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rhs: Vec<f64> = (0..30).map(|_| rng.random_range(-2.0..2.0)).collect();
        let cfg = SolverConfig::default();
        let res = solve_linear(&a, &rhs, None, &cfg).unwrap();
        let r = spmv(&a, &res.x).unwrap();
        let true_res = norm2_diff(&r, &rhs);
        assert!(true_res <= cfg.rel_tol * norm2(&rhs));
        assert!((true_res - res.residual).abs() <= 1e-15 * (1.0 + true_res));
    }

    #[test]
    fn warm_start_from_exact_solution_converges_immediately() {
        let a = spd_tridiagonal(40);
        let exact: Vec<f64> = (0..40).map(|i| (i as f64 * 0.1).sin()).collect();
        let rhs = spmv(&a, &exact).unwrap();
        let cfg = SolverConfig::default();
        let res = solve_linear(&a, &rhs, Some(&exact), &cfg).unwrap();
        assert!(res.iterations <= 1);

        let cold = solve_linear(&a, &rhs, None, &cfg).unwrap();
        assert!(res.iterations < cold.iterations);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = spd_tridiagonal(10);
        let res = solve_linear(&a, &[0.0; 10], Some(&[5.0; 10]), &SolverConfig::default()).unwrap();
        assert_eq!(res.x, vec![0.0; 10]);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let a = spd_tridiagonal(100);
        let rhs: Vec<f64> = (0..100).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let cfg = SolverConfig { rel_tol: 1e-14, max_iters: 2, method: SolverMethod::Iterative };
        match solve_linear(&a, &rhs, None, &cfg) {
            Err(LinAlgError::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual.is_finite() && residual > 0.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_guard_falls_back_to_identity() {
        // zero diagonal entry: Jacobi inapplicable, but the solve must still
        // succeed unpreconditioned
        let t = &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)];
        let a = SparseMatrix::from_triplets(2, 2, t, true).unwrap();
        let rhs = vec![1.0, 3.0];
        let cfg = SolverConfig::default();
        let res = solve_linear(&a, &rhs, None, &cfg).unwrap();
        // exact solution (2, 1)
        assert!((res.x[0] - 2.0).abs() < 1e-8);
        assert!((res.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dense_lu_matches_hand_inverse() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 2.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, 3.0),
                (1, 2, 1.0),
                (2, 1, 1.0),
                (2, 2, 2.0),
            ],
            true,
        )
        .unwrap();
        let lu = DenseLu::factor(&a).unwrap();
        // A x = (1, 0, 0): solved by hand via elimination, x = (5/8, -1/4, 1/8)
        let x = lu.solve(&[1.0, 0.0, 0.0]).unwrap();
        assert!((x[0] - 0.625).abs() < 1e-14);
        assert!((x[1] + 0.25).abs() < 1e-14);
        assert!((x[2] - 0.125).abs() < 1e-14);
    }

    #[test]
    fn dense_lu_rejects_singular() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)], false).unwrap();
        match DenseLu::factor(&a) {
            Err(LinAlgError::Singular { .. }) => {}
            other => panic!("expected Singular, got {other:?}"),
        }
    }

    #[test]
    fn direct_and_iterative_paths_agree() {
        let a = spd_tridiagonal(25);
        let rhs: Vec<f64> = (0..25).map(|i| (i as f64 - 12.0) / 5.0).collect();
        let it = solve_linear(&a, &rhs, None, &SolverConfig::default()).unwrap();
        let di = solve_linear(
            &a,
            &rhs,
            None,
            &SolverConfig { method: SolverMethod::Direct, ..SolverConfig::default() },
        )
        .unwrap();
        for i in 0..25 {
            assert!((it.x[i] - di.x[i]).abs() < 1e-8);
        }
        assert!(di.residual <= 1e-10 * norm2(&rhs));
    }

    #[test]
    fn solves_are_deterministic() {
        let a = spd_tridiagonal(60);
        let rhs: Vec<f64> = (0..60).map(|i| ((i * 31) % 17) as f64 / 7.0 - 1.0).collect();
        let cfg = SolverConfig::default();
        let r1 = solve_linear(&a, &rhs, None, &cfg).unwrap();
        let r2 = solve_linear(&a, &rhs, None, &cfg).unwrap();
        assert_eq!(r1.x, r2.x);
        assert_eq!(r1.iterations, r2.iterations);
    }

    #[test]
    fn config_validation() {
        let a = identity(2);
        let bad_tol = SolverConfig { rel_tol: 0.0, ..SolverConfig::default() };
        assert!(matches!(
            solve_linear(&a, &[1.0, 1.0], None, &bad_tol),
            Err(LinAlgError::InvalidConfig(_))
        ));
        let bad_iters = SolverConfig { max_iters: 0, ..SolverConfig::default() };
        assert!(matches!(
            solve_linear(&a, &[1.0, 1.0], None, &bad_iters),
            Err(LinAlgError::InvalidConfig(_))
        ));
    }

    #[test]
    fn one_by_one_system() {
        let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, 0.975)], true).unwrap();
        let res = solve_linear(&a, &[0.5125], None, &SolverConfig::default()).unwrap();
        assert!((res.x[0] - 0.5125 / 0.975).abs() < 1e-12);
    }
}
