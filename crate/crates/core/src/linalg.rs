//! Dense row-major matrices and a cyclic Jacobi eigensolver for symmetric
//! matrices. Everything downstream builds on this module.

use crate::error::{Error, Result};

pub const DEFAULT_EIGH_TOL: f64 = 1e-12;
const MAX_JACOBI_SWEEPS: usize = 100;
const SYMMETRY_REL_TOL: f64 = 1e-9;

/// Dense real matrix, row-major. All entries are finite after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_vec(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{}={} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "entry at row {} col {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Column `j` copied out.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Builds a matrix from rows of `self` picked by `indices`, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut entries = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::InvalidArgument(format!(
                    "row index {} out of range for {} rows",
                    i, self.rows
                )));
            }
            entries.extend_from_slice(self.row(i));
        }
        DenseMatrix::from_vec(indices.len(), self.cols, entries)
    }

    /// Standard matrix product. Per-entry summation runs over ascending
    /// index so results are bit-stable across runs and platforms.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.entries[i * other.cols + j] = acc;
            }
        }
        Ok(out)
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors of a symmetric matrix.
/// Column `j` of `vectors` is the unit eigenvector for `values[j]`. Each
/// column is sign-canonicalized: its entry of largest magnitude is positive,
/// ties broken by the lowest row index.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `tol * ||A||_F`; errs after 100 full sweeps. The input must be square and
/// symmetric within relative 1e-9.
pub fn eigh_symmetric(a: &DenseMatrix, tol: f64) -> Result<EigenDecomposition> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigh: matrix is {}x{}, expected square",
            a.rows(),
            a.cols()
        )));
    }
    let fro = a.frobenius_norm();
    let mut max_dev = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_dev = max_dev.max((a.get(i, j) - a.get(j, i)).abs());
        }
    }
    if max_dev > SYMMETRY_REL_TOL * fro.max(1e-300) {
        return Err(Error::NotSymmetric {
            tol: SYMMETRY_REL_TOL,
            max_dev,
        });
    }

    // Work on the symmetrized copy so tiny asymmetries cannot bias rotations.
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, 0.5 * (a.get(i, j) + a.get(j, i)));
        }
    }
    let mut v = DenseMatrix::identity(n);

    let threshold = tol * fro;
    let mut converged = off_diagonal_norm(&m) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= MAX_JACOBI_SWEEPS {
            return Err(Error::EighNoConvergence(MAX_JACOBI_SWEEPS));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                // Skip rotations that cannot move the off-diagonal mass.
                if apq.abs() <= f64::EPSILON * (app.abs() + aqq.abs()) * 0.5 && sweeps > 0 {
                    m.set(p, q, 0.0);
                    m.set(q, p, 0.0);
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- Jᵀ A J on rows/columns p and q.
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                // V <- V J
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&m) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m.get(i, i)
            .partial_cmp(&m.get(j, j))
            .unwrap()
            .then(i.cmp(&j))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(m.get(src, src));
        let col = v.column(src);
        let flip = canonical_sign_is_flip(&col);
        for k in 0..n {
            vectors.set(k, dst, if flip { -col[k] } else { col[k] });
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// True when the entry of largest magnitude (ties: lowest index) is negative.
fn canonical_sign_is_flip(col: &[f64]) -> bool {
    let mut best = 0;
    for (k, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = k;
        }
    }
    col[best] < 0.0
}

fn off_diagonal_norm(m: &DenseMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = m.get(i, j);
                acc += v * v;
            }
        }
    }
    acc.sqrt()
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
pub fn solve_spd(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_spd: matrix {}x{}, rhs length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    // Lower-triangular factor, row-major.
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = a.get(i, j);
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::InvalidArgument(
                        "solve_spd: matrix is not positive definite".into(),
                    ));
                }
                l[i * n + i] = acc.sqrt();
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i * n + k] * y[k];
        }
        y[i] = acc / l[i * n + i];
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in (i + 1)..n {
            acc -= l[k * n + i] * x[k];
        }
        x[i] = acc / l[i * n + i];
    }
    Ok(x)
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = 0.0;
    for k in 0..u.len() {
        acc += u[k] * v[k];
    }
    acc
}

pub fn norm2(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let b = DenseMatrix::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let i3 = DenseMatrix::identity(3);
        assert_eq!(i3.matmul(&b).unwrap(), b);
    }

    #[test]
    fn matmul_hand_example() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseMatrix::from_vec(2, 1, vec![0.0, 1.0]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.entries(), &[2.0, 4.0]);
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            a.matmul(&b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            DenseMatrix::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn eigh_analytic_2x2() {
        let a = DenseMatrix::from_vec(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = eigh_symmetric(&a, DEFAULT_EIGH_TOL).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        // Eigenvector for 1 canonicalized to (1, -1)/sqrt(2).
        let s = 0.5f64.sqrt();
        assert!((e.vectors.get(0, 0) - s).abs() < 1e-12);
        assert!((e.vectors.get(1, 0) + s).abs() < 1e-12);
    }

    #[test]
    fn eigh_diagonal() {
        let a = DenseMatrix::from_vec(
            3,
            3,
            vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0],
        )
        .unwrap();
        let e = eigh_symmetric(&a, DEFAULT_EIGH_TOL).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // Vectors are permuted identity columns.
        let expect = [(1usize, 0usize), (2, 1), (0, 2)];
        for &(row, col) in &expect {
            assert_eq!(e.vectors.get(row, col), 1.0);
        }
    }

    #[test]
    fn eigh_rejects_asymmetric() {
        let a = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            eigh_symmetric(&a, DEFAULT_EIGH_TOL),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn eigh_rejects_non_square() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(eigh_symmetric(&a, DEFAULT_EIGH_TOL).is_err());
    }

    #[test]
    fn eigh_deterministic() {
        let a = DenseMatrix::from_vec(
            3,
            3,
            vec![4.0, 1.0, -2.0, 1.0, 3.0, 0.5, -2.0, 0.5, 5.0],
        )
        .unwrap();
        let e1 = eigh_symmetric(&a, DEFAULT_EIGH_TOL).unwrap();
        let e2 = eigh_symmetric(&a, DEFAULT_EIGH_TOL).unwrap();
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors.entries(), e2.vectors.entries());
    }

    #[test]
    fn solve_spd_roundtrip() {
        let a = DenseMatrix::from_vec(
            3,
            3,
            vec![4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0],
        )
        .unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a.get(i, j) * x_true[j]).sum())
            .collect();
        let x = solve_spd(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }
}
