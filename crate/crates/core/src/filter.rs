//! Training-sample quality filtering: Manhattan distance matrix, projection
//! onto the smallest-eigenvalue subspace of the distance Gram matrix, the
//! per-sample degree between each row and its projection, and retrieval of
//! the q lowest-degree samples.

use crate::error::{Error, Result};
use crate::linalg::{dot, eigh_symmetric, norm2, DenseMatrix, DEFAULT_EIGH_TOL};

/// How many samples to keep. Exactly one policy applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Keep {
    /// Absolute number of samples to retain.
    Count(usize),
    /// Fraction of m to retain, in (0, 1].
    Fraction(f64),
    /// Retain every sample with degree <= threshold (in degrees).
    MaxDegree(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Number of smallest-eigenvalue eigenvectors spanning the projection
    /// subspace.
    pub t: usize,
    pub keep: Keep,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            t: 1,
            keep: Keep::Fraction(0.75),
        }
    }
}

/// Per-sample degrees, the sort order, and the retained index set.
/// Indices are 0-based positions into the training matrix.
#[derive(Debug, Clone)]
pub struct FilterReport {
    /// θᵢ in degrees, one per training sample, each in [0, 180].
    pub degrees: Vec<f64>,
    /// Permutation of 0..m sorting degrees ascending, ties by original index.
    pub order: Vec<usize>,
    /// First q entries of `order`.
    pub selected: Vec<usize>,
    /// The t smallest eigenvalues of D = LLᵀ backing the projection.
    pub eigenvalues_used: Vec<f64>,
}

/// Pairwise Manhattan (L1) distance matrix of the rows of `x`.
/// Symmetric with zero diagonal; per-entry sums run over ascending feature
/// index for bit-stable results.
pub fn manhattan_distance_matrix(x: &DenseMatrix) -> Result<DenseMatrix> {
    let m = x.rows();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "distance matrix needs at least 2 samples, got {}",
            m
        )));
    }
    let mut l = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let (ri, rj) = (x.row(i), x.row(j));
            let mut acc = 0.0;
            for a in 0..x.cols() {
                acc += (ri[a] - rj[a]).abs();
            }
            l.set(i, j, acc);
            l.set(j, i, acc);
        }
    }
    Ok(l)
}

/// The t eigenvectors of D = LLᵀ with the smallest eigenvalues.
///
/// L is symmetric, so D = L² shares eigenvectors with L and has eigenvalues
/// μ²; D is never materialized. Columns are ordered by ascending μ², ties by
/// ascending signed μ, then by lexicographic order of the canonicalized
/// vector. Returns the chosen eigenvectors (m×t) and their D-eigenvalues.
pub fn smallest_eigenvectors(l: &DenseMatrix, t: usize) -> Result<(DenseMatrix, Vec<f64>)> {
    let m = l.rows();
    if t < 1 || t > m {
        return Err(Error::InvalidArgument(format!(
            "t must be in 1..={}, got {}",
            m, t
        )));
    }
    let eig = eigh_symmetric(l, DEFAULT_EIGH_TOL)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        let (mi, mj) = (eig.values[i], eig.values[j]);
        (mi * mi)
            .partial_cmp(&(mj * mj))
            .unwrap()
            .then(mi.partial_cmp(&mj).unwrap())
            .then_with(|| {
                for k in 0..m {
                    let c = eig
                        .vectors
                        .get(k, i)
                        .partial_cmp(&eig.vectors.get(k, j))
                        .unwrap();
                    if c != std::cmp::Ordering::Equal {
                        return c;
                    }
                }
                std::cmp::Ordering::Equal
            })
    });

    let mut vectors = DenseMatrix::zeros(m, t);
    let mut values = Vec::with_capacity(t);
    for (dst, &src) in order.iter().take(t).enumerate() {
        let mu = eig.values[src];
        values.push(mu * mu);
        for k in 0..m {
            vectors.set(k, dst, eig.vectors.get(k, src));
        }
    }
    Ok((vectors, values))
}

/// X̄ = V·Vᵀ·X computed as V·(Vᵀ·X); the m×m projector is never formed.
pub fn project_onto_subspace(x: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    if v.rows() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "projection: X has {} rows, V has {}",
            x.rows(),
            v.rows()
        )));
    }
    let t = v.cols();
    for a in 0..t {
        for b in a..t {
            let g = dot(&v.column(a), &v.column(b));
            let target = if a == b { 1.0 } else { 0.0 };
            if (g - target).abs() > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "projection basis is not orthonormal: |v{}·v{} - {}| = {:e}",
                    a,
                    b,
                    target,
                    (g - target).abs()
                )));
            }
        }
    }
    let w = v.transpose().matmul(x)?;
    v.matmul(&w)
}

/// Angle in degrees between each row of `x` and the matching row of `xbar`.
/// The cosine is clamped to [-1, 1]; a zero projected row maps to 180
/// (worst quality). A zero row in `x` itself is rejected.
pub fn sample_degrees(x: &DenseMatrix, xbar: &DenseMatrix) -> Result<Vec<f64>> {
    if x.rows() != xbar.rows() || x.cols() != xbar.cols() {
        return Err(Error::DimensionMismatch(format!(
            "degrees: X is {}x{}, X̄ is {}x{}",
            x.rows(),
            x.cols(),
            xbar.rows(),
            xbar.cols()
        )));
    }
    let mut degrees = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let nx = norm2(x.row(i));
        if nx == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sample row {} is all zero; its angle is undefined",
                i
            )));
        }
        let nb = norm2(xbar.row(i));
        if nb == 0.0 {
            degrees.push(180.0);
            continue;
        }
        let cos = (dot(xbar.row(i), x.row(i)) / (nb * nx)).clamp(-1.0, 1.0);
        degrees.push(cos.acos().to_degrees());
    }
    Ok(degrees)
}

/// Sorts degrees ascending (ties by original index) and retains the first q
/// per the keep policy. `eigenvalues_used` is left empty; the pipeline-level
/// `filter_training_set` fills it in.
pub fn select_samples(degrees: &[f64], config: &FilterConfig) -> Result<FilterReport> {
    let m = degrees.len();
    if m == 0 {
        return Err(Error::InvalidArgument("no degrees to select from".into()));
    }
    for (i, &d) in degrees.iter().enumerate() {
        if !(0.0..=180.0).contains(&d) {
            return Err(Error::InvalidArgument(format!(
                "degree {} at index {} outside [0, 180]",
                d, i
            )));
        }
    }
    let q = resolve_keep(degrees, config.keep, m)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| degrees[i].partial_cmp(&degrees[j]).unwrap().then(i.cmp(&j)));
    let selected = order[..q].to_vec();
    Ok(FilterReport {
        degrees: degrees.to_vec(),
        order,
        selected,
        eigenvalues_used: Vec::new(),
    })
}

fn resolve_keep(degrees: &[f64], keep: Keep, m: usize) -> Result<usize> {
    let q = match keep {
        Keep::Count(q) => q,
        Keep::Fraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "keep fraction must be in (0, 1], got {}",
                    f
                )));
            }
            ((f * m as f64).round() as usize).clamp(1, m)
        }
        Keep::MaxDegree(th) => {
            if !th.is_finite() {
                return Err(Error::NonFinite("degree threshold".into()));
            }
            degrees.iter().filter(|&&d| d <= th).count()
        }
    };
    if q == 0 {
        return Err(Error::InvalidArgument(
            "keep policy resolves to q = 0 samples".into(),
        ));
    }
    if q > m {
        return Err(Error::InvalidArgument(format!(
            "keep policy resolves to q = {} > m = {}",
            q, m
        )));
    }
    Ok(q)
}

/// Full filtering step: distance matrix, smallest-eigenvector projection,
/// degrees, selection. Returns the retained rows of the *original* X (in
/// degree-ascending order), the matching responses, and the report.
pub fn filter_training_set(
    x: &DenseMatrix,
    y: &[f64],
    config: &FilterConfig,
) -> Result<(DenseMatrix, Vec<f64>, FilterReport)> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "filter: {} samples but {} responses",
            x.rows(),
            y.len()
        )));
    }
    let l = manhattan_distance_matrix(x)?;
    let (v, eigenvalues) = smallest_eigenvectors(&l, config.t)?;
    let xbar = project_onto_subspace(x, &v)?;
    let degrees = sample_degrees(x, &xbar)?;
    let mut report = select_samples(&degrees, config)?;
    report.eigenvalues_used = eigenvalues;
    let xq = x.select_rows(&report.selected)?;
    let yq = report.selected.iter().map(|&i| y[i]).collect();
    Ok((xq, yq, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn manhattan_hand_example() {
        let x = mat(2, 2, &[0.0, 0.0, 3.0, 4.0]);
        let l = manhattan_distance_matrix(&x).unwrap();
        assert_eq!(l.entries(), &[0.0, 7.0, 7.0, 0.0]);
    }

    #[test]
    fn manhattan_duplicate_rows() {
        let x = mat(3, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0]);
        let l = manhattan_distance_matrix(&x).unwrap();
        assert_eq!(l.get(0, 1), 0.0);
        assert_eq!(l.get(1, 0), 0.0);
        assert_eq!(l.get(0, 2), 3.0);
    }

    #[test]
    fn manhattan_rejects_single_row() {
        let x = mat(1, 2, &[1.0, 2.0]);
        assert!(manhattan_distance_matrix(&x).is_err());
    }

    #[test]
    fn smallest_eigenvectors_degenerate_2x2() {
        // L = [[0,d],[d,0]]: D = d²I is fully degenerate; the tie rule picks
        // the eigenvector of signed eigenvalue -d, canonicalized (s, -s).
        let l = mat(2, 2, &[0.0, 2.0, 2.0, 0.0]);
        let (v, vals) = smallest_eigenvectors(&l, 1).unwrap();
        assert!((vals[0] - 4.0).abs() < 1e-10);
        let s = 0.5f64.sqrt();
        assert!((v.get(0, 0) - s).abs() < 1e-10);
        assert!((v.get(1, 0) + s).abs() < 1e-10);
    }

    #[test]
    fn smallest_eigenvectors_1d_samples() {
        // Samples {0, 1, 3}: eigenvalues of L are the roots of -μ³+14μ+12,
        // roughly {-3.20, -0.91, 4.11}; the smallest μ² belongs to μ ≈ -0.91.
        let l = mat(3, 3, &[0.0, 1.0, 3.0, 1.0, 0.0, 2.0, 3.0, 2.0, 0.0]);
        let (v, vals) = smallest_eigenvectors(&l, 1).unwrap();
        let mu = -0.9111788076462430; // root of μ³ = 14μ + 12 near -0.91
        assert!((vals[0] - mu * mu).abs() < 1e-8);
        // Residual of L·v = μ·v.
        for i in 0..3 {
            let lv: f64 = (0..3).map(|j| l.get(i, j) * v.get(j, 0)).sum();
            assert!((lv - mu * v.get(i, 0)).abs() < 1e-8);
        }
    }

    #[test]
    fn projection_coordinate_case() {
        let x = mat(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let v = mat(2, 1, &[1.0, 0.0]);
        let xbar = project_onto_subspace(&x, &v).unwrap();
        assert_eq!(xbar.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(xbar.row(1), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn projection_complete_basis_is_identity() {
        let x = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = 0.5f64.sqrt();
        let v = mat(2, 2, &[s, s, -s, s]);
        let xbar = project_onto_subspace(&x, &v).unwrap();
        for k in 0..4 {
            assert!((xbar.entries()[k] - x.entries()[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_rejects_non_orthonormal() {
        let x = mat(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let v = mat(2, 1, &[1.0, 1.0]);
        assert!(project_onto_subspace(&x, &v).is_err());
    }

    #[test]
    fn degrees_parallel_orthogonal_antiparallel() {
        let x = mat(3, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let xbar = mat(3, 2, &[2.0, 0.0, 0.0, 5.0, -1.0, 0.0]);
        let d = sample_degrees(&x, &xbar).unwrap();
        assert!((d[0] - 0.0).abs() < 1e-12);
        assert!((d[1] - 90.0).abs() < 1e-12);
        assert!((d[2] - 180.0).abs() < 1e-12);
    }

    #[test]
    fn degrees_zero_projection_convention() {
        let x = mat(1, 2, &[1.0, 1.0]);
        let xbar = mat(1, 2, &[0.0, 0.0]);
        // m = 1 is fine here; only filter entry points require m >= 2.
        assert_eq!(sample_degrees(&x, &xbar).unwrap(), vec![180.0]);
    }

    #[test]
    fn degrees_zero_input_row_rejected() {
        let x = mat(1, 2, &[0.0, 0.0]);
        let xbar = mat(1, 2, &[1.0, 0.0]);
        assert!(sample_degrees(&x, &xbar).is_err());
    }

    #[test]
    fn select_hand_sort() {
        let cfg = FilterConfig {
            t: 1,
            keep: Keep::Count(2),
        };
        let r = select_samples(&[10.0, 5.0, 20.0], &cfg).unwrap();
        assert_eq!(r.order, vec![1, 0, 2]);
        assert_eq!(r.selected, vec![1, 0]);
    }

    #[test]
    fn select_ties_by_index() {
        let cfg = FilterConfig {
            t: 1,
            keep: Keep::Count(2),
        };
        let r = select_samples(&[7.0, 7.0, 1.0], &cfg).unwrap();
        assert_eq!(r.order, vec![2, 0, 1]);
    }

    #[test]
    fn select_threshold_zero_matches_errors() {
        let cfg = FilterConfig {
            t: 1,
            keep: Keep::MaxDegree(0.5),
        };
        assert!(select_samples(&[10.0, 5.0], &cfg).is_err());
    }

    #[test]
    fn select_keep_all_is_noop_set() {
        let cfg = FilterConfig {
            t: 1,
            keep: Keep::Count(3),
        };
        let r = select_samples(&[3.0, 1.0, 2.0], &cfg).unwrap();
        let mut s = r.selected.clone();
        s.sort();
        assert_eq!(s, vec![0, 1, 2]);
    }

    #[test]
    fn filter_keep_all_permutes_only() {
        let x = mat(3, 2, &[1.0, 0.5, 2.0, 1.0, 10.0, -3.0]);
        let y = [1.0, 2.0, 3.0];
        let cfg = FilterConfig {
            t: 1,
            keep: Keep::Count(3),
        };
        let (xq, yq, report) = filter_training_set(&x, &y, &cfg).unwrap();
        assert_eq!(xq.rows(), 3);
        for (pos, &src) in report.selected.iter().enumerate() {
            assert_eq!(xq.row(pos), x.row(src));
            assert_eq!(yq[pos], y[src]);
        }
    }

    #[test]
    fn filter_length_mismatch() {
        let x = mat(2, 2, &[1.0, 0.5, 2.0, 1.0]);
        let cfg = FilterConfig::default();
        assert!(filter_training_set(&x, &[1.0], &cfg).is_err());
    }
}
