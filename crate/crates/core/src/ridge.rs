//! Dual (kernelized) ridge regression. With n features far exceeding q
//! samples, the q×q dual system (K + λI)α = y_c is the right solve; K is the
//! linear Gram of column-centered features and y is centered too.

use crate::error::{Error, Result};
use crate::linalg::{dot, eigh_symmetric, solve_spd, DenseMatrix, DEFAULT_EIGH_TOL};

/// λ selection: fixed, or exact leave-one-out over a log grid
/// 10^{-3}, 10^{-2.5}, ..., 10^{3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone)]
pub struct RidgeModel {
    pub dual_coefficients: Vec<f64>,
    pub training_rows: DenseMatrix,
    pub lambda: f64,
    pub y_mean: f64,
    pub column_means: Vec<f64>,
}

fn lambda_grid() -> Vec<f64> {
    (0..13).map(|k| 10f64.powf(-3.0 + 0.5 * k as f64)).collect()
}

fn center(x: &DenseMatrix, y: &[f64]) -> (DenseMatrix, Vec<f64>, Vec<f64>, f64) {
    let (q, n) = (x.rows(), x.cols());
    let mut col_means = vec![0.0f64; n];
    for i in 0..q {
        for j in 0..n {
            col_means[j] += x.get(i, j);
        }
    }
    for v in &mut col_means {
        *v /= q as f64;
    }
    let mut xc = DenseMatrix::zeros(q, n);
    for i in 0..q {
        for j in 0..n {
            xc.set(i, j, x.get(i, j) - col_means[j]);
        }
    }
    let y_mean = y.iter().sum::<f64>() / q as f64;
    let yc = y.iter().map(|v| v - y_mean).collect();
    (xc, yc, col_means, y_mean)
}

fn gram(xc: &DenseMatrix) -> DenseMatrix {
    let q = xc.rows();
    let mut k = DenseMatrix::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let v = dot(xc.row(i), xc.row(j));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// Exact leave-one-out residuals from the eigendecomposition of K: with
/// G = (K + λI)⁻¹ and α = G·y_c, the held-out residual of sample i is
/// α_i / G_ii. Centering is computed once on the full set.
fn loo_residuals(eig_values: &[f64], u: &DenseMatrix, yc: &[f64], lambda: f64) -> Vec<f64> {
    let q = yc.len();
    // uty = Uᵀ y_c
    let mut uty = vec![0.0f64; q];
    for j in 0..q {
        let mut acc = 0.0;
        for i in 0..q {
            acc += u.get(i, j) * yc[i];
        }
        uty[j] = acc;
    }
    let mut res = vec![0.0f64; q];
    for i in 0..q {
        let mut alpha_i = 0.0;
        let mut g_ii = 0.0;
        for j in 0..q {
            let w = 1.0 / (eig_values[j] + lambda);
            alpha_i += u.get(i, j) * w * uty[j];
            g_ii += u.get(i, j) * u.get(i, j) * w;
        }
        res[i] = alpha_i / g_ii;
    }
    res
}

/// Closed-form leave-one-out squared error of dual ridge at a given λ.
/// Exposed for verification against explicit refits.
pub fn ridge_loo_sse(x: &DenseMatrix, y: &[f64], lambda: f64) -> Result<f64> {
    if x.rows() < 2 {
        return Err(Error::InvalidArgument("ridge needs q >= 2 samples".into()));
    }
    let (xc, yc, _, _) = center(x, y);
    let k = gram(&xc);
    let eig = eigh_symmetric(&k, DEFAULT_EIGH_TOL)?;
    let res = loo_residuals(&eig.values, &eig.vectors, &yc, lambda);
    Ok(res.iter().map(|r| r * r).sum())
}

pub fn train_ridge(x: &DenseMatrix, y: &[f64], lambda: Lambda) -> Result<RidgeModel> {
    let q = x.rows();
    if q < 2 {
        return Err(Error::InvalidArgument("ridge needs q >= 2 samples".into()));
    }
    if y.len() != q {
        return Err(Error::DimensionMismatch(format!(
            "ridge: {} samples but {} responses",
            q,
            y.len()
        )));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("response value {}", bad)));
    }
    let (xc, yc, column_means, y_mean) = center(x, y);
    let k = gram(&xc);

    let lambda = match lambda {
        Lambda::Fixed(l) => {
            if !(l > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "lambda must be > 0, got {}",
                    l
                )));
            }
            l
        }
        Lambda::Auto => {
            let eig = eigh_symmetric(&k, DEFAULT_EIGH_TOL)?;
            let mut best = (f64::INFINITY, lambda_grid()[0]);
            for l in lambda_grid() {
                let sse: f64 = loo_residuals(&eig.values, &eig.vectors, &yc, l)
                    .iter()
                    .map(|r| r * r)
                    .sum();
                if sse < best.0 {
                    best = (sse, l);
                }
            }
            best.1
        }
    };

    let mut klam = k;
    for i in 0..q {
        klam.set(i, i, klam.get(i, i) + lambda);
    }
    let dual_coefficients = solve_spd(&klam, &yc)?;
    Ok(RidgeModel {
        dual_coefficients,
        training_rows: x.clone(),
        lambda,
        y_mean,
        column_means,
    })
}

impl RidgeModel {
    /// Score of test row z: Σᵢ αᵢ·(z_c·xᵢ_c) + ȳ with the stored centering.
    pub fn predict(&self, t: &DenseMatrix) -> Result<Vec<f64>> {
        let n = self.training_rows.cols();
        if t.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "predict: model has {} features, test matrix has {}",
                n,
                t.cols()
            )));
        }
        let q = self.training_rows.rows();
        let mut scores = Vec::with_capacity(t.rows());
        for r in 0..t.rows() {
            let z = t.row(r);
            let mut acc = 0.0;
            for i in 0..q {
                let xi = self.training_rows.row(i);
                let mut kz = 0.0;
                for j in 0..n {
                    kz += (z[j] - self.column_means[j]) * (xi[j] - self.column_means[j]);
                }
                acc += self.dual_coefficients[i] * kz;
            }
            scores.push(acc + self.y_mean);
        }
        Ok(scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn interpolation_limit() {
        // y exactly linear in X, tiny lambda: training predictions reproduce y.
        let x = mat(4, 2, &[0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 2.0, -1.0]);
        let y: Vec<f64> = (0..4)
            .map(|i| 3.0 * x.get(i, 0) - 2.0 * x.get(i, 1))
            .collect();
        let m = train_ridge(&x, &y, Lambda::Fixed(1e-8)).unwrap();
        let p = m.predict(&x).unwrap();
        for i in 0..4 {
            let scale = y[i].abs().max(1.0);
            assert!((p[i] - y[i]).abs() < 1e-5 * scale, "{} vs {}", p[i], y[i]);
        }
    }

    #[test]
    fn constant_response() {
        let x = mat(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 7.0]);
        let y = [4.5, 4.5, 4.5];
        for lambda in [1e-6, 1.0, 1e6] {
            let m = train_ridge(&x, &y, Lambda::Fixed(lambda)).unwrap();
            for c in &m.dual_coefficients {
                assert!(c.abs() < 1e-12);
            }
            let p = m.predict(&x).unwrap();
            for v in p {
                assert!((v - 4.5).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn huge_lambda_predicts_mean() {
        let x = mat(3, 2, &[1.0, 2.0, -1.0, 0.0, 4.0, 4.0]);
        let y = [1.0, 2.0, 6.0];
        let m = train_ridge(&x, &y, Lambda::Fixed(1e9)).unwrap();
        let p = m.predict(&x).unwrap();
        for v in p {
            assert!((v - 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_single_sample() {
        let x = mat(1, 2, &[1.0, 2.0]);
        assert!(train_ridge(&x, &[1.0], Lambda::Auto).is_err());
    }

    #[test]
    fn auto_lambda_on_grid() {
        let x = mat(
            5,
            2,
            &[0.1, 1.0, 0.9, -0.3, 1.4, 0.2, -0.5, 0.8, 2.0, -1.0],
        );
        let y = [1.0, 0.3, 2.0, -0.4, 3.1];
        let m = train_ridge(&x, &y, Lambda::Auto).unwrap();
        let on_grid = lambda_grid().iter().any(|&l| (l - m.lambda).abs() < 1e-12);
        assert!(on_grid, "lambda {} not on grid", m.lambda);
    }
}
