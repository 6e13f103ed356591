//! ε-SVR trained by sequential minimal optimization on the standard
//! 2q-variable dual, selecting a maximal-violating pair each step. The
//! non-PSD sigmoid kernel is handled by flooring the pair curvature.

use crate::error::{Error, Result};
use crate::kernel::{kernel_eval, KernelSpec};
use crate::linalg::DenseMatrix;

const TAU: f64 = 1e-12;
const MAX_UPDATES: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct SvrModel {
    /// βᵢ = αᵢ − αᵢ*, each in [−C, C], Σβᵢ = 0.
    pub beta: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub support_rows: DenseMatrix,
    pub c: f64,
    pub epsilon: f64,
}

pub fn train_svr(
    x: &DenseMatrix,
    y: &[f64],
    kernel: KernelSpec,
    c: f64,
    epsilon: f64,
    tol: f64,
) -> Result<SvrModel> {
    let q = x.rows();
    if q < 2 {
        return Err(Error::InvalidArgument("svr needs q >= 2 samples".into()));
    }
    if y.len() != q {
        return Err(Error::DimensionMismatch(format!(
            "svr: {} samples but {} responses",
            q,
            y.len()
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("C must be > 0, got {}", c)));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be >= 0, got {}",
            epsilon
        )));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("response value {}", bad)));
    }

    // Base kernel matrix K (q×q).
    let mut kmat = DenseMatrix::zeros(q, q);
    for i in 0..q {
        for j in i..q {
            let v = kernel_eval(kernel, x.row(i), x.row(j))?;
            kmat.set(i, j, v);
            kmat.set(j, i, v);
        }
    }

    // Dual over 2q variables: α_t ∈ [0, C], z_t = +1 for t < q, −1 otherwise,
    // p_t = ε − y_t (t < q) or ε + y_{t−q}; constraint Σ z_t α_t = 0.
    // Q̄_{st} = z_s z_t K_{s mod q, t mod q}.
    let l2 = 2 * q;
    let z = |t: usize| -> f64 { if t < q { 1.0 } else { -1.0 } };
    let kq = |s: usize, t: usize| -> f64 { z(s) * z(t) * kmat.get(s % q, t % q) };
    let p: Vec<f64> = (0..l2)
        .map(|t| if t < q { epsilon - y[t] } else { epsilon + y[t - q] })
        .collect();

    let mut alpha = vec![0.0f64; l2];
    let mut grad = p.clone();

    let mut updates: u64 = 0;
    loop {
        // Maximal violating pair.
        let mut i_sel = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut g_min = f64::INFINITY;
        for t in 0..l2 {
            let zt = z(t);
            let in_up = (zt > 0.0 && alpha[t] < c) || (zt < 0.0 && alpha[t] > 0.0);
            let in_low = (zt > 0.0 && alpha[t] > 0.0) || (zt < 0.0 && alpha[t] < c);
            let v = -zt * grad[t];
            if in_up && v > g_max {
                g_max = v;
                i_sel = t;
            }
            if in_low && v < g_min {
                g_min = v;
                j_sel = t;
            }
        }
        if g_max - g_min <= tol || i_sel == usize::MAX || j_sel == usize::MAX {
            break;
        }
        if updates >= MAX_UPDATES {
            return Err(Error::SvrNoConvergence(MAX_UPDATES));
        }
        updates += 1;

        let (i, j) = (i_sel, j_sel);
        let old_ai = alpha[i];
        let old_aj = alpha[j];
        if z(i) != z(j) {
            let mut quad = kq(i, i) + kq(j, j) + 2.0 * kq(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kq(i, i) + kq(j, j) - 2.0 * kq(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = alpha[i] - old_ai;
        let d_j = alpha[j] - old_aj;
        if d_i != 0.0 || d_j != 0.0 {
            for t in 0..l2 {
                grad[t] += kq(t, i) * d_i + kq(t, j) * d_j;
            }
        }
    }

    // Bias from free variables, else from the violation midpoint.
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..l2 {
        let yg = z(t) * grad[t];
        if alpha[t] >= c {
            if z(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if z(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };

    let beta: Vec<f64> = (0..q).map(|i| alpha[i] - alpha[i + q]).collect();
    Ok(SvrModel {
        beta,
        bias: -rho,
        kernel,
        support_rows: x.clone(),
        c,
        epsilon,
    })
}

impl SvrModel {
    /// score(z) = Σᵢ βᵢ·k(xᵢ, z) + bias, summed over ascending i.
    pub fn predict(&self, t: &DenseMatrix) -> Result<Vec<f64>> {
        if t.cols() != self.support_rows.cols() {
            return Err(Error::DimensionMismatch(format!(
                "predict: model has {} features, test matrix has {}",
                self.support_rows.cols(),
                t.cols()
            )));
        }
        let mut scores = Vec::with_capacity(t.rows());
        for r in 0..t.rows() {
            let mut acc = 0.0;
            for i in 0..self.support_rows.rows() {
                acc += self.beta[i] * kernel_eval(self.kernel, self.support_rows.row(i), t.row(r))?;
            }
            scores.push(acc + self.bias);
        }
        Ok(scores)
    }

    /// Dual objective ½βᵀQβ + ε·Σ|βᵢ| − yᵀβ at the trained β.
    pub fn dual_objective(&self, y: &[f64]) -> Result<f64> {
        let q = self.beta.len();
        if y.len() != q {
            return Err(Error::DimensionMismatch(format!(
                "dual_objective: {} coefficients but {} responses",
                q,
                y.len()
            )));
        }
        let mut quad = 0.0;
        for i in 0..q {
            for j in 0..q {
                quad += self.beta[i]
                    * self.beta[j]
                    * kernel_eval(self.kernel, self.support_rows.row(i), self.support_rows.row(j))?;
            }
        }
        let l1: f64 = self.beta.iter().map(|b| b.abs()).sum();
        let lin: f64 = (0..q).map(|i| y[i] * self.beta[i]).sum();
        Ok(0.5 * quad + self.epsilon * l1 - lin)
    }

    /// Maximal KKT violation of the trained solution, same measure the
    /// solver stops on.
    pub fn kkt_violation(&self, y: &[f64]) -> Result<f64> {
        let q = self.beta.len();
        if y.len() != q {
            return Err(Error::DimensionMismatch(format!(
                "kkt_violation: {} coefficients but {} responses",
                q,
                y.len()
            )));
        }
        // Rebuild the 2q gradient from β: grad_t = z_t (Qβ)_{t mod q} + p_t
        // with α_t = max(z_t β, 0) recovered componentwise.
        let mut qbeta = vec![0.0f64; q];
        for i in 0..q {
            let mut acc = 0.0;
            for j in 0..q {
                acc += kernel_eval(self.kernel, self.support_rows.row(i), self.support_rows.row(j))?
                    * self.beta[j];
            }
            qbeta[i] = acc;
        }
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        for t in 0..2 * q {
            let zt = if t < q { 1.0 } else { -1.0 };
            let i = t % q;
            let alpha_t = if t < q {
                self.beta[i].max(0.0)
            } else {
                (-self.beta[i]).max(0.0)
            };
            let p_t = if t < q {
                self.epsilon - y[i]
            } else {
                self.epsilon + y[i]
            };
            let grad_t = zt * qbeta[i] + p_t;
            let v = -zt * grad_t;
            let in_up = (zt > 0.0 && alpha_t < self.c) || (zt < 0.0 && alpha_t > 0.0);
            let in_low = (zt > 0.0 && alpha_t > 0.0) || (zt < 0.0 && alpha_t < self.c);
            if in_up {
                g_max = g_max.max(v);
            }
            if in_low {
                g_min = g_min.min(v);
            }
        }
        Ok((g_max - g_min).max(0.0))
    }
}
