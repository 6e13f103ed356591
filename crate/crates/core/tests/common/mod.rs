//! Shared helpers for the oracle test suites. Everything here is
//! independent of the implementation paths it checks: plain loops,
//! Gaussian elimination, cofactor expansions, quadrature.

#![allow(dead_code)]

use cellsieve_core::kernel::kernel_eval;
use cellsieve_core::{ClinicalLabels, DenseMatrix, KernelSpec, Outcome, Polarity, SplitMix64};

pub fn rand_matrix(rng: &mut SplitMix64, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    let entries = (0..rows * cols)
        .map(|_| rng.next_normal() * scale)
        .collect();
    DenseMatrix::from_vec(rows, cols, entries).unwrap()
}

pub fn rand_symmetric(rng: &mut SplitMix64, n: usize, scale: f64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.next_normal() * scale;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

/// Random m×t matrix with orthonormal columns, by Gram-Schmidt.
pub fn rand_orthonormal(rng: &mut SplitMix64, m: usize, t: usize) -> DenseMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < t {
        let mut v: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            for k in 0..m {
                v[k] -= d * c[k];
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in &mut v {
            *x /= norm;
        }
        cols.push(v);
    }
    let mut out = DenseMatrix::zeros(m, t);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..m {
            out.set(i, j, c[i]);
        }
    }
    out
}

/// Triple-loop matrix product.
pub fn matmul_oracle(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = 0.0;
            for k in 0..a.cols() {
                acc += a.get(i, k) * b.get(k, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Dense linear solve by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular system in oracle");
        for i in (col + 1)..n {
            let f = m[i][col] / d;
            for j in col..n {
                m[i][j] -= f * m[col][j];
            }
            rhs[i] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..n {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    x
}

/// Determinant by cofactor expansion (intended for n <= 6).
pub fn det_cofactor(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    if n == 1 {
        return a.get(0, 0);
    }
    let mut acc = 0.0;
    for j in 0..n {
        let mut minor = DenseMatrix::zeros(n - 1, n - 1);
        for i in 1..n {
            let mut cc = 0;
            for k in 0..n {
                if k == j {
                    continue;
                }
                minor.set(i - 1, cc, a.get(i, k));
                cc += 1;
            }
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * a.get(0, j) * det_cofactor(&minor);
    }
    acc
}

/// Characteristic polynomial coefficients of A (monic, ascending powers) by
/// the Faddeev-LeVerrier recurrence.
pub fn char_poly(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = DenseMatrix::zeros(n, n); // M_0 = 0
    let mut c = 1.0; // c_n
    for k in 1..=n {
        // M_k = A M_{k-1} + c I
        let mut am = matmul_oracle(a, &m);
        for i in 0..n {
            am.set(i, i, am.get(i, i) + c);
        }
        m = am;
        let prod = matmul_oracle(a, &m);
        let trace: f64 = (0..n).map(|i| prod.get(i, i)).sum();
        c = -trace / k as f64;
        coeffs[n - k] = c;
    }
    coeffs
}

pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// All real roots of a polynomial whose roots are known to be real and lie
/// in [-bound, bound], by dense sign-change scanning plus bisection.
pub fn real_roots(coeffs: &[f64], bound: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = 2.0 * bound / samples as f64;
    let mut x0 = -bound;
    let mut f0 = poly_eval(coeffs, x0);
    for _ in 0..samples {
        let x1 = x0 + step;
        let f1 = poly_eval(coeffs, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi) = (x0, x1);
            let mut flo = f0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = poly_eval(coeffs, mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Gershgorin bound on the spectral radius of a symmetric matrix.
pub fn gershgorin_bound(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth > 60 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, tol / 2.0, depth + 1) + rec(f, m, b, right, tol / 2.0, depth + 1)
        }
    }
    let whole = simpson(&f, a, b);
    rec(&f, a, b, whole, tol, 0)
}

pub fn frobenius(a: &DenseMatrix) -> f64 {
    a.entries().iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max)
}

/// Centers columns of x and y; returns (xc, yc, col_means, y_mean).
pub fn center(x: &DenseMatrix, y: &[f64]) -> (DenseMatrix, Vec<f64>, Vec<f64>, f64) {
    let (q, n) = (x.rows(), x.cols());
    let mut means = vec![0.0; n];
    for i in 0..q {
        for j in 0..n {
            means[j] += x.get(i, j);
        }
    }
    for v in &mut means {
        *v /= q as f64;
    }
    let mut xc = DenseMatrix::zeros(q, n);
    for i in 0..q {
        for j in 0..n {
            xc.set(i, j, x.get(i, j) - means[j]);
        }
    }
    let ym = y.iter().sum::<f64>() / q as f64;
    let yc = y.iter().map(|v| v - ym).collect();
    (xc, yc, means, ym)
}

/// Primal ridge weights on centered data: (XcᵀXc + λI) w = Xcᵀ y_c.
pub fn primal_ridge_weights(xc: &DenseMatrix, yc: &[f64], lambda: f64) -> Vec<f64> {
    let n = xc.cols();
    let xt = xc.transpose();
    let mut gram = matmul_oracle(&xt, xc);
    for j in 0..n {
        gram.set(j, j, gram.get(j, j) + lambda);
    }
    let rhs: Vec<f64> = (0..n)
        .map(|j| (0..xc.rows()).map(|i| xc.get(i, j) * yc[i]).sum())
        .collect();
    solve_dense(&gram, &rhs)
}


pub fn projected_gradient_svr(
    x: &DenseMatrix,
    y: &[f64],
    kernel: KernelSpec,
    c: f64,
    epsilon: f64,
    iters: usize,
) -> (Vec<f64>, f64) {
    let q = x.rows();
    let l2 = 2 * q;
    let mut kmat = vec![0.0f64; q * q];
    for i in 0..q {
        for j in 0..q {
            kmat[i * q + j] = kernel_eval(kernel, x.row(i), x.row(j)).unwrap();
        }
    }
    let z = |t: usize| if t < q { 1.0 } else { -1.0 };
    let p: Vec<f64> = (0..l2)
        .map(|t| if t < q { epsilon - y[t] } else { epsilon + y[t - q] })
        .collect();

    let project = |v: &[f64]| -> Vec<f64> {
        // Find nu with sum_t z_t clip(v_t - nu z_t, 0, C) = 0.
        let g = |nu: f64| -> f64 {
            (0..l2)
                .map(|t| z(t) * (v[t] - nu * z(t)).clamp(0.0, c))
                .sum()
        };
        let (mut lo, mut hi) = (-1e6 * (1.0 + c), 1e6 * (1.0 + c));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let nu = 0.5 * (lo + hi);
        (0..l2).map(|t| (v[t] - nu * z(t)).clamp(0.0, c)).collect()
    };

    let objective = |alpha: &[f64]| -> f64 {
        let beta: Vec<f64> = (0..q).map(|i| alpha[i] - alpha[i + q]).collect();
        let mut quad = 0.0;
        for i in 0..q {
            for j in 0..q {
                quad += beta[i] * beta[j] * kmat[i * q + j];
            }
        }
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        let lin: f64 = (0..q).map(|i| y[i] * beta[i]).sum();
        0.5 * quad + epsilon * l1 - lin
    };

    // Lipschitz bound from row sums of |Q̄| (= 2x the base kernel row sums).
    let lip = (0..q)
        .map(|i| (0..q).map(|j| kmat[i * q + j].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        * 2.0
        + 1.0;
    let step = 1.0 / lip;

    let mut alpha = project(&vec![0.0; l2]);
    let mut best = objective(&alpha);
    let mut best_alpha = alpha.clone();
    for _ in 0..iters {
        // grad_t = z_t (Qβ)_{t mod q} + p_t
        let beta: Vec<f64> = (0..q).map(|i| alpha[i] - alpha[i + q]).collect();
        let mut qbeta = vec![0.0f64; q];
        for i in 0..q {
            qbeta[i] = (0..q).map(|j| kmat[i * q + j] * beta[j]).sum();
        }
        let moved: Vec<f64> = (0..l2)
            .map(|t| alpha[t] - step * (z(t) * qbeta[t % q] + p[t]))
            .collect();
        alpha = project(&moved);
        let obj = objective(&alpha);
        if obj < best {
            best = obj;
            best_alpha = alpha.clone();
        }
    }
    (best_alpha, best)
}


pub fn auc_pair_oracle(scores: &[f64], labels: &ClinicalLabels, polarity: Polarity) -> f64 {
    let eff: Vec<f64> = match polarity {
        Polarity::HigherSensitive => scores.to_vec(),
        Polarity::LowerSensitive => scores.iter().map(|s| -s).collect(),
    };
    let mut wins = 0.0;
    let mut total = 0.0;
    for i in 0..eff.len() {
        if labels.outcomes[i] != Outcome::Sensitive {
            continue;
        }
        for j in 0..eff.len() {
            if labels.outcomes[j] != Outcome::Resistant {
                continue;
            }
            total += 1.0;
            if eff[i] > eff[j] {
                wins += 1.0;
            } else if eff[i] == eff[j] {
                wins += 0.5;
            }
        }
    }
    wins / total
}


/// Two-sided Student-t p-value by quadrature of the density.
pub fn t_p_value_quadrature(t: f64, df: f64) -> f64 {
    let log_norm = ln_gamma_ref((df + 1.0) / 2.0)
        - ln_gamma_ref(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    let density =
        move |x: f64| (log_norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp();
    // Integrate the central region (finite, smooth) instead of the tail so
    // heavy-tailed small-df cases lose nothing to truncation.
    let central = integrate(density, 0.0, t.abs(), 1e-13);
    (1.0 - 2.0 * central).clamp(0.0, 1.0)
}

// Independent Stirling-series log-gamma for the quadrature oracle.
pub fn ln_gamma_ref(x: f64) -> f64 {
    let mut x = x;
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0
        - inv * inv2 * inv2 * inv2 / 1680.0;
    shift + 0.5 * ((2.0 * std::f64::consts::PI).ln() - x.ln()) + x * (x.ln() - 1.0) + series
}

