use crate::error::{Error, Result};
use crate::linalg::dot;

/// Kernel for the SVR learner. `sigmoid_default` mirrors the usual solver
/// defaults: gamma = 1/n, coef0 = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Sigmoid { gamma: f64, coef0: f64 },
}

impl KernelSpec {
    pub fn sigmoid_default(n_features: usize) -> Self {
        KernelSpec::Sigmoid {
            gamma: 1.0 / n_features as f64,
            coef0: 0.0,
        }
    }
}

pub fn kernel_eval(k: KernelSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel: vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let d = dot(u, v);
    let out = match k {
        KernelSpec::Linear => d,
        KernelSpec::Sigmoid { gamma, coef0 } => (gamma * d + coef0).tanh(),
    };
    if !out.is_finite() {
        return Err(Error::NonFinite("kernel value".into()));
    }
    Ok(out)
}
