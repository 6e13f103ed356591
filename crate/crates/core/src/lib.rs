//! Noise-filtering drug-sensitivity prediction.
//!
//! Training samples are scored by the angle between each sample and its
//! projection onto the smallest-eigenvalue subspace of the Manhattan
//! distance Gram matrix; the q lowest-angle samples are retained; ridge
//! regression or ε-SVR models trained on the retained set are evaluated
//! against binary clinical outcomes via ROC/AUC and t-tests.

pub mod error;
pub mod eval;
pub mod filter;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod ridge;
pub mod svr;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{ClinicalLabels, EvalReport, Outcome, Polarity, RocPoint, TTestKind};
pub use filter::{FilterConfig, FilterReport, Keep};
pub use io::{ExpressionMatrix, ResponseVector};
pub use kernel::KernelSpec;
pub use linalg::{DenseMatrix, EigenDecomposition};
pub use model::Model;
pub use ridge::{Lambda, RidgeModel};
pub use svr::SvrModel;
pub use synth::{SplitMix64, SynthConfig, SyntheticData};
