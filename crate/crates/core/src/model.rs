//! Trained model wrapper and its versioned plain-text serialization.
//! Numbers are written with 17 significant digits so save/load round-trips
//! bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::DenseMatrix;
use crate::ridge::RidgeModel;
use crate::svr::SvrModel;

const MAGIC: &str = "cellsieve-model v1";

#[derive(Debug, Clone)]
pub enum Model {
    Ridge(RidgeModel),
    Svr(SvrModel),
}

impl Model {
    pub fn predict(&self, t: &DenseMatrix) -> Result<Vec<f64>> {
        match self {
            Model::Ridge(m) => m.predict(t),
            Model::Svr(m) => m.predict(t),
        }
    }
}

/// 17 significant digits; round-trips every finite f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

fn write_floats(out: &mut String, values: &[f64]) {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}", fmt_f64(*v));
    }
    out.push('\n');
}

pub fn model_to_string(model: &Model) -> String {
    let mut s = String::new();
    s.push_str(MAGIC);
    s.push('\n');
    match model {
        Model::Ridge(m) => {
            s.push_str("kind ridge\n");
            let _ = writeln!(s, "lambda {}", fmt_f64(m.lambda));
            let _ = writeln!(s, "y_mean {}", fmt_f64(m.y_mean));
            let _ = writeln!(s, "q {}", m.training_rows.rows());
            let _ = writeln!(s, "n {}", m.training_rows.cols());
            s.push_str("column_means ");
            write_floats(&mut s, &m.column_means);
            s.push_str("dual_coefficients ");
            write_floats(&mut s, &m.dual_coefficients);
            for i in 0..m.training_rows.rows() {
                s.push_str("row ");
                write_floats(&mut s, m.training_rows.row(i));
            }
        }
        Model::Svr(m) => {
            s.push_str("kind svr\n");
            match m.kernel {
                KernelSpec::Linear => s.push_str("kernel linear\n"),
                KernelSpec::Sigmoid { gamma, coef0 } => {
                    let _ = writeln!(s, "kernel sigmoid {} {}", fmt_f64(gamma), fmt_f64(coef0));
                }
            }
            let _ = writeln!(s, "c {}", fmt_f64(m.c));
            let _ = writeln!(s, "epsilon {}", fmt_f64(m.epsilon));
            let _ = writeln!(s, "bias {}", fmt_f64(m.bias));
            let _ = writeln!(s, "q {}", m.support_rows.rows());
            let _ = writeln!(s, "n {}", m.support_rows.cols());
            s.push_str("beta ");
            write_floats(&mut s, &m.beta);
            for i in 0..m.support_rows.rows() {
                s.push_str("row ");
                write_floats(&mut s, m.support_rows.row(i));
            }
        }
    }
    s
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    path: String,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        match self.lines.next() {
            Some((i, l)) => Ok((i + 1, l)),
            None => Err(Error::Parse {
                path: self.path.clone(),
                line: 0,
                msg: "unexpected end of model file".into(),
            }),
        }
    }

    fn field(&mut self, key: &str) -> Result<Vec<f64>> {
        let (lineno, line) = self.next()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::Parse {
                path: self.path.clone(),
                line: lineno,
                msg: format!("expected field `{}`", key),
            });
        }
        parts
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    path: self.path.clone(),
                    line: lineno,
                    msg: format!("bad number `{}` in `{}`", t, key),
                })
            })
            .collect()
    }

    fn scalar(&mut self, key: &str) -> Result<f64> {
        let v = self.field(key)?;
        if v.len() != 1 {
            return Err(Error::Parse {
                path: self.path.clone(),
                line: 0,
                msg: format!("field `{}` must hold exactly one value", key),
            });
        }
        Ok(v[0])
    }
}

pub fn model_from_string(text: &str, origin: &str) -> Result<Model> {
    let mut r = Reader {
        lines: text.lines().enumerate(),
        path: origin.to_string(),
    };
    let (lineno, magic) = r.next()?;
    if magic != MAGIC {
        return Err(Error::Parse {
            path: origin.into(),
            line: lineno,
            msg: format!("unrecognized header `{}`", magic),
        });
    }
    let (lineno, kind) = r.next()?;
    match kind {
        "kind ridge" => {
            let lambda = r.scalar("lambda")?;
            let y_mean = r.scalar("y_mean")?;
            let q = r.scalar("q")? as usize;
            let n = r.scalar("n")? as usize;
            let column_means = r.field("column_means")?;
            let dual_coefficients = r.field("dual_coefficients")?;
            let mut entries = Vec::with_capacity(q * n);
            for _ in 0..q {
                entries.extend(r.field("row")?);
            }
            Ok(Model::Ridge(RidgeModel {
                dual_coefficients,
                training_rows: DenseMatrix::from_vec(q, n, entries)?,
                lambda,
                y_mean,
                column_means,
            }))
        }
        "kind svr" => {
            let (kl, kline) = r.next()?;
            let toks: Vec<&str> = kline.split_whitespace().collect();
            let kernel = match toks.as_slice() {
                ["kernel", "linear"] => KernelSpec::Linear,
                ["kernel", "sigmoid", g, c0] => KernelSpec::Sigmoid {
                    gamma: g.parse().map_err(|_| Error::Parse {
                        path: origin.into(),
                        line: kl,
                        msg: "bad gamma".into(),
                    })?,
                    coef0: c0.parse().map_err(|_| Error::Parse {
                        path: origin.into(),
                        line: kl,
                        msg: "bad coef0".into(),
                    })?,
                },
                _ => {
                    return Err(Error::Parse {
                        path: origin.into(),
                        line: kl,
                        msg: format!("unrecognized kernel line `{}`", kline),
                    })
                }
            };
            let c = r.scalar("c")?;
            let epsilon = r.scalar("epsilon")?;
            let bias = r.scalar("bias")?;
            let q = r.scalar("q")? as usize;
            let n = r.scalar("n")? as usize;
            let beta = r.field("beta")?;
            let mut entries = Vec::with_capacity(q * n);
            for _ in 0..q {
                entries.extend(r.field("row")?);
            }
            Ok(Model::Svr(SvrModel {
                beta,
                bias,
                kernel,
                support_rows: DenseMatrix::from_vec(q, n, entries)?,
                c,
                epsilon,
            }))
        }
        other => Err(Error::Parse {
            path: origin.into(),
            line: lineno,
            msg: format!("unrecognized model kind line `{}`", other),
        }),
    }
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_string(&text, &path.display().to_string())
}
