//! CSV ingestion for expression matrices, responses, and clinical labels,
//! plus gene-ID alignment between train and test matrices. All numbers are
//! decimal text; writers use 17 significant digits so round-trips are
//! bit-exact.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{ClinicalLabels, Outcome};
use crate::linalg::DenseMatrix;
use crate::model::fmt_f64;

#[derive(Debug, Clone)]
pub struct ExpressionMatrix {
    pub sample_ids: Vec<String>,
    pub gene_ids: Vec<String>,
    pub values: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct ResponseVector {
    pub sample_ids: Vec<String>,
    pub values: Vec<f64>,
}

impl ExpressionMatrix {
    pub fn new(sample_ids: Vec<String>, gene_ids: Vec<String>, values: DenseMatrix) -> Result<Self> {
        if sample_ids.len() != values.rows() || gene_ids.len() != values.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} sample ids, {} gene ids for a {}x{} matrix",
                sample_ids.len(),
                gene_ids.len(),
                values.rows(),
                values.cols()
            )));
        }
        check_unique(&sample_ids, "sample")?;
        check_unique(&gene_ids, "gene")?;
        Ok(Self {
            sample_ids,
            gene_ids,
            values,
        })
    }

    /// Sub-matrix of the given sample rows, in order.
    pub fn select_samples(&self, indices: &[usize]) -> Result<ExpressionMatrix> {
        let values = self.values.select_rows(indices)?;
        let sample_ids = indices.iter().map(|&i| self.sample_ids[i].clone()).collect();
        ExpressionMatrix::new(sample_ids, self.gene_ids.clone(), values)
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate {} id `{}`",
                what, id
            )));
        }
    }
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text.lines().map(|l| l.to_string()).collect())
}

fn parse_err(path: &Path, line: usize, msg: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    }
}

/// Loads a matrix CSV: header `sample_id,<gene1>,...`, one row per sample.
pub fn load_expression(path: &Path) -> Result<ExpressionMatrix> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(parse_err(path, 1, "empty file".into()));
    }
    let header: Vec<&str> = lines[0].split(',').collect();
    if header.len() < 2 || header[0] != "sample_id" {
        return Err(parse_err(
            path,
            1,
            "header must be `sample_id,<gene>,...`".into(),
        ));
    }
    let gene_ids: Vec<String> = header[1..].iter().map(|s| s.to_string()).collect();
    let n = gene_ids.len();
    let mut sample_ids = Vec::new();
    let mut entries = Vec::new();
    for (lineno, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n + 1 {
            return Err(parse_err(
                path,
                lineno + 1,
                format!("expected {} cells, found {}", n + 1, cells.len()),
            ));
        }
        sample_ids.push(cells[0].to_string());
        for (col, cell) in cells[1..].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(
                    path,
                    lineno + 1,
                    format!("column {} (`{}`): non-numeric cell `{}`", col + 2, gene_ids[col], cell),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    lineno + 1,
                    format!("column {}: non-finite value `{}`", col + 2, cell),
                ));
            }
            entries.push(v);
        }
    }
    if sample_ids.is_empty() {
        return Err(parse_err(path, 1, "no sample rows".into()));
    }
    let m = sample_ids.len();
    ExpressionMatrix::new(sample_ids, gene_ids, DenseMatrix::from_vec(m, n, entries)?)
        .map_err(|e| located_dup(e, path))
}

fn located_dup(e: Error, path: &Path) -> Error {
    match e {
        Error::InvalidArgument(msg) => parse_err(path, 1, msg),
        other => other,
    }
}

fn load_two_column(path: &Path, expect_header: &str) -> Result<Vec<(String, String)>> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(parse_err(path, 1, "empty file".into()));
    }
    if lines[0] != expect_header {
        return Err(parse_err(
            path,
            1,
            format!("header must be `{}`", expect_header),
        ));
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let id = parts.next().unwrap_or("");
        let value = parts
            .next()
            .ok_or_else(|| parse_err(path, lineno + 1, "expected two cells".into()))?;
        if !seen.insert(id.to_string()) {
            return Err(parse_err(
                path,
                lineno + 1,
                format!("duplicate sample id `{}`", id),
            ));
        }
        out.push((id.to_string(), value.to_string()));
    }
    if out.is_empty() {
        return Err(parse_err(path, 1, "no data rows".into()));
    }
    Ok(out)
}

/// Loads `sample_id,value` responses.
pub fn load_responses(path: &Path) -> Result<ResponseVector> {
    let rows = load_two_column(path, "sample_id,value")?;
    let mut sample_ids = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (lineno, (id, cell)) in rows.into_iter().enumerate() {
        let v: f64 = cell
            .parse()
            .map_err(|_| parse_err(path, lineno + 2, format!("non-numeric value `{}`", cell)))?;
        if !v.is_finite() {
            return Err(parse_err(
                path,
                lineno + 2,
                format!("non-finite value `{}`", cell),
            ));
        }
        sample_ids.push(id);
        values.push(v);
    }
    Ok(ResponseVector { sample_ids, values })
}

/// Loads `sample_id,label` with label in {sensitive, resistant},
/// case-insensitive.
pub fn load_labels(path: &Path) -> Result<ClinicalLabels> {
    let rows = load_two_column(path, "sample_id,label")?;
    let mut sample_ids = Vec::with_capacity(rows.len());
    let mut outcomes = Vec::with_capacity(rows.len());
    for (lineno, (id, cell)) in rows.into_iter().enumerate() {
        let outcome = Outcome::parse(&cell).ok_or_else(|| {
            parse_err(
                path,
                lineno + 2,
                format!("unknown label `{}` (expected sensitive/resistant)", cell),
            )
        })?;
        sample_ids.push(id);
        outcomes.push(outcome);
    }
    ClinicalLabels::new(sample_ids, outcomes)
}

pub fn write_expression(m: &ExpressionMatrix, path: &Path) -> Result<()> {
    let mut s = String::from("sample_id");
    for g in &m.gene_ids {
        s.push(',');
        s.push_str(g);
    }
    s.push('\n');
    for i in 0..m.values.rows() {
        s.push_str(&m.sample_ids[i]);
        for v in m.values.row(i) {
            let _ = write!(s, ",{}", fmt_f64(*v));
        }
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_responses(r: &ResponseVector, path: &Path) -> Result<()> {
    let mut s = String::from("sample_id,value\n");
    for (id, v) in r.sample_ids.iter().zip(&r.values) {
        let _ = writeln!(s, "{},{}", id, fmt_f64(*v));
    }
    std::fs::write(path, s).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_labels(l: &ClinicalLabels, path: &Path) -> Result<()> {
    let mut s = String::from("sample_id,label\n");
    for (id, o) in l.sample_ids.iter().zip(&l.outcomes) {
        let _ = writeln!(s, "{},{}", id, o.as_str());
    }
    std::fs::write(path, s).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone)]
pub struct AlignResult {
    pub train: ExpressionMatrix,
    pub test: ExpressionMatrix,
    /// Set when fewer than 90% of either side's genes survive alignment.
    pub warning: Option<String>,
}

/// Restricts both matrices to the intersection of their gene IDs, columns in
/// train-derived order.
pub fn align_genes(train: &ExpressionMatrix, test: &ExpressionMatrix) -> Result<AlignResult> {
    let test_index: HashMap<&str, usize> = test
        .gene_ids
        .iter()
        .enumerate()
        .map(|(j, g)| (g.as_str(), j))
        .collect();
    let mut shared: Vec<(usize, usize)> = Vec::new();
    for (jt, g) in train.gene_ids.iter().enumerate() {
        if let Some(&je) = test_index.get(g.as_str()) {
            shared.push((jt, je));
        }
    }
    if shared.is_empty() {
        return Err(Error::InvalidArgument(
            "train and test share no gene ids".into(),
        ));
    }
    let restrict = |m: &ExpressionMatrix, cols: &[usize]| -> Result<ExpressionMatrix> {
        let mut entries = Vec::with_capacity(m.values.rows() * cols.len());
        for i in 0..m.values.rows() {
            let row = m.values.row(i);
            for &j in cols {
                entries.push(row[j]);
            }
        }
        let gene_ids = cols.iter().map(|&j| m.gene_ids[j].clone()).collect();
        ExpressionMatrix::new(
            m.sample_ids.clone(),
            gene_ids,
            DenseMatrix::from_vec(m.values.rows(), cols.len(), entries)?,
        )
    };
    let train_cols: Vec<usize> = shared.iter().map(|&(jt, _)| jt).collect();
    let test_cols: Vec<usize> = shared.iter().map(|&(_, je)| je).collect();
    let kept = shared.len();
    let frac_train = kept as f64 / train.gene_ids.len() as f64;
    let frac_test = kept as f64 / test.gene_ids.len() as f64;
    let warning = if frac_train < 0.9 || frac_test < 0.9 {
        Some(format!(
            "gene alignment kept {} genes ({:.1}% of train, {:.1}% of test)",
            kept,
            100.0 * frac_train,
            100.0 * frac_test
        ))
    } else {
        None
    };
    Ok(AlignResult {
        train: restrict(train, &train_cols)?,
        test: restrict(test, &test_cols)?,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn expr(samples: &[&str], genes: &[&str], values: &[f64]) -> ExpressionMatrix {
        ExpressionMatrix::new(
            samples.iter().map(|s| s.to_string()).collect(),
            genes.iter().map(|s| s.to_string()).collect(),
            DenseMatrix::from_vec(samples.len(), genes.len(), values.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn load_small_matrix() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "sample_id,g1,g2\ns1,0.5,1.5\ns2,-1,2\n").unwrap();
        let m = load_expression(&p).unwrap();
        assert_eq!(m.sample_ids, vec!["s1", "s2"]);
        assert_eq!(m.gene_ids, vec!["g1", "g2"]);
        assert_eq!(m.values.entries(), &[0.5, 1.5, -1.0, 2.0]);
    }

    #[test]
    fn duplicate_sample_id_named() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "sample_id,g1\ns1,0.5\ns1,1.0\n").unwrap();
        let err = load_expression(&p).unwrap_err().to_string();
        assert!(err.contains("s1"), "{}", err);
    }

    #[test]
    fn ragged_row_located() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "sample_id,g1,g2\ns1,0.5\n").unwrap();
        let err = load_expression(&p).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{}", err);
    }

    #[test]
    fn non_numeric_cell_located() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "sample_id,g1\ns1,abc\n").unwrap();
        let err = load_expression(&p).unwrap_err().to_string();
        assert!(err.contains("abc"), "{}", err);
    }

    #[test]
    fn expression_roundtrip_bit_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let m = expr(
            &["a", "b"],
            &["g1", "g2", "g3"],
            &[0.1, -2.5, 1.0 / 3.0, 1e-17, 7.25, -0.0],
        );
        write_expression(&m, &p).unwrap();
        let back = load_expression(&p).unwrap();
        for (a, b) in m.values.entries().iter().zip(back.values.entries()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn responses_and_labels() {
        let dir = tempdir().unwrap();
        let pr = dir.path().join("y.csv");
        std::fs::write(&pr, "sample_id,value\ns1,0.5\n").unwrap();
        let r = load_responses(&pr).unwrap();
        assert_eq!(r.values, vec![0.5]);

        let pl = dir.path().join("l.csv");
        std::fs::write(&pl, "sample_id,label\ns1,Sensitive\ns2,RESISTANT\n").unwrap();
        let l = load_labels(&pl).unwrap();
        assert_eq!(l.outcomes, vec![Outcome::Sensitive, Outcome::Resistant]);

        std::fs::write(&pl, "sample_id,label\ns1,partial\n").unwrap();
        let err = load_labels(&pl).unwrap_err().to_string();
        assert!(err.contains("partial"), "{}", err);
    }

    #[test]
    fn align_identical_gene_sets() {
        let a = expr(&["a"], &["g1", "g2"], &[1.0, 2.0]);
        let b = expr(&["t"], &["g1", "g2"], &[3.0, 4.0]);
        let r = align_genes(&a, &b).unwrap();
        assert_eq!(r.train.gene_ids, a.gene_ids);
        assert_eq!(r.test.values.entries(), b.values.entries());
        assert!(r.warning.is_none());
    }

    #[test]
    fn align_drops_missing_gene() {
        let a = expr(&["a"], &["g1", "g2", "g3"], &[1.0, 2.0, 3.0]);
        let b = expr(&["t"], &["g3", "g1"], &[30.0, 10.0]);
        let r = align_genes(&a, &b).unwrap();
        assert_eq!(r.train.gene_ids, vec!["g1", "g3"]);
        assert_eq!(r.train.values.entries(), &[1.0, 3.0]);
        assert_eq!(r.test.values.entries(), &[10.0, 30.0]);
        assert!(r.warning.is_some());
    }

    #[test]
    fn align_empty_intersection() {
        let a = expr(&["a"], &["g1"], &[1.0]);
        let b = expr(&["t"], &["g9"], &[2.0]);
        assert!(align_genes(&a, &b).is_err());
    }

    #[test]
    fn align_is_order_insensitive_on_test() {
        let a = expr(&["a"], &["g1", "g2", "g3"], &[1.0, 2.0, 3.0]);
        let b1 = expr(&["t"], &["g1", "g2", "g3"], &[10.0, 20.0, 30.0]);
        let b2 = expr(&["t"], &["g3", "g2", "g1"], &[30.0, 20.0, 10.0]);
        let r1 = align_genes(&a, &b1).unwrap();
        let r2 = align_genes(&a, &b2).unwrap();
        assert_eq!(r1.test.gene_ids, r2.test.gene_ids);
        assert_eq!(r1.test.values.entries(), r2.test.values.entries());
    }
}
