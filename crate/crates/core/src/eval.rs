//! Evaluation against binary clinical outcomes: midrank (Mann-Whitney) AUC,
//! ROC points, Welch/pooled t-tests backed by a continued-fraction
//! regularized incomplete beta, and mean AUC across runs.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Sensitive,
    Resistant,
}

impl Outcome {
    pub fn parse(token: &str) -> Option<Outcome> {
        match token.to_ascii_lowercase().as_str() {
            "sensitive" => Some(Outcome::Sensitive),
            "resistant" => Some(Outcome::Resistant),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Sensitive => "sensitive",
            Outcome::Resistant => "resistant",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClinicalLabels {
    pub sample_ids: Vec<String>,
    pub outcomes: Vec<Outcome>,
}

impl ClinicalLabels {
    pub fn new(sample_ids: Vec<String>, outcomes: Vec<Outcome>) -> Result<Self> {
        if sample_ids.len() != outcomes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids but {} outcomes",
                sample_ids.len(),
                outcomes.len()
            )));
        }
        Ok(Self {
            sample_ids,
            outcomes,
        })
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Direction linking predicted scores to the sensitive class. IC50-like
/// scores are lower for sensitive samples, hence the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    HigherSensitive,
    LowerSensitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TTestKind {
    Welch,
    Pooled,
}

#[derive(Debug, Clone, Copy)]
pub struct RocPoint {
    /// Effective-score threshold: a sample is called sensitive when its
    /// effective score >= threshold. Infinite for the leading (0,0) point.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub auc: f64,
    pub roc_points: Vec<RocPoint>,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub n_sensitive: usize,
    pub n_resistant: usize,
}

fn effective_scores(scores: &[f64], polarity: Polarity) -> Vec<f64> {
    match polarity {
        Polarity::HigherSensitive => scores.to_vec(),
        Polarity::LowerSensitive => scores.iter().map(|s| -s).collect(),
    }
}

fn check_paired(scores: &[f64], labels: &ClinicalLabels) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("score value {}", bad)));
    }
    let pos = labels
        .outcomes
        .iter()
        .filter(|o| **o == Outcome::Sensitive)
        .count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument(
            "AUC requires at least one sample of each class".into(),
        ));
    }
    Ok((pos, neg))
}

/// Mann-Whitney AUC with midranks for ties: the probability that a random
/// sensitive sample outranks a random resistant one, ties counting half.
pub fn auc_midrank(scores: &[f64], labels: &ClinicalLabels, polarity: Polarity) -> Result<f64> {
    let (pos, neg) = check_paired(scores, labels)?;
    let eff = effective_scores(scores, polarity);
    let n = eff.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eff[i].partial_cmp(&eff[j]).unwrap().then(i.cmp(&j)));

    // Midranks over tied runs.
    let mut ranks = vec![0.0f64; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && eff[idx[end + 1]] == eff[idx[start]] {
            end += 1;
        }
        let mid = (start + 1 + end + 1) as f64 / 2.0;
        for k in start..=end {
            ranks[idx[k]] = mid;
        }
        start = end + 1;
    }

    let r_pos: f64 = (0..n)
        .filter(|&i| labels.outcomes[i] == Outcome::Sensitive)
        .map(|i| ranks[i])
        .sum();
    let (pos_f, neg_f) = (pos as f64, neg as f64);
    Ok((r_pos - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg_f))
}

/// ROC points, one per distinct effective-score threshold (descending),
/// prefixed by (0,0). Trapezoidal area equals `auc_midrank`.
pub fn roc_points(
    scores: &[f64],
    labels: &ClinicalLabels,
    polarity: Polarity,
) -> Result<Vec<RocPoint>> {
    let (pos, neg) = check_paired(scores, labels)?;
    let eff = effective_scores(scores, polarity);
    let n = eff.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eff[j].partial_cmp(&eff[i]).unwrap().then(i.cmp(&j)));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < n {
        let threshold = eff[idx[k]];
        while k < n && eff[idx[k]] == threshold {
            match labels.outcomes[idx[k]] {
                Outcome::Sensitive => tp += 1,
                Outcome::Resistant => fp += 1,
            }
            k += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(points)
}

pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        area += (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0;
    }
    area
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided t-test between two groups, Welch by default.
/// Returns (t, degrees of freedom, two-sided p).
pub fn t_test(group_a: &[f64], group_b: &[f64], kind: TTestKind) -> Result<(f64, f64, f64)> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(Error::InvalidArgument(
            "t-test needs at least 2 samples per group".into(),
        ));
    }
    for v in group_a.iter().chain(group_b) {
        if !v.is_finite() {
            return Err(Error::NonFinite("t-test input".into()));
        }
    }
    let (na, nb) = (group_a.len() as f64, group_b.len() as f64);
    let (ma, va) = mean_var(group_a);
    let (mb, vb) = mean_var(group_b);
    if va == 0.0 && vb == 0.0 {
        if ma == mb {
            // Degenerate but unambiguous: identical constant groups.
            return Ok((0.0, na + nb - 2.0, 1.0));
        }
        return Err(Error::InvalidArgument(
            "both groups have zero variance with unequal means".into(),
        ));
    }
    let (t, df) = match kind {
        TTestKind::Welch => {
            let sa = va / na;
            let sb = vb / nb;
            let t = (ma - mb) / (sa + sb).sqrt();
            let df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
            (t, df)
        }
        TTestKind::Pooled => {
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            let t = (ma - mb) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
            (t, na + nb - 2.0)
        }
    };
    let p = student_t_two_sided_p(t, df)?;
    Ok((t, df, p))
}

pub fn welch_t_test(group_a: &[f64], group_b: &[f64]) -> Result<(f64, f64, f64)> {
    t_test(group_a, group_b, TTestKind::Welch)
}

/// Two-sided Student-t p-value: I_{df/(df+t²)}(df/2, 1/2).
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degrees of freedom must be > 0, got {}",
            df
        )));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    incomplete_beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9.
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta Iₓ(a,b) by the Lentz continued fraction,
/// accurate to roughly 1e-14; switches to the symmetric form for fast
/// convergence.
pub fn incomplete_beta_reg(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "incomplete beta requires a, b > 0, got a={}, b={}",
            a, b
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "incomplete beta requires x in [0,1], got {}",
            x
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Mean AUC across shrinkage runs.
pub fn mauc(aucs: &[f64]) -> Result<f64> {
    if aucs.is_empty() {
        return Err(Error::InvalidArgument("mauc of an empty sequence".into()));
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Full evaluation of predicted scores against binary outcomes.
pub fn evaluate(
    scores: &[f64],
    labels: &ClinicalLabels,
    polarity: Polarity,
    t_kind: TTestKind,
) -> Result<EvalReport> {
    let auc = auc_midrank(scores, labels, polarity)?;
    let points = roc_points(scores, labels, polarity)?;
    let sensitive: Vec<f64> = scores
        .iter()
        .zip(&labels.outcomes)
        .filter(|(_, o)| **o == Outcome::Sensitive)
        .map(|(s, _)| *s)
        .collect();
    let resistant: Vec<f64> = scores
        .iter()
        .zip(&labels.outcomes)
        .filter(|(_, o)| **o == Outcome::Resistant)
        .map(|(s, _)| *s)
        .collect();
    let (t, df, p) = t_test(&sensitive, &resistant, t_kind)?;
    Ok(EvalReport {
        auc,
        roc_points: points,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        n_sensitive: sensitive.len(),
        n_resistant: resistant.len(),
    })
}
