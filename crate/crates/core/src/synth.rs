//! Seeded synthetic datasets for desk-scale verification of the filtering
//! pipeline. The generator is fully specified (splitmix64 feeding Box-Muller)
//! so identical seeds give byte-identical files on any platform.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{ClinicalLabels, Outcome};
use crate::io::{write_expression, write_labels, write_responses, ExpressionMatrix, ResponseVector};
use crate::linalg::DenseMatrix;

/// splitmix64: state advances by the golden-gamma increment, output passes
/// through the published finalizer. A cached Box-Muller half provides
/// normals.
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a log argument.
    fn next_f64_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; the sine half is cached.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        let u1 = self.next_f64_open_low();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * angle.sin());
        r * angle.cos()
    }

    /// Uniform integer in [0, bound) by rejection-free modulo; bias is
    /// negligible for the small bounds used here.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    /// Fraction of training rows receiving additive corruption, in [0, 1).
    pub noise_fraction: f64,
    pub clean_sigma: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub train: ExpressionMatrix,
    pub responses: ResponseVector,
    pub test: ExpressionMatrix,
    pub labels: ClinicalLabels,
    /// Ground truth: true where the training row was corrupted.
    pub corrupted: Vec<bool>,
}

fn validate(cfg: &SynthConfig) -> Result<()> {
    if cfg.m < 2 || cfg.n < 1 || cfg.p < 2 {
        return Err(Error::InvalidArgument(format!(
            "synthetic sizes too small: m={}, n={}, p={}",
            cfg.m, cfg.n, cfg.p
        )));
    }
    if !(0.0..1.0).contains(&cfg.noise_fraction) {
        return Err(Error::InvalidArgument(format!(
            "noise fraction must be in [0, 1), got {}",
            cfg.noise_fraction
        )));
    }
    if !(cfg.clean_sigma > 0.0) || !(cfg.noise_sigma > 0.0) {
        return Err(Error::InvalidArgument("sigmas must be positive".into()));
    }
    if cfg.noise_sigma <= cfg.clean_sigma {
        return Err(Error::InvalidArgument(format!(
            "noise_sigma ({}) must exceed clean_sigma ({})",
            cfg.noise_sigma, cfg.clean_sigma
        )));
    }
    Ok(())
}

/// Latent-linear dataset: responses follow a hidden weight vector; a seeded
/// subset of training rows gets additive high-variance corruption; clean
/// test rows are labeled sensitive when their latent score falls below the
/// test-score median.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SyntheticData> {
    validate(cfg)?;
    let (m, n, p) = (cfg.m, cfg.n, cfg.p);
    let mut rng = SplitMix64::new(cfg.seed);

    // Latent weights w ~ N(0,1)^n / sqrt(n).
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let w: Vec<f64> = (0..n).map(|_| rng.next_normal() * inv_sqrt_n).collect();

    // Clean training rows.
    let mut train_entries = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        train_entries.push(rng.next_normal() * cfg.clean_sigma);
    }

    // Responses from the clean signal.
    let response_sigma = 0.1f64.sqrt();
    let mut y = Vec::with_capacity(m);
    for i in 0..m {
        let dot: f64 = (0..n).map(|j| train_entries[i * n + j] * w[j]).sum();
        y.push(dot + rng.next_normal() * response_sigma);
    }

    // Corrupted subset by partial Fisher-Yates.
    let k = (cfg.noise_fraction * m as f64).ceil() as usize;
    let mut pool: Vec<usize> = (0..m).collect();
    for i in 0..k {
        let j = i + rng.next_below((m - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut corrupted = vec![false; m];
    for &i in &pool[..k] {
        corrupted[i] = true;
    }
    for i in 0..m {
        if corrupted[i] {
            for j in 0..n {
                train_entries[i * n + j] += rng.next_normal() * cfg.noise_sigma;
            }
        }
    }

    // Clean test rows and median-split labels.
    let mut test_entries = Vec::with_capacity(p * n);
    for _ in 0..p * n {
        test_entries.push(rng.next_normal() * cfg.clean_sigma);
    }
    let scores: Vec<f64> = (0..p)
        .map(|i| (0..n).map(|j| test_entries[i * n + j] * w[j]).sum())
        .collect();
    let mut sorted = scores.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if p % 2 == 0 {
        (sorted[p / 2 - 1] + sorted[p / 2]) / 2.0
    } else {
        sorted[p / 2]
    };
    let outcomes: Vec<Outcome> = scores
        .iter()
        .map(|&s| {
            if s < median {
                Outcome::Sensitive
            } else {
                Outcome::Resistant
            }
        })
        .collect();

    let gene_ids: Vec<String> = (1..=n).map(|j| format!("g{}", j)).collect();
    let train_ids: Vec<String> = (1..=m).map(|i| format!("s{}", i)).collect();
    let test_ids: Vec<String> = (1..=p).map(|i| format!("t{}", i)).collect();

    Ok(SyntheticData {
        train: ExpressionMatrix::new(
            train_ids.clone(),
            gene_ids.clone(),
            DenseMatrix::from_vec(m, n, train_entries)?,
        )?,
        responses: ResponseVector {
            sample_ids: train_ids,
            values: y,
        },
        test: ExpressionMatrix::new(test_ids.clone(), gene_ids, DenseMatrix::from_vec(p, n, test_entries)?)?,
        labels: ClinicalLabels::new(test_ids, outcomes)?,
        corrupted,
    })
}

/// Writes train_x.csv, train_y.csv, test_x.csv, test_labels.csv, and
/// noise_flags.csv into `dir`.
pub fn write_synthetic(data: &SyntheticData, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write_expression(&data.train, &dir.join("train_x.csv"))?;
    write_responses(&data.responses, &dir.join("train_y.csv"))?;
    write_expression(&data.test, &dir.join("test_x.csv"))?;
    write_labels(&data.labels, &dir.join("test_labels.csv"))?;
    let mut flags = String::from("sample_id,corrupted\n");
    for (id, c) in data.train.sample_ids.iter().zip(&data.corrupted) {
        flags.push_str(&format!("{},{}\n", id, if *c { 1 } else { 0 }));
    }
    let p = dir.join("noise_flags.csv");
    std::fs::write(&p, flags).map_err(|source| Error::Io {
        path: p.display().to_string(),
        source,
    })
}
