//! Fréchet distance between Gaussian feature statistics.
//!
//! FID = ‖μ₁−μ₂‖² + Tr(Σ₁ + Σ₂ − 2·(Σ₁Σ₂)^{1/2}). The matrix square root
//! is taken in the symmetric form sqrt(Σ₁^{1/2} Σ₂ Σ₁^{1/2}) so the
//! intermediate is symmetric PSD and the eigendecomposition stays real.
//! Feature extraction is out of scope; inputs are feature files or
//! precomputed stats documents.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

/// Relative tolerance for clamping small negative eigenvalues.
pub const EIGEN_CLAMP_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FidError {
    #[error("too few samples: covariance needs N >= 2, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite value in feature input")]
    NonFiniteInput,
    #[error("covariance dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("covariance is not positive semidefinite (eigenvalue {eigenvalue:.3e} below tolerance)")]
    NonPsdCovariance { eigenvalue: f64 },
    #[error("non-finite result")]
    NonFiniteResult,
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// N×D matrix of feature vectors, one sample per row.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, FidError> {
        assert_eq!(values.len(), rows * cols, "feature buffer length mismatch");
        if rows < 2 {
            return Err(FidError::TooFewSamples(rows));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FidError::NonFiniteInput);
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }
}

/// Gaussian summary (mean, covariance) of a feature set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureStats {
    pub dim: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub n: usize,
}

impl FeatureStats {
    fn mean_vec(&self) -> DVector<f64> {
        DVector::from_vec(self.mean.clone())
    }

    fn cov_mat(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.cov[r][c])
    }
}

/// Column means and unbiased (N−1) sample covariance, symmetrized.
pub fn stats_from_features(f: &FeatureMatrix) -> Result<FeatureStats, FidError> {
    let (n, d) = (f.rows, f.cols);
    let mut mean = vec![0.0f64; d];
    for r in 0..n {
        for c in 0..d {
            mean[c] += f.at(r, c);
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = vec![vec![0.0f64; d]; d];
    for r in 0..n {
        for i in 0..d {
            let di = f.at(r, i) - mean[i];
            for (j, cov_ij) in cov[i].iter_mut().enumerate().skip(i) {
                *cov_ij += di * (f.at(r, j) - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i][j] / denom;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    Ok(FeatureStats { dim: d, mean, cov, n })
}

/// Symmetric PSD square root via eigendecomposition; eigenvalues within
/// [-tol, 0) are clamped to 0, anything below tol is an error.
fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>, FidError> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let tol = EIGEN_CLAMP_REL_TOL * lambda_max.max(1.0);
    let mut sqrt_vals = DVector::zeros(eig.eigenvalues.len());
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l < -tol {
            return Err(FidError::NonPsdCovariance { eigenvalue: l });
        }
        sqrt_vals[i] = l.max(0.0).sqrt();
    }
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&sqrt_vals) * v.transpose())
}

/// Fréchet distance between two Gaussian stats.
pub fn frechet_distance(a: &FeatureStats, b: &FeatureStats) -> Result<f64, FidError> {
    if a.dim != b.dim {
        return Err(FidError::DimensionMismatch(a.dim, b.dim));
    }
    let mu_a = a.mean_vec();
    let mu_b = b.mean_vec();
    let sigma_a = a.cov_mat();
    let sigma_b = b.cov_mat();

    let diff = &mu_a - &mu_b;
    let mean_term = diff.dot(&diff);

    let sqrt_a = psd_sqrt(&sigma_a)?;
    let inner = &sqrt_a * &sigma_b * &sqrt_a;
    let sqrt_inner = psd_sqrt(&inner)?;

    let fid = mean_term + sigma_a.trace() + sigma_b.trace() - 2.0 * sqrt_inner.trace();
    if !fid.is_finite() {
        return Err(FidError::NonFiniteResult);
    }
    if fid < -1e-8 {
        return Err(FidError::NonFiniteResult);
    }
    Ok(fid.max(0.0))
}

/// Parsed feature-file content: raw samples or a stats document.
#[derive(Debug, Clone)]
pub enum FeatureInput {
    Raw(FeatureStats),
    Stats(FeatureStats),
}

impl FeatureInput {
    pub fn stats(&self) -> &FeatureStats {
        match self {
            FeatureInput::Raw(s) | FeatureInput::Stats(s) => s,
        }
    }
}

/// Report for one FID computation from files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FidReport {
    pub fid: f64,
    pub dim: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub digest_a: String,
    pub digest_b: String,
}

fn parse_err(path: &Path, detail: impl ToString) -> FidError {
    FidError::Parse { path: path.to_path_buf(), detail: detail.to_string() }
}

/// Parse a feature file: binary ("FEAT" magic), JSON stats document, or
/// CSV with optional header.
pub fn read_feature_file(path: &Path) -> Result<FeatureInput, FidError> {
    let bytes = std::fs::read(path)
        .map_err(|e| FidError::Io { path: path.to_path_buf(), source: e })?;
    if bytes.starts_with(b"FEAT") {
        let f = parse_binary_features(path, &bytes)?;
        return Ok(FeatureInput::Raw(stats_from_features(&f)?));
    }
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| parse_err(path, "not valid UTF-8 (and not a FEAT binary)"))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let stats: FeatureStats =
            serde_json::from_str(trimmed).map_err(|e| parse_err(path, e))?;
        if stats.mean.len() != stats.dim
            || stats.cov.len() != stats.dim
            || stats.cov.iter().any(|row| row.len() != stats.dim)
        {
            return Err(parse_err(path, "stats document dimensions are inconsistent"));
        }
        return Ok(FeatureInput::Stats(stats));
    }
    let f = parse_csv_features(path, text)?;
    Ok(FeatureInput::Raw(stats_from_features(&f)?))
}

fn parse_binary_features(path: &Path, bytes: &[u8]) -> Result<FeatureMatrix, FidError> {
    if bytes.len() < 12 {
        return Err(parse_err(path, "truncated FEAT header"));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expect = 12 + n * d * 4;
    if bytes.len() != expect {
        return Err(parse_err(
            path,
            format!("FEAT payload length {} != expected {}", bytes.len(), expect),
        ));
    }
    let values: Vec<f64> = bytes[12..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    FeatureMatrix::new(n, d, values)
}

fn parse_csv_features(path: &Path, text: &str) -> Result<FeatureMatrix, FidError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => rows.push(vals),
            // a non-numeric first row is a header; anywhere else it's corrupt
            Err(_) if idx == 0 && rows.is_empty() => continue,
            Err(e) => return Err(parse_err(path, format!("line {}: {e}", idx + 1))),
        }
    }
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    if cols == 0 {
        return Err(parse_err(path, "no feature rows"));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(parse_err(path, "inconsistent column counts"));
    }
    let n = rows.len();
    FeatureMatrix::new(n, cols, rows.into_iter().flatten().collect())
}

fn file_digest(path: &Path) -> Result<String, FidError> {
    let bytes = std::fs::read(path)
        .map_err(|e| FidError::Io { path: path.to_path_buf(), source: e })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Compute FID between two feature files (raw features or stats documents).
pub fn fid_from_files(path_a: &Path, path_b: &Path) -> Result<FidReport, FidError> {
    let a = read_feature_file(path_a)?;
    let b = read_feature_file(path_b)?;
    let fid = frechet_distance(a.stats(), b.stats())?;
    Ok(FidReport {
        fid,
        dim: a.stats().dim,
        n_a: a.stats().n,
        n_b: b.stats().n,
        digest_a: file_digest(path_a)?,
        digest_b: file_digest(path_b)?,
    })
}
