//! Benchmark harness: seeded subset sampling, fidelity-curve analysis
//! (percent reductions, interval slopes, plateau detection), complexity
//! vs. FID rank correlation, and the report bundle emitter.
//!
//! GAN training itself is a boundary: this module produces the sampling
//! manifests that feed external training and consumes the FID scores that
//! come back.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{fmt_g9, round_g9};
use crate::stats::{distribution_to_csv, DatasetDistribution};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("requested {requested} samples but the listing has only {available}")]
    SizeExceedsDataset { requested: usize, available: usize },
    #[error("empty dataset listing")]
    EmptyListing,
    #[error("duplicate content hash in manifest: {0}")]
    DuplicateContent(String),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("division by zero: FID at the smallest training size is 0")]
    DivisionByZero,
    #[error("dataset {0} is missing from the curve list")]
    MissingDataset(String),
    #[error("curve for {dataset} has no point at training size {size}")]
    MissingSizePoint { dataset: String, size: u64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Imaging(#[from] crate::imaging::ImagingError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub content_hash: String,
}

/// Frozen, seeded subset listing; reproducibility rests on this file, not
/// on the PRNG that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub schema: String,
    pub dataset_id: String,
    pub size: usize,
    pub seed: u64,
    pub members: Vec<ManifestEntry>,
}

/// Select `size` paths from the listing with a partial Fisher-Yates
/// shuffle. The listing is sorted lexicographically first and the shuffle
/// is driven by ChaCha20 seeded from `seed`, so identical inputs always
/// select identical subsets.
pub fn sample_paths(
    listing: &[PathBuf],
    size: usize,
    seed: u64,
) -> Result<Vec<PathBuf>, BenchError> {
    if listing.is_empty() {
        return Err(BenchError::EmptyListing);
    }
    if size > listing.len() {
        return Err(BenchError::SizeExceedsDataset { requested: size, available: listing.len() });
    }
    let mut pool: Vec<PathBuf> = listing.to_vec();
    pool.sort();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for i in 0..size {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(size);
    Ok(pool)
}

/// Build a manifest from sampled paths, hashing each member with the
/// supplied hasher. Duplicate content hashes are rejected.
pub fn build_manifest<F>(
    dataset_id: &str,
    seed: u64,
    selected: Vec<PathBuf>,
    mut hasher: F,
) -> Result<SampleManifest, BenchError>
where
    F: FnMut(&Path) -> Result<String, BenchError>,
{
    let mut seen = std::collections::HashSet::new();
    let mut members = Vec::with_capacity(selected.len());
    for path in selected {
        let content_hash = hasher(&path)?;
        if !seen.insert(content_hash.clone()) {
            return Err(BenchError::DuplicateContent(content_hash));
        }
        members.push(ManifestEntry { path: path.display().to_string(), content_hash });
    }
    Ok(SampleManifest {
        schema: "v1".to_string(),
        dataset_id: dataset_id.to_string(),
        size: members.len(),
        seed,
        members,
    })
}

pub fn manifest_to_json(m: &SampleManifest) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("manifest serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub training_size: u64,
    pub fid: f64,
}

/// FID as a function of training-set size for one dataset and model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub dataset_id: String,
    pub model_label: String,
    pub points: Vec<CurvePoint>,
}

impl FidelityCurve {
    pub fn new(
        dataset_id: &str,
        model_label: &str,
        mut points: Vec<CurvePoint>,
    ) -> Result<Self, BenchError> {
        if points.len() < 2 {
            return Err(BenchError::DegenerateCurve(format!(
                "curve {dataset_id}/{model_label} needs at least 2 points, got {}",
                points.len()
            )));
        }
        points.sort_by_key(|p| p.training_size);
        if points.windows(2).any(|w| w[0].training_size == w[1].training_size) {
            return Err(BenchError::InvalidCurve(format!(
                "curve {dataset_id}/{model_label} has duplicate training sizes"
            )));
        }
        if points.iter().any(|p| !(p.fid >= 0.0)) {
            return Err(BenchError::InvalidCurve(format!(
                "curve {dataset_id}/{model_label} has a negative or NaN FID"
            )));
        }
        Ok(Self {
            dataset_id: dataset_id.to_string(),
            model_label: model_label.to_string(),
            points,
        })
    }

    pub fn fid_at(&self, size: u64) -> Option<f64> {
        self.points.iter().find(|p| p.training_size == size).map(|p| p.fid)
    }
}

/// (fid_smallest - fid_largest) / fid_smallest.
pub fn percent_reduction(curve: &FidelityCurve) -> Result<f64, BenchError> {
    if curve.points.len() < 2 {
        return Err(BenchError::DegenerateCurve("fewer than 2 points".to_string()));
    }
    let first = curve.points.first().unwrap().fid;
    let last = curve.points.last().unwrap().fid;
    if first == 0.0 {
        return Err(BenchError::DivisionByZero);
    }
    Ok((first - last) / first)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSlope {
    pub from_size: u64,
    pub to_size: u64,
    /// FID change per training image.
    pub slope: f64,
    /// |slope| below the plateau threshold.
    pub plateau: bool,
}

pub const DEFAULT_PLATEAU_THRESHOLD: f64 = 1e-3;

/// Finite-difference slope per consecutive interval.
pub fn curve_slopes(
    curve: &FidelityCurve,
    plateau_threshold: f64,
) -> Result<Vec<IntervalSlope>, BenchError> {
    if curve.points.len() < 2 {
        return Err(BenchError::DegenerateCurve("fewer than 2 points".to_string()));
    }
    Ok(curve
        .points
        .windows(2)
        .map(|w| {
            let slope = (w[1].fid - w[0].fid) / (w[1].training_size - w[0].training_size) as f64;
            IntervalSlope {
                from_size: w[0].training_size,
                to_size: w[1].training_size,
                slope,
                plateau: slope.abs() < plateau_threshold,
            }
        })
        .collect())
}

/// Which distribution statistic to correlate against FID.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityStat {
    Mean,
    StdDev,
    Cv,
}

impl ComplexityStat {
    fn value_of(self, d: &DatasetDistribution) -> Option<f64> {
        match self {
            ComplexityStat::Mean => Some(d.mean),
            ComplexityStat::StdDev => Some(d.std_dev),
            ComplexityStat::Cv => {
                if d.mean == 0.0 {
                    None
                } else {
                    Some(d.std_dev / d.mean)
                }
            }
        }
    }
}

impl std::str::FromStr for ComplexityStat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(ComplexityStat::Mean),
            "std" | "stddev" => Ok(ComplexityStat::StdDev),
            "cv" => Ok(ComplexityStat::Cv),
            _ => Err(format!("unknown stat {s:?} (expected mean, std or cv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPair {
    pub dataset_id: String,
    pub complexity_stat: f64,
    pub fid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub model_label: String,
    pub stat: ComplexityStat,
    pub size: u64,
    pub pairs: Vec<CorrelationPair>,
    /// Absent when fewer than 3 datasets are available.
    pub spearman_rho: Option<f64>,
}

/// Ranks with average-rank tie handling (1-based).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn has_ties(ranks: &[f64]) -> bool {
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Spearman rank correlation with average-rank tie handling. Without ties
/// the closed form 1 - 6Σd²/(n(n²-1)) is used so perfect orderings give
/// exactly ±1; with ties it falls back to Pearson on the rank vectors.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    if !has_ties(&rx) && !has_ties(&ry) {
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
        let nf = n as f64;
        return Some(1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0)));
    }
    let mx = rx.iter().sum::<f64>() / n as f64;
    let my = ry.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..n {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx).powi(2);
        vy += (ry[i] - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

/// Pair each dataset's complexity statistic with its FID at `at_size` and
/// rank-correlate. `curves` must hold exactly one curve per dataset (one
/// model label).
pub fn correlation_report(
    distributions: &[DatasetDistribution],
    curves: &[FidelityCurve],
    at_size: u64,
    stat: ComplexityStat,
) -> Result<CorrelationReport, BenchError> {
    let model_label =
        curves.first().map(|c| c.model_label.clone()).unwrap_or_default();
    let mut pairs = Vec::new();
    for d in distributions {
        let curve = curves
            .iter()
            .find(|c| c.dataset_id == d.dataset_id)
            .ok_or_else(|| BenchError::MissingDataset(d.dataset_id.clone()))?;
        let fid = curve.fid_at(at_size).ok_or(BenchError::MissingSizePoint {
            dataset: d.dataset_id.clone(),
            size: at_size,
        })?;
        let complexity = stat.value_of(d).ok_or_else(|| {
            BenchError::InvalidCurve(format!(
                "CV undefined for dataset {} (mean is 0)",
                d.dataset_id
            ))
        })?;
        pairs.push(CorrelationPair { dataset_id: d.dataset_id.clone(), complexity_stat: complexity, fid });
    }
    let rho = if pairs.len() >= 3 {
        let xs: Vec<f64> = pairs.iter().map(|p| p.complexity_stat).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.fid).collect();
        spearman_rho(&xs, &ys)
    } else {
        None
    };
    Ok(CorrelationReport { model_label, stat, size: at_size, pairs, spearman_rho: rho })
}

/// Parse FID score rows: dataset_id,model_label,training_size,fid (header
/// optional), grouped into one curve per (dataset, model).
pub fn parse_fid_csv(path: &Path) -> Result<Vec<FidelityCurve>, BenchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Io { path: path.to_path_buf(), source: e })?;
    let mut groups: BTreeMap<(String, String), Vec<CurvePoint>> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(BenchError::Parse {
                path: path.to_path_buf(),
                detail: format!("line {}: expected 4 columns, got {}", idx + 1, fields.len()),
            });
        }
        let size = fields[2].parse::<u64>();
        let fid = fields[3].parse::<f64>();
        match (size, fid) {
            (Ok(size), Ok(fid)) => {
                groups
                    .entry((fields[0].to_string(), fields[1].to_string()))
                    .or_default()
                    .push(CurvePoint { training_size: size, fid });
            }
            _ if idx == 0 => continue, // header row
            _ => {
                return Err(BenchError::Parse {
                    path: path.to_path_buf(),
                    detail: format!("line {}: non-numeric size or fid", idx + 1),
                })
            }
        }
    }
    groups
        .into_iter()
        .map(|((dataset, model), points)| FidelityCurve::new(&dataset, &model, points))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveAnalysis {
    pub dataset_id: String,
    pub model_label: String,
    pub points: Vec<CurvePoint>,
    pub percent_reduction: f64,
    pub slopes: Vec<IntervalSlope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub dataset_id: String,
    pub metric: crate::metrics::MetricKind,
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
}

/// Top-level report document written to `<outdir>/report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema: String,
    pub plateau_threshold: f64,
    pub curves: Vec<CurveAnalysis>,
    pub mean_percent_reduction_by_model: BTreeMap<String, f64>,
    pub distributions: Vec<DistributionSummary>,
    pub correlations: Vec<CorrelationReport>,
}

/// Assemble the analysis document: reductions and slopes per curve, the
/// per-model arithmetic mean of reductions, distribution summaries, and
/// the supplied correlation reports. All floats are rounded to the
/// 9-significant-digit print precision.
pub fn assemble_report(
    curves: &[FidelityCurve],
    distributions: &[DatasetDistribution],
    correlations: Vec<CorrelationReport>,
    plateau_threshold: f64,
) -> Result<ReportBundle, BenchError> {
    if curves.is_empty() {
        return Err(BenchError::DegenerateCurve("no curves supplied".to_string()));
    }
    let mut analyses = Vec::with_capacity(curves.len());
    let mut by_model: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for c in curves {
        let reduction = percent_reduction(c)?;
        let slopes = curve_slopes(c, plateau_threshold)?
            .into_iter()
            .map(|s| IntervalSlope { slope: round_g9(s.slope), ..s })
            .collect();
        by_model.entry(c.model_label.clone()).or_default().push(reduction);
        analyses.push(CurveAnalysis {
            dataset_id: c.dataset_id.clone(),
            model_label: c.model_label.clone(),
            points: c
                .points
                .iter()
                .map(|p| CurvePoint { training_size: p.training_size, fid: round_g9(p.fid) })
                .collect(),
            percent_reduction: round_g9(reduction),
            slopes,
        });
    }
    let mean_by_model = by_model
        .into_iter()
        .map(|(k, v)| (k, round_g9(v.iter().sum::<f64>() / v.len() as f64)))
        .collect();
    let correlations = correlations
        .into_iter()
        .map(|mut c| {
            c.spearman_rho = c.spearman_rho.map(round_g9);
            for p in &mut c.pairs {
                p.complexity_stat = round_g9(p.complexity_stat);
                p.fid = round_g9(p.fid);
            }
            c
        })
        .collect();
    Ok(ReportBundle {
        schema: "v1".to_string(),
        plateau_threshold,
        curves: analyses,
        mean_percent_reduction_by_model: mean_by_model,
        distributions: distributions
            .iter()
            .map(|d| DistributionSummary {
                dataset_id: d.dataset_id.clone(),
                metric: d.metric,
                count: d.count,
                mean: round_g9(d.mean),
                std_dev: round_g9(d.std_dev),
            })
            .collect(),
        correlations,
    })
}

/// Write the report bundle: `report.json`, one `curves/<dataset>_<model>.csv`
/// per curve (size,fid rows) and one `distributions/<dataset>.csv` per
/// distribution (bin_low,bin_high,count rows). Returns the written paths.
pub fn emit_report(
    outdir: &Path,
    bundle: &ReportBundle,
    distributions: &[DatasetDistribution],
) -> Result<Vec<PathBuf>, BenchError> {
    let io_err = |path: &Path, e: std::io::Error| BenchError::Io { path: path.to_path_buf(), source: e };
    let curves_dir = outdir.join("curves");
    let dists_dir = outdir.join("distributions");
    std::fs::create_dir_all(&curves_dir).map_err(|e| io_err(&curves_dir, e))?;
    std::fs::create_dir_all(&dists_dir).map_err(|e| io_err(&dists_dir, e))?;

    let mut written = Vec::new();
    let report_path = outdir.join("report.json");
    let mut json = serde_json::to_string_pretty(bundle).expect("bundle serializes");
    json.push('\n');
    std::fs::write(&report_path, json).map_err(|e| io_err(&report_path, e))?;
    written.push(report_path);

    for c in &bundle.curves {
        let path = curves_dir.join(format!("{}_{}.csv", sanitize(&c.dataset_id), sanitize(&c.model_label)));
        let mut csv = String::from("size,fid\n");
        for p in &c.points {
            csv.push_str(&format!("{},{}\n", p.training_size, fmt_g9(p.fid)));
        }
        std::fs::write(&path, csv).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    for d in distributions {
        let path = dists_dir.join(format!("{}.csv", sanitize(&d.dataset_id)));
        std::fs::write(&path, distribution_to_csv(d)).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}
