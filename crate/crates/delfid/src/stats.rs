//! Per-dataset aggregation of complexity records and the append-only
//! record store used as a metric cache.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{ComplexityRecord, MetricKind};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Histogram configuration for distribution documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub range_low: f64,
    pub range_high: f64,
    pub bin_width: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        // [0, 18] bits covers delentropy under every supported kernel
        Self { range_low: 0.0, range_high: 18.0, bin_width: 0.25 }
    }
}

impl HistogramConfig {
    pub fn bin_count(&self) -> usize {
        ((self.range_high - self.range_low) / self.bin_width).ceil() as usize
    }
}

/// Distribution of one metric across a dataset (mean, population sigma,
/// fixed-width histogram).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDistribution {
    pub schema: String,
    pub dataset_id: String,
    pub metric: MetricKind,
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Vec<u64>,
    pub histogram_config: HistogramConfig,
    /// Values that fell outside the histogram range and were clamped into
    /// an edge bin.
    pub clamped: u64,
    /// Metric values sorted ascending; retained for quantile descriptors.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadDescriptors {
    /// σ/μ; absent when μ = 0.
    pub coefficient_of_variation: Option<f64>,
    pub iqr: f64,
    /// Local maxima of the 3-bin moving-average smoothed histogram.
    /// A plateau of equal smoothed values counts as one mode.
    pub modality: usize,
}

/// Aggregate records into a dataset distribution. Records are sorted by
/// content hash before accumulation so the result is independent of input
/// order.
pub fn aggregate(
    records: &[ComplexityRecord],
    metric: MetricKind,
    dataset_id: &str,
    config: HistogramConfig,
) -> Result<DatasetDistribution, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    let mut sorted: Vec<&ComplexityRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.content_hash.cmp(&b.content_hash));
    let values: Vec<f64> = sorted.iter().map(|r| metric.value_of(r)).collect();

    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std_dev = var.sqrt();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let bins = config.bin_count();
    let mut histogram = vec![0u64; bins];
    let mut clamped = 0u64;
    for &v in &values {
        let raw = ((v - config.range_low) / config.bin_width).floor() as i64;
        let idx = if raw < 0 {
            clamped += 1;
            0
        } else if raw as usize >= bins {
            if v > config.range_high {
                clamped += 1;
            }
            bins - 1
        } else {
            raw as usize
        };
        histogram[idx] += 1;
    }

    let mut sorted_values = values;
    sorted_values.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(DatasetDistribution {
        schema: "v1".to_string(),
        dataset_id: dataset_id.to_string(),
        metric,
        count: sorted.len(),
        mean,
        std_dev,
        min,
        max,
        histogram,
        histogram_config: config,
        clamped,
        values: sorted_values,
    })
}

/// Linear-interpolation quantile on sorted values (the "type 7" rule:
/// h = (n-1)q, interpolate between floor and ceil order statistics).
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn spread_descriptors(d: &DatasetDistribution) -> Result<SpreadDescriptors, StatsError> {
    if d.count == 0 || d.values.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    if d.count < 2 {
        return Err(StatsError::DegenerateDistribution(
            "spread descriptors need at least 2 records".to_string(),
        ));
    }
    let cv = if d.mean == 0.0 { None } else { Some(d.std_dev / d.mean) };
    let iqr = quantile_type7(&d.values, 0.75) - quantile_type7(&d.values, 0.25);
    Ok(SpreadDescriptors { coefficient_of_variation: cv, iqr, modality: modality(&d.histogram) })
}

/// Count modes: smooth with a 3-bin moving average (zero padded), then
/// count maximal runs of equal values that sit strictly above both
/// adjacent values.
fn modality(histogram: &[u64]) -> usize {
    let n = histogram.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= n {
            0.0
        } else {
            histogram[i as usize] as f64
        }
    };
    let smoothed: Vec<f64> = (0..n as isize).map(|i| (at(i - 1) + at(i) + at(i + 1)) / 3.0).collect();

    let mut modes = 0;
    let mut i = 0;
    while i < n {
        if smoothed[i] == 0.0 {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && smoothed[i + 1] == smoothed[start] {
            i += 1;
        }
        let before = if start == 0 { 0.0 } else { smoothed[start - 1] };
        let after = if i + 1 >= n { 0.0 } else { smoothed[i + 1] };
        if smoothed[start] > before && smoothed[start] > after {
            modes += 1;
        }
        i += 1;
    }
    modes
}

/// Diagnostic for a record-store line that failed to parse.
#[derive(Debug, Clone)]
pub struct CorruptLine {
    pub line_number: usize,
    pub detail: String,
}

/// Append-only JSON Lines record store keyed by (content_hash, tool_version).
/// Duplicates are resolved on read, last write wins. Appends take an
/// advisory exclusive lock so concurrent writers serialize.
#[derive(Debug, Clone)]
pub struct RecordStore {
    path: PathBuf,
}

impl RecordStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn io_err(&self, source: std::io::Error) -> StatsError {
        StatsError::Io { path: self.path.clone(), source }
    }

    pub fn put(&self, rec: &ComplexityRecord) -> Result<(), StatsError> {
        let line = serde_json::to_string(rec).expect("record serializes");
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| self.io_err(e))?;
        lock_exclusive(&file).map_err(|e| self.io_err(e))?;
        let result = writeln!(file, "{line}");
        unlock(&file);
        result.map_err(|e| self.io_err(e))
    }

    /// Load every readable record, deduplicated by key; corrupt lines are
    /// reported with their line numbers and do not abort the read.
    pub fn load(&self) -> Result<(HashMap<(String, String), ComplexityRecord>, Vec<CorruptLine>), StatsError> {
        let mut map = HashMap::new();
        let mut corrupt = Vec::new();
        let file = match std::fs::File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((map, corrupt)),
            Err(e) => return Err(self.io_err(e)),
        };
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| self.io_err(e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<ComplexityRecord>(&line) {
                Ok(rec) => {
                    map.insert((rec.content_hash.clone(), rec.tool_version.clone()), rec);
                }
                Err(e) => corrupt.push(CorruptLine { line_number: idx + 1, detail: e.to_string() }),
            }
        }
        Ok((map, corrupt))
    }

    pub fn get(
        &self,
        content_hash: &str,
        tool_version: &str,
    ) -> Result<Option<ComplexityRecord>, StatsError> {
        let (map, _) = self.load()?;
        Ok(map.get(&(content_hash.to_string(), tool_version.to_string())).cloned())
    }
}

fn lock_exclusive(file: &std::fs::File) -> std::io::Result<()> {
    use std::os::unix::io::AsRawFd;
    let rc = unsafe { libc::flock(file.as_raw_fd(), libc::LOCK_EX) };
    if rc == 0 {
        Ok(())
    } else {
        Err(std::io::Error::last_os_error())
    }
}

fn unlock(file: &std::fs::File) {
    use std::os::unix::io::AsRawFd;
    unsafe { libc::flock(file.as_raw_fd(), libc::LOCK_UN) };
}

/// CSV export of a distribution histogram: bin_low,bin_high,count.
pub fn distribution_to_csv(d: &DatasetDistribution) -> String {
    let mut out = String::from("bin_low,bin_high,count\n");
    let cfg = &d.histogram_config;
    for (i, &count) in d.histogram.iter().enumerate() {
        let low = cfg.range_low + i as f64 * cfg.bin_width;
        let high = low + cfg.bin_width;
        out.push_str(&format!(
            "{},{},{}\n",
            crate::report::fmt_g9(low),
            crate::report::fmt_g9(high),
            count
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{complexity_record, MetricParams};
    use crate::imaging::GrayImage;

    fn rec(hash: &str, de: f64) -> ComplexityRecord {
        ComplexityRecord {
            schema: "v1".into(),
            content_hash: hash.into(),
            shannon_bits: de,
            glcm_bits: de,
            delentropy_bits: de,
            width: 8,
            height: 8,
            tool_version: "test".into(),
        }
    }

    #[test]
    fn aggregate_single_record() {
        let d = aggregate(
            &[rec("a", 3.0)],
            MetricKind::Delentropy,
            "ds",
            HistogramConfig::default(),
        )
        .unwrap();
        assert_eq!(d.mean, 3.0);
        assert_eq!(d.std_dev, 0.0);
        assert_eq!(d.count, 1);
        assert_eq!(d.histogram.iter().sum::<u64>(), 1);
    }

    #[test]
    fn aggregate_two_values_hand_case() {
        let d = aggregate(
            &[rec("a", 2.0), rec("b", 4.0)],
            MetricKind::Delentropy,
            "ds",
            HistogramConfig::default(),
        )
        .unwrap();
        assert_eq!(d.mean, 3.0);
        assert_eq!(d.std_dev, 1.0); // population sigma
        assert_eq!(d.min, 2.0);
        assert_eq!(d.max, 4.0);
    }

    #[test]
    fn aggregate_permutation_invariant() {
        let recs: Vec<ComplexityRecord> =
            (0..20).map(|i| rec(&format!("{i:02}"), i as f64 / 3.0)).collect();
        let mut shuffled = recs.clone();
        shuffled.reverse();
        shuffled.swap(0, 7);
        let a = aggregate(&recs, MetricKind::Shannon, "ds", HistogramConfig::default()).unwrap();
        let b =
            aggregate(&shuffled, MetricKind::Shannon, "ds", HistogramConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aggregate_two_pass_oracle_parity() {
        // fixed synthetic list, compare to an independent two-pass oracle
        let values: Vec<f64> = (0..100).map(|i| ((i * 7919) % 180) as f64 / 10.0).collect();
        let recs: Vec<ComplexityRecord> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| rec(&format!("{i:03}"), v))
            .collect();
        let d = aggregate(&recs, MetricKind::Delentropy, "ds", HistogramConfig::default()).unwrap();
        let n = values.len() as f64;
        let mean_oracle: f64 = values.iter().sum::<f64>() / n;
        let var_oracle: f64 =
            values.iter().map(|v| (v - mean_oracle).powi(2)).sum::<f64>() / n;
        assert!((d.mean - mean_oracle).abs() < 1e-12);
        assert!((d.std_dev - var_oracle.sqrt()).abs() < 1e-12);
        assert_eq!(d.histogram.iter().sum::<u64>(), 100);
    }

    #[test]
    fn aggregate_clamps_out_of_range() {
        let d = aggregate(
            &[rec("a", -1.0), rec("b", 25.0), rec("c", 5.0)],
            MetricKind::Delentropy,
            "ds",
            HistogramConfig::default(),
        )
        .unwrap();
        assert_eq!(d.clamped, 2);
        assert_eq!(d.histogram.iter().sum::<u64>(), 3);
    }

    #[test]
    fn aggregate_empty_errors() {
        assert!(matches!(
            aggregate(&[], MetricKind::Shannon, "ds", HistogramConfig::default()),
            Err(StatsError::EmptyDataset)
        ));
    }

    #[test]
    fn spread_point_mass() {
        let recs: Vec<ComplexityRecord> =
            (0..10).map(|i| rec(&format!("{i}"), 4.0)).collect();
        let d = aggregate(&recs, MetricKind::Delentropy, "ds", HistogramConfig::default()).unwrap();
        let s = spread_descriptors(&d).unwrap();
        assert_eq!(s.coefficient_of_variation, Some(0.0));
        assert_eq!(s.iqr, 0.0);
        assert_eq!(s.modality, 1);
    }

    #[test]
    fn spread_bimodal() {
        let recs: Vec<ComplexityRecord> = (0..20)
            .map(|i| rec(&format!("{i:02}"), if i < 10 { 2.0 } else { 6.0 }))
            .collect();
        let d = aggregate(&recs, MetricKind::Delentropy, "ds", HistogramConfig::default()).unwrap();
        let s = spread_descriptors(&d).unwrap();
        assert_eq!(s.modality, 2);
    }

    #[test]
    fn spread_iqr_hand_case() {
        // values {1,2,3,4}, type 7: q25 at h=0.75 -> 1.75, q75 at h=2.25 -> 3.25
        let recs: Vec<ComplexityRecord> =
            (1..=4).map(|i| rec(&format!("{i}"), i as f64)).collect();
        let d = aggregate(&recs, MetricKind::Delentropy, "ds", HistogramConfig::default()).unwrap();
        let s = spread_descriptors(&d).unwrap();
        assert!((s.iqr - 1.5).abs() < 1e-12);
    }

    #[test]
    fn spread_cv_absent_when_mean_zero() {
        let recs = vec![rec("a", 0.0), rec("b", 0.0)];
        let d = aggregate(&recs, MetricKind::Delentropy, "ds", HistogramConfig::default()).unwrap();
        let s = spread_descriptors(&d).unwrap();
        assert_eq!(s.coefficient_of_variation, None);
    }

    #[test]
    fn distribution_roundtrip() {
        let recs: Vec<ComplexityRecord> =
            (0..5).map(|i| rec(&format!("{i}"), i as f64)).collect();
        let d = aggregate(&recs, MetricKind::Glcm, "ds", HistogramConfig::default()).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        let back: DatasetDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn store_put_get_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let store = RecordStore::new(dir.path().join("records.jsonl"));
        let img = GrayImage::constant(4, 4, 9).unwrap();
        let r = complexity_record(&img, &MetricParams::default()).unwrap();
        store.put(&r).unwrap();
        let got = store.get(&r.content_hash, &r.tool_version).unwrap().unwrap();
        assert_eq!(got, r);
        assert!(store.get("unknown", &r.tool_version).unwrap().is_none());
    }

    #[test]
    fn store_tolerates_corrupt_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let store = RecordStore::new(&path);
        for i in 0..10 {
            store.put(&rec(&format!("{i}"), i as f64)).unwrap();
        }
        // corrupt line 5 in place
        let content = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = content.lines().collect();
        lines[4] = "{not json";
        std::fs::write(&path, lines.join("\n")).unwrap();
        let (map, corrupt) = store.load().unwrap();
        assert_eq!(map.len(), 9);
        assert_eq!(corrupt.len(), 1);
        assert_eq!(corrupt[0].line_number, 5);
    }

    #[test]
    fn store_last_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let store = RecordStore::new(dir.path().join("r.jsonl"));
        let mut r = rec("h", 1.0);
        store.put(&r).unwrap();
        r.delentropy_bits = 2.0;
        store.put(&r).unwrap();
        let got = store.get("h", "test").unwrap().unwrap();
        assert_eq!(got.delentropy_bits, 2.0);
    }
}
