//! Batch metric computation over an image corpus with record-store
//! caching. Images are processed in parallel across a worker pool; store
//! writes go through a single serialized writer.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::imaging::{content_hash, load_grayscale, resize_bilinear, GrayImage};
use crate::metrics::{complexity_record, tool_version, ComplexityRecord, MetricParams};
use crate::stats::{RecordStore, StatsError};

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub params: MetricParams,
    pub resize: Option<(usize, usize)>,
    pub jobs: usize,
    pub store: Option<RecordStore>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { params: MetricParams::default(), resize: None, jobs: 1, store: None }
    }
}

#[derive(Debug)]
pub struct CorpusOutcome {
    /// Successful records paired with their source path, sorted by path.
    pub records: Vec<(PathBuf, ComplexityRecord)>,
    /// Per-file failures, sorted by path.
    pub failures: Vec<(PathBuf, String)>,
    /// Number of images whose metrics were actually recomputed.
    pub computed: usize,
    /// Number of images served from the record store.
    pub cached: usize,
}

fn prepare(path: &Path, opts: &PipelineOptions) -> Result<GrayImage, String> {
    let img = load_grayscale(path).map_err(|e| e.to_string())?;
    match opts.resize {
        Some((w, h)) => resize_bilinear(&img, w, h).map_err(|e| e.to_string()),
        None => Ok(img),
    }
}

/// Compute (or fetch from the store) a complexity record for every path.
pub fn process_corpus(paths: &[PathBuf], opts: &PipelineOptions) -> Result<CorpusOutcome, StatsError> {
    let version = tool_version(&opts.params);
    // one read of the store up front; the in-memory map is the warm cache
    let cache = match &opts.store {
        Some(store) => store.load()?.0,
        None => Default::default(),
    };

    let store_writer = Mutex::new(());
    let work = |path: &PathBuf| -> (PathBuf, Result<(ComplexityRecord, bool), String>) {
        let result = prepare(path, opts).and_then(|img| {
            let hash = content_hash(&img).to_hex();
            if let Some(hit) = cache.get(&(hash.clone(), version.clone())) {
                return Ok((hit.clone(), true));
            }
            let rec = complexity_record(&img, &opts.params).map_err(|e| e.to_string())?;
            if let Some(store) = &opts.store {
                let _guard = store_writer.lock().unwrap();
                store.put(&rec).map_err(|e| e.to_string())?;
            }
            Ok((rec, false))
        });
        (path.clone(), result)
    };

    let results: Vec<(PathBuf, Result<(ComplexityRecord, bool), String>)> = if opts.jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("worker pool");
        pool.install(|| paths.par_iter().map(work).collect())
    } else {
        paths.iter().map(work).collect()
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut computed = 0;
    let mut cached = 0;
    for (path, result) in results {
        match result {
            Ok((rec, was_cached)) => {
                if was_cached {
                    cached += 1;
                } else {
                    computed += 1;
                }
                records.push((path, rec));
            }
            Err(detail) => failures.push((path, detail)),
        }
    }
    records.sort_by(|a, b| a.0.cmp(&b.0));
    failures.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(CorpusOutcome { records, failures, computed, cached })
}

/// Enumerate PNG/PGM files in a directory, sorted lexicographically.
pub fn list_images(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
                    Some("png") | Some("pgm")
                )
        })
        .collect();
    paths.sort();
    Ok(paths)
}
