//! Command-line front end. Every pipeline stage is a subcommand; results
//! go to stdout, diagnostics to stderr. Exit codes: 0 success, 1 fatal,
//! 2 partial success.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{
    assemble_report, build_manifest, correlation_report, emit_report, manifest_to_json,
    parse_fid_csv, sample_paths, BenchError, ComplexityStat, FidelityCurve,
    DEFAULT_PLATEAU_THRESHOLD,
};
use crate::fid::fid_from_files;
use crate::imaging::{content_hash, load_grayscale};
use crate::metrics::{MetricKind, MetricParams};
use crate::pipeline::{list_images, process_corpus, PipelineOptions};
use crate::report::{fmt_g9, round_g9};
use crate::stats::{aggregate, distribution_to_csv, DatasetDistribution, HistogramConfig, RecordStore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

/// Version string embedding the metric-parameter fingerprint, so cached
/// records are never silently reused across incompatible defaults.
pub fn long_version() -> &'static str {
    static V: OnceLock<String> = OnceLock::new();
    V.get_or_init(|| {
        format!("{} ({})", env!("CARGO_PKG_VERSION"), MetricParams::default().fingerprint())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "delfid", version = long_version(), about = "Image-dataset complexity metrics and generative-fidelity benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker count for per-image metric computation
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output format on stdout
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: OutputFormat,

    /// Record store (JSON Lines) used as a metric cache
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,

    /// Resize every image to WxH before computing metrics
    #[arg(long, global = true)]
    pub resize: Option<String>,

    /// Seed for subset sampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file or directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute Shannon, GLCM and delentropy records for images
    Complexity {
        /// Image files or directories of PNG/PGM files
        inputs: Vec<PathBuf>,
    },
    /// Aggregate a directory of images into a metric distribution
    DatasetStats {
        dir: PathBuf,
        #[arg(long, default_value = "delentropy")]
        metric: MetricKind,
        /// Dataset identifier in the emitted document (default: directory name)
        #[arg(long)]
        dataset_id: Option<String>,
        /// Histogram bin width in bits
        #[arg(long, default_value_t = 0.25)]
        bin_width: f64,
    },
    /// Fréchet distance between two feature files (CSV, FEAT binary, or stats JSON)
    Fid { file_a: PathBuf, file_b: PathBuf },
    /// Draw a seeded, reproducible subset and write its manifest
    Sample {
        /// Directory of images or a text file listing image paths
        listing: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        dataset_id: Option<String>,
    },
    /// Assemble fidelity curves into a report bundle
    Curve {
        /// CSV of FID scores: dataset_id,model_label,training_size,fid
        #[arg(long)]
        fid_csv: PathBuf,
        /// Distribution JSON documents (from dataset-stats)
        #[arg(long)]
        distributions: Vec<PathBuf>,
        /// Training size at which to correlate complexity with FID
        #[arg(long, default_value_t = 2500)]
        at_size: u64,
        /// Complexity statistic to correlate: mean, std or cv
        #[arg(long, default_value = "mean")]
        stat: ComplexityStat,
        #[arg(long, default_value_t = DEFAULT_PLATEAU_THRESHOLD)]
        plateau_threshold: f64,
    },
}

fn parse_resize(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("invalid --resize {s:?}, expected WxH"))?;
    let w: usize = w.parse().map_err(|_| format!("invalid resize width {w:?}"))?;
    let h: usize = h.parse().map_err(|_| format!("invalid resize height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("resize dimensions must be >= 1".to_string());
    }
    Ok((w, h))
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn collect_inputs(inputs: &[PathBuf]) -> std::io::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            paths.extend(list_images(input)?);
        } else {
            paths.push(input.clone());
        }
    }
    paths.sort();
    Ok(paths)
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_FATAL
        }
    }
}

fn execute(cli: Cli) -> Result<i32, String> {
    let resize = cli.resize.as_deref().map(parse_resize).transpose()?;
    let opts = PipelineOptions {
        params: MetricParams::default(),
        resize,
        jobs: cli.jobs.unwrap_or_else(default_jobs).max(1),
        store: cli.store.as_ref().map(RecordStore::new),
    };

    match &cli.command {
        Command::Complexity { inputs } => cmd_complexity(inputs, &opts, cli.format),
        Command::DatasetStats { dir, metric, dataset_id, bin_width } => cmd_dataset_stats(
            dir,
            *metric,
            dataset_id.as_deref(),
            *bin_width,
            &opts,
            cli.format,
            cli.out.as_deref(),
        ),
        Command::Fid { file_a, file_b } => cmd_fid(file_a, file_b, cli.format),
        Command::Sample { listing, size, dataset_id } => cmd_sample(
            listing,
            *size,
            cli.seed.unwrap_or(0),
            dataset_id.as_deref(),
            &opts,
            cli.out.as_deref(),
        ),
        Command::Curve { fid_csv, distributions, at_size, stat, plateau_threshold } => cmd_curve(
            fid_csv,
            distributions,
            *at_size,
            *stat,
            *plateau_threshold,
            cli.out.as_deref(),
        ),
    }
}

fn cmd_complexity(
    inputs: &[PathBuf],
    opts: &PipelineOptions,
    format: OutputFormat,
) -> Result<i32, String> {
    let paths = collect_inputs(inputs).map_err(|e| e.to_string())?;
    if paths.is_empty() {
        return Err("no input images".to_string());
    }
    let outcome = process_corpus(&paths, opts).map_err(|e| e.to_string())?;
    match format {
        OutputFormat::Json => {
            for (path, rec) in &outcome.records {
                let mut obj = serde_json::to_value(rec).unwrap();
                obj["path"] = serde_json::Value::String(path.display().to_string());
                println!("{}", serde_json::to_string(&obj).unwrap());
            }
        }
        OutputFormat::Csv => {
            println!("path,content_hash,shannon_bits,glcm_bits,delentropy_bits,width,height");
            for (path, r) in &outcome.records {
                println!(
                    "{},{},{},{},{},{},{}",
                    path.display(),
                    r.content_hash,
                    fmt_g9(r.shannon_bits),
                    fmt_g9(r.glcm_bits),
                    fmt_g9(r.delentropy_bits),
                    r.width,
                    r.height
                );
            }
        }
        OutputFormat::Text => {
            for (path, r) in &outcome.records {
                println!(
                    "{}: shannon={} glcm={} delentropy={} bits ({}x{})",
                    path.display(),
                    fmt_g9(r.shannon_bits),
                    fmt_g9(r.glcm_bits),
                    fmt_g9(r.delentropy_bits),
                    r.width,
                    r.height
                );
            }
        }
    }
    for (path, detail) in &outcome.failures {
        eprintln!("failed: {}: {detail}", path.display());
    }
    eprintln!(
        "processed={} computed={} cached={} failed={}",
        outcome.records.len(),
        outcome.computed,
        outcome.cached,
        outcome.failures.len()
    );
    if outcome.records.is_empty() {
        Ok(EXIT_FATAL)
    } else if outcome.failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_PARTIAL)
    }
}

fn cmd_dataset_stats(
    dir: &Path,
    metric: MetricKind,
    dataset_id: Option<&str>,
    bin_width: f64,
    opts: &PipelineOptions,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<i32, String> {
    let paths = list_images(dir).map_err(|e| e.to_string())?;
    if paths.is_empty() {
        return Err(format!("no processable images in {}", dir.display()));
    }
    let outcome = process_corpus(&paths, opts).map_err(|e| e.to_string())?;
    for (path, detail) in &outcome.failures {
        eprintln!("failed: {}: {detail}", path.display());
    }
    eprintln!(
        "processed={} computed={} cached={} failed={}",
        outcome.records.len(),
        outcome.computed,
        outcome.cached,
        outcome.failures.len()
    );
    if outcome.records.is_empty() {
        return Err("no image could be processed".to_string());
    }
    let records: Vec<_> = outcome.records.iter().map(|(_, r)| r.clone()).collect();
    let id = dataset_id
        .map(str::to_string)
        .unwrap_or_else(|| dir.file_name().unwrap_or_default().to_string_lossy().into_owned());
    let config = HistogramConfig { bin_width, ..HistogramConfig::default() };
    let dist = aggregate(&records, metric, &id, config).map_err(|e| e.to_string())?;

    let rendered = render_distribution(&dist, format);
    print!("{rendered}");
    if let Some(out) = out {
        std::fs::write(out, &rendered).map_err(|e| e.to_string())?;
    }
    if outcome.failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_PARTIAL)
    }
}

fn render_distribution(dist: &DatasetDistribution, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(dist).unwrap();
            s.push('\n');
            s
        }
        OutputFormat::Csv => distribution_to_csv(dist),
        OutputFormat::Text => format!(
            "dataset={} metric={} n={} mean={} sigma={} min={} max={}\n",
            dist.dataset_id,
            dist.metric.label(),
            dist.count,
            fmt_g9(dist.mean),
            fmt_g9(dist.std_dev),
            fmt_g9(dist.min),
            fmt_g9(dist.max)
        ),
    }
}

fn cmd_fid(file_a: &Path, file_b: &Path, format: OutputFormat) -> Result<i32, String> {
    let mut report = fid_from_files(file_a, file_b).map_err(|e| e.to_string())?;
    report.fid = round_g9(report.fid);
    match format {
        OutputFormat::Json => println!("{}", serde_json::to_string(&report).unwrap()),
        OutputFormat::Csv => {
            println!("fid,dim,n_a,n_b");
            println!("{},{},{},{}", fmt_g9(report.fid), report.dim, report.n_a, report.n_b);
        }
        OutputFormat::Text => println!("{}", fmt_g9(report.fid)),
    }
    Ok(EXIT_OK)
}

fn read_listing(listing: &Path) -> Result<Vec<PathBuf>, String> {
    if listing.is_dir() {
        list_images(listing).map_err(|e| e.to_string())
    } else {
        let text = std::fs::read_to_string(listing).map_err(|e| e.to_string())?;
        Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(PathBuf::from).collect())
    }
}

fn cmd_sample(
    listing: &Path,
    size: usize,
    seed: u64,
    dataset_id: Option<&str>,
    opts: &PipelineOptions,
    out: Option<&Path>,
) -> Result<i32, String> {
    let paths = read_listing(listing)?;
    let selected = sample_paths(&paths, size, seed).map_err(|e| e.to_string())?;
    let id = dataset_id
        .map(str::to_string)
        .unwrap_or_else(|| listing.file_name().unwrap_or_default().to_string_lossy().into_owned());
    let resize = opts.resize;
    let manifest = build_manifest(&id, seed, selected, |path| {
        let img = load_grayscale(path).map_err(BenchError::Imaging)?;
        let img = match resize {
            Some((w, h)) => {
                crate::imaging::resize_bilinear(&img, w, h).map_err(BenchError::Imaging)?
            }
            None => img,
        };
        Ok(content_hash(&img).to_hex())
    })
    .map_err(|e| e.to_string())?;
    let json = manifest_to_json(&manifest);
    match out {
        Some(path) => {
            std::fs::write(path, &json).map_err(|e| e.to_string())?;
            eprintln!("manifest written to {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(EXIT_OK)
}

fn cmd_curve(
    fid_csv: &Path,
    distribution_files: &[PathBuf],
    at_size: u64,
    stat: ComplexityStat,
    plateau_threshold: f64,
    out: Option<&Path>,
) -> Result<i32, String> {
    let curves = parse_fid_csv(fid_csv).map_err(|e| e.to_string())?;
    let mut distributions = Vec::new();
    for path in distribution_files {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let d: DatasetDistribution =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        distributions.push(d);
    }

    let mut correlations = Vec::new();
    if !distributions.is_empty() {
        let mut models: Vec<String> = curves.iter().map(|c| c.model_label.clone()).collect();
        models.sort();
        models.dedup();
        for model in models {
            let model_curves: Vec<FidelityCurve> =
                curves.iter().filter(|c| c.model_label == model).cloned().collect();
            correlations.push(
                correlation_report(&distributions, &model_curves, at_size, stat)
                    .map_err(|e| e.to_string())?,
            );
        }
    }

    let bundle = assemble_report(&curves, &distributions, correlations, plateau_threshold)
        .map_err(|e| e.to_string())?;
    let outdir = out.unwrap_or(Path::new("delfid-report"));
    let written = emit_report(outdir, &bundle, &distributions).map_err(|e| e.to_string())?;
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    println!("{}", serde_json::to_string_pretty(&bundle).unwrap());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resize_flag_parses() {
        assert_eq!(parse_resize("512x512").unwrap(), (512, 512));
        assert_eq!(parse_resize("64X32").unwrap(), (64, 32));
        assert!(parse_resize("0x4").is_err());
        assert!(parse_resize("512").is_err());
    }

    #[test]
    fn version_embeds_fingerprint() {
        assert!(long_version().contains("glcm=d1a0asym"));
    }

    #[test]
    fn cli_parses_every_subcommand() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::parse_from(["delfid", "complexity", "a.png", "--jobs", "4", "--store", "s.jsonl"]);
        assert!(matches!(cli.command, Command::Complexity { .. }));
        assert_eq!(cli.jobs, Some(4));
        let cli = Cli::parse_from(["delfid", "sample", "dir", "--size", "10", "--seed", "7"]);
        assert_eq!(cli.seed, Some(7));
        let cli = Cli::parse_from(["delfid", "fid", "a.csv", "b.csv", "--format", "text"]);
        assert_eq!(cli.format, OutputFormat::Text);
    }
}
