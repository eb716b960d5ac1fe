//! Assemble fidelity curves and complexity distributions into a report
//! bundle: per-curve FID reductions, plateau detection, and the rank
//! correlation between dataset complexity and FID.
//!
//!     cargo run --example fidelity_report

use delfid::bench::{
    assemble_report, correlation_report, emit_report, ComplexityStat, CurvePoint, FidelityCurve,
    DEFAULT_PLATEAU_THRESHOLD,
};
use delfid::metrics::MetricKind;
use delfid::stats::{DatasetDistribution, HistogramConfig};

fn curve(dataset: &str, fids: [f64; 4]) -> FidelityCurve {
    let sizes = [500u64, 1000, 2000, 4000];
    let points = sizes
        .iter()
        .zip(fids)
        .map(|(&training_size, fid)| CurvePoint { training_size, fid })
        .collect();
    FidelityCurve::new(dataset, "gan-demo", points).unwrap()
}

fn distribution(dataset: &str, mean: f64, std_dev: f64) -> DatasetDistribution {
    DatasetDistribution {
        schema: "v1".to_string(),
        dataset_id: dataset.to_string(),
        metric: MetricKind::Delentropy,
        count: 2,
        mean,
        std_dev,
        min: mean - std_dev,
        max: mean + std_dev,
        histogram: vec![2],
        histogram_config: HistogramConfig { range_low: 0.0, range_high: 18.0, bin_width: 18.0 },
        clamped: 0,
        values: vec![mean - std_dev, mean + std_dev],
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // more complex datasets (higher mean delentropy) converge to worse FID
    let curves = vec![
        curve("retina", [60.0, 44.0, 33.0, 31.0]),
        curve("dermoscopy", [85.0, 66.0, 52.0, 50.5]),
        curve("ct-slices", [41.0, 28.0, 20.0, 19.6]),
    ];
    let distributions = vec![
        distribution("retina", 4.1, 0.4),
        distribution("dermoscopy", 5.3, 0.7),
        distribution("ct-slices", 2.8, 0.3),
    ];

    let correlations = vec![correlation_report(
        &distributions,
        &curves,
        4000,
        ComplexityStat::Mean,
    )?];
    let bundle =
        assemble_report(&curves, &distributions, correlations, DEFAULT_PLATEAU_THRESHOLD)?;

    for c in &bundle.curves {
        let plateau_at = c.slopes.iter().find(|s| s.plateau).map(|s| s.from_size);
        println!(
            "{:<12} FID reduction {:.1}%  plateau from {:?}",
            c.dataset_id,
            c.percent_reduction * 100.0,
            plateau_at
        );
    }
    for corr in &bundle.correlations {
        println!(
            "spearman rho (mean delentropy vs FID@4000, model {}): {:?}",
            corr.model_label, corr.spearman_rho
        );
    }

    let outdir = tempfile::tempdir()?;
    let written = emit_report(outdir.path(), &bundle, &distributions)?;
    println!("\nbundle files:");
    for path in &written {
        println!("  {}", path.strip_prefix(outdir.path()).unwrap_or(path).display());
    }
    Ok(())
}
