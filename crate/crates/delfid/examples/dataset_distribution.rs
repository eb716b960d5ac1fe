//! Aggregate per-image records into a dataset distribution and inspect
//! its spread descriptors.
//!
//!     cargo run --example dataset_distribution

use delfid::imaging::GrayImage;
use delfid::metrics::{complexity_record, MetricKind, MetricParams};
use delfid::report::fmt_g9;
use delfid::stats::{aggregate, spread_descriptors, HistogramConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A corpus with two texture populations, so the delentropy histogram is
/// visibly bimodal.
fn corpus(rng: &mut ChaCha20Rng) -> Vec<GrayImage> {
    let mut images = Vec::new();
    for i in 0..40 {
        let noisy = i % 2 == 0;
        let pixels = (0..32 * 32)
            .map(|k| {
                if noisy {
                    rng.gen::<u8>()
                } else {
                    // smooth diagonal gradient with slight jitter
                    let (x, y) = (k % 32, k / 32);
                    ((x + y) * 3) as u8 + rng.gen_range(0..4)
                }
            })
            .collect();
        images.push(GrayImage::new(32, 32, pixels).unwrap());
    }
    images
}

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let params = MetricParams::default();
    let records: Vec<_> = corpus(&mut rng)
        .iter()
        .map(|img| complexity_record(img, &params).unwrap())
        .collect();

    let dist = aggregate(&records, MetricKind::Delentropy, "demo", HistogramConfig::default())
        .unwrap();
    println!(
        "dataset={} metric=delentropy n={} mean={} sigma={} range=[{}, {}]",
        dist.dataset_id,
        dist.count,
        fmt_g9(dist.mean),
        fmt_g9(dist.std_dev),
        fmt_g9(dist.min),
        fmt_g9(dist.max)
    );

    let spread = spread_descriptors(&dist).unwrap();
    println!(
        "cv={} iqr={} modality={}",
        spread.coefficient_of_variation.map(fmt_g9).unwrap_or_else(|| "n/a".into()),
        fmt_g9(spread.iqr),
        spread.modality
    );

    println!("\nhistogram (non-empty bins):");
    let cfg = &dist.histogram_config;
    for (i, &count) in dist.histogram.iter().enumerate() {
        if count > 0 {
            let low = cfg.range_low + i as f64 * cfg.bin_width;
            println!(
                "  [{:>5}, {:>5}) {:>3} {}",
                fmt_g9(low),
                fmt_g9(low + cfg.bin_width),
                count,
                "#".repeat(count as usize)
            );
        }
    }
}
