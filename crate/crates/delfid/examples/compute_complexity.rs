//! Compute the three complexity measures for a synthetic image and show
//! how texture drives them apart.
//!
//!     cargo run --example compute_complexity

use delfid::imaging::GrayImage;
use delfid::metrics::{complexity_record, MetricParams};
use delfid::report::fmt_g9;

fn checkerboard(w: usize, h: usize, cell: usize) -> GrayImage {
    let pixels = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            if (x / cell + y / cell) % 2 == 0 {
                0
            } else {
                255
            }
        })
        .collect();
    GrayImage::new(w, h, pixels).unwrap()
}

fn noise(w: usize, h: usize) -> GrayImage {
    // small xorshift so the example needs no external input
    let mut s = 0x9e3779b97f4a7c15u64;
    let pixels = (0..w * h)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 56) as u8
        })
        .collect();
    GrayImage::new(w, h, pixels).unwrap()
}

fn main() {
    let params = MetricParams::default();
    let images = [
        ("flat", GrayImage::constant(64, 64, 128).unwrap()),
        ("checkerboard", checkerboard(64, 64, 8)),
        ("noise", noise(64, 64)),
    ];

    println!("{:<14} {:>10} {:>10} {:>12}", "image", "shannon", "glcm", "delentropy");
    for (name, img) in &images {
        let rec = complexity_record(img, &params).unwrap();
        println!(
            "{:<14} {:>10} {:>10} {:>12}",
            name,
            fmt_g9(rec.shannon_bits),
            fmt_g9(rec.glcm_bits),
            fmt_g9(rec.delentropy_bits)
        );
    }
    println!("\ntool version: {}", delfid::metrics::tool_version(&params));
}
