//! Draw a seeded, reproducible training subset and emit its manifest.
//!
//!     cargo run --example sample_manifest

use std::io::Write;
use std::path::PathBuf;

use delfid::bench::{build_manifest, manifest_to_json, sample_paths, BenchError};
use delfid::imaging::{content_hash, load_grayscale};

fn write_pgm(path: &PathBuf, seed: usize) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "P5\n16 16\n255\n")?;
    let pixels: Vec<u8> = (0..256).map(|k| ((k * 7 + seed * 31) % 256) as u8).collect();
    f.write_all(&pixels)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let paths: Vec<PathBuf> = (0..20)
        .map(|i| {
            let p = dir.path().join(format!("scan_{i:03}.pgm"));
            write_pgm(&p, i).unwrap();
            p
        })
        .collect();

    let seed = 42;
    let selected = sample_paths(&paths, 5, seed)?;
    let manifest = build_manifest("demo-corpus", seed, selected, |path| {
        let img = load_grayscale(path).map_err(BenchError::Imaging)?;
        Ok(content_hash(&img).to_hex())
    })?;
    print!("{}", manifest_to_json(&manifest));

    // the same seed always reproduces the same subset
    let again = sample_paths(&paths, 5, seed)?;
    assert_eq!(
        again.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        manifest.members.iter().map(|m| m.path.clone()).collect::<Vec<_>>()
    );
    eprintln!("re-sampling with seed {seed} reproduced the subset exactly");
    Ok(())
}
