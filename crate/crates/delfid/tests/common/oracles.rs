//! Independent brute-force oracles for the entropy metrics. These share
//! no code with the library: naive enumeration over hash maps, no fixed
//! summation order, no histogram arrays.

use std::collections::HashMap;

fn entropy_bits(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let mut h = 0.0;
    for c in counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

pub fn shannon(pixels: &[u8]) -> f64 {
    let mut counts: HashMap<u8, u64> = HashMap::new();
    for &p in pixels {
        *counts.entry(p).or_default() += 1;
    }
    entropy_bits(counts.into_values(), pixels.len() as u64)
}

/// Enumerate every pixel pair at displacement (dx, dy).
pub fn glcm_probs(
    pixels: &[u8],
    w: usize,
    h: usize,
    dx: isize,
    dy: isize,
    symmetric: bool,
) -> HashMap<(u8, u8), f64> {
    let mut counts: HashMap<(u8, u8), u64> = HashMap::new();
    let mut total = 0u64;
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let a = pixels[y as usize * w + x as usize];
            let b = pixels[ny as usize * w + nx as usize];
            *counts.entry((a, b)).or_default() += 1;
            total += 1;
            if symmetric {
                *counts.entry((b, a)).or_default() += 1;
                total += 1;
            }
        }
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
}

pub fn glcm_entropy(probs: &HashMap<(u8, u8), f64>) -> f64 {
    let mut h = 0.0;
    for &p in probs.values() {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Delentropy with the 2x2 forward-pair kernel, counted pair by pair.
pub fn delentropy(pixels: &[u8], w: usize, h: usize) -> f64 {
    assert!(w >= 2 && h >= 2);
    let at = |x: usize, y: usize| f64::from(pixels[y * w + x]);
    let mut counts: HashMap<(i64, i64), u64> = HashMap::new();
    let mut total = 0u64;
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let dx = (at(x + 1, y) - at(x, y) + at(x + 1, y + 1) - at(x, y + 1)) / 2.0;
            let dy = (at(x, y + 1) - at(x, y) + at(x + 1, y + 1) - at(x + 1, y)) / 2.0;
            // round half away from zero
            let bx = dx.abs().floor() as i64 + i64::from(dx.abs().fract() >= 0.5);
            let by = dy.abs().floor() as i64 + i64::from(dy.abs().fract() >= 0.5);
            let key = (bx * dx.signum() as i64, by * dy.signum() as i64);
            *counts.entry(key).or_default() += 1;
            total += 1;
        }
    }
    entropy_bits(counts.into_values(), total) / 2.0
}
