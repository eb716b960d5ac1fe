//! Per-image complexity measures: Shannon entropy, GLCM entropy, and
//! delentropy.
//!
//! All entropies use log base 2 (bits) and the 0·log 0 = 0 convention.
//! Sums accumulate in f64 in fixed row-major order so repeated runs are
//! bit-identical.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{content_hash, round_half_away, GrayImage};

/// Gradient bins per axis: integer values in [-255, 255].
pub const DELEDENSITY_BINS: usize = 511;
const BIN_OFFSET: i32 = 255;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("image too small: need at least {need}x{need}, got {width}x{height}")]
    ImageTooSmall { need: usize, width: usize, height: usize },
    #[error("GLCM offset (d={d}, {angle:?}) yields no valid pixel pairs in a {width}x{height} image")]
    OffsetTooLarge { d: usize, angle: GlcmAngle, width: usize, height: usize },
    #[error("GLCM distance must be >= 1")]
    ZeroDistance,
}

/// GLCM offset angle. The (dx, dy) displacement for distance d is
/// d·(cos θ, −sin θ) rounded to integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlcmAngle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl GlcmAngle {
    pub const ALL: [GlcmAngle; 4] =
        [GlcmAngle::Deg0, GlcmAngle::Deg45, GlcmAngle::Deg90, GlcmAngle::Deg135];

    pub fn displacement(self, d: usize) -> (isize, isize) {
        let d = d as isize;
        match self {
            GlcmAngle::Deg0 => (d, 0),
            GlcmAngle::Deg45 => (d, -d),
            GlcmAngle::Deg90 => (0, -d),
            GlcmAngle::Deg135 => (-d, -d),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GlcmAngle::Deg0 => "0",
            GlcmAngle::Deg45 => "45",
            GlcmAngle::Deg90 => "90",
            GlcmAngle::Deg135 => "135",
        }
    }
}

impl std::str::FromStr for GlcmAngle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(GlcmAngle::Deg0),
            "45" => Ok(GlcmAngle::Deg45),
            "90" => Ok(GlcmAngle::Deg90),
            "135" => Ok(GlcmAngle::Deg135),
            _ => Err(format!("invalid GLCM angle {s:?} (expected 0, 45, 90 or 135)")),
        }
    }
}

/// Derivative kernel choice for the gradient field behind deledensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GradientKernel {
    /// 2x2 forward-difference pairs; samples live on a (W-1)x(H-1) grid
    /// and stay within [-255, 255].
    #[default]
    ForwardPair,
    /// Central differences on the (W-2)x(H-2) interior grid.
    Central,
}

impl GradientKernel {
    fn label(self) -> &'static str {
        match self {
            GradientKernel::ForwardPair => "fwd2x2",
            GradientKernel::Central => "central",
        }
    }
}

/// Per-sample image gradient components.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub grid_w: usize,
    pub grid_h: usize,
}

/// Joint probability distribution over rounded (dx, dy) gradient pairs.
#[derive(Debug, Clone)]
pub struct Deledensity {
    counts: Vec<u64>,
    total: u64,
}

impl Deledensity {
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.counts[j * DELEDENSITY_BINS + i] as f64 / self.total as f64
    }

    /// Probability mass at gradient value (dx, dy), dx/dy in [-255, 255].
    pub fn prob_at(&self, dx: i32, dy: i32) -> f64 {
        self.prob((dx + BIN_OFFSET) as usize, (dy + BIN_OFFSET) as usize)
    }

    pub fn total_samples(&self) -> u64 {
        self.total
    }

    pub fn nonzero_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Sum of all bin probabilities; equals 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).sum()
    }
}

/// Co-occurrence probability matrix over 256 gray levels.
#[derive(Debug, Clone)]
pub struct GlcmMatrix {
    probs: Vec<f64>,
    pub d: usize,
    pub angle: GlcmAngle,
    pub symmetric: bool,
}

impl GlcmMatrix {
    pub fn prob(&self, i: u8, j: u8) -> f64 {
        self.probs[usize::from(i) * 256 + usize::from(j)]
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Parameters that affect metric values. Their fingerprint is embedded in
/// `tool_version` so cached records are never reused across incompatible
/// defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricParams {
    pub glcm_distance: usize,
    pub glcm_angle: GlcmAngle,
    pub glcm_symmetric: bool,
    pub kernel: GradientKernel,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            glcm_distance: 1,
            glcm_angle: GlcmAngle::Deg0,
            glcm_symmetric: false,
            kernel: GradientKernel::ForwardPair,
        }
    }
}

impl MetricParams {
    pub fn fingerprint(&self) -> String {
        format!(
            "glcm=d{}a{}{};kern={};bins={}",
            self.glcm_distance,
            self.glcm_angle.label(),
            if self.glcm_symmetric { "sym" } else { "asym" },
            self.kernel.label(),
            DELEDENSITY_BINS,
        )
    }
}

/// Version string stamped into every record: crate version plus the
/// metric-parameter fingerprint.
pub fn tool_version(params: &MetricParams) -> String {
    format!("delfid-{}+{}", env!("CARGO_PKG_VERSION"), params.fingerprint())
}

/// Metric results for one image, keyed by content hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRecord {
    pub schema: String,
    pub content_hash: String,
    pub shannon_bits: f64,
    pub glcm_bits: f64,
    pub delentropy_bits: f64,
    pub width: usize,
    pub height: usize,
    pub tool_version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Shannon,
    Glcm,
    Delentropy,
}

impl MetricKind {
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Shannon => "shannon",
            MetricKind::Glcm => "glcm",
            MetricKind::Delentropy => "delentropy",
        }
    }

    pub fn value_of(self, rec: &ComplexityRecord) -> f64 {
        match self {
            MetricKind::Shannon => rec.shannon_bits,
            MetricKind::Glcm => rec.glcm_bits,
            MetricKind::Delentropy => rec.delentropy_bits,
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shannon" => Ok(MetricKind::Shannon),
            "glcm" => Ok(MetricKind::Glcm),
            "delentropy" => Ok(MetricKind::Delentropy),
            _ => Err(format!("unknown metric {s:?} (expected shannon, glcm or delentropy)")),
        }
    }
}

/// H = -Σ p_i log2 p_i over the 256 gray levels.
pub fn shannon_entropy(img: &GrayImage) -> f64 {
    let mut counts = [0u64; 256];
    for &p in img.pixels() {
        counts[usize::from(p)] += 1;
    }
    let n = img.pixels().len() as f64;
    let mut h = 0.0f64;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Co-occurrence matrix at offset (d, θ), normalized by pair count.
pub fn glcm(
    img: &GrayImage,
    d: usize,
    angle: GlcmAngle,
    symmetric: bool,
) -> Result<GlcmMatrix, MetricError> {
    if d == 0 {
        return Err(MetricError::ZeroDistance);
    }
    let (dx, dy) = angle.displacement(d);
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut counts = vec![0u64; 256 * 256];
    let mut total = 0u64;
    for y in 0..h {
        let ny = y + dy;
        if ny < 0 || ny >= h {
            continue;
        }
        for x in 0..w {
            let nx = x + dx;
            if nx < 0 || nx >= w {
                continue;
            }
            let a = usize::from(img.get(x as usize, y as usize));
            let b = usize::from(img.get(nx as usize, ny as usize));
            counts[a * 256 + b] += 1;
            total += 1;
            if symmetric {
                counts[b * 256 + a] += 1;
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(MetricError::OffsetTooLarge {
            d,
            angle,
            width: img.width(),
            height: img.height(),
        });
    }
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(GlcmMatrix { probs, d, angle, symmetric })
}

/// H_g = -Σ p(i,j) log2 p(i,j), row-major accumulation.
pub fn glcm_entropy(m: &GlcmMatrix) -> f64 {
    let mut h = 0.0f64;
    for &p in &m.probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Gradient field with the default forward-pair kernel.
pub fn gradient_field(img: &GrayImage) -> Result<GradientField, MetricError> {
    gradient_field_with(img, GradientKernel::ForwardPair)
}

pub fn gradient_field_with(
    img: &GrayImage,
    kernel: GradientKernel,
) -> Result<GradientField, MetricError> {
    let (w, h) = (img.width(), img.height());
    match kernel {
        GradientKernel::ForwardPair => {
            if w < 2 || h < 2 {
                return Err(MetricError::ImageTooSmall { need: 2, width: w, height: h });
            }
            let (gw, gh) = (w - 1, h - 1);
            let mut dx = Vec::with_capacity(gw * gh);
            let mut dy = Vec::with_capacity(gw * gh);
            for y in 0..gh {
                for x in 0..gw {
                    let a = f64::from(img.get(x, y));
                    let b = f64::from(img.get(x + 1, y));
                    let c = f64::from(img.get(x, y + 1));
                    let d = f64::from(img.get(x + 1, y + 1));
                    dx.push((b - a + d - c) / 2.0);
                    dy.push((c - a + d - b) / 2.0);
                }
            }
            Ok(GradientField { dx, dy, grid_w: gw, grid_h: gh })
        }
        GradientKernel::Central => {
            if w < 3 || h < 3 {
                return Err(MetricError::ImageTooSmall { need: 3, width: w, height: h });
            }
            let (gw, gh) = (w - 2, h - 2);
            let mut dx = Vec::with_capacity(gw * gh);
            let mut dy = Vec::with_capacity(gw * gh);
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    dx.push((f64::from(img.get(x + 1, y)) - f64::from(img.get(x - 1, y))) / 2.0);
                    dy.push((f64::from(img.get(x, y + 1)) - f64::from(img.get(x, y - 1))) / 2.0);
                }
            }
            Ok(GradientField { dx, dy, grid_w: gw, grid_h: gh })
        }
    }
}

/// Bin rounded gradient pairs into the 511x511 histogram and normalize by
/// the sample count.
pub fn deledensity(g: &GradientField) -> Deledensity {
    let mut counts = vec![0u64; DELEDENSITY_BINS * DELEDENSITY_BINS];
    for (&dx, &dy) in g.dx.iter().zip(&g.dy) {
        let i = round_half_away(dx) as i32 + BIN_OFFSET;
        let j = round_half_away(dy) as i32 + BIN_OFFSET;
        counts[j as usize * DELEDENSITY_BINS + i as usize] += 1;
    }
    Deledensity { counts, total: g.dx.len() as u64 }
}

/// DE = -½ Σ p(i,j) log2 p(i,j).
pub fn delentropy(p: &Deledensity) -> f64 {
    let n = p.total as f64;
    let mut h = 0.0f64;
    for &c in &p.counts {
        if c > 0 {
            let q = c as f64 / n;
            h -= q * q.log2();
        }
    }
    h / 2.0
}

/// Convenience: delentropy straight from an image with the default kernel.
pub fn image_delentropy(img: &GrayImage, kernel: GradientKernel) -> Result<f64, MetricError> {
    let g = gradient_field_with(img, kernel)?;
    Ok(delentropy(&deledensity(&g)))
}

/// Compute all three measures for one image.
pub fn complexity_record(
    img: &GrayImage,
    params: &MetricParams,
) -> Result<ComplexityRecord, MetricError> {
    let shannon = shannon_entropy(img);
    let glcm_m = glcm(img, params.glcm_distance, params.glcm_angle, params.glcm_symmetric)?;
    let de = image_delentropy(img, params.kernel)?;
    Ok(ComplexityRecord {
        schema: "v1".to_string(),
        content_hash: content_hash(img).to_hex(),
        shannon_bits: shannon,
        glcm_bits: glcm_entropy(&glcm_m),
        delentropy_bits: de,
        width: img.width(),
        height: img.height(),
        tool_version: tool_version(params),
    })
}
