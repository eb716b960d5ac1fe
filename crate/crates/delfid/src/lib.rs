//! delfid: dataset complexity and generative-fidelity analysis.
//!
//! Quantifies image-dataset complexity with three entropy measures
//! (Shannon, GLCM, delentropy), computes the Fréchet distance between
//! Gaussian feature statistics, and assembles the reproducible
//! benchmarking artifacts around them: seeded sampling manifests,
//! per-dataset complexity distributions, fidelity curves, and the
//! complexity-vs-FID correlation report.
//!
//! Modules:
//! - [`imaging`]: decoding (PNG, PGM) into a canonical 8-bit grayscale
//!   raster, bilinear resize, content hashing.
//! - [`metrics`]: Shannon entropy, GLCM entropy and delentropy per image.
//! - [`stats`]: dataset distributions and the JSON Lines record cache.
//! - [`fid`]: Fréchet distance numerics over feature files.
//! - [`bench`]: sampling manifests, fidelity-curve analysis, rank
//!   correlation, report bundles.
//! - [`pipeline`]: batch metric computation over a corpus with caching.
//! - [`cli`]: the `delfid` command-line front end.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bench;
pub mod cli;
pub mod fid;
pub mod imaging;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod stats;
