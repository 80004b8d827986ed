//! Haar wavelet image fusion and embedded bitplane coding for 8-bit grayscale
//! images.
//!
//! The pipeline is [`pixelio`] to read and write PGM files, [`wavelet`] for the
//! pyramid, [`fusion`] to merge two pyramids, and [`spiht`] / [`remspiht`] to
//! code one into an embedded [`bitstream`]. [`weighting`] builds the importance
//! masks the pruned coder uses, and [`metrics`] scores the result.

pub mod bitstream;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod pixelio;
pub mod remspiht;
pub mod spiht;
pub mod wavelet;
pub mod weighting;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/images.md")]
    mod images {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/coding.md")]
    mod coding {}
    #[doc = include_str!("../../../book/src/pruning.md")]
    mod pruning {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
