pub mod error;
pub mod exponents;
pub mod fractal;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod rng;
pub mod sampler;
pub mod serde_ext;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    struct Overview;
    #[doc = include_str!("../../../book/src/exponents.md")]
    struct Exponents;
    #[doc = include_str!("../../../book/src/sampling.md")]
    struct Sampling;
    #[doc = include_str!("../../../book/src/dimensions.md")]
    struct Dimensions;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
    #[doc = include_str!("../../../README.md")]
    struct Readme;
}
