//! Random k-cut process on complete binary trees.
//!
//! Simulation of the cut count, exact expected record counts, the series
//! constants of the large-n expansion and the infinitely divisible limit law.

// `!(x > 0.0)` is how NaN gets rejected along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub(crate) mod cheb;
pub mod cutsim;
pub mod error;
pub mod exactmean;
pub mod harness;
pub mod limitdist;
pub mod quad;
pub mod rng;
pub mod series;
pub mod specfun;

pub use cutsim::{CompleteTree, SimSample, Simulator, Variant};
pub use error::{KcutError, Result};
pub use exactmean::MeanQuery;
pub use harness::{ExperimentConfig, ExperimentReport, RecordMode};
pub use limitdist::{LimitCdf, LimitLaw, LimitParams, ScaleParams};
pub use series::ConstantTable;
