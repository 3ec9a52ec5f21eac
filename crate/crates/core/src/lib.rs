//! Registration of event-time curves by pairwise dynamic time warping, and
//! clustering of subjects by their estimated warping functions.
//!
//! The pipeline: build [`EventCurve`]s and anchor them, estimate every curve's
//! inverse warp with [`estimate_warpings`], register the curves, and cluster
//! the estimates with [`cluster::select_k`].

pub mod cli;
pub mod cluster;
pub mod curve;
pub mod dtw;
pub mod error;
pub mod interp;
pub mod io;
pub mod pairwise;
pub mod registration;
pub mod synth;

pub use cluster::{Clustering, DistanceMatrix};
pub use curve::{Domain, EventCurve, Mode, WarpingFunction};
pub use dtw::{align, Alignment, AlignmentCost, Step};
pub use error::{Error, Result};
pub use pairwise::{warp_pair, PairwiseWarp};
pub use registration::{estimate_warpings, register, RegisteredCurve, WarpingEstimate};
pub use synth::{simulate_sample, WarpScenario};
