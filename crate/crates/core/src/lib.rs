//! Fission-Fusion k-means.
//!
//! Lloyd's algorithm stalls in local minima where one fitted center covers
//! several true clusters (*one-fit-many*) while several fitted centers share a
//! single true cluster (*many-fit-one*). This crate detects both kinds of
//! mis-specified association in a converged solution and repairs them with a
//! split (fission) and a merge (fusion), re-running Lloyd after every repair.
//!
//! Module map:
//! - [`dataset`], [`kmeans`], [`init`]: points, centers, the k-means objective,
//!   Lloyd iterations and seeding.
//! - [`detect`]: the association-detection subroutines.
//! - [`ffkm`]: split/merge primitives and the fission-fusion drivers
//!   (fixed k, over-parameterized, under-parameterized).
//! - [`synth`]: ball-mixture and diffuse-model generators.
//! - [`eval`]: centroid index, success rate, missing rate, objective ratio.
//! - [`bench`]: file formats and the seeded multi-trial experiment runner.

pub mod bench;
pub mod dataset;
pub mod detect;
pub mod error;
pub mod eval;
pub mod ffkm;
pub mod init;
pub mod kmeans;
pub mod synth;

pub use dataset::{CenterSet, Dataset};
pub use detect::{MfoDetector, OfmDetector};
pub use error::{Error, Result};
pub use ffkm::{FfkmConfig, FfkmTrace, SplitMethod};
pub use kmeans::{
    assign, lloyd, objective, update_centers, Assignment, LloydParams, LocalSolution,
};
