//! Joint grey/white-matter fusion and network analysis toolkit.
//!
//! The pipeline: ingest cohort data (clinical records, voxel feature
//! matrices), decompose the joint GM|WM matrix with infomax ICA, rank
//! components by group effect size and assign patient subtypes, build
//! cross-tissue association matrices thresholded by mutual K nearest
//! neighbors, compute graph metrics on the resulting networks, and encode
//! each individual's network as a big-integer fingerprint. A seeded
//! synthetic-cohort generator provides the verification substrate.

pub mod error;
pub mod exec;
pub mod graph;
pub mod stats;

pub use error::{Error, Result};
