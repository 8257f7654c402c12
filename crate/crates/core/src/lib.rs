//! Core primitives for a fundus-image screening pipeline: deterministic
//! imaging operations, dataset splitting, a reference linear classifier,
//! softmax-level ensembling, and ranking metrics.
//!
//! The crate is `no_std` (with `alloc`) so the numerical pipeline can run
//! anywhere; file formats, concurrency, and the CLI live in the companion
//! `fundus-pipeline` crate. Every randomized operation is counter-based and
//! seeded, so results are reproducible bit-for-bit across platforms and
//! worker counts.

#![no_std]

extern crate alloc;

pub mod augment;
pub mod clahe;
pub mod classify;
pub mod dataset;
pub mod ensemble;
pub mod metrics;
pub mod polar;
pub mod raster;
pub mod resample;
pub mod rng;
pub mod segment;

pub use raster::Raster;
