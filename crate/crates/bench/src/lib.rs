//! Shared helpers for the pipeline benchmarks.

pub use vaguemap_core::fixtures;
