//! Artifact layer: CSV series, deterministic SVG plots, and run bundles.
//!
//! Everything here is pinned to `f64`: artifacts are an exchange format,
//! and a single concrete precision keeps files byte-stable across builds.
//! All writers are pure functions to strings (thin path wrappers on top),
//! so byte-level determinism is testable without touching the filesystem.

pub mod bundle;
pub mod csv;
pub mod svg;
