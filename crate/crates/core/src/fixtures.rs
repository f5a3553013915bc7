//! Bundled datasets.

use crate::estimate::Sample;
use crate::ingest::parse_sample;

/// Remission times in months of 128 bladder-cancer patients.
pub const BLADDER_CANCER_CSV: &str = include_str!("../data/bladder_cancer.csv");

pub const BLADDER_CANCER_COUNT: usize = 128;

/// SHA-256 of [`BLADDER_CANCER_CSV`].
pub const BLADDER_CANCER_SHA256: &str = "b0d8292438247a0502dad5ab0c791ec50be83b5956a9afb58af61411ceb55f9e";

pub fn bladder_cancer() -> Sample {
    let s = parse_sample(BLADDER_CANCER_CSV).expect("bundled fixture parses");
    assert_eq!(s.len(), BLADDER_CANCER_COUNT, "bladder-cancer fixture must hold 128 values");
    s
}
