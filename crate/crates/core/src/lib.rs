//! AIS ship-type classification pipeline: ingest and clean decoded AIS
//! dumps, cut vessel tracks into trips, extract per-trip features, and train
//! and evaluate classifiers over them.

mod aoi;

pub mod config;
pub mod dataset;
pub mod features;
pub mod geo;
pub mod ingest;
pub mod ml;
pub mod pipeline;
pub mod seed;
pub mod segmentation;
pub mod stage;
pub mod synth;
