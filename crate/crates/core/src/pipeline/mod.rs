//! Manifests, configuration, caching, fixtures and the end-to-end commands.

mod cache;
pub mod commands;
mod config;
mod fixtures;
mod manifest;

pub use cache::{CacheEntry, FeatureCache};
pub use config::{FusionSamples, PipelineConfig, Precision, SplitFractions, CONFIG_ENV};
pub use fixtures::{gen_fixtures, FixtureSpec, FRAMES_PER_VIDEO, FRAME_SIDE};
pub use manifest::{assign_splits, load_manifest, SampleRecord, Split};
