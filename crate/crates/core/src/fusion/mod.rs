//! Score-level fusion with a random-forest meta-classifier.

mod cv;
mod forest;
mod kfold;
mod meta;
mod tree;

pub use cv::{cross_validate, CvOutcome, FoldResult, FoldRoc};
pub use forest::{ForestConfig, ForestModel};
pub use kfold::{stratified_kfold, Fold};
pub use meta::{build_meta_features, MetaFeature, Standardizer};
pub use tree::{DecisionTree, Node};
