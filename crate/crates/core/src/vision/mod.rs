//! Frame ingestion and preprocessing.

mod augment;
mod frame;
mod sampling;
mod transform;

pub use augment::{augment, AugmentPolicy};
pub use frame::{decode_pnm, encode_pnm, load_frame, save_frame, Frame};
pub use sampling::{sample_even, sample_interval, FramePolicy};
pub use transform::{grayscale, normalize, resize_bilinear};

pub const AGENT1_INPUT: usize = 224;
