//! The two first-level detectors and their training loop.

mod agent1;
mod agent2;
pub mod train;

pub use agent1::{Agent1, DESK_INPUT, FAKE_CLASS};
pub use agent2::{agent2_network, Agent2, AGENT2_WIDTHS};
pub use train::{EpochRecord, LrReduction, Objective, TrainConfig, TrainReport};

use crate::{Error, Result};

/// Mean of the per-frame fake probabilities of one video.
pub fn aggregate_video(frame_scores: &[f64]) -> Result<f64> {
    if frame_scores.is_empty() {
        return Err(Error::Usage("cannot aggregate a video with no frame scores".into()));
    }
    Ok(frame_scores.iter().sum::<f64>() / frame_scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_examples() {
        assert!((aggregate_video(&[0.2, 0.4, 0.6]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(aggregate_video(&[0.9]).unwrap(), 0.9);
        assert_eq!(aggregate_video(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(aggregate_video(&[]).is_err());
    }
}
