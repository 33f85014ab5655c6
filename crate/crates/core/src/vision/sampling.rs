use serde::{Deserialize, Serialize};

/// Which frames of a video feed the visual agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FramePolicy {
    /// Every fifth frame.
    Interval5,
    /// Up to `m` evenly spaced frames.
    Even,
}

impl FramePolicy {
    pub fn select(self, n_frames: usize, m: usize) -> Vec<usize> {
        match self {
            FramePolicy::Interval5 => sample_interval(n_frames, 5),
            FramePolicy::Even => sample_even(n_frames, m),
        }
    }
}

impl std::str::FromStr for FramePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "interval5" => Ok(FramePolicy::Interval5),
            "even" => Ok(FramePolicy::Even),
            other => Err(format!("unknown frame policy {other:?} (interval5 | even)")),
        }
    }
}

pub fn sample_interval(n_frames: usize, interval: usize) -> Vec<usize> {
    (0..n_frames).step_by(interval.max(1)).collect()
}

/// `round(i·(n−1)/(m−1))` for `i < m`, or every index when `n ≤ m`.
pub fn sample_even(n_frames: usize, m: usize) -> Vec<usize> {
    if n_frames <= m {
        return (0..n_frames).collect();
    }
    if m <= 1 {
        return vec![0];
    }
    let (num, den) = (n_frames - 1, m - 1);
    let mut out: Vec<usize> = (0..m).map(|i| (2 * i * num + den) / (2 * den)).collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        assert_eq!(sample_interval(20, 5), vec![0, 5, 10, 15]);
        assert_eq!(sample_interval(3, 5), vec![0]);
        assert_eq!(sample_interval(100, 5).len(), 20);
    }

    #[test]
    fn even_examples() {
        assert_eq!(sample_even(5, 10), vec![0, 1, 2, 3, 4]);
        assert_eq!(sample_even(100, 10), vec![0, 11, 22, 33, 44, 55, 66, 77, 88, 99]);
        assert_eq!(sample_even(1, 7), vec![0]);
        assert_eq!(sample_even(9, 1), vec![0]);
    }

    #[test]
    fn policy_parses() {
        assert_eq!("even".parse::<FramePolicy>().unwrap(), FramePolicy::Even);
        assert!("every".parse::<FramePolicy>().is_err());
    }
}
