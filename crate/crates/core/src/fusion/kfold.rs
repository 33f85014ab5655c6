use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Shuffles each class with a seeded stream and deals its members round-robin
/// over the folds; the second class continues where the first stopped, so
/// fold sizes stay within one of each other.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k ≥ 2, got {k}")));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Usage(format!("labels must be 0/1, got {bad}")));
    }
    let mut rng = Rng::new(seed);
    let mut buckets = vec![Vec::new(); k];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::Usage(format!("class {class} has {} samples, fewer than k = {k}", members.len())));
        }
        rng.shuffle(&mut members);
        for i in members {
            buckets[next].push(i);
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let mut validation = buckets[f].clone();
            validation.sort_unstable();
            let mut train: Vec<usize> = (0..k).filter(|&g| g != f).flat_map(|g| buckets[g].iter().copied()).collect();
            train.sort_unstable();
            Fold { train, validation }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(labels: &[u8], idx: &[usize], c: u8) -> usize {
        idx.iter().filter(|&&i| labels[i] == c).count()
    }

    #[test]
    fn balanced_hundred() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        for f in stratified_kfold(&labels, 5, 42).unwrap() {
            assert_eq!(count(&labels, &f.validation, 1), 10);
            assert_eq!(count(&labels, &f.validation, 0), 10);
        }
    }

    #[test]
    fn uneven_remainders() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i < 52)).collect();
        for f in stratified_kfold(&labels, 5, 7).unwrap() {
            assert!([10, 11].contains(&count(&labels, &f.validation, 1)));
        }
    }

    #[test]
    fn small_class_is_error() {
        assert!(matches!(stratified_kfold(&[0, 0, 0, 0, 0, 1, 1], 5, 1), Err(Error::Usage(_))));
    }
}
