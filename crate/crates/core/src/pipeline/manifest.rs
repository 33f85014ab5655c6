use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SplitFractions;
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    #[default]
    Unassigned,
}

/// One video. Label 0 is real, 1 is fake.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub label: u8,
    #[serde(default)]
    pub frames: Vec<PathBuf>,
    #[serde(default)]
    pub audio: Option<PathBuf>,
    #[serde(default)]
    pub asr_text: Option<PathBuf>,
    #[serde(default)]
    pub ocr_text: Option<PathBuf>,
    #[serde(default)]
    pub split: Split,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    label: Option<serde_json::Value>,
    #[serde(default)]
    frames: Vec<PathBuf>,
    audio: Option<PathBuf>,
    asr_text: Option<PathBuf>,
    ocr_text: Option<PathBuf>,
    #[serde(default)]
    split: Split,
}

/// Parses and validates a manifest, resolving relative paths against its
/// directory. All violations are reported together.
pub fn load_manifest(path: &Path) -> Result<Vec<SampleRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: Vec<RawRecord> = serde_json::from_str(&text)
        .map_err(|e| Error::Ingestion(format!("{}: not a JSON array of sample records: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for (i, r) in raw.into_iter().enumerate() {
        let id = match r.id {
            Some(serde_json::Value::String(s)) if !s.is_empty() => s,
            other => {
                problems.push(format!("record {i}: id must be a non-empty string, got {other:?}"));
                format!("#{i}")
            }
        };
        if !seen.insert(id.clone()) {
            problems.push(format!("duplicate id {id:?}"));
        }
        let label = match r.label.as_ref().and_then(serde_json::Value::as_u64) {
            Some(l @ 0..=1) => l as u8,
            _ => {
                problems.push(format!("{id}: label must be 0 (real) or 1 (fake), got {:?}", r.label));
                0
            }
        };
        let frames: Vec<PathBuf> = r.frames.into_iter().map(resolve).collect();
        let audio = r.audio.map(resolve);
        let asr_text = r.asr_text.map(resolve);
        let ocr_text = r.ocr_text.map(resolve);
        if frames.is_empty() && audio.is_none() {
            problems.push(format!("{id}: needs at least one frame or an audio file"));
        }
        for p in frames.iter().chain(&audio).chain(&asr_text).chain(&ocr_text) {
            if !p.is_file() {
                problems.push(format!("{id}: missing file {}", p.display()));
            }
        }
        out.push(SampleRecord { id, label, frames, audio, asr_text, ocr_text, split: r.split });
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(Error::Ingestion(format!("{}: {} problem(s): {}", path.display(), problems.len(), problems.join("; "))))
    }
}

/// Stratified seeded split. Per class: `round(val·n)` validation and
/// `round(test·n)` test samples, the remainder train.
pub fn assign_splits(records: &mut [SampleRecord], fractions: &SplitFractions, seed: u64) -> Result<()> {
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..records.len()).filter(|&i| records[i].label == class).collect();
        if members.len() < 3 {
            return Err(Error::Usage(format!(
                "class {class} has {} samples; splitting needs at least 3",
                members.len()
            )));
        }
        Rng::derive(seed, class as u64).shuffle(&mut members);
        let n = members.len() as f64;
        let n_val = (fractions.val * n).round() as usize;
        let n_test = (fractions.test * n).round() as usize;
        for (k, &i) in members.iter().enumerate() {
            records[i].split = if k < n_val {
                Split::Val
            } else if k < n_val + n_test {
                Split::Test
            } else {
                Split::Train
            };
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(per_class: usize) -> Vec<SampleRecord> {
        (0..2 * per_class)
            .map(|i| SampleRecord {
                id: format!("v{i}"),
                label: (i % 2) as u8,
                frames: vec![],
                audio: None,
                asr_text: None,
                ocr_text: None,
                split: Split::Unassigned,
            })
            .collect()
    }

    fn counts(r: &[SampleRecord], class: u8) -> [usize; 3] {
        let c = |s| r.iter().filter(|x| x.label == class && x.split == s).count();
        [c(Split::Train), c(Split::Val), c(Split::Test)]
    }

    #[test]
    fn hundred_balanced() {
        let mut r = records(50);
        assign_splits(&mut r, &SplitFractions::default(), 42).unwrap();
        assert_eq!(counts(&r, 0), [35, 10, 5]);
        assert_eq!(counts(&r, 1), [35, 10, 5]);
    }

    #[test]
    fn ten_per_class_and_repeatable() {
        let mut a = records(10);
        let mut b = records(10);
        assign_splits(&mut a, &SplitFractions::default(), 42).unwrap();
        assign_splits(&mut b, &SplitFractions::default(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(counts(&a, 1), [7, 2, 1]);
    }

    #[test]
    fn tiny_class_rejected() {
        let mut r = records(2);
        assert!(matches!(assign_splits(&mut r, &SplitFractions::default(), 1), Err(Error::Usage(_))));
    }

    #[test]
    fn manifest_violations_are_collected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.pgm"), b"P5\n1 1\n255\n\x00").unwrap();
        let m = dir.path().join("m.json");
        std::fs::write(
            &m,
            r#"[{"id":"x","label":0,"frames":["a.pgm"]},
                {"id":"x","label":1,"frames":["a.pgm"]},
                {"id":"y","label":3,"frames":["gone.pgm"]}]"#,
        )
        .unwrap();
        let msg = load_manifest(&m).unwrap_err().to_string();
        assert!(msg.contains("duplicate id \"x\""), "{msg}");
        assert!(msg.contains("gone.pgm"), "{msg}");
        assert!(msg.contains("label"), "{msg}");
        std::fs::write(&m, r#"[{"id":"a","label":0,"frames":["a.pgm"]},{"id":"b","label":1,"frames":["a.pgm"]}]"#)
            .unwrap();
        let ok = load_manifest(&m).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(ok[0].frames[0].is_absolute());
    }
}
