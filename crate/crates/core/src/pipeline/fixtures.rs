//! Synthetic labelled videos for desk-scale runs.
//!
//! Real samples carry smooth gradient frames, a sine tone and sidecars whose
//! frame text repeats most of the transcript. Fake samples add blocky pixel
//! offsets scaled by `strength` and shrink the transcript overlap by `gap`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::audio::{encode_wav, Waveform, TARGET_RATE};
use crate::rng::Rng;
use crate::vision::{encode_pnm, Frame};
use crate::{Error, Result};

pub const FRAMES_PER_VIDEO: usize = 4;
pub const FRAME_SIDE: usize = 72;
pub const BLOCK: usize = 8;
const AUDIO_SAMPLES: usize = 8000;
const TRANSCRIPT_WORDS: usize = 12;

const VOCAB: [&str; 64] = [
    "about",
    "after",
    "again",
    "always",
    "answer",
    "around",
    "before",
    "begin",
    "between",
    "bring",
    "change",
    "city",
    "close",
    "country",
    "during",
    "early",
    "enough",
    "every",
    "family",
    "follow",
    "friend",
    "garden",
    "great",
    "group",
    "happen",
    "health",
    "house",
    "important",
    "island",
    "large",
    "later",
    "letter",
    "light",
    "market",
    "money",
    "morning",
    "mother",
    "music",
    "never",
    "night",
    "number",
    "often",
    "open",
    "paper",
    "people",
    "place",
    "point",
    "public",
    "question",
    "river",
    "school",
    "second",
    "simple",
    "small",
    "story",
    "student",
    "summer",
    "system",
    "today",
    "together",
    "until",
    "water",
    "window",
    "world",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixtureSpec {
    pub samples: usize,
    pub strength: f64,
    pub gap: f64,
    pub seed: u64,
}

#[derive(Serialize)]
struct ManifestEntry {
    id: String,
    label: u8,
    frames: Vec<String>,
    audio: String,
    asr_text: String,
    ocr_text: String,
}

fn gradient_frame(rng: &mut Rng) -> Frame {
    let base = [0; 3].map(|_| rng.uniform_range(60.0, 190.0));
    let amp = rng.uniform_range(30.0, 60.0);
    let angle = rng.uniform_range(0.0, std::f64::consts::TAU);
    let (s, c) = angle.sin_cos();
    let n = FRAME_SIDE as f64;
    let mut f = Frame::filled(FRAME_SIDE, FRAME_SIDE, 3, 0.0);
    for y in 0..FRAME_SIDE {
        for x in 0..FRAME_SIDE {
            let t = c * (x as f64 / n - 0.5) + s * (y as f64 / n - 0.5);
            for (ch, b) in base.iter().enumerate() {
                f.set(x, y, ch, b + amp * t * (1.0 + 0.2 * ch as f64));
            }
        }
    }
    f
}

fn add_blocks(f: &mut Frame, strength: f64, rng: &mut Rng) {
    for by in (0..f.height).step_by(BLOCK) {
        for bx in (0..f.width).step_by(BLOCK) {
            let hit = rng.bernoulli(0.5);
            let sign = if rng.bernoulli(0.5) { 1.0 } else { -1.0 };
            if !hit {
                continue;
            }
            let delta = sign * strength * 60.0;
            for y in by..(by + BLOCK).min(f.height) {
                for x in bx..(bx + BLOCK).min(f.width) {
                    for c in 0..f.channels {
                        let v = f.at(x, y, c) + delta;
                        f.set(x, y, c, v);
                    }
                }
            }
        }
    }
}

fn pick_words(pool: &[&'static str], k: usize, rng: &mut Rng) -> Vec<&'static str> {
    let mut p = pool.to_vec();
    rng.shuffle(&mut p);
    p.truncate(k);
    p
}

fn sidecars(fake: bool, gap: f64, rng: &mut Rng) -> (String, String) {
    let asr = pick_words(&VOCAB, TRANSCRIPT_WORDS, rng);
    let others: Vec<&str> = VOCAB.iter().copied().filter(|w| !asr.contains(w)).collect();
    let q = rng.uniform_range(0.8, 1.0);
    let overlap = if fake { q * (1.0 - gap) } else { q };
    let shared = (overlap * TRANSCRIPT_WORDS as f64).round() as usize;
    let mut ocr = pick_words(&asr, shared, rng);
    ocr.extend(pick_words(&others, TRANSCRIPT_WORDS - shared + 2, rng));
    rng.shuffle(&mut ocr);
    let mut transcript = asr.join(" ");
    if let Some(first) = transcript.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    transcript.push_str(".\n");
    let caption = ocr.iter().map(|w| w.to_uppercase()).collect::<Vec<_>>().join("\n") + "\n";
    (transcript, caption)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `samples/<id>/…`, sidecars `samples/<id>.asr.txt` / `.ocr.txt` and
/// `manifest.json` under `out`; returns the manifest path.
pub fn gen_fixtures(out: &Path, spec: &FixtureSpec) -> Result<PathBuf> {
    if spec.samples == 0 || !spec.samples.is_multiple_of(2) {
        return Err(Error::Usage(format!("sample count must be even and positive, got {}", spec.samples)));
    }
    if !(0.0..=1.0).contains(&spec.strength) || !(0.0..=1.0).contains(&spec.gap) {
        return Err(Error::Usage("strength and gap must lie in [0, 1]".into()));
    }
    let samples_dir = out.join("samples");
    std::fs::create_dir_all(&samples_dir).map_err(|e| Error::io(&samples_dir, e))?;
    let mut manifest = Vec::with_capacity(spec.samples);
    for i in 0..spec.samples {
        let label = (i % 2) as u8;
        let fake = label == 1;
        let id = format!("vid{i:04}");
        let mut rng = Rng::derive(spec.seed, i as u64);
        let dir = samples_dir.join(&id);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

        let mut frames = Vec::with_capacity(FRAMES_PER_VIDEO);
        for j in 0..FRAMES_PER_VIDEO {
            let mut f = gradient_frame(&mut rng);
            if fake {
                add_blocks(&mut f, spec.strength, &mut rng);
            }
            let name = format!("frame_{j:02}.ppm");
            write(&dir.join(&name), &encode_pnm(&f))?;
            frames.push(format!("samples/{id}/{name}"));
        }

        let freq = rng.uniform_range(200.0, 600.0);
        let amp = rng.uniform_range(0.3, 0.6);
        let wave = Waveform {
            samples: (0..AUDIO_SAMPLES)
                .map(|n| amp * (std::f64::consts::TAU * freq * n as f64 / TARGET_RATE as f64).sin())
                .collect(),
            sample_rate: TARGET_RATE,
        };
        write(&dir.join("audio.wav"), &encode_wav(&wave))?;

        let (asr, ocr) = sidecars(fake, spec.gap, &mut rng);
        write(&samples_dir.join(format!("{id}.asr.txt")), asr.as_bytes())?;
        write(&samples_dir.join(format!("{id}.ocr.txt")), ocr.as_bytes())?;

        manifest.push(ManifestEntry {
            audio: format!("samples/{id}/audio.wav"),
            asr_text: format!("samples/{id}.asr.txt"),
            ocr_text: format!("samples/{id}.ocr.txt"),
            id,
            label,
            frames,
        });
    }
    let path = out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&path, json.as_bytes())?;
    Ok(path)
}
