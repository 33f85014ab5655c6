use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    assign_splits, load_manifest, FeatureCache, FusionSamples, PipelineConfig, Precision, SampleRecord, Split,
};
use crate::agents::{aggregate_video, Agent1, Agent2, TrainReport};
use crate::audio::{embed_audio, read_wav, Waveform};
use crate::fusion::{build_meta_features, cross_validate, CvOutcome, FoldResult, FoldRoc};
use crate::metrics::{evaluate as metric_report, MetricReport};
use crate::nn::{checkpoint, DType, Scalar, Tensor};
use crate::par::{self, Exec};
use crate::semantic::{build_feature, tokenize, FEATURE_WIDTH};
use crate::vision::{load_frame, normalize, resize_bilinear, Frame};
use crate::{Error, Result};

pub const FEATURES_FILE: &str = "features.daft";
pub const SPLITS_FILE: &str = "splits.json";
pub const CONFIG_FILE: &str = "config.json";
pub const AGENT1_FILE: &str = "agent1.damc";
pub const AGENT2_FILE: &str = "agent2.damc";
pub const SCORES_FILE: &str = "scores.json";
pub const FOLD_REPORT_FILE: &str = "fold_report.json";
pub const FOLD_ROC_FILE: &str = "fold_roc.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const REPORT_FILE: &str = "report.md";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentId {
    Agent1,
    Agent2,
}

/// Per-video scores of both agents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub label: u8,
    pub split: Split,
    pub agent1: f64,
    pub agent2: f64,
    pub frames_scored: usize,
}

fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Usage(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<V: for<'de> Deserialize<'de>>(path: &Path, hint: &str) -> Result<V> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact(format!("missing {} ({hint})", path.display())),
        _ => Error::io(path, e),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))
}

fn require_checkpoint(path: &Path, agent: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingArtifact(format!("missing checkpoint {} (run `train {agent}` first)", path.display())))
    }
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn read_text(path: Option<&PathBuf>) -> Result<Option<String>> {
    match path {
        Some(p) if p.is_file() => std::fs::read_to_string(p).map(Some).map_err(|e| Error::io(p, e)),
        _ => Ok(None),
    }
}

/// Loads the dataset written by `extract`.
pub fn load_dataset(out: &Path) -> Result<Vec<SampleRecord>> {
    read_json(&out.join(SPLITS_FILE), "run `extract` first")
}

/// Validates the manifest, assigns splits and caches the multimodal features.
pub fn extract(manifest: &Path, out: &Path, cfg: &PipelineConfig, exec: Exec) -> Result<serde_json::Value> {
    cfg.validate()?;
    let mut records = load_manifest(manifest)?;
    assign_splits(&mut records, &cfg.split, cfg.seed)?;
    let audio_cfg = cfg.audio();
    let features = par::map(exec, &records, |r| -> Result<_> {
        let wave: Option<Waveform> = r.audio.as_deref().map(read_wav).transpose()?;
        let emb = embed_audio(wave.as_ref(), &audio_cfg);
        let asr = read_text(r.asr_text.as_ref())?.map(|t| tokenize(&t));
        let ocr = read_text(r.ocr_text.as_ref())?.map(|t| tokenize(&t));
        Ok(build_feature(&emb, asr.as_ref(), ocr.as_ref()))
    });
    let mut cache = FeatureCache::default();
    let mut audio_missing = 0;
    for (r, f) in records.iter().zip(features) {
        let f = f.map_err(|e| match e {
            Error::Ingestion(m) => Error::Ingestion(format!("sample {}: {m}", r.id)),
            other => other,
        })?;
        audio_missing += usize::from(!f.audio_present);
        cache.put_f64(format!("x/{}", r.id), vec![FEATURE_WIDTH], &f.x);
        cache.put_f64(
            format!("present/{}", r.id),
            vec![2],
            &[f64::from(u8::from(f.audio_present)), f64::from(u8::from(f.text_present))],
        );
    }
    ensure_dir(out)?;
    cache.save(&out.join(FEATURES_FILE))?;
    write_json(&out.join(SPLITS_FILE), &records)?;
    write_json(&out.join(CONFIG_FILE), cfg)?;
    let count = |s| records.iter().filter(|r| r.split == s).count();
    Ok(json!({
        "samples": records.len(),
        "train": count(Split::Train),
        "val": count(Split::Val),
        "test": count(Split::Test),
        "audio_missing": audio_missing,
        "cache": out.join(FEATURES_FILE),
    }))
}

/// Loads, resizes to `side`×`side` RGB and rescales one frame.
pub fn prepare_frame(path: &Path, side: usize) -> Result<Frame> {
    Ok(normalize(&resize_bilinear(&load_frame(path)?.to_rgb(), side, side)))
}

fn selected_frames<'a>(r: &'a SampleRecord, cfg: &PipelineConfig) -> Vec<&'a PathBuf> {
    cfg.frame_policy.select(r.frames.len(), cfg.m).into_iter().map(|i| &r.frames[i]).collect()
}

/// Frame tensor and per-frame labels for the samples of one split.
fn frame_set<T: Scalar>(
    records: &[SampleRecord],
    split: Split,
    cfg: &PipelineConfig,
    exec: Exec,
) -> Result<Option<(Tensor<T>, Vec<u8>)>> {
    let chosen: Vec<&SampleRecord> = records.iter().filter(|r| r.split == split).collect();
    let side = cfg.frame_side();
    let loaded = par::map(exec, &chosen, |r| -> Result<Vec<Tensor<T>>> {
        selected_frames(r, cfg).into_iter().map(|p| prepare_frame(p, side).map(|f| f.to_tensor())).collect()
    });
    let mut frames = Vec::new();
    let mut labels = Vec::new();
    for (r, f) in chosen.iter().zip(loaded) {
        let f = f?;
        labels.extend(std::iter::repeat_n(r.label, f.len()));
        frames.extend(f);
    }
    if frames.is_empty() {
        return Ok(None);
    }
    Ok(Some((Tensor::stack(&frames)?, labels)))
}

fn feature_set<T: Scalar>(
    records: &[SampleRecord],
    split: Option<Split>,
    cache: &FeatureCache,
) -> Result<(Tensor<T>, Vec<u8>, Vec<String>)> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for r in records.iter().filter(|r| split.is_none_or(|s| r.split == s)) {
        let x = cache.get_f64(&format!("x/{}", r.id)).ok_or_else(|| {
            Error::MissingArtifact(format!("feature cache has no entry for {} (re-run `extract`)", r.id))
        })?;
        rows.extend(x);
        labels.push(r.label);
        ids.push(r.id.clone());
    }
    let n = labels.len();
    let t = if n == 0 { Tensor::zeros(&[1, FEATURE_WIDTH]) } else { Tensor::from_f64(vec![n, FEATURE_WIDTH], &rows)? };
    Ok((t, labels, ids))
}

fn train_agent1_typed<T: Scalar>(out: &Path, cfg: &PipelineConfig, exec: Exec) -> Result<TrainReport> {
    let records = load_dataset(out)?;
    let (x, y) = frame_set::<T>(&records, Split::Train, cfg, exec)?
        .ok_or_else(|| Error::Usage("no training frames in the train split".into()))?;
    let val = frame_set::<T>(&records, Split::Val, cfg, exec)?;
    let mut agent = Agent1::<T>::build(cfg.seed, cfg.frame_side())?;
    agent.net.set_exec(exec);
    let policy = cfg.augment.then_some(cfg.augment_policy);
    let report = agent.train(&x, &y, val.as_ref().map(|(vx, vy)| (vx, vy.as_slice())), &cfg.agent1_train(), policy)?;
    agent.save(&out.join(AGENT1_FILE))?;
    Ok(report)
}

fn train_agent2_typed<T: Scalar>(out: &Path, cfg: &PipelineConfig) -> Result<TrainReport> {
    let records = load_dataset(out)?;
    let cache = FeatureCache::load(&out.join(FEATURES_FILE))?;
    let (x, y, _) = feature_set::<T>(&records, Some(Split::Train), &cache)?;
    let (vx, vy, _) = feature_set::<T>(&records, Some(Split::Val), &cache)?;
    let mut agent = Agent2::<T>::build(cfg.seed)?;
    let val = (!vy.is_empty()).then_some((&vx, vy.as_slice()));
    let report = agent.train(&x, &y, val, &cfg.agent2_train())?;
    agent.save(&out.join(AGENT2_FILE))?;
    Ok(report)
}

/// Trains one agent, writing its checkpoint and `<agent>_history.json`.
pub fn train(agent: AgentId, out: &Path, cfg: &PipelineConfig, exec: Exec) -> Result<serde_json::Value> {
    cfg.validate()?;
    let (name, report) = match (agent, cfg.precision) {
        (AgentId::Agent1, Precision::F32) => ("agent1", train_agent1_typed::<f32>(out, cfg, exec)?),
        (AgentId::Agent1, Precision::F64) => ("agent1", train_agent1_typed::<f64>(out, cfg, exec)?),
        (AgentId::Agent2, Precision::F32) => ("agent2", train_agent2_typed::<f32>(out, cfg)?),
        (AgentId::Agent2, Precision::F64) => ("agent2", train_agent2_typed::<f64>(out, cfg)?),
    };
    write_json(&out.join(format!("{name}_history.json")), &report.history)?;
    let last = report.history.last();
    Ok(json!({
        "agent": name,
        "epochs_run": report.history.len(),
        "best_epoch": report.best_epoch,
        "stopped_early": report.stopped_early,
        "final_train_acc": last.map(|r| r.train_acc),
        "final_val_acc": last.and_then(|r| r.val_acc),
    }))
}

fn checkpoint_dtype(path: &Path) -> Result<DType> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint::peek_dtype(&bytes).map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))
}

fn agent1_scores_typed<T: Scalar>(
    path: &Path,
    records: &[SampleRecord],
    cfg: &PipelineConfig,
    exec: Exec,
) -> Result<Vec<(f64, usize)>> {
    let mut agent = Agent1::<T>::load(path)?;
    agent.net.set_exec(exec);
    let side = agent.input_size();
    records
        .iter()
        .map(|r| {
            let frames = selected_frames(r, cfg);
            if frames.is_empty() {
                return Ok((0.5, 0));
            }
            let tensors = par::map(exec, &frames, |p| prepare_frame(p, side).map(|f| f.to_tensor::<T>()))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let scores = agent.predict_frames(&Tensor::stack(&tensors)?)?;
            Ok((aggregate_video(&scores)?, scores.len()))
        })
        .collect()
}

fn agent2_scores_typed<T: Scalar>(path: &Path, records: &[SampleRecord], cache: &FeatureCache) -> Result<Vec<f64>> {
    let agent = Agent2::<T>::load(path)?;
    let (x, _, _) = feature_set::<T>(records, None, cache)?;
    agent.predict_batch(&x)
}

/// Scores every sample with both agents; writes `scores.json` and adds the
/// scores to the feature cache.
pub fn predict(out: &Path, cfg: &PipelineConfig, exec: Exec) -> Result<Vec<ScoreRow>> {
    let p1 = out.join(AGENT1_FILE);
    let p2 = out.join(AGENT2_FILE);
    require_checkpoint(&p1, "agent1")?;
    require_checkpoint(&p2, "agent2")?;
    let records = load_dataset(out)?;
    let cache_path = out.join(FEATURES_FILE);
    let mut cache = FeatureCache::load(&cache_path)?;
    let s1 = match checkpoint_dtype(&p1)? {
        DType::F32 => agent1_scores_typed::<f32>(&p1, &records, cfg, exec)?,
        DType::F64 => agent1_scores_typed::<f64>(&p1, &records, cfg, exec)?,
    };
    let s2 = match checkpoint_dtype(&p2)? {
        DType::F32 => agent2_scores_typed::<f32>(&p2, &records, &cache)?,
        DType::F64 => agent2_scores_typed::<f64>(&p2, &records, &cache)?,
    };
    let rows: Vec<ScoreRow> = records
        .iter()
        .zip(s1)
        .zip(s2)
        .map(|((r, (a1, n)), a2)| ScoreRow {
            id: r.id.clone(),
            label: r.label,
            split: r.split,
            agent1: a1,
            agent2: a2,
            frames_scored: n,
        })
        .collect();
    if let Some(bad) = rows.iter().find(|r| !r.agent1.is_finite() || !r.agent2.is_finite()) {
        return Err(Error::Training(format!("non-finite score for sample {}", bad.id)));
    }
    for r in &rows {
        cache.put_f64(format!("score/agent1/{}", r.id), vec![1], &[r.agent1]);
        cache.put_f64(format!("score/agent2/{}", r.id), vec![1], &[r.agent2]);
    }
    cache.save(&cache_path)?;
    write_json(&out.join(SCORES_FILE), &rows)?;
    Ok(rows)
}

/// Scores all samples, then cross-validates the meta-classifier.
pub fn fuse(out: &Path, cfg: &PipelineConfig, exec: Exec) -> Result<CvOutcome> {
    cfg.validate()?;
    let rows = predict(out, cfg, exec)?;
    let chosen: Vec<&ScoreRow> = rows
        .iter()
        .filter(|r| cfg.fusion_samples == FusionSamples::All || matches!(r.split, Split::Val | Split::Test))
        .collect();
    let a1: Vec<(String, f64)> = chosen.iter().map(|r| (r.id.clone(), r.agent1)).collect();
    let a2: Vec<(String, f64)> = chosen.iter().map(|r| (r.id.clone(), r.agent2)).collect();
    let labels: Vec<(String, u8)> = chosen.iter().map(|r| (r.id.clone(), r.label)).collect();
    let meta = build_meta_features(&a1, &a2, &labels, cfg.meta_dims)?;
    let outcome = cross_validate(&meta, cfg.folds, &cfg.forest_config(), exec)?;
    let mut table: Vec<FoldResult> = outcome.folds.clone();
    table.push(outcome.mean.clone());
    write_json(&out.join(FOLD_REPORT_FILE), &table)?;
    write_json(&out.join(FOLD_ROC_FILE), &outcome.rocs)?;
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentEvaluation {
    pub agent: String,
    pub split: Split,
    pub samples: usize,
    pub metrics: MetricReport,
}

/// Video-level metrics of each agent on the train, validation and test splits.
pub fn evaluate(out: &Path) -> Result<Vec<AgentEvaluation>> {
    let rows: Vec<ScoreRow> = read_json(&out.join(SCORES_FILE), "run `predict` or `fuse` first")?;
    let mut evals = Vec::new();
    for agent in ["agent1", "agent2"] {
        for split in [Split::Train, Split::Val, Split::Test] {
            let part: Vec<&ScoreRow> = rows.iter().filter(|r| r.split == split).collect();
            if part.is_empty() {
                continue;
            }
            let labels: Vec<u8> = part.iter().map(|r| r.label).collect();
            let scores: Vec<f64> = part.iter().map(|r| if agent == "agent1" { r.agent1 } else { r.agent2 }).collect();
            evals.push(AgentEvaluation {
                agent: agent.into(),
                split,
                samples: part.len(),
                metrics: metric_report(&labels, &scores, 0.5)?,
            });
        }
    }
    write_json(&out.join(EVALUATION_FILE), &evals)?;
    Ok(evals)
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

/// Markdown fold table: per-fold rows and a trailing Mean row.
pub fn render_fold_table(rows: &[FoldResult]) -> String {
    let mut s = String::from("| Fold | Accuracy (%) | Precision (%) | Recall (%) | F1 (%) | AUC (%) |\n");
    s.push_str("|------|--------------|---------------|------------|--------|---------|\n");
    for r in rows {
        let fold = if r.fold == "mean" { "Mean".to_string() } else { r.fold.clone() };
        s.push_str(&format!(
            "| {fold} | {} | {} | {} | {} | {} |\n",
            pct(r.accuracy),
            pct(r.precision),
            pct(r.recall),
            pct(r.f1),
            pct(r.auc)
        ));
    }
    s
}

fn render_macro_table(rows: &[FoldResult]) -> String {
    let mut s = String::from("| Fold | Macro precision (%) | Macro recall (%) |\n");
    s.push_str("|------|---------------------|------------------|\n");
    for r in rows {
        let fold = if r.fold == "mean" { "Mean".to_string() } else { r.fold.clone() };
        s.push_str(&format!("| {fold} | {} | {} |\n", pct(r.precision_macro), pct(r.recall_macro)));
    }
    s
}

/// Renders `report.md` and one `roc_fold{k}.csv` per fold.
pub fn report(out: &Path) -> Result<PathBuf> {
    let rows: Vec<FoldResult> = read_json(&out.join(FOLD_REPORT_FILE), "run `fuse` first")?;
    let rocs: Vec<FoldRoc> = read_json(&out.join(FOLD_ROC_FILE), "run `fuse` first")?;
    let mut md = String::from("# Meta-classifier cross-validation\n\n");
    md.push_str(&render_fold_table(&rows));
    md.push_str("\nPrecision and recall are for the fake class; F1 is macro-averaged.\n\n");
    md.push_str("## Macro-averaged precision and recall\n\n");
    md.push_str(&render_macro_table(&rows));
    let evals_path = out.join(EVALUATION_FILE);
    if evals_path.is_file() {
        let evals: Vec<AgentEvaluation> = read_json(&evals_path, "run `evaluate`")?;
        md.push_str("\n## Agents\n\n| Agent | Split | Samples | Accuracy (%) | Precision (%) | Recall (%) | F1 (%) | AUC (%) |\n");
        md.push_str("|-------|-------|---------|--------------|---------------|------------|--------|---------|\n");
        for e in &evals {
            let m = &e.metrics;
            let split =
                serde_json::to_value(e.split).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            md.push_str(&format!(
                "| {} | {split} | {} | {} | {} | {} | {} | {} |\n",
                e.agent,
                e.samples,
                pct(m.accuracy),
                pct(m.precision_per_class[1]),
                pct(m.recall_per_class[1]),
                pct(m.macro_f1),
                m.auc.map_or("n/a".to_string(), pct)
            ));
        }
    }
    for roc in &rocs {
        let mut csv = String::from("fpr,tpr,threshold\n");
        for p in &roc.points {
            csv.push_str(&format!("{},{},{}\n", p.fpr, p.tpr, p.threshold));
        }
        let path = out.join(format!("roc_fold{}.csv", roc.fold));
        std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    }
    let path = out.join(REPORT_FILE);
    std::fs::write(&path, md).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_table_formats_percentages() {
        let row = |fold: &str, v: f64| FoldResult {
            fold: fold.into(),
            accuracy: v,
            precision: v,
            recall: v,
            f1: v,
            auc: v,
            precision_macro: v,
            recall_macro: v,
        };
        let t = render_fold_table(&[row("1", 0.97526), row("mean", 1.0)]);
        assert!(t.contains("| 1 | 97.53 | 97.53 | 97.53 | 97.53 | 97.53 |"), "{t}");
        assert!(t.contains("| Mean | 100.00 |"));
    }

    #[test]
    fn fuse_without_checkpoints_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = fuse(dir.path(), &PipelineConfig::default(), Exec::Sequential).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let msg = err.to_string();
        assert!(msg.contains("missing checkpoint") && msg.contains(AGENT1_FILE), "{msg}");
    }
}
