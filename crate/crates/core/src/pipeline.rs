//! End-to-end commands: scoring, aggregation, selection, sweeps and reports.
//!
//! Score tokens may carry a split suffix (`baseline-Split1`). When evaluating
//! model `m` under split `S`, scores `m-S` are preferred and plain `m` scores
//! are used for every split otherwise.
//!
//! Every output file is written atomically and row order is fixed, so
//! repeated runs over the same inputs produce byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::aggregate::{consensus_label, kappa_matrix, soft_labels, ConsensusLabel, SoftLabelSeries};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::formats::{self, render_intervals, render_series, write_atomic};
use crate::metrics::{mae_vs_soft, mean_std, per_annotator_eval, AnnotatorMetrics};
use crate::scorer::{fit_background_files, normalize_scores, score_files};
use crate::select::{Method, SelectionParams};
use crate::sweep::{build_cases, sweep, SweepResult};
use crate::types::{EventInterval, ModelId, Scene, ScoreSeries, SplitId, VideoId};

pub const HEATMAP_BINS: usize = 100;

fn model_for_split(base: &str, split: SplitId) -> String {
    format!("{base}-{split}")
}

/// Strips a `-Split1` / `-Split2` suffix from a score token.
pub fn base_model(token: &ModelId) -> (&str, Option<SplitId>) {
    let s = token.as_str();
    for split in SplitId::ALL {
        if let Some(base) = s.strip_suffix(&format!("-{split}")) {
            if !base.is_empty() {
                return (base, Some(split));
            }
        }
    }
    (s, None)
}

/// Distinct model names after stripping split suffixes.
pub fn base_models(dataset: &Dataset) -> Vec<String> {
    dataset
        .models()
        .map(|m| base_model(m).0.to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Scores of `base` to use under `split`.
pub fn resolve_scores<'d>(
    dataset: &'d Dataset,
    base: &str,
    split: SplitId,
) -> Option<&'d BTreeMap<VideoId, ScoreSeries>> {
    let suffixed = ModelId::new(model_for_split(base, split)).ok()?;
    dataset
        .model_scores(&suffixed)
        .or_else(|| dataset.model_scores(&ModelId::new(base).ok()?))
}

// ---------------------------------------------------------------- score

/// Fits the baseline scorer per scene on the split's training videos and
/// scores every video of that scene.
///
/// Writes raw scores to `<out>/scores/<video>.<model>-<split>.csv` and
/// min-max normalized scores to `<out>/scores_normalized/` under the same name.
pub fn cmd_score(dataset: &Dataset, out: &Path, split: SplitId, model: &str, exec: Exec) -> Result<Vec<PathBuf>> {
    let cfg_path = dataset.root().join("splits").join(format!("{split}.cfg"));
    if !cfg_path.is_file() {
        return Err(Error::MissingFile(cfg_path));
    }
    let token = ModelId::new(model_for_split(model, split))?;
    let mut written = Vec::new();
    for cfg in dataset.splits().iter().filter(|s| s.split_id == split) {
        let train: Vec<PathBuf> = cfg
            .train_video_ids
            .iter()
            .flat_map(|id| {
                let meta = dataset.video(id).expect("validated at load");
                (0..meta.frame_count()).filter_map(move |i| dataset.frame_path(id, i))
            })
            .collect();
        let background = fit_background_files(&train)?;
        for meta in dataset.scene_videos(cfg.scene) {
            let paths: Vec<PathBuf> = (0..meta.frame_count())
                .filter_map(|i| dataset.frame_path(&meta.video_id, i))
                .collect();
            let raw = score_files(&background, &paths, exec)?;
            let name = format!("{}.{token}.csv", meta.video_id);
            let raw_path = out.join("scores").join(&name);
            write_atomic(&raw_path, render_series(formats::SCORE_HEADER, &raw).as_bytes())?;
            let norm_path = out.join("scores_normalized").join(&name);
            write_atomic(
                &norm_path,
                render_series(formats::SCORE_HEADER, &normalize_scores(&raw)).as_bytes(),
            )?;
            written.push(raw_path);
            written.push(norm_path);
        }
    }
    Ok(written)
}

// ------------------------------------------------------------ aggregate

/// Soft labels for every annotated video.
pub fn all_soft_labels(dataset: &Dataset) -> Result<BTreeMap<VideoId, SoftLabelSeries>> {
    dataset
        .videos()
        .map(|meta| {
            let records = dataset.records_for_video(&meta.video_id);
            if records.is_empty() {
                return Err(Error::EmptyAnnotations(meta.video_id.to_string()));
            }
            Ok((meta.video_id.clone(), soft_labels(&records, meta.frame_count())?))
        })
        .collect()
}

/// Consensus intervals for every video.
pub fn all_consensus(dataset: &Dataset) -> Result<BTreeMap<VideoId, ConsensusLabel>> {
    dataset
        .videos()
        .map(|meta| {
            let records = dataset.records_for_video(&meta.video_id);
            if records.is_empty() {
                return Err(Error::EmptyAnnotations(meta.video_id.to_string()));
            }
            Ok((meta.video_id.clone(), consensus_label(&records)?))
        })
        .collect()
}

/// Writes `soft_labels/<video>.csv`, `consensus.csv` and `kappa.csv` under `out`.
pub fn cmd_aggregate(dataset: &Dataset, out: &Path, exec: Exec) -> Result<Vec<PathBuf>> {
    let soft = all_soft_labels(dataset)?;
    let consensus = all_consensus(dataset)?;
    let kappa = kappa_matrix(dataset, exec)?;
    let mut written = Vec::new();
    for (video, series) in &soft {
        let path = out.join("soft_labels").join(format!("{video}.csv"));
        write_atomic(&path, render_series("frame,value", &series.values).as_bytes())?;
        written.push(path);
    }
    let path = out.join("consensus.csv");
    write_atomic(
        &path,
        render_intervals(consensus.iter().map(|(v, c)| (v, Some(c.interval)))).as_bytes(),
    )?;
    written.push(path);
    let path = out.join("kappa.csv");
    write_atomic(&path, kappa.to_csv().as_bytes())?;
    written.push(path);
    Ok(written)
}

// --------------------------------------------------------------- select

/// Predictions of one selection setting for every video scored by `model`.
pub fn predict(
    dataset: &Dataset,
    model: &ModelId,
    params: SelectionParams,
) -> Result<BTreeMap<VideoId, Option<EventInterval>>> {
    let scores = dataset.model_scores(model).ok_or_else(|| Error::MissingScores {
        model: model.to_string(),
        video: "*".into(),
    })?;
    Ok(scores
        .iter()
        .map(|(v, s)| (v.clone(), params.select(&normalize_scores(&s.scores))))
        .collect())
}

/// Writes `predictions/<model>.<method>.<param>.csv`.
pub fn cmd_select(dataset: &Dataset, out: &Path, model: &ModelId, params: SelectionParams) -> Result<PathBuf> {
    let preds = predict(dataset, model, params)?;
    let path = out.join("predictions").join(format!(
        "{model}.{}.{:.2}.csv",
        params.method, params.param
    ));
    write_atomic(&path, render_intervals(preds.iter().map(|(v, p)| (v, *p))).as_bytes())?;
    Ok(path)
}

// ---------------------------------------------------------------- sweep

/// Scenes with at least one video, in order.
fn populated_scenes(dataset: &Dataset) -> Vec<Scene> {
    Scene::ALL
        .into_iter()
        .filter(|&s| dataset.scene_videos(s).next().is_some())
        .collect()
}

/// Scores of `base` under `split` restricted to `scene`, or `None` when the
/// model has no scores for any video of the scene.
fn scene_scores<'d>(
    dataset: &'d Dataset,
    base: &str,
    split: SplitId,
    scene: Scene,
) -> Option<&'d BTreeMap<VideoId, ScoreSeries>> {
    let scores = resolve_scores(dataset, base, split)?;
    dataset
        .scene_videos(scene)
        .any(|v| scores.contains_key(&v.video_id))
        .then_some(scores)
}

/// Runs the sweep for every split, model, method and scene.
pub fn run_sweeps(
    dataset: &Dataset,
    consensus: &BTreeMap<VideoId, ConsensusLabel>,
    methods: &[Method],
    exec: Exec,
) -> Result<Vec<SweepResult>> {
    let mut results = Vec::new();
    for split in dataset.split_ids() {
        for base in base_models(dataset) {
            let model_id = ModelId::new(base.clone())?;
            for &method in methods {
                for scene in populated_scenes(dataset) {
                    let Some(scores) = scene_scores(dataset, &base, split, scene) else {
                        continue;
                    };
                    let cases = build_cases(dataset.scene_videos(scene), &model_id, scores, consensus)?;
                    results.push(sweep(model_id.clone(), split, scene, method, &cases, exec));
                }
            }
        }
    }
    Ok(results)
}

pub fn render_sweep_csv(results: &[SweepResult]) -> String {
    let mut out = String::from("split,model,method,scene,param,tiou\n");
    for r in results {
        for (param, tiou) in &r.curve {
            let _ = writeln!(
                out,
                "{},{},{},{},{param:.2},{tiou}",
                r.split_id, r.model_id, r.method, r.scene
            );
        }
    }
    out
}

/// Writes `reports/sweep.csv` and returns the sweep results.
pub fn cmd_sweep(dataset: &Dataset, out: &Path, methods: &[Method], exec: Exec) -> Result<Vec<SweepResult>> {
    let consensus = all_consensus(dataset)?;
    let results = run_sweeps(dataset, &consensus, methods, exec)?;
    write_atomic(
        &out.join("reports").join("sweep.csv"),
        render_sweep_csv(&results).as_bytes(),
    )?;
    Ok(results)
}

// ------------------------------------------------------------- evaluate

#[derive(Debug, Clone, PartialEq)]
pub struct MaeRow {
    pub split: SplitId,
    pub model: String,
    pub scene: Scene,
    pub mean: f64,
    pub std: f64,
    pub best_video: VideoId,
    pub best_value: f64,
}

/// Which predictions the per-annotator report is computed from.
#[derive(Debug, Clone, Default)]
pub struct AnnotatorReportChoice {
    /// Defaults to the first split.
    pub split: Option<SplitId>,
    /// Defaults to the first model name.
    pub model: Option<String>,
    /// Defaults to [`Method::FindPeaks`]. The parameter is the sweep's best one.
    pub method: Option<Method>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub mae: Vec<MaeRow>,
    pub sweeps: Vec<SweepResult>,
    pub annotator_metrics: Vec<AnnotatorMetrics>,
}

pub fn mae_rows(dataset: &Dataset, soft: &BTreeMap<VideoId, SoftLabelSeries>) -> Result<Vec<MaeRow>> {
    let mut rows = Vec::new();
    for split in dataset.split_ids() {
        for base in base_models(dataset) {
            for scene in populated_scenes(dataset) {
                let Some(scores) = scene_scores(dataset, &base, split, scene) else {
                    continue;
                };
                let mut per_video = Vec::new();
                for meta in dataset.scene_videos(scene) {
                    let id = &meta.video_id;
                    let series = scores.get(id).ok_or_else(|| Error::MissingScores {
                        model: base.clone(),
                        video: id.to_string(),
                    })?;
                    let labels = soft
                        .get(id)
                        .ok_or_else(|| Error::MissingConsensus(id.to_string()))?;
                    per_video.push((id, mae_vs_soft(&normalize_scores(&series.scores), &labels.values)?));
                }
                let values: Vec<f64> = per_video.iter().map(|(_, m)| *m).collect();
                let (mean, std) = mean_std(&values);
                let (best_video, best_value) = per_video
                    .iter()
                    .fold(None, |best: Option<(&VideoId, f64)>, &(v, m)| match best {
                        Some(b) if m >= b.1 => Some(b),
                        _ => Some((v, m)),
                    })
                    .expect("populated scene");
                rows.push(MaeRow {
                    split,
                    model: base.clone(),
                    scene,
                    mean,
                    std,
                    best_video: best_video.clone(),
                    best_value,
                });
            }
        }
    }
    Ok(rows)
}

pub fn render_mae_csv(rows: &[MaeRow]) -> String {
    let mut out = String::from("split,model,scene,mean,std,best_video,best_value\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.split, r.model, r.scene, r.mean, r.std, r.best_video, r.best_value
        );
    }
    out
}

pub fn render_annotator_csv(rows: &[AnnotatorMetrics]) -> String {
    let mut out = String::from("scene,annotator,precision,recall,f1,tiou\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scene, r.annotator_id, r.precision, r.recall, r.f1, r.tiou
        );
    }
    out
}

/// Nearest-index resampling of each soft-label series onto [`HEATMAP_BINS`] bins.
///
/// Bin `b` samples frame `floor((b + 0.5) * T / 100)`, the frame under the bin centre.
pub fn render_softlabel_heatmap(soft: &BTreeMap<VideoId, SoftLabelSeries>) -> String {
    let mut out = String::from("video");
    for b in 0..HEATMAP_BINS {
        let _ = write!(out, ",{b}");
    }
    out.push('\n');
    for (video, series) in soft {
        out.push_str(video.as_str());
        let t = series.values.len();
        for b in 0..HEATMAP_BINS {
            let idx = (((2 * b + 1) * t) / (2 * HEATMAP_BINS)).min(t - 1);
            let _ = write!(out, ",{}", series.values[idx]);
        }
        out.push('\n');
    }
    out
}

fn annotator_metrics(
    dataset: &Dataset,
    sweeps: &[SweepResult],
    choice: &AnnotatorReportChoice,
) -> Result<Vec<AnnotatorMetrics>> {
    let Some(split) = choice.split.or_else(|| dataset.split_ids().first().copied()) else {
        return Ok(Vec::new());
    };
    let Some(base) = choice.model.clone().or_else(|| base_models(dataset).into_iter().next()) else {
        return Ok(Vec::new());
    };
    let method = choice.method.unwrap_or(Method::FindPeaks);
    let annotations: BTreeMap<_, _> = dataset
        .annotators()
        .filter_map(|a| Some((a.clone(), dataset.annotations_by(a)?.clone())))
        .collect();
    let mut rows = Vec::new();
    for scene in populated_scenes(dataset) {
        let Some(best) = sweeps.iter().find(|r| {
            r.split_id == split && r.model_id.as_str() == base && r.method == method && r.scene == scene
        }) else {
            continue;
        };
        let scores = scene_scores(dataset, &base, split, scene).expect("swept scene has scores");
        let params = SelectionParams {
            method,
            param: best.best_param,
        };
        let mut preds = BTreeMap::new();
        let mut videos = BTreeMap::new();
        for meta in dataset.scene_videos(scene) {
            let series = &scores[&meta.video_id];
            preds.insert(meta.video_id.clone(), params.select(&normalize_scores(&series.scores)));
            videos.insert(meta.video_id.clone(), meta.frame_count());
        }
        rows.extend(per_annotator_eval(&preds, &annotations, &videos, scene)?);
    }
    Ok(rows)
}

/// Computes every report without writing anything.
pub fn evaluate(dataset: &Dataset, choice: &AnnotatorReportChoice, exec: Exec) -> Result<EvaluationReport> {
    let soft = all_soft_labels(dataset).map_err(missing_consensus)?;
    let consensus = all_consensus(dataset).map_err(missing_consensus)?;
    let sweeps = run_sweeps(dataset, &consensus, &Method::ALL, exec)?;
    Ok(EvaluationReport {
        mae: mae_rows(dataset, &soft)?,
        annotator_metrics: annotator_metrics(dataset, &sweeps, choice)?,
        sweeps,
    })
}

fn missing_consensus(e: Error) -> Error {
    match e {
        Error::EmptyAnnotations(v) => Error::MissingConsensus(v),
        other => other,
    }
}

/// Writes `reports/{mae,sweep,annotator_metrics}.csv` and
/// `plots/{softlabel_heatmap,kappa_heatmap}.csv` under `out`.
pub fn cmd_evaluate(
    dataset: &Dataset,
    out: &Path,
    choice: &AnnotatorReportChoice,
    exec: Exec,
) -> Result<EvaluationReport> {
    let report = evaluate(dataset, choice, exec)?;
    let soft = all_soft_labels(dataset).map_err(missing_consensus)?;
    let kappa = kappa_matrix(dataset, exec)?;
    let reports = out.join("reports");
    let plots = out.join("plots");
    write_atomic(&reports.join("mae.csv"), render_mae_csv(&report.mae).as_bytes())?;
    write_atomic(&reports.join("sweep.csv"), render_sweep_csv(&report.sweeps).as_bytes())?;
    write_atomic(
        &reports.join("annotator_metrics.csv"),
        render_annotator_csv(&report.annotator_metrics).as_bytes(),
    )?;
    write_atomic(
        &plots.join("softlabel_heatmap.csv"),
        render_softlabel_heatmap(&soft).as_bytes(),
    )?;
    write_atomic(&plots.join("kappa_heatmap.csv"), kappa.to_long_csv().as_bytes())?;
    Ok(report)
}
