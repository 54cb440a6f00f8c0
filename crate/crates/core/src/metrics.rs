//! Interval and label metrics: t-IoU, MAE against soft labels, frame-level
//! precision/recall/F1 and per-annotator aggregation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{AnnotatorId, EventInterval, Scene, VideoId};

/// Temporal IoU over inclusive integer frames. A missing prediction scores 0.
pub fn temporal_iou(pred: Option<&EventInterval>, truth: &EventInterval) -> f64 {
    let Some(pred) = pred else {
        return 0.0;
    };
    let inter = pred.overlap(truth);
    let union = pred.len() + truth.len() - inter;
    inter as f64 / union as f64
}

/// Mean absolute error between a normalized score series and soft labels.
pub fn mae_vs_soft(scores: &[f64], soft: &[f64]) -> Result<f64> {
    if scores.len() != soft.len() {
        return Err(Error::LengthMismatch {
            what: "scores vs soft labels".into(),
            expected: soft.len(),
            actual: scores.len(),
        });
    }
    if scores.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = scores.iter().zip(soft).map(|(r, l)| (r - l).abs()).sum();
    Ok(total / scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// From confusion counts; undefined ratios resolve to 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Frame-level precision, recall and F1 of `pred` against `truth`.
pub fn frame_prf(pred: Option<&EventInterval>, truth: &EventInterval, frame_count: usize) -> Result<Prf> {
    truth.check_bounds(frame_count)?;
    let Some(pred) = pred else {
        return Ok(Prf::default());
    };
    pred.check_bounds(frame_count)?;
    let tp = pred.overlap(truth);
    Ok(Prf::from_counts(tp, pred.len() - tp, truth.len() - tp))
}

/// Population mean and standard deviation (divides by `n`).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatorMetrics {
    pub annotator_id: AnnotatorId,
    pub scene: Scene,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tiou: f64,
}

/// Scores one fixed set of predictions against every annotator's labels.
///
/// Metrics are computed per video and then averaged over `videos` (the
/// scene's videos with their frame counts). Every annotator in `annotations`
/// must cover every video.
pub fn per_annotator_eval(
    predictions: &BTreeMap<VideoId, Option<EventInterval>>,
    annotations: &BTreeMap<AnnotatorId, BTreeMap<VideoId, EventInterval>>,
    videos: &BTreeMap<VideoId, usize>,
    scene: Scene,
) -> Result<Vec<AnnotatorMetrics>> {
    let mut out = Vec::with_capacity(annotations.len());
    for (annotator, labels) in annotations {
        let mut sums = [0.0f64; 4];
        for (video, &frame_count) in videos {
            let truth = labels.get(video).ok_or_else(|| Error::MissingAnnotation {
                video: video.to_string(),
                annotator: annotator.to_string(),
            })?;
            let pred = predictions
                .get(video)
                .ok_or_else(|| Error::UnknownVideo(video.to_string()))?
                .as_ref();
            let prf = frame_prf(pred, truth, frame_count)?;
            sums[0] += prf.precision;
            sums[1] += prf.recall;
            sums[2] += prf.f1;
            sums[3] += temporal_iou(pred, truth);
        }
        let n = videos.len().max(1) as f64;
        out.push(AnnotatorMetrics {
            annotator_id: annotator.clone(),
            scene,
            precision: sums[0] / n,
            recall: sums[1] / n,
            f1: sums[2] / n,
            tiou: sums[3] / n,
        });
    }
    Ok(out)
}
