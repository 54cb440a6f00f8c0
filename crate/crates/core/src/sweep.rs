//! Dense parameter sweep of the selection methods against consensus labels.

use std::collections::BTreeMap;

use crate::aggregate::ConsensusLabel;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::metrics::temporal_iou;
use crate::scorer::normalize_scores;
use crate::select::{Method, SelectionParams};
use crate::types::{EventInterval, ModelId, Scene, ScoreSeries, SplitId, VideoId, VideoMeta};

/// Number of grid points: `0.00, 0.01, ..., 1.00`.
pub const GRID_POINTS: usize = 101;

/// Grid value `k / 100`.
pub fn grid_param(k: usize) -> f64 {
    k as f64 / 100.0
}

pub fn param_grid() -> Vec<f64> {
    (0..GRID_POINTS).map(grid_param).collect()
}

/// One video prepared for sweeping: normalized scores and the reference interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub video_id: VideoId,
    pub scores: Vec<f64>,
    pub truth: EventInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub model_id: ModelId,
    pub method: Method,
    pub scene: Scene,
    pub split_id: SplitId,
    pub best_param: f64,
    pub best_mean_tiou: f64,
    /// `(param, mean t-IoU)` for every grid point in ascending order.
    pub curve: Vec<(f64, f64)>,
}

/// Mean t-IoU over `cases` at every grid point.
pub fn sweep_curve(cases: &[SweepCase], method: Method, exec: Exec) -> Vec<(f64, f64)> {
    let jobs: Vec<(usize, usize)> = (0..GRID_POINTS)
        .flat_map(|k| (0..cases.len()).map(move |v| (k, v)))
        .collect();
    let tious = exec.map(&jobs, |&(k, v)| {
        let case = &cases[v];
        let params = SelectionParams {
            method,
            param: grid_param(k),
        };
        temporal_iou(params.select(&case.scores).as_ref(), &case.truth)
    });
    let n = cases.len();
    (0..GRID_POINTS)
        .map(|k| {
            let mean = if n == 0 {
                0.0
            } else {
                tious[k * n..(k + 1) * n].iter().sum::<f64>() / n as f64
            };
            (grid_param(k), mean)
        })
        .collect()
}

/// Earliest `(param, value)` attaining the maximum of `curve`.
pub fn best_point(curve: &[(f64, f64)]) -> (f64, f64) {
    curve
        .iter()
        .copied()
        .fold(None, |best: Option<(f64, f64)>, p| match best {
            Some(b) if p.1 <= b.1 => Some(b),
            _ => Some(p),
        })
        .unwrap_or((0.0, 0.0))
}

pub fn sweep(
    model_id: ModelId,
    split_id: SplitId,
    scene: Scene,
    method: Method,
    cases: &[SweepCase],
    exec: Exec,
) -> SweepResult {
    let curve = sweep_curve(cases, method, exec);
    let (best_param, best_mean_tiou) = best_point(&curve);
    SweepResult {
        model_id,
        method,
        scene,
        split_id,
        best_param,
        best_mean_tiou,
        curve,
    }
}

/// Builds sweep cases for `videos`, normalizing each score series.
pub fn build_cases<'a>(
    videos: impl IntoIterator<Item = &'a VideoMeta>,
    model: &ModelId,
    scores: &BTreeMap<VideoId, ScoreSeries>,
    consensus: &BTreeMap<VideoId, ConsensusLabel>,
) -> Result<Vec<SweepCase>> {
    videos
        .into_iter()
        .map(|meta| {
            let id = &meta.video_id;
            let truth = consensus
                .get(id)
                .ok_or_else(|| Error::MissingConsensus(id.to_string()))?
                .interval;
            let series = scores.get(id).ok_or_else(|| Error::MissingScores {
                model: model.to_string(),
                video: id.to_string(),
            })?;
            if series.len() != meta.frame_count() {
                return Err(Error::LengthMismatch {
                    what: format!("scores of {id} for model {model}"),
                    expected: meta.frame_count(),
                    actual: series.len(),
                });
            }
            Ok(SweepCase {
                video_id: id.clone(),
                scores: normalize_scores(&series.scores),
                truth,
            })
        })
        .collect()
}
