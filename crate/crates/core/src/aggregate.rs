//! Multi-annotator label aggregation: soft labels, consensus intervals and
//! pairwise Cohen's kappa.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::types::{AnnotationRecord, AnnotatorId, EventInterval, VideoId};

/// Per-frame fraction of annotators marking the frame as anomalous.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabelSeries {
    pub video_id: VideoId,
    pub annotator_count: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusLabel {
    pub video_id: VideoId,
    pub interval: EventInterval,
    /// Marker means before rounding.
    pub mean_start: f64,
    pub mean_end: f64,
}

fn common_video(records: &[AnnotationRecord]) -> Result<&VideoId> {
    let first = records
        .first()
        .ok_or_else(|| Error::EmptyAnnotations(String::new()))?;
    if let Some(other) = records.iter().find(|r| r.video_id != first.video_id) {
        return Err(Error::UnknownVideo(format!(
            "{} (records mix videos {} and {})",
            other.video_id, first.video_id, other.video_id
        )));
    }
    Ok(&first.video_id)
}

/// Averages the annotators' binary vectors frame by frame.
pub fn soft_labels(records: &[AnnotationRecord], frame_count: usize) -> Result<SoftLabelSeries> {
    let video_id = common_video(records)?.clone();
    // difference array over [start, end]
    let mut delta = vec![0i64; frame_count + 1];
    for r in records {
        r.interval.check_bounds(frame_count)?;
        delta[r.interval.start()] += 1;
        delta[r.interval.end() + 1] -= 1;
    }
    let n = records.len() as f64;
    let mut running = 0i64;
    let values = delta[..frame_count]
        .iter()
        .map(|d| {
            running += d;
            running as f64 / n
        })
        .collect();
    Ok(SoftLabelSeries {
        video_id,
        annotator_count: records.len(),
        values,
    })
}

/// Rounds the mean start and mean end markers (half away from zero).
pub fn consensus_label(records: &[AnnotationRecord]) -> Result<ConsensusLabel> {
    let video_id = common_video(records)?.clone();
    let n = records.len() as f64;
    let mean_start = records.iter().map(|r| r.interval.start() as f64).sum::<f64>() / n;
    let mean_end = records.iter().map(|r| r.interval.end() as f64).sum::<f64>() / n;
    let start = mean_start.round() as usize;
    let end = mean_end.round() as usize;
    let interval = EventInterval::new(start, end).map_err(|_| Error::DegenerateConsensus {
        video: video_id.to_string(),
        start,
        end,
    })?;
    Ok(ConsensusLabel {
        video_id,
        interval,
        mean_start,
        mean_end,
    })
}

/// 2x2 frame-level agreement counts between two raters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Contingency {
    pub both: u64,
    pub only_a: u64,
    pub only_b: u64,
    pub neither: u64,
}

impl Contingency {
    pub fn total(&self) -> u64 {
        self.both + self.only_a + self.only_b + self.neither
    }

    /// Counts for two interval labels over a video of `frame_count` frames.
    pub fn from_intervals(a: &EventInterval, b: &EventInterval, frame_count: usize) -> Self {
        let both = a.overlap(b) as u64;
        let only_a = a.len() as u64 - both;
        let only_b = b.len() as u64 - both;
        Self {
            both,
            only_a,
            only_b,
            neither: frame_count as u64 - both - only_a - only_b,
        }
    }

    pub fn kappa(&self) -> f64 {
        let n = self.total();
        let a1 = self.both + self.only_a;
        let b1 = self.both + self.only_b;
        // both raters constant and equal: chance agreement is 1
        if (a1 == 0 && b1 == 0) || (a1 == n && b1 == n) {
            return 1.0;
        }
        let nf = n as f64;
        let p_o = (self.both + self.neither) as f64 / nf;
        let pa1 = a1 as f64 / nf;
        let pb1 = b1 as f64 / nf;
        let pa0 = (n - a1) as f64 / nf;
        let pb0 = (n - b1) as f64 / nf;
        let p_e = pa1 * pb1 + pa0 * pb0;
        (p_o - p_e) / (1.0 - p_e)
    }
}

impl std::ops::AddAssign for Contingency {
    fn add_assign(&mut self, rhs: Self) {
        self.both += rhs.both;
        self.only_a += rhs.only_a;
        self.only_b += rhs.only_b;
        self.neither += rhs.neither;
    }
}

/// Cohen's kappa between two binary label vectors.
pub fn cohen_kappa(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::LengthMismatch {
            what: "label vectors".into(),
            expected: a.len().max(1),
            actual: b.len(),
        });
    }
    let mut c = Contingency::default();
    for (&x, &y) in a.iter().zip(b) {
        match (x != 0, y != 0) {
            (true, true) => c.both += 1,
            (true, false) => c.only_a += 1,
            (false, true) => c.only_b += 1,
            (false, false) => c.neither += 1,
        }
    }
    Ok(c.kappa())
}

/// Symmetric matrix of pairwise kappa values with an exact unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaMatrix {
    pub annotator_ids: Vec<AnnotatorId>,
    pub values: Vec<Vec<f64>>,
}

impl KappaMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.annotator_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotator_ids.is_empty()
    }

    /// Square CSV with the annotator ids as header row and first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("annotator");
        for a in &self.annotator_ids {
            let _ = write!(out, ",{a}");
        }
        out.push('\n');
        for (a, row) in self.annotator_ids.iter().zip(&self.values) {
            out.push_str(a.as_str());
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Long-form `row,col,kappa` listing for heatmap plotting.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("row,col,kappa\n");
        for (a, row) in self.annotator_ids.iter().zip(&self.values) {
            for (b, v) in self.annotator_ids.iter().zip(row) {
                let _ = writeln!(out, "{a},{b},{v}");
            }
        }
        out
    }
}

/// Pairwise kappa over frames pooled across all videos in `frame_counts` (id order).
///
/// Every annotator appearing in `records` must have annotated every video.
pub fn kappa_matrix_for(
    records: &[AnnotationRecord],
    frame_counts: &BTreeMap<VideoId, usize>,
    exec: Exec,
) -> Result<KappaMatrix> {
    let mut by_annotator: BTreeMap<&AnnotatorId, BTreeMap<&VideoId, EventInterval>> =
        BTreeMap::new();
    for r in records {
        let per_video = by_annotator.entry(&r.annotator_id).or_default();
        if per_video.insert(&r.video_id, r.interval).is_some() {
            return Err(Error::DuplicateAnnotation {
                video: r.video_id.to_string(),
                annotator: r.annotator_id.to_string(),
            });
        }
    }
    let mut table: Vec<Vec<EventInterval>> = Vec::with_capacity(by_annotator.len());
    for (annotator, per_video) in &by_annotator {
        let mut row = Vec::with_capacity(frame_counts.len());
        for (video, &t) in frame_counts {
            let iv = per_video.get(video).ok_or_else(|| Error::MissingAnnotation {
                video: video.to_string(),
                annotator: annotator.to_string(),
            })?;
            iv.check_bounds(t)?;
            row.push(*iv);
        }
        table.push(row);
    }
    let counts: Vec<usize> = frame_counts.values().copied().collect();
    let n = table.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let kappas = exec.map(&pairs, |&(i, j)| {
        let mut c = Contingency::default();
        for ((a, b), &t) in table[i].iter().zip(&table[j]).zip(&counts) {
            c += Contingency::from_intervals(a, b, t);
        }
        c.kappa()
    });
    let mut values = vec![vec![1.0; n]; n];
    for (&(i, j), k) in pairs.iter().zip(kappas) {
        values[i][j] = k;
        values[j][i] = k;
    }
    Ok(KappaMatrix {
        annotator_ids: by_annotator.into_keys().cloned().collect(),
        values,
    })
}

/// [`kappa_matrix_for`] over every record and video of a dataset.
pub fn kappa_matrix(dataset: &Dataset, exec: Exec) -> Result<KappaMatrix> {
    let frame_counts = dataset
        .videos()
        .map(|v| (v.video_id.clone(), v.frame_count()))
        .collect();
    kappa_matrix_for(&dataset.records(), &frame_counts, exec)
}
