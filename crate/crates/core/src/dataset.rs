//! Dataset loading, validation and serialization.
//!
//! Layout under the dataset root:
//!
//! ```text
//! videos/<video_id>/frames/000000.jpg ...
//! scores/<video_id>.<model>.csv          frame,score
//! annotations/<annotator_id>.csv         video,start,end
//! splits/<split_id>.cfg                  scene_a = ... / scene_b = ...
//! scenes.cfg                             optional; full scene membership
//! ```
//!
//! When `scenes.cfg` is absent a video's scene is taken from the split files
//! that list it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::formats;
use crate::types::{
    AnnotationRecord, AnnotatorId, EventInterval, ModelId, Scene, ScoreSeries, SplitConfig,
    SplitId, VideoId, VideoMeta,
};

pub const SCENES_FILE: &str = "scenes.cfg";
const FRAME_EXTENSIONS: [&str; 3] = ["jpg", "jpeg", "png"];

/// A validated, immutable dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    root: PathBuf,
    videos: BTreeMap<VideoId, VideoMeta>,
    scores: BTreeMap<ModelId, BTreeMap<VideoId, ScoreSeries>>,
    annotations: BTreeMap<AnnotatorId, BTreeMap<VideoId, EventInterval>>,
    splits: Vec<SplitConfig>,
}

impl PartialEq for Dataset {
    /// Content equality; the root directory is not compared.
    fn eq(&self, other: &Self) -> bool {
        self.videos == other.videos
            && self.scores == other.scores
            && self.annotations == other.annotations
            && self.splits == other.splits
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>> {
    let rd = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = rd
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

fn require_dir(path: PathBuf) -> Result<PathBuf> {
    if path.is_dir() {
        Ok(path)
    } else {
        Err(Error::MissingFile(path))
    }
}

fn file_name(entry: &fs::DirEntry) -> Result<String> {
    entry
        .file_name()
        .into_string()
        .map_err(|n| Error::BadToken(n.to_string_lossy().into_owned()))
}

fn list_frames(video: &VideoId, dir: &Path) -> Result<Vec<String>> {
    let mut numbered = Vec::new();
    for entry in sorted_entries(dir)? {
        let name = file_name(&entry)?;
        let Some((stem, ext)) = name.rsplit_once('.') else {
            continue;
        };
        if !FRAME_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()) {
            continue;
        }
        let index: usize = stem
            .parse()
            .map_err(|_| Error::BadToken(name.clone()))?;
        numbered.push((index, name));
    }
    numbered.sort();
    for (expected, (index, _)) in numbered.iter().enumerate() {
        if *index != expected {
            return Err(Error::MissingFile(dir.join(format!("{expected:06}.*"))));
        }
    }
    if numbered.len() < 2 {
        return Err(Error::TooFewFrames {
            video: video.to_string(),
            frames: numbered.len(),
        });
    }
    Ok(numbered.into_iter().map(|(_, n)| n).collect())
}

impl Dataset {
    /// Loads and validates a dataset directory.
    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let videos_dir = require_dir(root.join("videos"))?;
        let scores_dir = require_dir(root.join("scores"))?;
        let ann_dir = require_dir(root.join("annotations"))?;
        let splits_dir = require_dir(root.join("splits"))?;

        let mut frames = BTreeMap::new();
        for entry in sorted_entries(&videos_dir)? {
            if !entry.path().is_dir() {
                continue;
            }
            let id = VideoId::new(file_name(&entry)?)?;
            let list = list_frames(&id, &entry.path().join("frames"))?;
            frames.insert(id, list);
        }

        let mut splits = Vec::new();
        for entry in sorted_entries(&splits_dir)? {
            let name = file_name(&entry)?;
            let Some(stem) = name.strip_suffix(".cfg") else {
                continue;
            };
            let split_id: SplitId = stem.parse()?;
            for (scene, ids) in formats::read_scene_lists(&entry.path())? {
                splits.push(SplitConfig {
                    split_id,
                    scene,
                    train_video_ids: ids,
                });
            }
        }

        let scene_file = root.join(SCENES_FILE);
        let scene_lists = if scene_file.is_file() {
            formats::read_scene_lists(&scene_file)?
        } else {
            let mut lists: BTreeMap<Scene, Vec<VideoId>> = BTreeMap::new();
            for s in &splits {
                lists
                    .entry(s.scene)
                    .or_default()
                    .extend(s.train_video_ids.iter().cloned());
            }
            lists
        };
        let mut scene_of: BTreeMap<VideoId, Scene> = BTreeMap::new();
        for (scene, ids) in &scene_lists {
            for id in ids {
                if let Some(prev) = scene_of.insert(id.clone(), *scene) {
                    if prev != *scene {
                        return Err(Error::parse(
                            &scene_file,
                            0,
                            format!("video {id} assigned to scenes {prev} and {scene}"),
                        ));
                    }
                }
            }
        }

        let mut videos = BTreeMap::new();
        for (id, list) in frames {
            let scene = *scene_of
                .get(&id)
                .ok_or_else(|| Error::UnknownScene(id.to_string()))?;
            videos.insert(
                id.clone(),
                VideoMeta {
                    video_id: id,
                    scene,
                    frames: list,
                },
            );
        }

        let mut scores: BTreeMap<ModelId, BTreeMap<VideoId, ScoreSeries>> = BTreeMap::new();
        for entry in sorted_entries(&scores_dir)? {
            let name = file_name(&entry)?;
            let Some(stem) = name.strip_suffix(".csv") else {
                continue;
            };
            let (video, model) = stem
                .split_once('.')
                .ok_or_else(|| Error::BadToken(name.clone()))?;
            let video = VideoId::new(video)?;
            let model = ModelId::new(model)?;
            let values = formats::read_scores(&entry.path())?;
            let series = ScoreSeries::new(video.clone(), values)?;
            scores.entry(model).or_default().insert(video, series);
        }

        let mut annotations: BTreeMap<AnnotatorId, BTreeMap<VideoId, EventInterval>> =
            BTreeMap::new();
        for entry in sorted_entries(&ann_dir)? {
            let name = file_name(&entry)?;
            let Some(stem) = name.strip_suffix(".csv") else {
                continue;
            };
            let annotator = AnnotatorId::new(stem)?;
            let per_video = annotations.entry(annotator.clone()).or_default();
            for (_, video, interval) in formats::read_annotations(&entry.path())? {
                if per_video.insert(video.clone(), interval).is_some() {
                    return Err(Error::DuplicateAnnotation {
                        video: video.to_string(),
                        annotator: annotator.to_string(),
                    });
                }
            }
        }

        Self::from_parts(root, videos, scores, annotations, splits)
    }

    /// Builds a dataset from in-memory parts, applying the same validation as [`Dataset::load`].
    pub fn from_parts(
        root: PathBuf,
        videos: BTreeMap<VideoId, VideoMeta>,
        scores: BTreeMap<ModelId, BTreeMap<VideoId, ScoreSeries>>,
        annotations: BTreeMap<AnnotatorId, BTreeMap<VideoId, EventInterval>>,
        mut splits: Vec<SplitConfig>,
    ) -> Result<Self> {
        for (id, meta) in &videos {
            if &meta.video_id != id {
                return Err(Error::BadToken(meta.video_id.to_string()));
            }
            if meta.frame_count() < 2 {
                return Err(Error::TooFewFrames {
                    video: id.to_string(),
                    frames: meta.frame_count(),
                });
            }
        }
        let frame_count = |v: &VideoId| {
            videos
                .get(v)
                .map(VideoMeta::frame_count)
                .ok_or_else(|| Error::UnknownVideo(v.to_string()))
        };
        for (model, per_video) in &scores {
            for (video, series) in per_video {
                let expected = frame_count(video)?;
                if &series.video_id != video {
                    return Err(Error::BadToken(series.video_id.to_string()));
                }
                if series.len() != expected {
                    return Err(Error::LengthMismatch {
                        what: format!("scores of {video} for model {model}"),
                        expected,
                        actual: series.len(),
                    });
                }
            }
        }
        for per_video in annotations.values() {
            for (video, interval) in per_video {
                interval.check_bounds(frame_count(video)?)?;
            }
        }
        for split in &mut splits {
            if split.train_video_ids.is_empty() {
                return Err(Error::parse(
                    root.join("splits").join(format!("{}.cfg", split.split_id)),
                    0,
                    format!("no training videos for {}", split.scene.cfg_key()),
                ));
            }
            for v in &split.train_video_ids {
                frame_count(v)?;
            }
        }
        splits.sort_by_key(|s| (s.split_id, s.scene));
        Ok(Self {
            root,
            videos,
            scores,
            annotations,
            splits,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn videos(&self) -> impl Iterator<Item = &VideoMeta> {
        self.videos.values()
    }

    pub fn video(&self, id: &VideoId) -> Option<&VideoMeta> {
        self.videos.get(id)
    }

    pub fn scene_videos(&self, scene: Scene) -> impl Iterator<Item = &VideoMeta> {
        self.videos.values().filter(move |v| v.scene == scene)
    }

    pub fn frame_dir(&self, id: &VideoId) -> PathBuf {
        self.root.join("videos").join(id.as_str()).join("frames")
    }

    /// Path of frame `index` of `id`, if both exist.
    pub fn frame_path(&self, id: &VideoId, index: usize) -> Option<PathBuf> {
        let meta = self.videos.get(id)?;
        let name = meta.frames.get(index)?;
        Some(self.frame_dir(id).join(name))
    }

    pub fn models(&self) -> impl Iterator<Item = &ModelId> {
        self.scores.keys()
    }

    pub fn scores(&self, model: &ModelId, video: &VideoId) -> Option<&ScoreSeries> {
        self.scores.get(model)?.get(video)
    }

    pub fn model_scores(&self, model: &ModelId) -> Option<&BTreeMap<VideoId, ScoreSeries>> {
        self.scores.get(model)
    }

    pub fn annotators(&self) -> impl Iterator<Item = &AnnotatorId> {
        self.annotations.keys()
    }

    pub fn annotation(&self, annotator: &AnnotatorId, video: &VideoId) -> Option<EventInterval> {
        self.annotations.get(annotator)?.get(video).copied()
    }

    pub fn annotations_by(&self, annotator: &AnnotatorId) -> Option<&BTreeMap<VideoId, EventInterval>> {
        self.annotations.get(annotator)
    }

    /// All records for one video, ordered by annotator id.
    pub fn records_for_video(&self, video: &VideoId) -> Vec<AnnotationRecord> {
        self.annotations
            .iter()
            .filter_map(|(a, per_video)| {
                per_video.get(video).map(|iv| AnnotationRecord {
                    video_id: video.clone(),
                    annotator_id: a.clone(),
                    interval: *iv,
                })
            })
            .collect()
    }

    /// Every record, ordered by annotator id then video id.
    pub fn records(&self) -> Vec<AnnotationRecord> {
        self.annotations
            .iter()
            .flat_map(|(a, per_video)| {
                per_video.iter().map(move |(v, iv)| AnnotationRecord {
                    video_id: v.clone(),
                    annotator_id: a.clone(),
                    interval: *iv,
                })
            })
            .collect()
    }

    pub fn splits(&self) -> &[SplitConfig] {
        &self.splits
    }

    pub fn split_ids(&self) -> Vec<SplitId> {
        let mut ids: Vec<SplitId> = self.splits.iter().map(|s| s.split_id).collect();
        ids.dedup();
        ids
    }

    pub fn split(&self, split: SplitId, scene: Scene) -> Option<&SplitConfig> {
        self.splits
            .iter()
            .find(|s| s.split_id == split && s.scene == scene)
    }

    /// Writes the dataset under `dest` in the layout [`Dataset::load`] reads, copying frames.
    pub fn save(&self, dest: impl AsRef<Path>) -> Result<()> {
        let dest = dest.as_ref();
        for dir in ["videos", "scores", "annotations", "splits"] {
            let d = dest.join(dir);
            fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
        for meta in self.videos.values() {
            let out = dest.join("videos").join(meta.video_id.as_str()).join("frames");
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let src = self.frame_dir(&meta.video_id);
            for name in &meta.frames {
                let from = src.join(name);
                fs::copy(&from, out.join(name)).map_err(|e| Error::io(&from, e))?;
            }
        }
        for (model, per_video) in &self.scores {
            for (video, series) in per_video {
                let path = dest.join("scores").join(format!("{video}.{model}.csv"));
                let text = formats::render_series(formats::SCORE_HEADER, &series.scores);
                formats::write_atomic(&path, text.as_bytes())?;
            }
        }
        for (annotator, per_video) in &self.annotations {
            let path = dest.join("annotations").join(format!("{annotator}.csv"));
            let text = formats::render_intervals(per_video.iter().map(|(v, iv)| (v, Some(*iv))));
            formats::write_atomic(&path, text.as_bytes())?;
        }
        for split_id in self.split_ids() {
            let lists: BTreeMap<Scene, Vec<VideoId>> = self
                .splits
                .iter()
                .filter(|s| s.split_id == split_id)
                .map(|s| (s.scene, s.train_video_ids.clone()))
                .collect();
            let path = dest.join("splits").join(format!("{split_id}.cfg"));
            formats::write_atomic(&path, formats::render_scene_lists(&lists).as_bytes())?;
        }
        let mut scenes: BTreeMap<Scene, Vec<VideoId>> = BTreeMap::new();
        for meta in self.videos.values() {
            scenes.entry(meta.scene).or_default().push(meta.video_id.clone());
        }
        formats::write_atomic(
            &dest.join(SCENES_FILE),
            formats::render_scene_lists(&scenes).as_bytes(),
        )
    }
}

/// Expands one annotation into a per-frame 0/1 vector of length `frame_count`.
pub fn binary_label_vector(rec: &AnnotationRecord, frame_count: usize) -> Result<Vec<u8>> {
    interval_mask(&rec.interval, frame_count)
}

pub(crate) fn interval_mask(interval: &EventInterval, frame_count: usize) -> Result<Vec<u8>> {
    interval.check_bounds(frame_count)?;
    Ok((0..frame_count)
        .map(|i| u8::from(interval.contains(i)))
        .collect())
}
