//! Domain types shared across the toolkit.
//!
//! Frame indices are 0-based and intervals are inclusive on both ends.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

macro_rules! token_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Result<Self> {
                let s = s.into();
                if is_token(&s) {
                    Ok(Self(s))
                } else {
                    Err(Error::BadToken(s))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                Self::new(s)
            }
        }

        impl TryFrom<String> for $name {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(t: $name) -> String {
                t.0
            }
        }
    };
}

token_type!(
    /// Video identifier such as `v01`.
    VideoId
);
token_type!(
    /// Annotator identifier such as `U02`.
    AnnotatorId
);
token_type!(
    /// Score source identifier such as `baseline` or `baseline-Split1`.
    ModelId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scene {
    A,
    B,
}

impl Scene {
    pub const ALL: [Scene; 2] = [Scene::A, Scene::B];

    /// Key used in `.cfg` files (`scene_a`, `scene_b`).
    pub fn cfg_key(self) -> &'static str {
        match self {
            Scene::A => "scene_a",
            Scene::B => "scene_b",
        }
    }

    pub fn from_cfg_key(key: &str) -> Option<Scene> {
        match key.to_ascii_lowercase().as_str() {
            "scene_a" => Some(Scene::A),
            "scene_b" => Some(Scene::B),
            _ => None,
        }
    }
}

impl fmt::Display for Scene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scene::A => "A",
            Scene::B => "B",
        })
    }
}

impl FromStr for Scene {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Scene::A),
            "B" | "b" => Ok(Scene::B),
            other => Err(Error::BadToken(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SplitId {
    Split1,
    Split2,
}

impl SplitId {
    pub const ALL: [SplitId; 2] = [SplitId::Split1, SplitId::Split2];
}

impl fmt::Display for SplitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitId::Split1 => "Split1",
            SplitId::Split2 => "Split2",
        })
    }
}

impl FromStr for SplitId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "split1" => Ok(SplitId::Split1),
            "split2" => Ok(SplitId::Split2),
            _ => Err(Error::BadToken(s.to_string())),
        }
    }
}

/// Inclusive frame interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventInterval {
    start: usize,
    end: usize,
}

impl EventInterval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Self { start, end })
    }

    /// Like [`EventInterval::new`] but additionally requires `end < frame_count`.
    pub fn within(start: usize, end: usize, frame_count: usize) -> Result<Self> {
        let iv = Self::new(start, end)?;
        iv.check_bounds(frame_count)?;
        Ok(iv)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, frame: usize) -> bool {
        self.start <= frame && frame <= self.end
    }

    /// Number of frames shared with `other`.
    pub fn overlap(&self, other: &EventInterval) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo > hi {
            0
        } else {
            hi - lo + 1
        }
    }

    pub fn check_bounds(&self, frame_count: usize) -> Result<()> {
        if self.end >= frame_count {
            Err(Error::OutOfRange {
                start: self.start,
                end: self.end,
                frame_count,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for EventInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Metadata for one video: identifier, scene and the ordered frame files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoMeta {
    pub video_id: VideoId,
    pub scene: Scene,
    /// Frame file names inside `videos/<id>/frames/`, index `i` holds frame `i`.
    pub frames: Vec<String>,
}

impl VideoMeta {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }
}

/// Per-frame anomaly scores for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub video_id: VideoId,
    pub scores: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(video_id: VideoId, scores: Vec<f64>) -> Result<Self> {
        if let Some(frame) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteScore {
                video: video_id.to_string(),
                frame,
            });
        }
        Ok(Self { video_id, scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// One annotator's start/end markers for one video.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotationRecord {
    pub video_id: VideoId,
    pub annotator_id: AnnotatorId,
    pub interval: EventInterval,
}

/// Training videos of one scene under one split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitConfig {
    pub split_id: SplitId,
    pub scene: Scene,
    pub train_video_ids: Vec<VideoId>,
}
