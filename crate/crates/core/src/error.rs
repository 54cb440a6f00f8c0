use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file or directory: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {msg}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("duplicate annotation for video {video} by annotator {annotator}")]
    DuplicateAnnotation { video: String, annotator: String },

    #[error("malformed token {0:?}")]
    BadToken(String),

    #[error("unknown video {0}")]
    UnknownVideo(String),

    #[error("no scene assignment for video {0}")]
    UnknownScene(String),

    #[error("interval [{start}, {end}] outside [0, {}]", .frame_count.saturating_sub(1))]
    OutOfRange {
        start: usize,
        end: usize,
        frame_count: usize,
    },

    #[error("invalid interval: start {start} > end {end}")]
    InvalidInterval { start: usize, end: usize },

    #[error("video {video} has {frames} frames, at least 2 required")]
    TooFewFrames { video: String, frames: usize },

    #[error("non-finite score at frame {frame} of {video}")]
    NonFiniteScore { video: String, frame: usize },

    #[error("no annotations for video {0}")]
    EmptyAnnotations(String),

    #[error("consensus for video {video} degenerates to [{start}, {end}]")]
    DegenerateConsensus {
        video: String,
        start: usize,
        end: usize,
    },

    #[error("annotator {annotator} has no annotation for video {video}")]
    MissingAnnotation { video: String, annotator: String },

    #[error("no consensus label for video {0}")]
    MissingConsensus(String),

    #[error("index {0} is not a local maximum")]
    NotAPeak(usize),

    #[error("background model needs at least one training frame")]
    EmptyTrainingSet,

    #[error("frame dimensions {actual:?} do not match {expected:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("cannot decode image {}: {msg}", .path.display())]
    Image { path: PathBuf, msg: String },

    #[error("no scores for model {model} on video {video}")]
    MissingScores { model: String, video: String },
}

impl Error {
    /// Stable identifier used in one-line CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "MissingFile",
            Error::Io { .. } => "Io",
            Error::Parse { .. } => "Parse",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DuplicateAnnotation { .. } => "DuplicateAnnotation",
            Error::BadToken(_) => "BadToken",
            Error::UnknownVideo(_) => "UnknownVideo",
            Error::UnknownScene(_) => "UnknownScene",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InvalidInterval { .. } => "InvalidInterval",
            Error::TooFewFrames { .. } => "TooFewFrames",
            Error::NonFiniteScore { .. } => "NonFiniteScore",
            Error::EmptyAnnotations(_) => "EmptyAnnotations",
            Error::DegenerateConsensus { .. } => "DegenerateConsensus",
            Error::MissingAnnotation { .. } => "MissingAnnotation",
            Error::MissingConsensus(_) => "MissingConsensus",
            Error::NotAPeak(_) => "NotAPeak",
            Error::EmptyTrainingSet => "EmptyTrainingSet",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Image { .. } => "Image",
            Error::MissingScores { .. } => "MissingScores",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
