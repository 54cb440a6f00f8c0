//! Mean-background baseline scorer and per-video score normalization.
//!
//! The score of a frame is its mean absolute per-pixel deviation from the
//! average of the training frames. Pixels are grayscale luma in `[0, 1]`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Single-channel image, row-major, values nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    pixels: Vec<f64>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, pixels: Vec<f64>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::LengthMismatch {
                what: "frame pixels".into(),
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        }
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Decodes an image file and converts it to luma `0.299 R + 0.587 G + 0.114 B`.
    pub fn open(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Image {
                path: path.to_path_buf(),
                msg: other.to_string(),
            },
        })?;
        let rgb = img.to_rgb8();
        let (width, height) = rgb.dimensions();
        let pixels = rgb
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0;
                (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64) / 255.0
            })
            .collect();
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    fn check_dims(&self, expected: (u32, u32)) -> Result<()> {
        if self.dimensions() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.dimensions(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    mean: GrayFrame,
    train_frame_count: usize,
}

impl BackgroundModel {
    pub fn mean(&self) -> &GrayFrame {
        &self.mean
    }

    pub fn train_frame_count(&self) -> usize {
        self.train_frame_count
    }
}

#[derive(Default)]
struct MeanAccumulator {
    dims: Option<(u32, u32)>,
    sum: Vec<f64>,
    count: usize,
}

impl MeanAccumulator {
    fn push(&mut self, frame: &GrayFrame) -> Result<()> {
        match self.dims {
            None => {
                self.dims = Some(frame.dimensions());
                self.sum = frame.pixels.clone();
            }
            Some(dims) => {
                frame.check_dims(dims)?;
                for (s, p) in self.sum.iter_mut().zip(&frame.pixels) {
                    *s += p;
                }
            }
        }
        self.count += 1;
        Ok(())
    }

    fn finish(self) -> Result<BackgroundModel> {
        let (width, height) = self.dims.ok_or(Error::EmptyTrainingSet)?;
        let n = self.count as f64;
        let pixels = self.sum.into_iter().map(|s| s / n).collect();
        Ok(BackgroundModel {
            mean: GrayFrame {
                width,
                height,
                pixels,
            },
            train_frame_count: self.count,
        })
    }
}

/// Per-pixel arithmetic mean over the training frames.
pub fn fit_background<'a, I>(train_frames: I) -> Result<BackgroundModel>
where
    I: IntoIterator<Item = &'a GrayFrame>,
{
    let mut acc = MeanAccumulator::default();
    for frame in train_frames {
        acc.push(frame)?;
    }
    acc.finish()
}

/// Mean absolute per-pixel deviation of `frame` from the background mean.
pub fn score_frame(model: &BackgroundModel, frame: &GrayFrame) -> Result<f64> {
    frame.check_dims(model.mean.dimensions())?;
    let n = frame.pixels.len();
    if n == 0 {
        return Ok(0.0);
    }
    let total: f64 = frame
        .pixels
        .iter()
        .zip(&model.mean.pixels)
        .map(|(p, m)| (p - m).abs())
        .sum();
    Ok(total / n as f64)
}

/// Fits a background model from image files, decoding one frame at a time.
pub fn fit_background_files(paths: &[impl AsRef<Path>]) -> Result<BackgroundModel> {
    let mut acc = MeanAccumulator::default();
    for p in paths {
        acc.push(&GrayFrame::open(p.as_ref())?)?;
    }
    acc.finish()
}

/// Scores every frame file in order.
pub fn score_files(
    model: &BackgroundModel,
    paths: &[impl AsRef<Path> + Sync],
    exec: Exec,
) -> Result<Vec<f64>> {
    exec.try_map(paths, |p| score_frame(model, &GrayFrame::open(p.as_ref())?))
}

/// Per-video min-max normalization to `[0, 1]`; a constant series maps to zeros.
pub fn normalize_scores(scores: &[f64]) -> Vec<f64> {
    let (min, max) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let range = max - min;
    if range.is_nan() || range <= 0.0 {
        return vec![0.0; scores.len()];
    }
    scores.iter().map(|&x| (x - min) / range).collect()
}
