//! Synthetic score series and annotator panels.

use rand::Rng;

/// Boxcar of amplitude 1 on `[start, end]` plus uniform noise in `[-noise, noise]`.
pub fn boxcar_scores<R: Rng>(rng: &mut R, t: usize, start: usize, end: usize, noise: f64) -> Vec<f64> {
    (0..t)
        .map(|i| {
            let base = if (start..=end).contains(&i) { 1.0 } else { 0.0 };
            base + rng.random_range(-noise..=noise)
        })
        .collect()
}

/// Random event bounds kept `margin` frames away from both ends.
pub fn random_event<R: Rng>(rng: &mut R, t: usize, min_len: usize, max_len: usize, margin: usize) -> (usize, usize) {
    let len = rng.random_range(min_len..=max_len);
    let start = rng.random_range(margin..=t - margin - len);
    (start, start + len - 1)
}

/// Jitters both markers independently by up to `jitter` frames, clamped and ordered.
pub fn jittered<R: Rng>(rng: &mut R, t: usize, (s, e): (usize, usize), jitter: i64) -> (usize, usize) {
    let shift = |x: usize, rng: &mut R| -> usize {
        (x as i64 + rng.random_range(-jitter..=jitter)).clamp(0, t as i64 - 1) as usize
    };
    let a = shift(s, rng);
    let b = shift(e, rng);
    (a.min(b), a.max(b))
}

/// Random values in `[0, 1]`; with probability 1/3 quantized to eighths so
/// plateaus and exact ties appear.
pub fn random_series<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let quantize = rng.random_range(0..3) == 0;
    (0..len)
        .map(|_| {
            if quantize {
                rng.random_range(0..=8) as f64 / 8.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect()
}
