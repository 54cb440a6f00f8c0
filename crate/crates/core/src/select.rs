//! Turning a normalized score series into a single event interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::peaks::find_peaks;
use crate::types::EventInterval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Longest run of frames scoring at least `tau`.
    Threshold,
    /// Widest peak measured at relative height `h`.
    FindPeaks,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::FindPeaks, Method::Threshold];

    pub fn token(self) -> &'static str {
        match self {
            Method::Threshold => "threshold",
            Method::FindPeaks => "find_peaks",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "threshold" => Ok(Method::Threshold),
            "find_peaks" | "findpeaks" | "peaks" => Ok(Method::FindPeaks),
            _ => Err(Error::BadToken(s.to_string())),
        }
    }
}

/// Method plus its single tuning parameter (`tau` or relative height).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub method: Method,
    pub param: f64,
}

impl SelectionParams {
    pub fn threshold(tau: f64) -> Self {
        Self {
            method: Method::Threshold,
            param: tau,
        }
    }

    pub fn find_peaks(rel_height: f64) -> Self {
        Self {
            method: Method::FindPeaks,
            param: rel_height,
        }
    }

    /// `None` means no event was found.
    pub fn select(&self, scores: &[f64]) -> Option<EventInterval> {
        match self.method {
            Method::Threshold => select_threshold(scores, self.param),
            Method::FindPeaks => select_peak(scores, self.param),
        }
    }
}

/// Longest maximal run with `score >= tau`; the earliest run wins ties.
pub fn select_threshold(scores: &[f64], tau: f64) -> Option<EventInterval> {
    let mut best: Option<(usize, usize)> = None;
    let mut run_start = None;
    for (i, &r) in scores.iter().enumerate() {
        match (r >= tau, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                keep_longer(&mut best, s, i - 1);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        keep_longer(&mut best, s, scores.len() - 1);
    }
    best.map(|(s, e)| EventInterval::new(s, e).expect("run bounds are ordered"))
}

fn keep_longer(best: &mut Option<(usize, usize)>, s: usize, e: usize) {
    if best.is_none_or(|(bs, be)| e - s > be - bs) {
        *best = Some((s, e));
    }
}

/// Widest peak at relative height `rel_height`; the earliest peak wins ties.
///
/// The interval covers the frames inside the width contour,
/// `[ceil(left_ip), floor(right_ip)]`, falling back to the apex frame when
/// that range is empty.
pub fn select_peak(scores: &[f64], rel_height: f64) -> Option<EventInterval> {
    let peaks = find_peaks(scores, rel_height);
    let widest = peaks
        .iter()
        .fold(None, |best: Option<&crate::peaks::Peak>, p| match best {
            Some(b) if p.width <= b.width => Some(b),
            _ => Some(p),
        })?;
    let last = scores.len() - 1;
    let start = (widest.left_ip.ceil().max(0.0) as usize).min(last);
    let end = (widest.right_ip.floor().max(0.0) as usize).min(last);
    Some(if start <= end {
        EventInterval::new(start, end).expect("checked order")
    } else {
        EventInterval::new(widest.position, widest.position).expect("single frame")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: usize, e: usize) -> Option<EventInterval> {
        Some(EventInterval::new(s, e).unwrap())
    }

    #[test]
    fn threshold_examples() {
        let r = [0.1, 0.8, 0.9, 0.2, 0.7, 0.7, 0.7, 0.1];
        assert_eq!(select_threshold(&r, 0.6), iv(4, 6));
        assert_eq!(select_threshold(&r, 0.95), None);
        assert_eq!(select_threshold(&r, 0.0), iv(0, 7));
        // equal-length runs: earliest
        assert_eq!(select_threshold(&[1.0, 0.0, 1.0], 0.5), iv(0, 0));
        assert_eq!(select_threshold(&[0.0, 1.0, 1.0], 1.0), iv(1, 2));
    }

    #[test]
    fn peak_examples() {
        assert_eq!(select_peak(&[0.0, 1.0, 0.0], 0.5), iv(1, 1));
        assert_eq!(select_peak(&[0.0, 0.5, 0.0, 0.0, 1.0, 0.0], 1.0), iv(0, 2));
        assert_eq!(select_peak(&[0.0, 0.25, 0.5, 1.0], 0.5), None);
        assert_eq!(select_peak(&[0.0, 1.0, 0.0], 1.0), iv(0, 2));
    }

    #[test]
    fn zero_relative_height_selects_apex() {
        assert_eq!(select_peak(&[0.0, 0.3, 1.0, 0.2], 0.0), iv(2, 2));
    }

    #[test]
    fn method_tokens() {
        for m in Method::ALL {
            assert_eq!(m.token().parse::<Method>().unwrap(), m);
        }
        assert!("otsu".parse::<Method>().is_err());
    }
}
