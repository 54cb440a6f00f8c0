//! Local maxima, topographic prominence and interpolated peak widths.
//!
//! Semantics follow the conventions of the common scientific-python peak
//! tools: flat-topped peaks resolve to the left-biased midpoint of the
//! plateau, bases are searched until a strictly higher sample or the signal
//! edge, and widths are measured at `height - rel_height * prominence` with
//! linear interpolation between samples.

use crate::error::{Error, Result};

/// A detected peak with its prominence and width measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: usize,
    pub height: f64,
    pub left_base: usize,
    pub right_base: usize,
    pub prominence: f64,
    pub width: f64,
    /// Height at which `width` was evaluated.
    pub width_height: f64,
    pub left_ip: f64,
    pub right_ip: f64,
}

/// Indices of strict local maxima. Plateaus bounded by lower samples on both
/// sides yield their midpoint (rounded down). Endpoints are never peaks.
pub fn find_local_maxima(x: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    if x.len() < 3 {
        return peaks;
    }
    let last = x.len() - 1;
    let mut i = 1;
    while i < last {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead < last && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                let right_edge = ahead - 1;
                peaks.push(i + (right_edge - i) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

/// True if `index` is one of the positions reported by [`find_local_maxima`].
pub fn is_local_maximum(x: &[f64], index: usize) -> bool {
    if index == 0 || index + 1 >= x.len() {
        return false;
    }
    let v = x[index];
    let mut left = index;
    while left > 0 && x[left - 1] == v {
        left -= 1;
    }
    let mut right = index;
    while right + 1 < x.len() && x[right + 1] == v {
        right += 1;
    }
    left > 0
        && right + 1 < x.len()
        && x[left - 1] < v
        && x[right + 1] < v
        && index == left + (right - left) / 2
}

/// Prominence and bases `(prominence, left_base, right_base)` of a peak.
///
/// On each side the search window runs from the peak to the nearest strictly
/// higher sample (exclusive) or the signal edge; the base is the minimum in
/// that window, taking the sample closest to the peak on ties.
pub fn peak_prominence(x: &[f64], peak: usize) -> Result<(f64, usize, usize)> {
    if !is_local_maximum(x, peak) {
        return Err(Error::NotAPeak(peak));
    }
    Ok(prominence_unchecked(x, peak))
}

fn prominence_unchecked(x: &[f64], peak: usize) -> (f64, usize, usize) {
    let height = x[peak];

    let mut left_base = peak;
    let mut left_min = height;
    let mut i = peak;
    while i > 0 && x[i - 1] <= height {
        i -= 1;
        if x[i] < left_min {
            left_min = x[i];
            left_base = i;
        }
    }

    let mut right_base = peak;
    let mut right_min = height;
    let mut i = peak;
    while i + 1 < x.len() && x[i + 1] <= height {
        i += 1;
        if x[i] < right_min {
            right_min = x[i];
            right_base = i;
        }
    }

    (height - left_min.max(right_min), left_base, right_base)
}

/// Width of a peak at `rel_height` of its prominence: `(width, width_height, left_ip, right_ip)`.
///
/// The crossing points are interpolated linearly; a side that never drops to
/// the evaluation height is clamped to its base.
pub fn peak_width(
    x: &[f64],
    peak: usize,
    prominence: f64,
    left_base: usize,
    right_base: usize,
    rel_height: f64,
) -> (f64, f64, f64, f64) {
    let level = x[peak] - prominence * rel_height;

    let mut i = peak;
    while left_base < i && level < x[i] {
        i -= 1;
    }
    let mut left_ip = i as f64;
    if x[i] < level {
        left_ip += (level - x[i]) / (x[i + 1] - x[i]);
    }

    let mut i = peak;
    while i < right_base && level < x[i] {
        i += 1;
    }
    let mut right_ip = i as f64;
    if x[i] < level {
        right_ip -= (level - x[i]) / (x[i - 1] - x[i]);
    }

    (right_ip - left_ip, level, left_ip, right_ip)
}

/// Every local maximum of `x` with prominence and width at `rel_height`.
pub fn find_peaks(x: &[f64], rel_height: f64) -> Vec<Peak> {
    find_local_maxima(x)
        .into_iter()
        .map(|position| {
            let (prominence, left_base, right_base) = prominence_unchecked(x, position);
            let (width, width_height, left_ip, right_ip) =
                peak_width(x, position, prominence, left_base, right_base, rel_height);
            Peak {
                position,
                height: x[position],
                left_base,
                right_base,
                prominence,
                width,
                width_height,
                left_ip,
                right_ip,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxima_examples() {
        assert_eq!(find_local_maxima(&[0.0, 1.0, 0.0]), vec![1]);
        assert_eq!(find_local_maxima(&[0.0, 1.0, 1.0, 1.0, 0.0]), vec![2]);
        assert_eq!(find_local_maxima(&[0.0, 1.0, 1.0, 0.0]), vec![1]);
        assert!(find_local_maxima(&[0.0, 1.0, 2.0, 3.0]).is_empty());
        // plateau running into the signal edge is not a peak
        assert!(find_local_maxima(&[0.0, 1.0, 1.0]).is_empty());
        assert!(find_local_maxima(&[1.0, 0.0]).is_empty());
        assert_eq!(find_local_maxima(&[0.0, 2.0, 1.0, 3.0, 3.0, 0.5]), vec![1, 3]);
    }

    #[test]
    fn prominence_examples() {
        assert_eq!(peak_prominence(&[0.0, 1.0, 0.0], 1).unwrap(), (1.0, 0, 2));
        let x = [0.0, 0.2, 1.0, 0.4, 0.8, 0.0];
        let (p, l, r) = peak_prominence(&x, 4).unwrap();
        assert!((p - 0.4).abs() < 1e-15);
        assert_eq!((l, r), (3, 5));
        assert_eq!(peak_prominence(&x, 2).unwrap(), (1.0, 0, 5));
        assert!(matches!(peak_prominence(&x, 3), Err(Error::NotAPeak(3))));
        assert!(matches!(peak_prominence(&x, 0), Err(Error::NotAPeak(0))));
    }

    #[test]
    fn base_ties_prefer_samples_nearest_the_peak() {
        let x = [0.0, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0];
        assert_eq!(peak_prominence(&x, 3).unwrap(), (1.0, 2, 4));
    }

    #[test]
    fn width_examples() {
        let x = [0.0, 1.0, 0.0];
        assert_eq!(peak_width(&x, 1, 1.0, 0, 2, 0.5), (1.0, 0.5, 0.5, 1.5));
        assert_eq!(peak_width(&x, 1, 1.0, 0, 2, 0.0), (0.0, 1.0, 1.0, 1.0));
        assert_eq!(peak_width(&x, 1, 1.0, 0, 2, 1.0), (2.0, 0.0, 0.0, 2.0));
    }

    #[test]
    fn width_at_zero_on_plateau_is_zero() {
        let x = [0.0, 1.0, 1.0, 1.0, 0.0];
        let p = find_peaks(&x, 0.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].width, 0.0);
        assert_eq!(p[0].left_ip, 2.0);
    }

    #[test]
    fn peak_fields_respect_invariants() {
        let x = [0.1, 0.3, 0.2, 0.9, 0.4, 0.4, 0.6, 0.0, 0.2, 0.1];
        let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
        for h in [0.0, 0.3, 0.5, 1.0] {
            for p in find_peaks(&x, h) {
                assert!(p.left_base <= p.position && p.position <= p.right_base);
                assert!(p.left_ip <= p.position as f64 && p.position as f64 <= p.right_ip);
                assert!(p.prominence <= p.height - min);
                assert!(p.width >= 0.0);
            }
        }
    }
}
