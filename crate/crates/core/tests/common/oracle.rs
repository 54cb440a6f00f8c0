//! Brute-force reference implementations written straight from the
//! definitions. They share no code with the library.

/// Peak iff the maximal equal-valued run containing `i` has strictly lower
/// samples on both sides and `i` is its left-biased midpoint.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    (0..n)
        .filter(|&i| {
            let l = (0..=i).rev().take_while(|&j| x[j] == x[i]).last().unwrap();
            let r = (i..n).take_while(|&j| x[j] == x[i]).last().unwrap();
            l > 0 && r + 1 < n && x[l - 1] < x[i] && x[r + 1] < x[i] && i == l + (r - l) / 2
        })
        .collect()
}

/// `(prominence, left_base, right_base)` by explicit window construction.
pub fn prominence(x: &[f64], peak: usize) -> (f64, usize, usize) {
    let h = x[peak];
    let lo = (0..peak).rev().find(|&j| x[j] > h).map_or(0, |j| j + 1);
    let hi = (peak + 1..x.len()).find(|&j| x[j] > h).map_or(x.len() - 1, |j| j - 1);
    // left: minimum, rightmost among ties
    let mut lb = lo;
    for j in lo..=peak {
        if x[j] <= x[lb] {
            lb = j;
        }
    }
    // right: minimum, leftmost among ties
    let mut rb = hi;
    for j in (peak..=hi).rev() {
        if x[j] <= x[rb] {
            rb = j;
        }
    }
    (h - x[lb].max(x[rb]), lb, rb)
}

/// Crossings of the piecewise-linear interpolant with the evaluation level:
/// the left point is the largest `p` in `[lb, peak]` with `f(p) <= level`
/// and the right point the smallest such `p` in `[peak, rb]`, each clamped
/// to its base when no such point exists.
pub fn width(x: &[f64], peak: usize, prom: f64, lb: usize, rb: usize, rel: f64) -> (f64, f64, f64) {
    let level = x[peak] - prom * rel;
    let mut left: Option<f64> = None;
    if x[lb] <= level {
        left = Some(lb as f64);
    }
    for j in lb..peak {
        let cand = if x[j + 1] <= level {
            Some((j + 1) as f64)
        } else if x[j] <= level {
            Some(j as f64 + (level - x[j]) / (x[j + 1] - x[j]))
        } else {
            None
        };
        if let Some(c) = cand {
            left = Some(left.map_or(c, |l: f64| l.max(c)));
        }
    }
    let mut right: Option<f64> = None;
    if x[rb] <= level {
        right = Some(rb as f64);
    }
    for j in (peak + 1..=rb).rev() {
        let cand = if x[j - 1] <= level {
            Some((j - 1) as f64)
        } else if x[j] <= level {
            Some(j as f64 - (level - x[j]) / (x[j - 1] - x[j]))
        } else {
            None
        };
        if let Some(c) = cand {
            right = Some(right.map_or(c, |r: f64| r.min(c)));
        }
    }
    let l = left.unwrap_or(lb as f64);
    let r = right.unwrap_or(rb as f64);
    (r - l, l, r)
}

/// Longest contiguous segment whose minimum is at least `tau`; earliest on ties.
pub fn threshold_select(x: &[f64], tau: f64) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for s in 0..x.len() {
        for e in s..x.len() {
            let min = x[s..=e].iter().cloned().fold(f64::INFINITY, f64::min);
            if min < tau {
                break;
            }
            if best.is_none_or(|(bs, be)| e - s > be - bs) {
                best = Some((s, e));
            }
        }
    }
    best
}

pub fn mask(t: usize, iv: Option<(usize, usize)>) -> Vec<bool> {
    (0..t)
        .map(|i| iv.is_some_and(|(s, e)| s <= i && i <= e))
        .collect()
}

/// `(tp, fp, fn)` by elementwise comparison of materialized masks.
pub fn confusion(pred: &[bool], truth: &[bool]) -> (usize, usize, usize) {
    let mut c = (0, 0, 0);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            (false, true) => c.2 += 1,
            _ => {}
        }
    }
    c
}

/// Set-based IoU over frame indices.
pub fn iou(pred: &[bool], truth: &[bool]) -> f64 {
    let inter = pred.iter().zip(truth).filter(|(p, t)| **p && **t).count();
    let union = pred.iter().zip(truth).filter(|(p, t)| **p || **t).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Kappa from materialized label vectors via marginal frequencies.
pub fn kappa(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut chance = 0.0;
    for class in [0u8, 1] {
        let pa = a.iter().filter(|&&v| v == class).count() as f64 / n;
        let pb = b.iter().filter(|&&v| v == class).count() as f64 / n;
        chance += pa * pb;
    }
    if chance == 1.0 {
        1.0
    } else {
        (agree - chance) / (1.0 - chance)
    }
}
