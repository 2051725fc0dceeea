//! Pointwise maximum over a set of spectra, with support detection.

use rayon::prelude::*;

/// How a pixel qualifies as phase matched by the spectrum that maximizes it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportRule {
    /// Minimum raw counts of the maximizing spectrum, as a fraction of the
    /// brightest pixel of the whole scan.
    pub relative_floor: f64,
    /// Optional absolute floor [counts]; the larger floor applies.
    pub absolute_floor: f64,
    /// The maximizer must reach this fraction of its own local maximum...
    pub sidelobe_ratio: f64,
    /// ...within ± this many pixels.
    pub sidelobe_window: usize,
    /// Drop pixels maximized by the first or last spectrum in tilt order
    /// (their outer flank is not bounded by a neighbour), except in the run
    /// containing the normalization pixel.
    pub exclude_scan_ends: bool,
}

impl Default for SupportRule {
    fn default() -> Self {
        SupportRule {
            relative_floor: 0.02,
            absolute_floor: 0.0,
            sidelobe_ratio: 0.5,
            sidelobe_window: 32,
            exclude_scan_ends: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub values: Vec<f64>,
    /// Index of the maximizing spectrum per pixel.
    pub argmax: Vec<usize>,
    pub support: Vec<bool>,
}

/// A dip of the envelope between two maximizer runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scallop {
    pub pixel: usize,
    /// 1 − E(switch) / min(left run max, right run max)
    pub depth: f64,
}

/// Envelope of `values[j][i]` over spectra j.
///
/// `counts[j][i]` are the raw counts used for the floor, `tilt_rank[j]` the
/// position of spectrum j in tilt order, and `anchor` the normalization
/// pixel.
pub fn envelope(
    values: &[Vec<f64>],
    counts: &[Vec<f64>],
    tilt_rank: &[usize],
    anchor: usize,
    rule: &SupportRule,
) -> Envelope {
    let n_spec = values.len();
    let n_pix = values.first().map_or(0, |v| v.len());
    let (vals, argmax): (Vec<f64>, Vec<usize>) = (0..n_pix)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, 0);
            for (j, v) in values.iter().enumerate() {
                if v[i] > best.0 {
                    best = (v[i], j);
                }
            }
            best
        })
        .unzip();

    let peak = counts
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, &c| m.max(c));
    let floor = (rule.relative_floor * peak).max(rule.absolute_floor);
    let last_rank = n_spec.saturating_sub(1);
    let is_end = |j: usize| rule.exclude_scan_ends && n_spec >= 3 && (tilt_rank[j] == 0 || tilt_rank[j] == last_rank);

    // Run of pixels around the anchor maximized by the same spectrum.
    let anchor_run = if anchor < n_pix {
        let j = argmax[anchor];
        let mut lo = anchor;
        while lo > 0 && argmax[lo - 1] == j {
            lo -= 1;
        }
        let mut hi = anchor;
        while hi + 1 < n_pix && argmax[hi + 1] == j {
            hi += 1;
        }
        Some(lo..=hi)
    } else {
        None
    };

    let support = (0..n_pix)
        .into_par_iter()
        .map(|i| {
            let j = argmax[i];
            if !(counts[j][i] > floor) {
                return false;
            }
            let lo = i.saturating_sub(rule.sidelobe_window);
            let hi = (i + rule.sidelobe_window).min(n_pix - 1);
            let local = values[j][lo..=hi].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            if vals[i] < rule.sidelobe_ratio * local {
                return false;
            }
            !(is_end(j) && !anchor_run.as_ref().is_some_and(|r| r.contains(&i)))
        })
        .collect();

    Envelope {
        values: vals,
        argmax,
        support,
    }
}

impl Envelope {
    /// Dips between consecutive maximizer runs, on support only.
    pub fn scallops(&self) -> Vec<Scallop> {
        let n = self.values.len();
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || self.argmax[i] != self.argmax[start] {
                runs.push((start, i - 1));
                start = i;
            }
        }
        let run_max = |&(a, b): &(usize, usize)| self.values[a..=b].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        runs.windows(2)
            .filter_map(|w| {
                let (l, r) = (w[0], w[1]);
                let (i, k) = (l.1, r.0);
                if !(self.support[i] && self.support[k]) {
                    return None;
                }
                let m = run_max(&l).min(run_max(&r));
                let e = self.values[i].min(self.values[k]);
                (m > 0.0).then(|| Scallop {
                    pixel: if self.values[i] <= self.values[k] { i } else { k },
                    depth: 1.0 - e / m,
                })
            })
            .collect()
    }
}
