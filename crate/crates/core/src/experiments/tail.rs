use std::collections::VecDeque;

use serde::Serialize;

use crate::bipartite::mean_stderr;
use crate::error::{Error, Result};
use crate::graphs::{GraphWindow, Vertex};
use crate::pipeline::Realization;

use super::stats::fit_line;

/// Per-radius sums over the censor-free core of one realization, so that
/// long trial sweeps need not keep the realizations themselves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSample {
    /// Core vertices whose own radius is resolved, so all their points are in the graph.
    pub vertices: usize,
    /// `Σ_v |{x at v : matched, dist >= r}|`.
    pub ge: Vec<u64>,
    /// Sum of the squared per-vertex values of `ge`.
    pub ge_sq: Vec<u64>,
    pub unmatched: u64,
    /// `Σ_v |{x at v : dist > r or unmatched}|`.
    pub gt: Vec<u64>,
    /// `Σ_v ℓ_v 1[Π′ ∩ B_r(v) = ∅]`.
    pub hole: Vec<u64>,
    /// Vertices where the per-vertex tail fell below the per-vertex hole term.
    pub vertex_violations: Vec<usize>,
}

/// Distance from every vertex to the nearest occupied vertex, within the window.
fn nearest_occupied(window: &GraphWindow, counts: &[u32]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; window.len()];
    let mut queue = VecDeque::new();
    for v in window.vertices() {
        if counts[v] > 0 {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for u in window.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

impl TailSample {
    /// `None` when every core vertex is censored.
    pub fn measure(window: &GraphWindow, run: &Realization, r_max: usize) -> Option<Self> {
        let core: Vec<Vertex> = window
            .core()
            .into_iter()
            .filter(|&v| run.r.radius(v).is_some())
            .collect();
        if core.is_empty() {
            return None;
        }
        let mut slot = vec![usize::MAX; window.len()];
        for (k, &v) in core.iter().enumerate() {
            slot[v] = k;
        }
        let mut dists: Vec<Vec<usize>> = vec![Vec::new(); core.len()];
        let mut free = vec![0u64; core.len()];
        for (i, d) in run.mate_distances(window).into_iter().enumerate() {
            let k = slot[run.graph.left_point(i).0];
            if k == usize::MAX {
                continue;
            }
            match d {
                Some(d) => dists[k].push(d),
                None => free[k] += 1,
            }
        }
        let nearest = nearest_occupied(window, run.pi_prime.counts());
        let mut s = TailSample {
            vertices: core.len(),
            ge: vec![0; r_max + 1],
            ge_sq: vec![0; r_max + 1],
            unmatched: free.iter().sum(),
            gt: vec![0; r_max + 1],
            hole: vec![0; r_max + 1],
            vertex_violations: vec![0; r_max + 1],
        };
        for (k, &v) in core.iter().enumerate() {
            for r in 0..=r_max {
                let ge = dists[k].iter().filter(|&&d| d >= r).count() as u64;
                let gt = dists[k].iter().filter(|&&d| d > r).count() as u64 + free[k];
                let hole = if nearest[v] > r {
                    u64::from(run.pi.count(v))
                } else {
                    0
                };
                s.ge[r] += ge;
                s.ge_sq[r] += ge * ge;
                s.gt[r] += gt;
                s.hole[r] += hole;
                if gt < hole {
                    s.vertex_violations[r] += 1;
                }
            }
        }
        Some(s)
    }

    fn r_max(&self) -> usize {
        self.ge.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub r: usize,
    pub b_r: Option<u64>,
    /// Matched points per vertex whose mate is at distance `>= r`.
    pub estimate: f64,
    pub stderr: f64,
    /// Unmatched points per vertex; these have no mate distance.
    pub unmatched: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurve {
    pub rows: Vec<TailRow>,
    /// Slope of `log estimate` against `b_r` over the positive entries with `r >= 1`.
    pub slope: Option<f64>,
    pub trials: usize,
    /// Censor-free core vertices per trial, averaged.
    pub vertices: f64,
}

/// Spatial and trial average of `|{x ∈ Π ∩ {v} : dist(M(x), x) >= r}|` over
/// censor-free core vertices. With one trial the standard error is spatial.
pub fn matching_distance_tail(window: &GraphWindow, samples: &[TailSample]) -> Result<TailCurve> {
    let Some(first) = samples.first() else {
        return Err(Error::Censored(
            "every core vertex is censored; the tail curve is empty".into(),
        ));
    };
    let r_max = first.r_max();
    if samples.iter().any(|s| s.r_max() != r_max) {
        return Err(Error::Contract(
            "tail samples disagree on the radius range".into(),
        ));
    }
    let trials = samples.len();
    let rows: Vec<TailRow> = (0..=r_max)
        .map(|r| {
            let (estimate, stderr) = if trials > 1 {
                mean_stderr(
                    &samples
                        .iter()
                        .map(|s| s.ge[r] as f64 / s.vertices as f64)
                        .collect::<Vec<_>>(),
                )
            } else {
                let n = first.vertices as f64;
                let mean = first.ge[r] as f64 / n;
                let var = if first.vertices > 1 {
                    ((first.ge_sq[r] as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
                } else {
                    0.0
                };
                (mean, (var / n).sqrt())
            };
            TailRow {
                r,
                b_r: window.family().ball_size(r),
                estimate,
                stderr,
                unmatched: samples
                    .iter()
                    .map(|s| s.unmatched as f64 / s.vertices as f64)
                    .sum::<f64>()
                    / trials as f64,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|row| row.r >= 1 && row.estimate > 0.0)
        .filter_map(|row| row.b_r.map(|b| (b as f64, row.estimate.ln())))
        .unzip();
    Ok(TailCurve {
        slope: fit_line(&xs, &ys).map(|(s, _)| s),
        rows,
        trials,
        vertices: samples.iter().map(|s| s.vertices as f64).sum::<f64>() / trials as f64,
    })
}

pub fn tail_curve_of_runs(
    window: &GraphWindow,
    runs: &[Realization],
    r_max: usize,
) -> Result<TailCurve> {
    let samples: Vec<TailSample> = runs
        .iter()
        .filter_map(|r| TailSample::measure(window, r, r_max))
        .collect();
    matching_distance_tail(window, &samples)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoleRow {
    pub r: usize,
    /// Points per vertex with mate distance `> r` or no mate.
    pub tail_gt: f64,
    pub tail_gt_stderr: f64,
    /// `ℓ_v 1[Π′ ∩ B_r(v) = ∅]` per vertex.
    pub hole: f64,
    pub hole_stderr: f64,
    /// Vertices, over all trials, where the per-vertex inequality failed.
    pub violations: usize,
    /// Trials whose averaged tail fell below their averaged hole term.
    pub trial_violations: usize,
}

/// Matching tail beyond `r` against the hole indicator of `Π′` at radius `r`,
/// per realization and per censor-free core vertex. A mate can only sit where
/// `Π′` has points, so the inequality is exact.
pub fn tail_hole_comparison(samples: &[TailSample]) -> Result<Vec<HoleRow>> {
    let Some(first) = samples.first() else {
        return Err(Error::Censored(
            "every core vertex is censored; no hole comparison".into(),
        ));
    };
    Ok((0..=first.r_max())
        .map(|r| {
            let tails: Vec<f64> = samples
                .iter()
                .map(|s| s.gt[r] as f64 / s.vertices as f64)
                .collect();
            let holes: Vec<f64> = samples
                .iter()
                .map(|s| s.hole[r] as f64 / s.vertices as f64)
                .collect();
            let (tail_gt, tail_gt_stderr) = mean_stderr(&tails);
            let (hole, hole_stderr) = mean_stderr(&holes);
            HoleRow {
                r,
                tail_gt,
                tail_gt_stderr,
                hole,
                hole_stderr,
                violations: samples.iter().map(|s| s.vertex_violations[r]).sum(),
                trial_violations: samples.iter().filter(|s| s.gt[r] < s.hole[r]).count(),
            }
        })
        .collect())
}
