//! Poisson processes and perturbed vertex sets on a window.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{GraphFamily, GraphWindow, Vertex};
use crate::rng::{self, Role};

/// Which of the two point processes a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Pi,
    PiPrime,
}

impl Side {
    pub fn role(self) -> Role {
        match self {
            Side::Pi => Role::Pi,
            Side::PiPrime => Role::PiPrime,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Pi => Side::PiPrime,
            Side::PiPrime => Side::Pi,
        }
    }
}

/// Law of the perturbation distance, with finite support `0..=d_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceLaw {
    pmf: Vec<f64>,
    /// Mass removed by truncation before renormalising (total-variation
    /// distance to the untruncated law).
    truncated_mass: f64,
}

impl DistanceLaw {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::config(
                "process.law",
                "pmf entries must be finite and nonnegative",
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "process.law",
                format!("pmf sums to {total}, not 1"),
            ));
        }
        let mut pmf = pmf;
        while pmf.len() > 1 && pmf.last() == Some(&0.0) {
            pmf.pop();
        }
        Ok(DistanceLaw {
            pmf,
            truncated_mass: 0.0,
        })
    }

    /// Point mass at 0: the unperturbed vertex set.
    pub fn degenerate() -> Self {
        DistanceLaw {
            pmf: vec![1.0],
            truncated_mass: 0.0,
        }
    }

    /// `P(R = k) ∝ (1 - q) q^k` truncated to `k <= d_max` and renormalised.
    pub fn geometric(q: f64, d_max: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::config(
                "process.q",
                format!("geometric ratio must lie in [0, 1), got {q}"),
            ));
        }
        let raw: Vec<f64> = (0..=d_max).map(|k| (1.0 - q) * q.powi(k as i32)).collect();
        let kept: f64 = raw.iter().sum();
        Ok(DistanceLaw {
            pmf: raw.iter().map(|p| p / kept).collect(),
            truncated_mass: 1.0 - kept,
        })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn d_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        if self.pmf.len() == 1 {
            return 0;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, &p) in self.pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        self.d_max()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProcessSpec {
    /// I.i.d. Poisson(1) counts.
    Poisson,
    /// Every vertex emits one point, moved to a uniform vertex of the sphere
    /// whose radius is drawn from `law`.
    Perturbed { law: DistanceLaw },
}

impl ProcessSpec {
    pub fn degenerate() -> Self {
        ProcessSpec::Perturbed {
            law: DistanceLaw::degenerate(),
        }
    }

    pub fn d_max(&self) -> usize {
        match self {
            ProcessSpec::Poisson => 0,
            ProcessSpec::Perturbed { law } => law.d_max(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, ProcessSpec::Perturbed { law } if law.d_max() == 0)
    }
}

/// Point `(vertex, index)` with `index` in `1..=count(vertex)`.
pub type Point = (Vertex, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMultiset {
    counts: Vec<u32>,
    offsets: Vec<usize>,
    /// Origin of each point in point-id order, for perturbed sets.
    origins: Option<Vec<Vertex>>,
    discarded: usize,
}

impl PointMultiset {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        let offsets = prefix_offsets(&counts);
        PointMultiset {
            counts,
            offsets,
            origins: None,
            discarded: 0,
        }
    }

    /// Builds a perturbed set from `(origin, landing)` records, `None`
    /// landings being discarded. Points at each vertex are indexed by
    /// increasing origin.
    pub fn from_displacements(n: usize, records: &[(Vertex, Option<Vertex>)]) -> Self {
        let mut counts = vec![0u32; n];
        let mut discarded = 0;
        for &(_, landing) in records {
            match landing {
                Some(v) => counts[v] += 1,
                None => discarded += 1,
            }
        }
        let offsets = prefix_offsets(&counts);
        let mut fill = offsets.clone();
        let mut origins = vec![0; offsets[n]];
        let mut sorted: Vec<(Vertex, Vertex)> = records
            .iter()
            .filter_map(|&(o, l)| l.map(|l| (l, o)))
            .collect();
        sorted.sort_unstable();
        for (landing, origin) in sorted {
            origins[fill[landing]] = origin;
            fill[landing] += 1;
        }
        PointMultiset {
            counts,
            offsets,
            origins: Some(origins),
            discarded,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_counts(vec![0; n])
    }

    pub fn window_len(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, v: Vertex) -> u32 {
        self.counts[v]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.offsets[self.counts.len()]
    }

    /// Dense id of a point, in vertex-then-index order.
    pub fn point_id(&self, (v, i): Point) -> usize {
        debug_assert!(i >= 1 && i <= self.counts[v]);
        self.offsets[v] + (i as usize - 1)
    }

    pub fn point(&self, id: usize) -> Point {
        let v = self.offsets.partition_point(|&o| o <= id) - 1;
        (v, (id - self.offsets[v]) as u32 + 1)
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(v, &c)| (1..=c).map(move |i| (v, i)))
    }

    pub fn occupied(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, _)| v)
    }

    pub fn origin(&self, p: Point) -> Option<Vertex> {
        self.origins.as_ref().map(|o| o[self.point_id(p)])
    }

    pub fn is_perturbed(&self) -> bool {
        self.origins.is_some()
    }

    /// Points of a perturbed set that landed outside the window.
    pub fn discarded(&self) -> usize {
        self.discarded
    }

    /// Text dump: `vertex_id count` for occupied vertices, then for perturbed
    /// sets a `# origins` marker and one `origin_id landing_id` line per point.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# vertices {}", self.counts.len());
        for v in self.occupied() {
            let _ = writeln!(out, "{v} {}", self.counts[v]);
        }
        if let Some(origins) = &self.origins {
            let _ = writeln!(out, "# origins discarded={}", self.discarded);
            for (id, &o) in origins.iter().enumerate() {
                let _ = writeln!(out, "{o} {}", self.point(id).0);
            }
        }
        out
    }

    pub fn load(text: &str, source_name: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut counts: Vec<(usize, u32)> = Vec::new();
        let mut records: Option<Vec<(Vertex, Vertex)>> = None;
        let mut discarded = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# vertices ") {
                n = Some(
                    rest.trim()
                        .parse()
                        .map_err(|_| Error::parse(source_name, lineno + 1, "bad vertex count"))?,
                );
                continue;
            }
            if let Some(rest) = line.strip_prefix("# origins") {
                records = Some(Vec::new());
                if let Some(d) = rest.trim().strip_prefix("discarded=") {
                    discarded = d
                        .parse()
                        .map_err(|_| Error::parse(source_name, lineno + 1, "bad discard count"))?;
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
            let (Some(Ok(a)), Some(Ok(b)), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::parse(
                    source_name,
                    lineno + 1,
                    "expected two integers",
                ));
            };
            match &mut records {
                Some(r) => r.push((a, b)),
                None => counts.push((a, b as u32)),
            }
        }
        let n = n.ok_or_else(|| Error::parse(source_name, 0, "missing `# vertices` header"))?;
        let mut dense = vec![0u32; n];
        for (v, c) in counts {
            if v >= n {
                return Err(Error::parse(
                    source_name,
                    0,
                    format!("vertex {v} outside window of {n}"),
                ));
            }
            dense[v] = c;
        }
        match records {
            None => Ok(Self::from_counts(dense)),
            Some(records) => {
                let full: Vec<(Vertex, Option<Vertex>)> =
                    records.iter().map(|&(o, l)| (o, Some(l))).collect();
                if records.iter().any(|&(_, l)| l >= n) {
                    return Err(Error::parse(
                        source_name,
                        0,
                        "landing vertex outside window",
                    ));
                }
                let mut pm = Self::from_displacements(n, &full);
                if pm.counts != dense {
                    return Err(Error::parse(
                        source_name,
                        0,
                        "origin records disagree with counts",
                    ));
                }
                pm.discarded = discarded;
                Ok(pm)
            }
        }
    }
}

fn prefix_offsets(counts: &[u32]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(counts.len() + 1);
    let mut acc = 0usize;
    offsets.push(0);
    for &c in counts {
        acc += c as usize;
        offsets.push(acc);
    }
    offsets
}

/// `Σ_{v ∈ S} ℓ_v`.
pub fn count_in(pm: &PointMultiset, set: &[Vertex]) -> u64 {
    set.iter().map(|&v| pm.count(v) as u64).sum()
}

/// Poisson(1) count at `v` under `seed`.
pub fn poisson_count(seed: u64, side: Side, v: Vertex) -> u32 {
    let mut rng = rng::stream(seed, side.role(), v as u64);
    let law = Poisson::new(1.0).expect("unit intensity is valid");
    law.sample(&mut rng) as u32
}

/// Landing vertex of the point emitted by `origin`, `None` if it leaves the window.
pub fn landing(
    window: &GraphWindow,
    law: &DistanceLaw,
    seed: u64,
    side: Side,
    origin: Vertex,
) -> Option<Vertex> {
    let mut rng = rng::stream(seed, side.role(), origin as u64);
    let r = law.sample(&mut rng);
    if r == 0 {
        return Some(origin);
    }
    match window.family() {
        GraphFamily::RegularTree { degree } => {
            // A non-backtracking walk of length r ends uniformly on S_r.
            let d = *degree;
            let mut v = origin;
            let mut last: Option<usize> = None;
            for _ in 0..r {
                let mut g = rng.random_range(0..if last.is_some() { d - 1 } else { d });
                if let Some(prev) = last {
                    if g >= prev {
                        g += 1;
                    }
                }
                // Leaving the window in a tree never comes back on a
                // non-backtracking walk.
                v = window.generator_slots(v).nth(g)??;
                // Moving along generator g, the way back is generator g.
                last = Some(g);
            }
            Some(v)
        }
        GraphFamily::LadderDiagonal => {
            let (x, y) = window.ladder_coords(origin)?;
            let r = r as i64;
            let mut sphere = vec![(x - r, 0), (x - r, 1), (x + r, 0), (x + r, 1)];
            if r == 1 {
                sphere.push((x, 1 - y));
            }
            let pick = sphere[rng.random_range(0..sphere.len())];
            window.vertex_of_coords(pick)
        }
        GraphFamily::ExplicitFinite { .. } => {
            let sphere = window.sphere(origin, r).vertices;
            if sphere.is_empty() {
                None
            } else {
                Some(sphere[rng.random_range(0..sphere.len())])
            }
        }
    }
}

/// Samples the process on the whole window. Perturbed origins range over
/// every window vertex, so core counts are unbiased when the core margin
/// covers the perturbation range.
pub fn sample(
    spec: &ProcessSpec,
    window: &GraphWindow,
    seed: u64,
    side: Side,
) -> Result<PointMultiset> {
    match spec {
        ProcessSpec::Poisson => Ok(PointMultiset::from_counts(
            window
                .vertices()
                .map(|v| poisson_count(seed, side, v))
                .collect(),
        )),
        ProcessSpec::Perturbed { law } => {
            let explicit = matches!(window.family(), GraphFamily::ExplicitFinite { .. });
            if !explicit && law.d_max() > window.core_margin() {
                return Err(Error::config(
                    "process.d_max",
                    format!(
                        "perturbation range {} exceeds core margin {}",
                        law.d_max(),
                        window.core_margin()
                    ),
                ));
            }
            let records: Vec<(Vertex, Option<Vertex>)> = window
                .vertices()
                .map(|o| (o, landing(window, law, seed, side, o)))
                .collect();
            Ok(PointMultiset::from_displacements(window.len(), &records))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoleEstimate {
    pub r: usize,
    pub trials: u64,
    pub holes: u64,
    pub estimate: f64,
    pub stderr: f64,
    /// `exp(-b_r)` for Poisson processes.
    pub analytic: Option<f64>,
}

/// Frequency of `{Π ∩ B_r(root) = ∅}` over independent trials. Only the
/// vertices that can contribute to the ball are sampled.
pub fn hole_probability(
    spec: &ProcessSpec,
    window: &GraphWindow,
    r: usize,
    trials: u64,
    seed: u64,
) -> Result<HoleEstimate> {
    let probe = window.root();
    let explicit = matches!(window.family(), GraphFamily::ExplicitFinite { .. });
    if !explicit && r > window.core_margin() {
        return Err(Error::Censored(format!(
            "hole radius {r} exceeds core margin {}",
            window.core_margin()
        )));
    }
    let reach = r + spec.d_max();
    if !window.ball_complete(probe, reach) {
        return Err(Error::Censored(format!(
            "radius-{reach} ball around the probe leaves the window"
        )));
    }
    let ball = window.ball(probe, r).vertices;
    let sources = window.ball(probe, reach).vertices;
    let mut in_ball = vec![false; window.len()];
    for &v in &ball {
        in_ball[v] = true;
    }
    let mut holes = 0u64;
    for t in 0..trials {
        let ts = rng::trial_seed(seed, t);
        let empty = match spec {
            ProcessSpec::Poisson => ball.iter().all(|&v| poisson_count(ts, Side::Pi, v) == 0),
            ProcessSpec::Perturbed { law } => !sources
                .iter()
                .any(|&o| landing(window, law, ts, Side::Pi, o).is_some_and(|l| in_ball[l])),
        };
        holes += u64::from(empty);
    }
    let estimate = holes as f64 / trials.max(1) as f64;
    let analytic = match spec {
        ProcessSpec::Poisson => window
            .family()
            .ball_size(r)
            .or_else(|| Some(ball.len() as u64))
            .map(|b| (-(b as f64)).exp()),
        ProcessSpec::Perturbed { .. } => None,
    };
    Ok(HoleEstimate {
        r,
        trials,
        holes,
        estimate,
        stderr: (estimate * (1.0 - estimate) / trials.max(1) as f64).sqrt(),
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(depth: usize, m: usize) -> GraphWindow {
        GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), depth, m).unwrap()
    }

    #[test]
    fn degenerate_perturbation_is_the_vertex_set() {
        let w = tree(5, 2);
        let pm = sample(&ProcessSpec::degenerate(), &w, 11, Side::Pi).unwrap();
        assert!(pm.counts().iter().all(|&c| c == 1));
        assert_eq!(pm.discarded(), 0);
        assert_eq!(pm.origin((7, 1)), Some(7));
    }

    #[test]
    fn count_in_examples() {
        let pm = PointMultiset::from_counts(vec![1; 10]);
        assert_eq!(count_in(&pm, &[]), 0);
        assert_eq!(count_in(&pm, &[0, 1, 2, 3, 4, 5, 6]), 7);
    }

    #[test]
    fn perturbation_wider_than_margin_is_rejected() {
        let w = tree(5, 1);
        let spec = ProcessSpec::Perturbed {
            law: DistanceLaw::new(vec![0.5, 0.25, 0.25]).unwrap(),
        };
        assert!(matches!(
            sample(&spec, &w, 1, Side::Pi),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn perturbed_landings_respect_the_law_support() {
        let w = tree(6, 2);
        let spec = ProcessSpec::Perturbed {
            law: DistanceLaw::new(vec![0.0, 0.0, 1.0]).unwrap(),
        };
        let pm = sample(&spec, &w, 5, Side::PiPrime).unwrap();
        assert_eq!(pm.total() + pm.discarded(), w.len());
        for p in pm.points() {
            assert_eq!(w.distance(pm.origin(p).unwrap(), p.0), Some(2));
        }
    }

    #[test]
    fn ladder_landings_are_on_the_sphere() {
        let w = GraphWindow::build(GraphFamily::LadderDiagonal, 8, 3).unwrap();
        for r in 1..=3 {
            let mut pmf = vec![0.0; r + 1];
            pmf[r] = 1.0;
            let spec = ProcessSpec::Perturbed {
                law: DistanceLaw::new(pmf).unwrap(),
            };
            let pm = sample(&spec, &w, 3, Side::Pi).unwrap();
            for p in pm.points() {
                assert_eq!(w.distance(pm.origin(p).unwrap(), p.0), Some(r));
            }
        }
    }

    #[test]
    fn sampling_is_window_size_independent() {
        let small = tree(4, 0);
        let big = tree(7, 0);
        let a = sample(&ProcessSpec::Poisson, &small, 9, Side::Pi).unwrap();
        let b = sample(&ProcessSpec::Poisson, &big, 9, Side::Pi).unwrap();
        assert_eq!(a.counts(), &b.counts()[..small.len()]);
        assert_ne!(
            a,
            sample(&ProcessSpec::Poisson, &small, 9, Side::PiPrime).unwrap()
        );
    }

    #[test]
    fn dump_round_trips() {
        let w = tree(4, 2);
        let spec = ProcessSpec::Perturbed {
            law: DistanceLaw::geometric(0.5, 2).unwrap(),
        };
        let pm = sample(&spec, &w, 4, Side::Pi).unwrap();
        assert_eq!(PointMultiset::load(&pm.dump(), "dump").unwrap(), pm);
        let pm = sample(&ProcessSpec::Poisson, &w, 4, Side::Pi).unwrap();
        assert_eq!(PointMultiset::load(&pm.dump(), "dump").unwrap(), pm);
    }

    #[test]
    fn point_ids_round_trip() {
        let pm = PointMultiset::from_counts(vec![0, 2, 0, 3, 1]);
        for (id, p) in pm.points().enumerate() {
            assert_eq!(pm.point_id(p), id);
            assert_eq!(pm.point(id), p);
        }
    }

    #[test]
    fn geometric_law_reports_truncation() {
        let law = DistanceLaw::geometric(0.5, 3).unwrap();
        assert!((law.truncated_mass() - 0.0625).abs() < 1e-12);
        assert!((law.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_has_no_holes() {
        let w = tree(5, 3);
        let h = hole_probability(&ProcessSpec::degenerate(), &w, 2, 100, 1).unwrap();
        assert_eq!(h.holes, 0);
        assert!(matches!(
            hole_probability(&ProcessSpec::Poisson, &w, 4, 10, 1),
            Err(Error::Censored(_))
        ));
    }
}
