//! Staged chain-flipping matching on a [`MatchGraph`].
//!
//! A chain is an alternating path between an unmatched left point and an
//! unmatched right point. Stage `n` repeatedly flips, all at once, the chains
//! of length below `4n` that are smaller than every chain they meet, until
//! none of that length is left.

mod oracle;

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use oracle::{exhaustive_max_matching, hopcroft_karp};

use crate::bipartite::{MatchGraph, PointRef};
use crate::error::{Error, Result};
use crate::graphs::{GraphWindow, Vertex};
use crate::processes::Side;

const FREE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    mate_left: Vec<u32>,
    mate_right: Vec<u32>,
    flips: HashMap<(u32, u32), u32>,
}

impl Matching {
    pub fn empty(g: &MatchGraph) -> Self {
        Matching {
            mate_left: vec![FREE; g.left_len()],
            mate_right: vec![FREE; g.right_len()],
            flips: HashMap::new(),
        }
    }

    /// A matching from explicit pairs; fails unless every pair is an edge and
    /// no point is used twice.
    pub fn from_pairs(g: &MatchGraph, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut m = Self::empty(g);
        for &(i, j) in pairs {
            if !g.has_edge(i, j) {
                return Err(Error::Contract(format!("pair ({i}, {j}) is not an edge")));
            }
            if m.mate_left[i] != FREE || m.mate_right[j] != FREE {
                return Err(Error::Contract(format!("pair ({i}, {j}) reuses a point")));
            }
            m.mate_left[i] = j as u32;
            m.mate_right[j] = i as u32;
        }
        Ok(m)
    }

    pub fn mate_of_left(&self, i: usize) -> Option<usize> {
        let j = self.mate_left[i];
        (j != FREE).then_some(j as usize)
    }

    pub fn mate_of_right(&self, j: usize) -> Option<usize> {
        let i = self.mate_right[j];
        (i != FREE).then_some(i as usize)
    }

    pub fn mate(&self, side: Side, i: usize) -> Option<usize> {
        match side {
            Side::Pi => self.mate_of_left(i),
            Side::PiPrime => self.mate_of_right(i),
        }
    }

    pub fn size(&self) -> usize {
        self.mate_left.iter().filter(|&&j| j != FREE).count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mate_left
            .iter()
            .enumerate()
            .filter(|(_, &j)| j != FREE)
            .map(|(i, &j)| (i, j as usize))
    }

    pub fn unmatched_left(&self) -> impl Iterator<Item = usize> + '_ {
        self.mate_left
            .iter()
            .enumerate()
            .filter(|(_, &j)| j == FREE)
            .map(|(i, _)| i)
    }

    pub fn unmatched_right(&self) -> impl Iterator<Item = usize> + '_ {
        self.mate_right
            .iter()
            .enumerate()
            .filter(|(_, &i)| i == FREE)
            .map(|(j, _)| j)
    }

    /// How often each edge changed state.
    pub fn flip_counts(&self) -> &HashMap<(u32, u32), u32> {
        &self.flips
    }

    pub fn max_flip_count(&self) -> u32 {
        self.flips.values().copied().max().unwrap_or(0)
    }

    /// Checks injectivity both ways and that pairs are edges.
    pub fn validate(&self, g: &MatchGraph) -> Result<()> {
        for (i, &j) in self.mate_left.iter().enumerate() {
            if j != FREE && (self.mate_right[j as usize] != i as u32 || !g.has_edge(i, j as usize))
            {
                return Err(Error::Invariant(format!(
                    "left point {i} has inconsistent mate {j}"
                )));
            }
        }
        for (j, &i) in self.mate_right.iter().enumerate() {
            if i != FREE && self.mate_left[i as usize] != j as u32 {
                return Err(Error::Invariant(format!(
                    "right point {j} has inconsistent mate {i}"
                )));
            }
        }
        Ok(())
    }

    fn bump(&mut self, i: usize, j: usize) {
        *self.flips.entry((i as u32, j as u32)).or_insert(0) += 1;
    }
}

/// Alternating path `x_1, y_1, ..., x_k, y_k` of graph indices, left first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    pub left: Vec<u32>,
    pub right: Vec<u32>,
}

impl Chain {
    /// Number of edges, `2k - 1`.
    pub fn len(&self) -> usize {
        2 * self.left.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Points in path order starting from the left endpoint.
    pub fn points(&self, g: &MatchGraph) -> Vec<PointRef> {
        self.left
            .iter()
            .zip(&self.right)
            .flat_map(|(&x, &y)| {
                [
                    PointRef::new(Side::Pi, g.left_point(x as usize)),
                    PointRef::new(Side::PiPrime, g.right_point(y as usize)),
                ]
            })
            .collect()
    }
}

/// Key of one point: order rank of its vertex, then index, then side.
pub type PointKey = (usize, u32, Side);

/// Chains compare by length, then lexicographically by point keys along the
/// canonical orientation (the reading that starts at the smaller endpoint).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainKey {
    pub length: usize,
    pub points: Vec<PointKey>,
}

pub fn point_key(p: PointRef, ranks: &[usize]) -> PointKey {
    (ranks[p.vertex], p.index, p.side)
}

pub fn chain_key(g: &MatchGraph, c: &Chain, ranks: &[usize]) -> ChainKey {
    let mut points: Vec<PointKey> = c
        .points(g)
        .into_iter()
        .map(|p| point_key(p, ranks))
        .collect();
    if points.last() < points.first() {
        points.reverse();
    }
    ChainKey {
        length: c.len(),
        points,
    }
}

/// Minimal number of right points on an alternating path from each left
/// point to an unmatched right point, ignoring simplicity.
fn steps_to_free(g: &MatchGraph, m: &Matching) -> Vec<u32> {
    let mut steps = vec![u32::MAX; g.left_len()];
    let mut queue = VecDeque::new();
    for j in m.unmatched_right() {
        for i in g.right_neighbors(j) {
            if steps[i] == u32::MAX {
                steps[i] = 1;
                queue.push_back(i);
            }
        }
    }
    while let Some(x) = queue.pop_front() {
        let Some(y) = m.mate_of_left(x) else { continue };
        for i in g.right_neighbors(y) {
            if steps[i] == u32::MAX {
                steps[i] = steps[x] + 1;
                queue.push_back(i);
            }
        }
    }
    steps
}

/// Whether some chain of any length exists.
fn augmentable(g: &MatchGraph, m: &Matching) -> bool {
    let steps = steps_to_free(g, m);
    m.unmatched_left().any(|x| steps[x] != u32::MAX)
}

/// All chains with fewer than `max_len` edges. Each chain is reported once,
/// from its left endpoint, in a deterministic order.
pub fn find_chains(
    g: &MatchGraph,
    m: &Matching,
    max_len: usize,
    cap: usize,
    stage: usize,
) -> Result<Vec<Chain>> {
    let steps = steps_to_free(g, m);
    enumerate_chains(g, m, &steps, 1, max_len / 2, cap, stage)
}

/// Chains with exactly `pairs` left points, i.e. of length `2 pairs - 1`.
pub fn find_chains_of_length(
    g: &MatchGraph,
    m: &Matching,
    pairs: usize,
    cap: usize,
    stage: usize,
) -> Result<Vec<Chain>> {
    let steps = steps_to_free(g, m);
    enumerate_chains(g, m, &steps, pairs, pairs, cap, stage)
}

fn enumerate_chains(
    g: &MatchGraph,
    m: &Matching,
    steps: &[u32],
    min_pairs: usize,
    max_pairs: usize,
    cap: usize,
    stage: usize,
) -> Result<Vec<Chain>> {
    if max_pairs == 0 || min_pairs > max_pairs {
        return Ok(Vec::new());
    }
    let starts: Vec<usize> = m
        .unmatched_left()
        .filter(|&x| (steps[x] as usize) <= max_pairs)
        .collect();
    let per_start: Vec<Result<Vec<Chain>>> = starts
        .par_iter()
        .map(|&x| {
            let mut walk = Walk {
                g,
                m,
                steps,
                min_pairs,
                max_pairs,
                cap,
                left: vec![x as u32],
                right: Vec::new(),
                used: vec![false; g.right_len()],
                out: Vec::new(),
            };
            if walk.extend() {
                Ok(walk.out)
            } else {
                Err(cap_error(stage, cap))
            }
        })
        .collect();
    let mut chains = Vec::new();
    for part in per_start {
        chains.extend(part?);
        if chains.len() > cap {
            return Err(cap_error(stage, cap));
        }
    }
    Ok(chains)
}

fn cap_error(stage: usize, cap: usize) -> Error {
    Error::resource(
        format!("matching stage {stage}"),
        format!("more than {cap} chains in one sweep"),
    )
}

struct Walk<'a> {
    g: &'a MatchGraph,
    m: &'a Matching,
    steps: &'a [u32],
    min_pairs: usize,
    max_pairs: usize,
    cap: usize,
    left: Vec<u32>,
    right: Vec<u32>,
    used: Vec<bool>,
    out: Vec<Chain>,
}

impl Walk<'_> {
    /// Depth-first extension from the last left point; false once the cap is hit.
    fn extend(&mut self) -> bool {
        let x = *self.left.last().expect("path starts at a left point") as usize;
        let budget = self.max_pairs - self.right.len();
        let (g, m) = (self.g, self.m);
        for y in g.left_neighbors(x) {
            if self.used[y] || m.mate_of_left(x) == Some(y) {
                continue;
            }
            match m.mate_of_right(y) {
                None => {
                    if self.right.len() + 1 < self.min_pairs {
                        continue;
                    }
                    self.right.push(y as u32);
                    self.out.push(Chain {
                        left: self.left.clone(),
                        right: self.right.clone(),
                    });
                    self.right.pop();
                    if self.out.len() > self.cap {
                        return false;
                    }
                }
                Some(next) => {
                    if budget < 2 || self.steps[next] as usize > budget - 1 {
                        continue;
                    }
                    self.used[y] = true;
                    self.right.push(y as u32);
                    self.left.push(next as u32);
                    let ok = self.extend();
                    self.left.pop();
                    self.right.pop();
                    self.used[y] = false;
                    if !ok {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Chains that are smaller than every other chain sharing a point with them,
/// in increasing key order.
pub fn select_minimal(g: &MatchGraph, chains: &[Chain], ranks: &[usize]) -> Result<Vec<usize>> {
    let mut keyed: Vec<(ChainKey, usize)> = chains
        .iter()
        .enumerate()
        .map(|(k, c)| (chain_key(g, c, ranks), k))
        .collect();
    keyed.sort_unstable();
    for w in keyed.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Invariant(format!(
                "chains {} and {} share a key",
                w[0].1, w[1].1
            )));
        }
    }
    const NONE: usize = usize::MAX;
    let mut best_left = vec![NONE; g.left_len()];
    let mut best_right = vec![NONE; g.right_len()];
    for (pos, (_, k)) in keyed.iter().enumerate() {
        let c = &chains[*k];
        for &x in &c.left {
            if best_left[x as usize] == NONE {
                best_left[x as usize] = pos;
            }
        }
        for &y in &c.right {
            if best_right[y as usize] == NONE {
                best_right[y as usize] = pos;
            }
        }
    }
    Ok(keyed
        .iter()
        .enumerate()
        .filter(|(pos, (_, k))| {
            let c = &chains[*k];
            c.left.iter().all(|&x| best_left[x as usize] == *pos)
                && c.right.iter().all(|&y| best_right[y as usize] == *pos)
        })
        .map(|(_, (_, k))| *k)
        .collect())
}

/// Swaps matched and unmatched edges along `c`.
pub fn flip(g: &MatchGraph, m: &mut Matching, c: &Chain) -> Result<()> {
    let k = c.left.len();
    if k == 0 || c.right.len() != k {
        return Err(Error::Contract("malformed chain".into()));
    }
    let stale = |why: &str| Error::Contract(format!("stale chain: {why}"));
    if m.mate_left[c.left[0] as usize] != FREE {
        return Err(stale("left endpoint is matched"));
    }
    if m.mate_right[c.right[k - 1] as usize] != FREE {
        return Err(stale("right endpoint is matched"));
    }
    for t in 0..k {
        if !g.has_edge(c.left[t] as usize, c.right[t] as usize) {
            return Err(stale("missing edge"));
        }
        if t + 1 < k && m.mate_right[c.right[t] as usize] != c.left[t + 1] {
            return Err(stale("interior edge is not matched"));
        }
    }
    for t in 0..k - 1 {
        m.bump(c.left[t + 1] as usize, c.right[t] as usize);
    }
    for t in 0..k {
        let (x, y) = (c.left[t], c.right[t]);
        m.mate_left[x as usize] = y;
        m.mate_right[y as usize] = x;
        m.bump(x as usize, y as usize);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatcherParams {
    /// Last stage; `None` means `ceil(#points / 4) + 1`.
    pub max_stage: Option<usize>,
    pub chain_cap: usize,
    pub sweep_cap: usize,
}

impl Default for MatcherParams {
    fn default() -> Self {
        MatcherParams {
            max_stage: None,
            chain_cap: 1_000_000,
            sweep_cap: 10_000,
        }
    }
}

impl MatcherParams {
    pub fn stages_for(&self, g: &MatchGraph) -> usize {
        self.max_stage
            .unwrap_or_else(|| (g.left_len() + g.right_len()).div_ceil(4) + 1)
    }
}

/// Which points count towards the unmatched densities, and the normaliser.
#[derive(Debug, Clone)]
pub struct Census {
    left: Vec<bool>,
    right: Vec<bool>,
    left_denominator: f64,
    right_denominator: f64,
}

impl Census {
    /// Every point counts; densities are fractions of each side.
    pub fn all(g: &MatchGraph) -> Self {
        Census {
            left: vec![true; g.left_len()],
            right: vec![true; g.right_len()],
            left_denominator: g.left_len().max(1) as f64,
            right_denominator: g.right_len().max(1) as f64,
        }
    }

    /// Points at core vertices; densities are per core vertex.
    pub fn core(g: &MatchGraph, window: &GraphWindow) -> Self {
        let core = window.core_len().max(1) as f64;
        Census {
            left: (0..g.left_len())
                .map(|i| window.in_core(g.left_point(i).0))
                .collect(),
            right: (0..g.right_len())
                .map(|j| window.in_core(g.right_point(j).0))
                .collect(),
            left_denominator: core,
            right_denominator: core,
        }
    }

    fn measure(&self, m: &Matching) -> (usize, usize, f64, f64) {
        let ul = m.unmatched_left().filter(|&i| self.left[i]).count();
        let ur = m.unmatched_right().filter(|&j| self.right[j]).count();
        (
            ul,
            ur,
            ul as f64 / self.left_denominator,
            ur as f64 / self.right_denominator,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub sweeps: usize,
    pub flips: usize,
    pub unmatched_left: usize,
    pub unmatched_right: usize,
    pub p_n_left: f64,
    pub p_n_right: f64,
    pub largest_sweep_chains: usize,
    pub wall_time_ms: f64,
}

pub struct Engine<'a> {
    pub graph: &'a MatchGraph,
    /// Position of every vertex in the total order.
    pub ranks: &'a [usize],
    pub params: MatcherParams,
    pub census: Census,
}

impl<'a> Engine<'a> {
    pub fn new(
        graph: &'a MatchGraph,
        ranks: &'a [usize],
        params: MatcherParams,
        census: Census,
    ) -> Self {
        Engine {
            graph,
            ranks,
            params,
            census,
        }
    }

    /// The minimal chains among all chains shorter than `4n`, in key order.
    ///
    /// Keys compare length first, so a chain of one length is never beaten by
    /// a longer one: lengths are taken in increasing order, a chain is kept if
    /// no shorter chain touches it and it is the smallest of its length among
    /// those it meets. Once every free point lies on some shorter chain,
    /// longer chains can neither be selected nor block anything, so they are
    /// not enumerated.
    pub fn sweep(&self, m: &Matching, n: usize) -> Result<Sweep> {
        let g = self.graph;
        let steps = steps_to_free(g, m);
        let mut covered_left = vec![false; g.left_len()];
        let mut covered_right = vec![false; g.right_len()];
        let mut selected = Vec::new();
        let mut enumerated = 0;
        for pairs in 1..=(4 * n) / 2 {
            if enumerated > 0 {
                let open_left = m.unmatched_left().any(|i| !covered_left[i]);
                let open_right = m.unmatched_right().any(|j| !covered_right[j]);
                if !open_left || !open_right {
                    break;
                }
            }
            let layer = enumerate_chains(
                g,
                m,
                &steps,
                pairs,
                pairs,
                self.params.chain_cap - enumerated,
                n,
            )?;
            if layer.is_empty() {
                continue;
            }
            enumerated += layer.len();
            let minimal = select_minimal(g, &layer, self.ranks)?;
            for &k in &minimal {
                let c = &layer[k];
                let free = c.left.iter().all(|&x| !covered_left[x as usize])
                    && c.right.iter().all(|&y| !covered_right[y as usize]);
                if free {
                    selected.push(c.clone());
                }
            }
            for c in &layer {
                for &x in &c.left {
                    covered_left[x as usize] = true;
                }
                for &y in &c.right {
                    covered_right[y as usize] = true;
                }
            }
        }
        Ok(Sweep {
            selected,
            enumerated,
        })
    }

    /// Runs stage `n` to completion: afterwards no chain shorter than `4n` exists.
    pub fn run_stage(&self, m: &mut Matching, n: usize) -> Result<StageReport> {
        let started = Instant::now();
        let g = self.graph;
        let mut sweeps = 0;
        let mut flips = 0;
        let mut largest = 0;
        let mut matched_before = m.size();
        loop {
            let sweep = self.sweep(m, n)?;
            if sweep.enumerated == 0 {
                break;
            }
            if sweeps == self.params.sweep_cap {
                return Err(Error::StageDivergence {
                    stage: n,
                    sweeps,
                    chains: sweep.enumerated,
                });
            }
            largest = largest.max(sweep.enumerated);
            if sweep.selected.is_empty() {
                return Err(Error::Invariant(
                    "non-empty chain set without a minimal chain".into(),
                ));
            }
            for c in &sweep.selected {
                flip(g, m, c)?;
                flips += 1;
            }
            m.validate(g)?;
            let matched = m.size();
            if matched <= matched_before {
                return Err(Error::Invariant(
                    "a sweep did not grow the matched set".into(),
                ));
            }
            matched_before = matched;
            sweeps += 1;
        }
        let (ul, ur, pl, pr) = self.census.measure(m);
        Ok(StageReport {
            stage: n,
            sweeps,
            flips,
            unmatched_left: ul,
            unmatched_right: ur,
            p_n_left: pl,
            p_n_right: pr,
            largest_sweep_chains: largest,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Stages `1..=max_stage` from the empty matching, with the matching
    /// recorded after every stage.
    pub fn run(&self) -> Result<RunOutcome> {
        let mut m = Matching::empty(self.graph);
        let stages = self.params.stages_for(self.graph);
        let mut reports = Vec::with_capacity(stages);
        let mut snapshots = Vec::with_capacity(stages);
        for n in 1..=stages {
            let report = self.run_stage(&mut m, n)?;
            reports.push(report.clone());
            snapshots.push(m.mate_left.clone());
            if !augmentable(self.graph, &m) {
                // No augmenting path remains, so every later stage is empty.
                for k in n + 1..=stages {
                    reports.push(StageReport {
                        stage: k,
                        sweeps: 0,
                        flips: 0,
                        largest_sweep_chains: 0,
                        wall_time_ms: 0.0,
                        ..report.clone()
                    });
                    snapshots.push(m.mate_left.clone());
                }
                break;
            }
        }
        Ok(RunOutcome {
            matching: m,
            reports,
            snapshots,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub selected: Vec<Chain>,
    /// Chains enumerated to decide the selection.
    pub enumerated: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub matching: Matching,
    pub reports: Vec<StageReport>,
    /// Left mates after each stage.
    pub snapshots: Vec<Vec<u32>>,
}

impl RunOutcome {
    pub fn snapshot(&self, g: &MatchGraph, stage: usize) -> Matching {
        let mate_left = self.snapshots[stage - 1].clone();
        let mut mate_right = vec![FREE; g.right_len()];
        for (i, &j) in mate_left.iter().enumerate() {
            if j != FREE {
                mate_right[j as usize] = i as u32;
            }
        }
        Matching {
            mate_left,
            mate_right,
            flips: HashMap::new(),
        }
    }
}

/// Identity ranks: vertex `v` is the `v`-th smallest.
pub fn identity_ranks(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Orders chains only by key; exposed for callers that sort chain lists.
pub fn compare_chains(g: &MatchGraph, a: &Chain, b: &Chain, ranks: &[usize]) -> Ordering {
    chain_key(g, a, ranks).cmp(&chain_key(g, b, ranks))
}

/// Distance between matched partners.
pub fn pair_distance(window: &GraphWindow, g: &MatchGraph, i: usize, j: usize) -> Option<usize> {
    let a: Vertex = g.left_point(i).0;
    let b: Vertex = g.right_point(j).0;
    window.distance(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> MatchGraph {
        // L0 - R0 - L1 - R1
        MatchGraph::from_edges(2, 2, &[(0, 0), (1, 0), (1, 1)]).unwrap()
    }

    #[test]
    fn single_edge_is_one_chain() {
        let g = MatchGraph::from_edges(1, 1, &[(0, 0)]).unwrap();
        let m = Matching::empty(&g);
        let chains = find_chains(&g, &m, 4, 100, 1).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 1);
    }

    #[test]
    fn fully_matched_graph_has_no_chains() {
        let g = path4();
        let m = Matching::from_pairs(&g, &[(0, 0), (1, 1)]).unwrap();
        assert!(find_chains(&g, &m, 8, 100, 2).unwrap().is_empty());
    }

    #[test]
    fn path_instance_has_one_length_three_chain() {
        let g = path4();
        let m = Matching::from_pairs(&g, &[(1, 0)]).unwrap();
        let chains = find_chains(&g, &m, 4, 100, 1).unwrap();
        assert_eq!(
            chains,
            vec![Chain {
                left: vec![0, 1],
                right: vec![0, 1]
            }]
        );
        assert_eq!(chains[0].len(), 3);
        assert!(find_chains(&g, &m, 3, 100, 1).unwrap().is_empty());
    }

    #[test]
    fn stage_one_on_the_path_instance() {
        let g = path4();
        let ranks = identity_ranks(2);
        let engine = Engine::new(&g, &ranks, MatcherParams::default(), Census::all(&g));
        let mut m = Matching::from_pairs(&g, &[(1, 0)]).unwrap();
        let report = engine.run_stage(&mut m, 1).unwrap();
        assert_eq!(report.flips, 1);
        assert_eq!(m.size(), 2);
        let again = engine.run_stage(&mut m, 1).unwrap();
        assert_eq!(again.flips, 0);
    }

    #[test]
    fn chain_key_is_orientation_free_and_breaks_ties_by_index() {
        let g = MatchGraph::from_edges(1, 1, &[(0, 0)]).unwrap();
        let c = Chain {
            left: vec![0],
            right: vec![0],
        };
        let k = chain_key(&g, &c, &[0]);
        assert_eq!(k.points, vec![(0, 1, Side::Pi), (0, 1, Side::PiPrime)]);
        let a = PointRef {
            side: Side::Pi,
            vertex: 3,
            index: 1,
        };
        let b = PointRef { index: 2, ..a };
        let ranks = identity_ranks(4);
        assert!(point_key(a, &ranks) < point_key(b, &ranks));
    }

    #[test]
    fn selection_rule_examples() {
        // Chains a < b < c, a meets b, b meets c, a and c disjoint.
        let g = MatchGraph::from_edges(3, 3, &[(0, 0), (1, 0), (1, 2)]).unwrap();
        let ranks = identity_ranks(3);
        let a = Chain {
            left: vec![0],
            right: vec![0],
        };
        let b = Chain {
            left: vec![1],
            right: vec![0],
        };
        let c = Chain {
            left: vec![1],
            right: vec![2],
        };
        let chains = vec![c.clone(), b.clone(), a.clone()];
        assert_eq!(select_minimal(&g, &chains, &ranks).unwrap(), vec![2]);
        let disjoint = vec![a, c];
        assert_eq!(select_minimal(&g, &disjoint, &ranks).unwrap(), vec![0, 1]);
        assert!(matches!(
            select_minimal(&g, &[b.clone(), b], &ranks),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn flipping_a_length_nine_chain() {
        let k = 5;
        let mut edges = Vec::new();
        for t in 0..k {
            edges.push((t, t));
            if t + 1 < k {
                edges.push((t + 1, t));
            }
        }
        let g = MatchGraph::from_edges(k, k, &edges).unwrap();
        let mut m =
            Matching::from_pairs(&g, &(0..k - 1).map(|t| (t + 1, t)).collect::<Vec<_>>()).unwrap();
        let c = Chain {
            left: (0..k as u32).collect(),
            right: (0..k as u32).collect(),
        };
        assert_eq!(c.len(), 9);
        let before: Vec<_> = m.pairs().collect();
        flip(&g, &mut m, &c).unwrap();
        let after: Vec<_> = m.pairs().collect();
        assert_eq!(before.iter().filter(|p| !after.contains(p)).count(), 4);
        assert_eq!(after.iter().filter(|p| !before.contains(p)).count(), 5);
        assert!(matches!(flip(&g, &mut m, &c), Err(Error::Contract(_))));
    }

    #[test]
    fn empty_instance_runs() {
        let g = MatchGraph::from_edges(0, 3, &[]).unwrap();
        let ranks = identity_ranks(3);
        let out = Engine::new(&g, &ranks, MatcherParams::default(), Census::all(&g))
            .run()
            .unwrap();
        assert_eq!(out.matching.size(), 0);
    }

    #[test]
    fn oracles_agree_on_a_star() {
        let g = MatchGraph::from_edges(1, 3, &[(0, 0), (0, 1), (0, 2)]).unwrap();
        assert_eq!(hopcroft_karp(&g).0, 1);
        assert_eq!(exhaustive_max_matching(&g), 1);
    }
}
