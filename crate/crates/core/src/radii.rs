//! Bad set, radius fields and high-radius component scans.
//!
//! The radius of a vertex is decided from finite-window data only. Whenever a
//! decision would need points outside the window the vertex is censored
//! instead, so no value is ever a silent default.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connected::{self, Bits, Control, Enumeration};
use crate::error::{Error, Result};
use crate::graphs::{GraphWindow, Scratch, Vertex};
use crate::processes::{PointMultiset, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMode {
    /// Every `g`-connected window set through the centre, up to `s_max`.
    Exact,
    /// `g`-connected subsets of `supp(Π) ∪ {v}`: a subfamily of the exact one.
    Support,
}

impl RadiusMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RadiusMode::Exact => "exact",
            RadiusMode::Support => "support",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiusParams {
    pub r0: usize,
    pub bad_factor: f64,
    pub mode: RadiusMode,
    /// Largest enumerated set `U`.
    pub s_max: usize,
    /// Largest radius tried in the second clause.
    pub r_max: usize,
    /// Enumeration budget per constraint check, in visited sets.
    pub max_sets: u64,
}

impl Default for RadiusParams {
    fn default() -> Self {
        RadiusParams {
            r0: 4,
            bad_factor: 0.9,
            mode: RadiusMode::Support,
            s_max: 3,
            r_max: 8,
            max_sets: 1_000_000,
        }
    }
}

impl RadiusParams {
    pub fn validate(&self) -> Result<()> {
        if self.r0 < 2 || !self.r0.is_multiple_of(2) {
            return Err(Error::config(
                "radii.r0",
                format!("r0 must be even and at least 2, got {}", self.r0),
            ));
        }
        if self.r_max < self.r0 {
            return Err(Error::config("radii.r_max", "r_max must be at least r0"));
        }
        if !(self.bad_factor > 0.0 && self.bad_factor <= 1.0) {
            return Err(Error::config("radii.bad_factor", "must lie in (0, 1]"));
        }
        if self.max_sets == 0 {
            return Err(Error::config("radii.max_sets", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BadFlag {
    Good,
    Bad,
    Censored,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadSet {
    pub flags: Vec<BadFlag>,
    pub radius: usize,
    pub threshold: f64,
}

impl BadSet {
    pub fn is_empty(&self) -> bool {
        !self.flags.contains(&BadFlag::Bad)
    }

    pub fn members(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == BadFlag::Bad)
            .map(|(v, _)| v)
    }
}

/// `v` is bad iff `|target ∩ B_{r0/2}(v)| <= factor · b_{r0/2}`. The in-window
/// count is a lower bound, so an incomplete ball can still certify "good".
pub fn bad_set(window: &GraphWindow, target: &PointMultiset, r0: usize, factor: f64) -> BadSet {
    let radius = r0 / 2;
    let flags = window
        .vertices()
        .into_par_iter()
        .map_init(
            || window.scratch(),
            |scratch, v| {
                let ball = window.ball_with(scratch, v, radius);
                let b = window
                    .family()
                    .ball_size(radius)
                    .unwrap_or(ball.vertices.len() as u64) as f64;
                let count: u64 = ball.vertices.iter().map(|&u| target.count(u) as u64).sum();
                if count as f64 > factor * b {
                    BadFlag::Good
                } else if ball.complete {
                    BadFlag::Bad
                } else {
                    BadFlag::Censored
                }
            },
        )
        .collect();
    BadSet {
        flags,
        radius,
        threshold: factor,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectedSetQuery {
    pub center: Vertex,
    pub gap: usize,
    pub s_max: usize,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RConnectedSets {
    pub sets: Vec<Vec<Vertex>>,
    pub truncated: bool,
}

/// Collects the enumerated family; meant for inspection on small windows.
pub fn enumerate_rconnected(
    window: &GraphWindow,
    pi: &PointMultiset,
    query: &ConnectedSetQuery,
    mode: RadiusMode,
) -> RConnectedSets {
    let mut sets = Vec::new();
    let mut proximity = Proximity::new(window, query.gap);
    let allowed = |u: Vertex| mode == RadiusMode::Exact || u == query.center || pi.count(u) > 0;
    let e = connected::for_each_connected_set(
        window.len(),
        query.center,
        query.s_max,
        |w, out| out.copy_from(proximity.get(w)),
        allowed,
        false,
        query.budget,
        |s| {
            let mut s = s.to_vec();
            s.sort_unstable();
            sets.push(s);
            Control::Continue
        },
    );
    sets.sort();
    RConnectedSets {
        sets,
        truncated: query.s_max == 0 || e.budget_exhausted,
    }
}

/// Lazily cached balls of one radius: with `punctured` the centre is left out,
/// which gives the `g`-proximity lists.
struct Proximity<'a> {
    window: &'a GraphWindow,
    gap: usize,
    punctured: bool,
    scratch: Scratch,
    cache: Vec<Option<Bits>>,
    buf: Vec<(Vertex, usize)>,
}

impl<'a> Proximity<'a> {
    fn new(window: &'a GraphWindow, gap: usize) -> Self {
        Self::with(window, gap, true)
    }

    fn with(window: &'a GraphWindow, gap: usize, punctured: bool) -> Self {
        Proximity {
            window,
            gap,
            punctured,
            scratch: window.scratch(),
            cache: vec![None; window.len()],
            buf: Vec::new(),
        }
    }

    fn get(&mut self, w: Vertex) -> &Bits {
        let Proximity {
            window,
            gap,
            punctured,
            scratch,
            cache,
            buf,
        } = self;
        cache[w].get_or_insert_with(|| {
            buf.clear();
            window.bfs_within(scratch, &[w], *gap, buf);
            let mut bits = Bits::new(window.len());
            for &(u, _) in buf.iter().skip(usize::from(*punctured)) {
                bits.insert(u);
            }
            bits
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Constraint {
    Holds,
    /// A set with complete `U^{+r}` breaks the inequality.
    Violated(Vec<Vertex>),
    /// A set whose `U^{+r}` leaves the window cannot be shown to satisfy it.
    Censored(Vec<Vertex>),
    /// The enumeration budget ran out, or `s_max = 0`.
    Truncated,
}

/// Checks `|target ∩ U^{+r}| >= r |source ∩ U|` over the enumerated `4r`-connected
/// sets through `v`.
pub fn constraint_holds(
    window: &GraphWindow,
    source: &PointMultiset,
    target: &PointMultiset,
    v: Vertex,
    r: usize,
    params: &RadiusParams,
) -> Constraint {
    Checker::new(window, source, target, params).check(v, r)
}

enum Found {
    Violation(Vec<Vertex>),
    Undecided(Vec<Vertex>),
}

struct Checker<'a> {
    window: &'a GraphWindow,
    source: &'a PointMultiset,
    target: &'a PointMultiset,
    params: &'a RadiusParams,
    /// `top[k]`: largest possible source mass of `k` further vertices.
    top: Vec<u64>,
    proximity: HashMap<usize, Proximity<'a>>,
    balls: HashMap<usize, Proximity<'a>>,
    /// `covered[k]`: union of the balls of the first `k + 1` set members.
    covered: Vec<Bits>,
}

/// Running totals of the first `k + 1` set members.
#[derive(Clone, Copy)]
struct Frame {
    lb: u64,
    src: u64,
    incomplete: usize,
}

impl<'a> Checker<'a> {
    fn new(
        window: &'a GraphWindow,
        source: &'a PointMultiset,
        target: &'a PointMultiset,
        params: &'a RadiusParams,
    ) -> Self {
        let mut counts: Vec<u64> = source.counts().iter().map(|&c| c as u64).collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let mut top = vec![0u64];
        for k in 0..params.s_max {
            top.push(top[k] + counts.get(k).copied().unwrap_or(0));
        }
        Checker {
            window,
            source,
            target,
            params,
            top,
            proximity: HashMap::new(),
            balls: HashMap::new(),
            covered: Vec::new(),
        }
    }

    fn check(&mut self, v: Vertex, r: usize) -> Constraint {
        if self.params.s_max == 0 {
            return Constraint::Truncated;
        }
        // Pass A: sets with complete neighbourhoods only, looking for a
        // certified violation.
        let (found, e_a) = self.search(v, r, true);
        if let Some(Found::Violation(w)) = found {
            return Constraint::Violated(w);
        }
        // Pass B: the whole family, stopping at the first set that cannot be
        // decided from the window.
        let (found, e_b) = self.search(v, r, false);
        match found {
            Some(Found::Violation(w)) => Constraint::Violated(w),
            Some(Found::Undecided(w)) => Constraint::Censored(w),
            None if e_a.budget_exhausted || e_b.budget_exhausted => Constraint::Truncated,
            None => Constraint::Holds,
        }
    }

    fn search(&mut self, v: Vertex, r: usize, complete_only: bool) -> (Option<Found>, Enumeration) {
        let window = self.window;
        let source = self.source;
        let target = self.target;
        let s_max = self.params.s_max;
        let mode = self.params.mode;
        let top = &self.top;
        let covered = &mut self.covered;
        let proximity = self
            .proximity
            .entry(4 * r)
            .or_insert_with(|| Proximity::new(window, 4 * r));
        let balls = self
            .balls
            .entry(r)
            .or_insert_with(|| Proximity::with(window, r, false));
        let r64 = r as u64;

        let allowed = |u: Vertex| {
            (mode == RadiusMode::Exact || u == v || source.count(u) > 0)
                && (!complete_only || window.ball_complete(u, r))
        };
        if !allowed(v) {
            return (None, Enumeration::default());
        }
        let mut frames: Vec<Frame> = Vec::new();
        let mut found = None;

        let e = connected::for_each_connected_set(
            window.len(),
            v,
            s_max,
            |w, out| out.copy_from(proximity.get(w)),
            allowed,
            false,
            self.params.max_sets,
            |set| {
                let depth = set.len() - 1;
                frames.truncate(depth);
                while covered.len() <= depth {
                    covered.push(Bits::new(window.len()));
                }
                let w = set[depth];
                let ball = balls.get(w);
                let prev = frames.last().copied().unwrap_or(Frame {
                    lb: 0,
                    src: 0,
                    incomplete: 0,
                });
                let (before, here) = covered.split_at_mut(depth);
                let gained: u64 = match before.last() {
                    Some(union) => ball.iter_minus(union).map(|u| target.count(u) as u64).sum(),
                    None => ball.iter().map(|u| target.count(u) as u64).sum(),
                };
                match before.last() {
                    Some(union) => {
                        here[0].copy_from(union);
                        here[0].union_with(ball);
                    }
                    None => here[0].copy_from(ball),
                }
                let f = Frame {
                    lb: prev.lb + gained,
                    src: prev.src + source.count(w) as u64,
                    incomplete: prev.incomplete + usize::from(!window.ball_complete(w, r)),
                };
                frames.push(f);

                if f.lb < r64 * f.src {
                    let mut witness = set.to_vec();
                    witness.sort_unstable();
                    found = Some(if f.incomplete == 0 {
                        Found::Violation(witness)
                    } else {
                        Found::Undecided(witness)
                    });
                    return Control::Stop;
                }
                if f.lb >= r64 * (f.src + top[s_max - set.len()]) {
                    Control::Prune
                } else {
                    Control::Continue
                }
            },
        );
        (found, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    /// `R_v = r0`: no bad vertex nearby and few points at `v`.
    First,
    /// Minimal `r > r0` at which the set constraint holds.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CensorReason {
    /// The bad-set clause needs data outside the window.
    BadSet,
    /// Some enumerated set reaches beyond the window.
    Window,
    /// The enumeration budget ran out (or `s_max = 0`).
    Truncated,
    /// No radius up to `r_max` satisfied the constraint.
    RadiusCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexRadius {
    Resolved {
        r: usize,
        clause: Clause,
    },
    /// `upper`, when present, is a radius at which the constraint was seen to
    /// hold after an undecided smaller radius: the true minimum is at most it.
    Censored {
        reason: CensorReason,
        upper: Option<usize>,
    },
}

impl VertexRadius {
    pub fn value(&self) -> Option<usize> {
        match *self {
            VertexRadius::Resolved { r, .. } => Some(r),
            VertexRadius::Censored { .. } => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, VertexRadius::Censored { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusField {
    pub side: Side,
    pub params: RadiusParams,
    pub values: Vec<VertexRadius>,
    pub bad: BadSet,
}

impl RadiusField {
    pub fn get(&self, v: Vertex) -> VertexRadius {
        self.values[v]
    }

    pub fn radius(&self, v: Vertex) -> Option<usize> {
        self.values[v].value()
    }

    pub fn censored_count(&self) -> usize {
        self.values.iter().filter(|x| x.is_censored()).count()
    }

    /// Lines `vertex_id R_v mode flags`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mode = self.params.mode.as_str();
        for (v, value) in self.values.iter().enumerate() {
            let bad = match self.bad.flags[v] {
                BadFlag::Good => "",
                BadFlag::Bad => ",bad",
                BadFlag::Censored => ",bad_censored",
            };
            let _ = match *value {
                VertexRadius::Resolved { r, clause } => {
                    let c = match clause {
                        Clause::First => "clause1",
                        Clause::Second => "clause2",
                    };
                    writeln!(out, "{v} {r} {mode} {c}{bad}")
                }
                VertexRadius::Censored { reason, upper } => {
                    let reason = match reason {
                        CensorReason::BadSet => "censored_bad_set",
                        CensorReason::Window => "censored_window",
                        CensorReason::Truncated => "censored_truncated",
                        CensorReason::RadiusCap => "censored_radius_cap",
                    };
                    match upper {
                        Some(u) => writeln!(out, "{v} - {mode} {reason},upper={u}{bad}"),
                        None => writeln!(out, "{v} - {mode} {reason}{bad}"),
                    }
                }
            };
        }
        out
    }
}

/// Radius field on the `side` whose own points are `source`; the other
/// process is `target`. `R` is `(Π, Π′)`, `R′` is `(Π′, Π)`.
pub fn compute_radius_field(
    window: &GraphWindow,
    source: &PointMultiset,
    target: &PointMultiset,
    side: Side,
    params: &RadiusParams,
) -> Result<RadiusField> {
    params.validate()?;
    let bad = bad_set(window, target, params.r0, params.bad_factor);
    let half = params.r0 / 2;
    let values = window
        .vertices()
        .into_par_iter()
        .map_init(
            || {
                (
                    Checker::new(window, source, target, params),
                    window.scratch(),
                )
            },
            |(checker, scratch), v| {
                if source.count(v) as usize <= params.r0 {
                    let ball = window.ball_with(scratch, v, half);
                    let any_bad = ball.vertices.iter().any(|&u| bad.flags[u] == BadFlag::Bad);
                    if !any_bad {
                        let unknown = !ball.complete
                            || ball
                                .vertices
                                .iter()
                                .any(|&u| bad.flags[u] == BadFlag::Censored);
                        if unknown {
                            return VertexRadius::Censored {
                                reason: CensorReason::BadSet,
                                upper: None,
                            };
                        }
                        return VertexRadius::Resolved {
                            r: params.r0,
                            clause: Clause::First,
                        };
                    }
                }
                second_clause(checker, v, params)
            },
        )
        .collect();
    Ok(RadiusField {
        side,
        params: params.clone(),
        values,
        bad,
    })
}

fn second_clause(checker: &mut Checker, v: Vertex, params: &RadiusParams) -> VertexRadius {
    let mut uncertain: Option<CensorReason> = None;
    for r in params.r0 + 1..=params.r_max {
        match checker.check(v, r) {
            Constraint::Violated(_) => {}
            Constraint::Holds => {
                return match uncertain {
                    None => VertexRadius::Resolved {
                        r,
                        clause: Clause::Second,
                    },
                    Some(reason) => VertexRadius::Censored {
                        reason,
                        upper: Some(r),
                    },
                }
            }
            Constraint::Censored(_) => {
                uncertain.get_or_insert(CensorReason::Window);
            }
            Constraint::Truncated => {
                uncertain.get_or_insert(CensorReason::Truncated);
            }
        }
    }
    VertexRadius::Censored {
        reason: uncertain.unwrap_or(CensorReason::RadiusCap),
        upper: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub vertices: Vec<Vertex>,
    pub censored: usize,
    pub diameter: usize,
}

/// `4r`-connected components of `{v in core : R_v > r}`, censored core
/// vertices counted as above `r` and tallied per component.
pub fn components_above(window: &GraphWindow, field: &RadiusField, r: usize) -> Vec<Component> {
    let members: Vec<Vertex> = window
        .core()
        .into_iter()
        .filter(|&v| field.radius(v).is_none_or(|x| x > r))
        .collect();
    let mut index = vec![usize::MAX; window.len()];
    for (i, &v) in members.iter().enumerate() {
        index[v] = i;
    }
    let mut parent: Vec<usize> = (0..members.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut scratch = window.scratch();
    let mut buf = Vec::new();
    for (i, &v) in members.iter().enumerate() {
        buf.clear();
        window.bfs_within(&mut scratch, &[v], 4 * r, &mut buf);
        for &(u, _) in &buf {
            let j = index[u];
            if j != usize::MAX && j != i {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<Vertex>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (i, &v) in members.iter().enumerate() {
        let root = find(&mut parent, i);
        let k = *slot.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[k].push(v);
    }
    groups
        .into_iter()
        .map(|vertices| {
            let mut diameter = 0;
            for (i, &a) in vertices.iter().enumerate() {
                for &b in &vertices[i + 1..] {
                    diameter = diameter.max(window.distance(a, b).unwrap_or(0));
                }
            }
            let censored = vertices
                .iter()
                .filter(|&&v| field.get(v).is_censored())
                .count();
            Component {
                vertices,
                censored,
                diameter,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::GraphFamily;
    use crate::processes::{sample, ProcessSpec};

    fn tree(depth: usize, m: usize) -> GraphWindow {
        GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), depth, m).unwrap()
    }

    fn path3() -> GraphWindow {
        let g = GraphFamily::explicit(vec![vec![1], vec![0, 2], vec![1]]).unwrap();
        GraphWindow::build(g, 0, 0).unwrap()
    }

    #[test]
    fn exact_singleton_family() {
        let w = tree(3, 0);
        let pi = PointMultiset::from_counts(vec![1; w.len()]);
        let q = ConnectedSetQuery {
            center: 0,
            gap: 4,
            s_max: 1,
            budget: u64::MAX,
        };
        let got = enumerate_rconnected(&w, &pi, &q, RadiusMode::Exact);
        assert_eq!(got.sets, vec![vec![0]]);
        assert!(!got.truncated);
    }

    #[test]
    fn exact_family_on_a_path() {
        let w = path3();
        let pi = PointMultiset::empty(3);
        let q = ConnectedSetQuery {
            center: 1,
            gap: 1,
            s_max: 3,
            budget: u64::MAX,
        };
        let got = enumerate_rconnected(&w, &pi, &q, RadiusMode::Exact);
        assert_eq!(
            got.sets,
            vec![vec![0, 1], vec![0, 1, 2], vec![1], vec![1, 2]]
        );
    }

    #[test]
    fn support_family_with_empty_process() {
        let w = tree(3, 0);
        let pi = PointMultiset::empty(w.len());
        let q = ConnectedSetQuery {
            center: 4,
            gap: 8,
            s_max: 5,
            budget: u64::MAX,
        };
        assert_eq!(
            enumerate_rconnected(&w, &pi, &q, RadiusMode::Support).sets,
            vec![vec![4]]
        );
    }

    #[test]
    fn degenerate_sets_satisfy_the_constraint() {
        let w = tree(8, 4);
        let ones = PointMultiset::from_counts(vec![1; w.len()]);
        let params = RadiusParams {
            mode: RadiusMode::Exact,
            ..RadiusParams::default()
        };
        for r in 2..=4 {
            assert_eq!(
                constraint_holds(&w, &ones, &ones, 0, r, &params),
                Constraint::Holds
            );
        }
    }

    #[test]
    fn isolated_heavy_point_is_a_witness() {
        let w = tree(8, 4);
        let mut counts = vec![0u32; w.len()];
        counts[0] = 10;
        let pi = PointMultiset::from_counts(counts);
        let empty = PointMultiset::empty(w.len());
        let params = RadiusParams::default();
        assert_eq!(
            constraint_holds(&w, &pi, &empty, 0, 3, &params),
            Constraint::Violated(vec![0])
        );
        let none = RadiusParams { s_max: 0, ..params };
        assert_eq!(
            constraint_holds(&w, &pi, &empty, 0, 3, &none),
            Constraint::Truncated
        );
    }

    #[test]
    fn violation_near_the_boundary_is_censored_not_passed() {
        let w = tree(4, 0);
        let mut counts = vec![0u32; w.len()];
        let leaf = w.len() - 1;
        counts[leaf] = 10;
        let pi = PointMultiset::from_counts(counts);
        let empty = PointMultiset::empty(w.len());
        let got = constraint_holds(&w, &pi, &empty, leaf, 2, &RadiusParams::default());
        assert_eq!(got, Constraint::Censored(vec![leaf]));
    }

    #[test]
    fn degenerate_field_is_r0_on_the_interior() {
        let w = tree(8, 4);
        let ones = sample(&ProcessSpec::degenerate(), &w, 1, Side::Pi).unwrap();
        let field =
            compute_radius_field(&w, &ones, &ones, Side::Pi, &RadiusParams::default()).unwrap();
        assert!(field.bad.is_empty());
        for v in w.vertices() {
            if w.ball_complete(v, 4) {
                assert_eq!(
                    field.get(v),
                    VertexRadius::Resolved {
                        r: 4,
                        clause: Clause::First
                    }
                );
            }
        }
        assert!(components_above(&w, &field, 4).is_empty());
    }

    #[test]
    fn heavy_vertex_takes_the_second_clause() {
        let w = tree(8, 4);
        let mut counts = vec![1u32; w.len()];
        counts[0] = 5;
        let pi = PointMultiset::from_counts(counts);
        let ones = PointMultiset::from_counts(vec![1; w.len()]);
        let field =
            compute_radius_field(&w, &pi, &ones, Side::Pi, &RadiusParams::default()).unwrap();
        assert!(matches!(
            field.get(0),
            VertexRadius::Resolved {
                clause: Clause::Second,
                ..
            }
        ));
        assert!(field.radius(0).unwrap() > 4);
    }

    #[test]
    fn isolated_high_radius_vertex_is_one_component() {
        let w = tree(8, 4);
        let mut counts = vec![1u32; w.len()];
        counts[0] = 5;
        let pi = PointMultiset::from_counts(counts);
        let ones = PointMultiset::from_counts(vec![1; w.len()]);
        let field =
            compute_radius_field(&w, &pi, &ones, Side::Pi, &RadiusParams::default()).unwrap();
        let comps = components_above(&w, &field, 4);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vertices, vec![0]);
        assert_eq!(comps[0].diameter, 0);
    }

    #[test]
    fn invalid_r0_is_rejected() {
        let p = RadiusParams {
            r0: 3,
            ..RadiusParams::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config { .. })));
    }
}
