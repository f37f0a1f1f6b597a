//! Finite windows of transitive graph families and their metric and
//! expansion quantities.
//!
//! A window is the radius-`depth` ball around a root of the infinite graph,
//! indexed in BFS order with neighbours visited in a fixed generator order.
//! Vertex indices therefore do not depend on the window depth: vertex `k` of a
//! depth-8 window is vertex `k` of every deeper window of the same family.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::connected::{self, Control};
use crate::error::{Error, Result};

pub type Vertex = usize;

const NONE: u32 = u32::MAX;

/// Default ceiling on window size.
pub const DEFAULT_MAX_VERTICES: usize = 4_000_000;

/// Largest set size `cheeger_bound` will enumerate by default.
pub const DEFAULT_CHEEGER_CAP: usize = 8;

/// Generators of the ladder with diagonals, as displacements on `Z x Z_2`.
pub const LADDER_GENERATORS: [(i64, u8); 5] = [(-1, 0), (1, 0), (0, 1), (1, 1), (-1, 1)];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphFamily {
    /// The `degree`-regular tree, realised as the Cayley graph of the free
    /// product of `degree` copies of `Z_2`.
    RegularTree { degree: usize },
    /// Cayley graph of `Z x Z_2` with [`LADDER_GENERATORS`]. Amenable.
    LadderDiagonal,
    /// A finite simple undirected graph given by adjacency lists.
    ExplicitFinite { adjacency: Vec<Vec<usize>> },
}

impl GraphFamily {
    pub fn regular_tree(degree: usize) -> Result<Self> {
        if degree < 3 {
            return Err(Error::config(
                "graph.degree",
                format!("regular tree degree must be at least 3, got {degree}"),
            ));
        }
        Ok(GraphFamily::RegularTree { degree })
    }

    pub fn explicit(adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let n = adjacency.len();
        if n == 0 {
            return Err(Error::config(
                "graph.adjacency",
                "explicit graph has no vertices",
            ));
        }
        for (v, nbrs) in adjacency.iter().enumerate() {
            for (i, &u) in nbrs.iter().enumerate() {
                if u >= n {
                    return Err(Error::config(
                        "graph.adjacency",
                        format!("vertex {v} lists unknown neighbour {u}"),
                    ));
                }
                if u == v {
                    return Err(Error::config(
                        "graph.adjacency",
                        format!("self-loop at vertex {v}"),
                    ));
                }
                if nbrs[..i].contains(&u) {
                    return Err(Error::config(
                        "graph.adjacency",
                        format!("duplicate edge {v}-{u}"),
                    ));
                }
                if !adjacency[u].contains(&v) {
                    return Err(Error::config(
                        "graph.adjacency",
                        format!("edge {v}-{u} is not listed symmetrically"),
                    ));
                }
            }
        }
        let adjacency = adjacency
            .into_iter()
            .map(|mut nbrs| {
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        Ok(GraphFamily::ExplicitFinite { adjacency })
    }

    /// Parses the plain-text adjacency format, one `id: n1 n2 n3` line per vertex.
    /// Blank lines and `#` comments are skipped; ids must be `0..n` in any order.
    pub fn parse_adjacency(text: &str, source_name: &str) -> Result<Self> {
        let mut rows: HashMap<usize, Vec<usize>> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (id, rest) = line.split_once(':').ok_or_else(|| {
                Error::parse(source_name, lineno + 1, "expected `id: neighbours`")
            })?;
            let id: usize = id.trim().parse().map_err(|_| {
                Error::parse(
                    source_name,
                    lineno + 1,
                    format!("bad vertex id `{}`", id.trim()),
                )
            })?;
            let nbrs = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::parse(source_name, lineno + 1, format!("bad neighbour `{t}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if rows.insert(id, nbrs).is_some() {
                return Err(Error::parse(
                    source_name,
                    lineno + 1,
                    format!("vertex {id} listed twice"),
                ));
            }
        }
        let n = rows.len();
        let mut adjacency = vec![Vec::new(); n];
        for (id, nbrs) in rows {
            if id >= n {
                return Err(Error::parse(
                    source_name,
                    0,
                    format!("vertex ids must be 0..{n}, found {id}"),
                ));
            }
            adjacency[id] = nbrs;
        }
        Self::explicit(adjacency)
    }

    pub fn to_adjacency_text(&self) -> Option<String> {
        match self {
            GraphFamily::ExplicitFinite { adjacency } => {
                let mut out = String::new();
                for (v, nbrs) in adjacency.iter().enumerate() {
                    let _ = write!(out, "{v}:");
                    for u in nbrs {
                        let _ = write!(out, " {u}");
                    }
                    out.push('\n');
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Common degree, when the family is regular.
    pub fn degree(&self) -> Option<usize> {
        match self {
            GraphFamily::RegularTree { degree } => Some(*degree),
            GraphFamily::LadderDiagonal => Some(LADDER_GENERATORS.len()),
            GraphFamily::ExplicitFinite { adjacency } => {
                let d = adjacency[0].len();
                adjacency.iter().all(|a| a.len() == d).then_some(d)
            }
        }
    }

    /// `|B_r(v)|` in the infinite graph. `None` for explicit graphs, which are
    /// not assumed transitive.
    pub fn ball_size(&self, r: usize) -> Option<u64> {
        match self {
            GraphFamily::RegularTree { degree } => {
                let d = *degree as u64;
                let pow = (d - 1).checked_pow(u32::try_from(r).ok()?)?;
                Some(1 + d * (pow - 1) / (d - 2))
            }
            GraphFamily::LadderDiagonal => Some(if r == 0 { 1 } else { 2 * (2 * r as u64 + 1) }),
            GraphFamily::ExplicitFinite { .. } => None,
        }
    }

    pub fn is_non_amenable(&self) -> bool {
        matches!(self, GraphFamily::RegularTree { .. })
    }

    pub fn name(&self) -> String {
        match self {
            GraphFamily::RegularTree { degree } => format!("regular_tree({degree})"),
            GraphFamily::LadderDiagonal => "ladder_diagonal".to_string(),
            GraphFamily::ExplicitFinite { adjacency } => format!("explicit({})", adjacency.len()),
        }
    }

    fn window_size(&self, depth: usize) -> Option<u64> {
        match self {
            GraphFamily::ExplicitFinite { adjacency } => Some(adjacency.len() as u64),
            _ => self.ball_size(depth),
        }
    }
}

/// A ball or sphere query result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub vertices: Vec<Vertex>,
    /// True when the region of the infinite graph lies fully inside the window.
    pub complete: bool,
}

/// Reusable BFS marks for repeated bounded searches on one window.
#[derive(Debug, Clone)]
pub struct Scratch {
    stamp: u32,
    marks: Vec<u32>,
    queue: VecDeque<(u32, u32)>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            stamp: 0,
            marks: vec![0; n],
            queue: VecDeque::new(),
        }
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        self.stamp
    }
}

#[derive(Debug, Clone)]
pub struct GraphWindow {
    family: GraphFamily,
    depth: usize,
    core_margin: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// Per-vertex generator slots (trees and ladder); `NONE` marks a neighbour
    /// outside the window.
    slots: Vec<u32>,
    level: Vec<u32>,
    parent: Vec<u32>,
    coords: Vec<(i64, u8)>,
    coord_index: HashMap<(i64, u8), u32>,
}

impl GraphWindow {
    pub fn build(family: GraphFamily, depth: usize, core_margin: usize) -> Result<Self> {
        Self::build_capped(family, depth, core_margin, DEFAULT_MAX_VERTICES)
    }

    pub fn build_capped(
        family: GraphFamily,
        depth: usize,
        core_margin: usize,
        max_vertices: usize,
    ) -> Result<Self> {
        if let GraphFamily::RegularTree { degree } = family {
            GraphFamily::regular_tree(degree)?;
        }
        let explicit = matches!(family, GraphFamily::ExplicitFinite { .. });
        if !explicit && core_margin > depth {
            return Err(Error::config(
                "graph.core_margin",
                format!("core margin {core_margin} exceeds window depth {depth}"),
            ));
        }
        match family.window_size(depth) {
            Some(n) if n <= max_vertices as u64 => {}
            other => {
                return Err(Error::resource(
                    "build_window",
                    format!(
                        "{} window of depth {depth} has {} vertices, cap is {max_vertices}",
                        family.name(),
                        other.map_or_else(|| "overflowing".to_string(), |n| n.to_string())
                    ),
                ))
            }
        }
        match family {
            GraphFamily::RegularTree { degree } => Ok(Self::build_tree(degree, depth, core_margin)),
            GraphFamily::LadderDiagonal => Ok(Self::build_ladder(depth, core_margin)),
            GraphFamily::ExplicitFinite { .. } => Ok(Self::build_explicit(family, core_margin)),
        }
    }

    fn build_tree(degree: usize, depth: usize, core_margin: usize) -> Self {
        // `via[v]` is the generator that leads from parent to v.
        let mut via: Vec<u32> = vec![NONE];
        let mut level = vec![0u32];
        let mut parent = vec![NONE];
        let mut slots: Vec<u32> = Vec::new();
        let mut head = 0;
        while head < level.len() {
            let v = head;
            head += 1;
            for g in 0..degree as u32 {
                if g == via[v] {
                    slots.push(parent[v]);
                } else if (level[v] as usize) < depth {
                    let child = level.len() as u32;
                    via.push(g);
                    level.push(level[v] + 1);
                    parent.push(v as u32);
                    slots.push(child);
                } else {
                    slots.push(NONE);
                }
            }
        }
        let (offsets, targets) = csr_from_slots(&slots, degree);
        GraphWindow {
            family: GraphFamily::RegularTree { degree },
            depth,
            core_margin,
            offsets,
            targets,
            slots,
            level,
            parent,
            coords: Vec::new(),
            coord_index: HashMap::new(),
        }
    }

    fn build_ladder(depth: usize, core_margin: usize) -> Self {
        let mut index: HashMap<(i64, u8), u32> = HashMap::new();
        let mut coords = vec![(0i64, 0u8)];
        let mut level = vec![0u32];
        let mut parent = vec![NONE];
        index.insert((0, 0), 0);
        let mut head = 0;
        while head < coords.len() {
            let v = head;
            head += 1;
            if level[v] as usize == depth {
                continue;
            }
            let (x, y) = coords[v];
            for (dx, dy) in LADDER_GENERATORS {
                let c = (x + dx, y ^ dy);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(c) {
                    e.insert(coords.len() as u32);
                    coords.push(c);
                    level.push(level[v] + 1);
                    parent.push(v as u32);
                }
            }
        }
        let mut slots = Vec::with_capacity(coords.len() * LADDER_GENERATORS.len());
        for &(x, y) in &coords {
            for (dx, dy) in LADDER_GENERATORS {
                slots.push(index.get(&(x + dx, y ^ dy)).copied().unwrap_or(NONE));
            }
        }
        let (offsets, targets) = csr_from_slots(&slots, LADDER_GENERATORS.len());
        GraphWindow {
            family: GraphFamily::LadderDiagonal,
            depth,
            core_margin,
            offsets,
            targets,
            slots,
            level,
            parent,
            coords,
            coord_index: index,
        }
    }

    fn build_explicit(family: GraphFamily, core_margin: usize) -> Self {
        let GraphFamily::ExplicitFinite { adjacency } = &family else {
            unreachable!()
        };
        let n = adjacency.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for nbrs in adjacency {
            targets.extend(nbrs.iter().map(|&u| u as u32));
            offsets.push(targets.len());
        }
        let mut level = vec![NONE; n];
        let mut parent = vec![NONE; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &u in &adjacency[v] {
                if level[u] == NONE {
                    level[u] = level[v] + 1;
                    parent[u] = v as u32;
                    queue.push_back(u);
                }
            }
        }
        let depth = level
            .iter()
            .filter(|&&l| l != NONE)
            .max()
            .copied()
            .unwrap_or(0) as usize;
        GraphWindow {
            family,
            depth,
            core_margin,
            offsets,
            targets,
            slots: Vec::new(),
            level,
            parent,
            coords: Vec::new(),
            coord_index: HashMap::new(),
        }
    }

    pub fn family(&self) -> &GraphFamily {
        &self.family
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn core_margin(&self) -> usize {
        self.core_margin
    }

    pub fn root(&self) -> Vertex {
        0
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.len()
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.targets[self.offsets[v]..self.offsets[v + 1]]
            .iter()
            .map(|&u| u as Vertex)
    }

    pub fn window_degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Degree of `v` in the infinite graph.
    pub fn full_degree(&self, v: Vertex) -> usize {
        match &self.family {
            GraphFamily::ExplicitFinite { adjacency } => adjacency[v].len(),
            family => family.degree().unwrap_or(0),
        }
    }

    /// Neighbour slots in generator order; `None` marks a neighbour outside
    /// the window. Empty for explicit graphs.
    pub fn generator_slots(&self, v: Vertex) -> impl Iterator<Item = Option<Vertex>> + '_ {
        let stride = if self.slots.is_empty() {
            0
        } else {
            self.full_degree(v)
        };
        self.slots[v * stride..(v + 1) * stride]
            .iter()
            .map(|&u| (u != NONE).then_some(u as Vertex))
    }

    /// Distance from the root.
    pub fn level(&self, v: Vertex) -> Option<usize> {
        let l = self.level[v];
        (l != NONE).then_some(l as usize)
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        let p = self.parent[v];
        (p != NONE).then_some(p as Vertex)
    }

    pub fn ladder_coords(&self, v: Vertex) -> Option<(i64, u8)> {
        self.coords.get(v).copied()
    }

    pub fn vertex_of_coords(&self, c: (i64, u8)) -> Option<Vertex> {
        self.coord_index.get(&c).map(|&v| v as Vertex)
    }

    pub fn in_core(&self, v: Vertex) -> bool {
        match self.family {
            GraphFamily::ExplicitFinite { .. } => true,
            _ => (self.level[v] as usize) + self.core_margin <= self.depth,
        }
    }

    pub fn core(&self) -> Vec<Vertex> {
        self.vertices().filter(|&v| self.in_core(v)).collect()
    }

    pub fn core_len(&self) -> usize {
        self.vertices().filter(|&v| self.in_core(v)).count()
    }

    /// Whether every neighbour of `v` in the infinite graph lies in the window.
    pub fn is_interior(&self, v: Vertex) -> bool {
        self.window_degree(v) == self.full_degree(v)
    }

    /// Whether `B_r(v)` of the infinite graph lies inside the window.
    pub fn ball_complete(&self, v: Vertex, r: usize) -> bool {
        match &self.family {
            GraphFamily::ExplicitFinite { .. } => true,
            GraphFamily::RegularTree { .. } => self.level[v] as usize + r <= self.depth,
            GraphFamily::LadderDiagonal => {
                r == 0 || self.coords[v].0.unsigned_abs() as usize + r <= self.depth
            }
        }
    }

    /// Graph distance; `None` when no path exists (explicit graphs only).
    pub fn distance(&self, u: Vertex, v: Vertex) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        match &self.family {
            GraphFamily::RegularTree { .. } => {
                let (mut a, mut b, mut steps) = (u, v, 0);
                while a != b {
                    if self.level[a] >= self.level[b] {
                        a = self.parent[a] as usize;
                    } else {
                        b = self.parent[b] as usize;
                    }
                    steps += 1;
                }
                Some(steps)
            }
            GraphFamily::LadderDiagonal => {
                let (x1, y1) = self.coords[u];
                let (x2, y2) = self.coords[v];
                let dx = (x1 - x2).unsigned_abs() as usize;
                Some(if dx > 0 { dx } else { usize::from(y1 != y2) })
            }
            GraphFamily::ExplicitFinite { .. } => {
                let mut seen = vec![false; self.len()];
                let mut queue = VecDeque::from([(u, 0usize)]);
                seen[u] = true;
                while let Some((x, d)) = queue.pop_front() {
                    for y in self.neighbors(x) {
                        if y == v {
                            return Some(d + 1);
                        }
                        if !seen[y] {
                            seen[y] = true;
                            queue.push_back((y, d + 1));
                        }
                    }
                }
                None
            }
        }
    }

    /// Distance between two vertex sets.
    pub fn set_distance(&self, a: &[Vertex], b: &[Vertex]) -> Option<usize> {
        a.iter()
            .flat_map(|&x| b.iter().filter_map(move |&y| self.distance(x, y)))
            .min()
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::new(self.len())
    }

    /// Multi-source bounded BFS; appends `(vertex, distance)` pairs to `out`
    /// in BFS order.
    pub fn bfs_within(
        &self,
        scratch: &mut Scratch,
        sources: &[Vertex],
        r: usize,
        out: &mut Vec<(Vertex, usize)>,
    ) {
        let stamp = scratch.next_stamp();
        scratch.queue.clear();
        for &s in sources {
            if scratch.marks[s] != stamp {
                scratch.marks[s] = stamp;
                scratch.queue.push_back((s as u32, 0));
                out.push((s, 0));
            }
        }
        while let Some((v, d)) = scratch.queue.pop_front() {
            if d as usize == r {
                continue;
            }
            for u in self.neighbors(v as usize) {
                if scratch.marks[u] != stamp {
                    scratch.marks[u] = stamp;
                    scratch.queue.push_back((u as u32, d + 1));
                    out.push((u, d as usize + 1));
                }
            }
        }
    }

    pub fn ball_with(&self, scratch: &mut Scratch, v: Vertex, r: usize) -> Region {
        let mut found = Vec::new();
        self.bfs_within(scratch, &[v], r, &mut found);
        Region {
            vertices: found.into_iter().map(|(u, _)| u).collect(),
            complete: self.ball_complete(v, r),
        }
    }

    pub fn ball(&self, v: Vertex, r: usize) -> Region {
        self.ball_with(&mut self.scratch(), v, r)
    }

    pub fn sphere(&self, v: Vertex, r: usize) -> Region {
        let mut found = Vec::new();
        self.bfs_within(&mut self.scratch(), &[v], r, &mut found);
        Region {
            vertices: found
                .into_iter()
                .filter(|&(_, d)| d == r)
                .map(|(u, _)| u)
                .collect(),
            complete: self.ball_complete(v, r),
        }
    }

    /// `U^{+r}` restricted to the window, with its completeness.
    pub fn set_ball_with(&self, scratch: &mut Scratch, set: &[Vertex], r: usize) -> Region {
        let mut found = Vec::new();
        self.bfs_within(scratch, set, r, &mut found);
        Region {
            vertices: found.into_iter().map(|(u, _)| u).collect(),
            complete: set.iter().all(|&v| self.ball_complete(v, r)),
        }
    }

    /// Ball sizes around the root, measured by BFS inside the window.
    pub fn root_ball_sizes(&self) -> Vec<u64> {
        let mut by_level = vec![0u64; self.depth + 1];
        for &l in &self.level {
            if l != NONE {
                by_level[l as usize] += 1;
            }
        }
        by_level
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }
}

fn csr_from_slots(slots: &[u32], degree: usize) -> (Vec<usize>, Vec<u32>) {
    let n = slots.len() / degree;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(slots.len());
    offsets.push(0);
    for row in slots.chunks(degree) {
        targets.extend(row.iter().copied().filter(|&u| u != NONE));
        offsets.push(targets.len());
    }
    (offsets, targets)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphMetrics {
    pub degree: Option<usize>,
    pub ball_sizes: Vec<u64>,
    pub cheeger_bound: Option<(u64, u64)>,
    pub spectral_radius: Option<f64>,
}

impl GraphMetrics {
    /// Ball sizes from the family closed form (or window BFS for explicit
    /// graphs), the Cheeger bound up to `cheeger_k` and the closed-form
    /// spectral radius when one exists.
    pub fn measure(window: &GraphWindow, cheeger_k: usize) -> Result<Self> {
        let ball_sizes = match window.family().ball_size(0) {
            Some(_) => (0..=window.depth())
                .map(|r| window.family().ball_size(r).unwrap_or(u64::MAX))
                .collect(),
            None => window.root_ball_sizes(),
        };
        let cheeger = cheeger_bound(window, cheeger_k, DEFAULT_CHEEGER_CAP).ok();
        let spectral = spectral_radius(window.family(), SpectralMethod::ClosedForm)
            .ok()
            .map(|e| e.value);
        Ok(GraphMetrics {
            degree: window.family().degree(),
            ball_sizes,
            cheeger_bound: cheeger.map(|c| (*c.numer(), *c.denom())),
            spectral_radius: spectral,
        })
    }
}

/// Minimum of `|∂A| / |A|` over connected `A` with `|A| <= max_set_size`
/// whose vertices all have their full neighbourhood inside the window.
///
/// On transitive families only sets through the root are enumerated; on
/// explicit graphs every connected set is visited once.
pub fn cheeger_bound(window: &GraphWindow, max_set_size: usize, cap: usize) -> Result<Ratio<u64>> {
    if max_set_size > cap {
        return Err(Error::resource(
            "cheeger_bound",
            format!("set size {max_set_size} exceeds enumeration cap {cap}"),
        ));
    }
    if max_set_size == 0 {
        return Err(Error::Contract(
            "cheeger_bound needs max_set_size >= 1".into(),
        ));
    }
    let transitive = !matches!(window.family(), GraphFamily::ExplicitFinite { .. });
    let anchors: Vec<Vertex> = if transitive {
        vec![window.root()]
    } else {
        window.vertices().collect()
    };
    let mut best: Option<Ratio<u64>> = None;
    let mut in_set = vec![false; window.len()];
    let mut boundary_marks = vec![0u32; window.len()];
    let mut stamp = 0u32;
    for anchor in anchors {
        if !window.is_interior(anchor) {
            continue;
        }
        connected::for_each_connected_set(
            window.len(),
            anchor,
            max_set_size,
            |v, out| window.neighbors(v).for_each(|u| out.insert(u)),
            |v| window.is_interior(v),
            !transitive,
            u64::MAX,
            |set| {
                stamp += 1;
                for &v in set {
                    in_set[v] = true;
                }
                let mut boundary = 0u64;
                for &v in set {
                    for u in window.neighbors(v) {
                        if !in_set[u] && boundary_marks[u] != stamp {
                            boundary_marks[u] = stamp;
                            boundary += 1;
                        }
                    }
                }
                for &v in set {
                    in_set[v] = false;
                }
                let ratio = Ratio::new(boundary, set.len() as u64);
                if best.is_none_or(|b| ratio < b) {
                    best = Some(ratio);
                }
                Control::Continue
            },
        );
    }
    best.ok_or_else(|| Error::Censored("no interior connected set fits in the window".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralMethod {
    /// `2 sqrt(d - 1) / d`, regular trees only.
    ClosedForm,
    /// `sqrt(p_{2n}(o,o) / p_{2n-2}(o,o))` from exact return probabilities.
    ReturnProbability { steps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub value: f64,
    /// Set when the estimate is 1 (within rounding): the amenable, or
    /// periodic, regime where Kesten's bound carries no information.
    pub amenable: bool,
    /// Estimates for n = 1..=steps when the return-probability method is used.
    pub trajectory: Vec<f64>,
}

pub fn spectral_radius(family: &GraphFamily, method: SpectralMethod) -> Result<SpectralEstimate> {
    match method {
        SpectralMethod::ClosedForm => match family {
            GraphFamily::RegularTree { degree } => {
                let d = *degree as f64;
                Ok(SpectralEstimate {
                    value: 2.0 * (d - 1.0).sqrt() / d,
                    amenable: false,
                    trajectory: Vec::new(),
                })
            }
            _ => Err(Error::Contract(format!(
                "closed-form spectral radius is only known for regular trees, not {}",
                family.name()
            ))),
        },
        SpectralMethod::ReturnProbability { steps } => {
            let returns = match family {
                GraphFamily::RegularTree { degree } => radial_return_probabilities(*degree, steps),
                GraphFamily::LadderDiagonal => {
                    let window = GraphWindow::build(family.clone(), steps + 1, 0)?;
                    return_probabilities(&window, window.root(), steps)?
                }
                GraphFamily::ExplicitFinite { .. } => {
                    let window = GraphWindow::build(family.clone(), 0, 0)?;
                    return_probabilities(&window, window.root(), steps)?
                }
            };
            let trajectory = ratio_estimates(&returns)?;
            let value = *trajectory.last().ok_or_else(|| {
                Error::Precision("return-probability estimate needs steps >= 1".into())
            })?;
            Ok(SpectralEstimate {
                value,
                amenable: value >= 1.0 - 1e-12,
                trajectory,
            })
        }
    }
}

/// `p_{2k}(o, o)` for `k = 0..=steps` by exact propagation of the walk
/// distribution over window vertices. Requires the window to contain every
/// vertex the walk can visit and still return, i.e. depth > steps.
pub fn return_probabilities(
    window: &GraphWindow,
    origin: Vertex,
    steps: usize,
) -> Result<Vec<f64>> {
    let explicit = matches!(window.family(), GraphFamily::ExplicitFinite { .. });
    if !explicit && !window.ball_complete(origin, steps + 1) {
        return Err(Error::Precision(format!(
            "a {}-step return walk needs a complete radius-{} ball around the origin",
            2 * steps,
            steps + 1
        )));
    }
    let n = window.len();
    let mut mass = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    mass[origin] = 1.0;
    let mut out = vec![1.0];
    for t in 1..=2 * steps {
        next.iter_mut().for_each(|m| *m = 0.0);
        for v in 0..n {
            if mass[v] == 0.0 {
                continue;
            }
            let share = mass[v] / window.full_degree(v) as f64;
            for u in window.neighbors(v) {
                next[u] += share;
            }
        }
        std::mem::swap(&mut mass, &mut next);
        if t % 2 == 0 {
            out.push(mass[origin]);
        }
    }
    Ok(out)
}

/// Return probabilities on the `degree`-regular tree through its radial
/// projection, which is exact because the walk's distance from the origin is
/// itself a Markov chain.
pub fn radial_return_probabilities(degree: usize, steps: usize) -> Vec<f64> {
    let d = degree as f64;
    let away = (d - 1.0) / d;
    let back = 1.0 / d;
    let mut mass = vec![0.0f64; steps + 2];
    let mut next = vec![0.0f64; steps + 2];
    mass[0] = 1.0;
    let mut out = vec![1.0];
    for t in 1..=2 * steps {
        next.iter_mut().for_each(|m| *m = 0.0);
        next[1] += mass[0];
        for k in 1..=steps {
            next[k + 1] += mass[k] * away;
            next[k - 1] += mass[k] * back;
        }
        std::mem::swap(&mut mass, &mut next);
        if t % 2 == 0 {
            out.push(mass[0]);
        }
    }
    out
}

fn ratio_estimates(returns: &[f64]) -> Result<Vec<f64>> {
    returns
        .windows(2)
        .map(|w| {
            if w[0] <= 0.0 || w[1] <= 0.0 {
                Err(Error::Precision("vanishing return probability".into()))
            } else {
                Ok((w[1] / w[0]).sqrt())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(d: usize, depth: usize, m: usize) -> GraphWindow {
        GraphWindow::build(GraphFamily::regular_tree(d).unwrap(), depth, m).unwrap()
    }

    fn path(n: usize) -> GraphFamily {
        let adj = (0..n)
            .map(|v| {
                let mut a = Vec::new();
                if v > 0 {
                    a.push(v - 1);
                }
                if v + 1 < n {
                    a.push(v + 1);
                }
                a
            })
            .collect();
        GraphFamily::explicit(adj).unwrap()
    }

    #[test]
    fn tree_window_sizes() {
        assert_eq!(tree(3, 2, 1).len(), 10);
        let w = tree(3, 0, 0);
        assert_eq!(w.len(), 1);
        assert_eq!(w.neighbors(0).count(), 0);
    }

    #[test]
    fn ladder_window_has_root_and_five_neighbours() {
        let w = GraphWindow::build(GraphFamily::LadderDiagonal, 1, 0).unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w.neighbors(0).count(), 5);
        let a = w.vertex_of_coords((0, 0)).unwrap();
        let b = w.vertex_of_coords((1, 1)).unwrap();
        assert_eq!(w.distance(a, b), Some(1));
    }

    #[test]
    fn degree_below_three_is_rejected() {
        assert!(matches!(
            GraphFamily::regular_tree(2),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            GraphWindow::build(GraphFamily::RegularTree { degree: 2 }, 3, 0),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn oversized_window_is_a_resource_error() {
        let err = GraphWindow::build_capped(GraphFamily::regular_tree(3).unwrap(), 12, 0, 1000)
            .unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn indexing_is_depth_independent() {
        let small = tree(3, 4, 0);
        let big = tree(3, 7, 0);
        for v in small.vertices() {
            assert_eq!(small.level(v), big.level(v));
            assert_eq!(small.parent(v), big.parent(v));
        }
    }

    #[test]
    fn balls_and_spheres() {
        let w = tree(3, 5, 2);
        assert_eq!(w.sphere(0, 0).vertices, vec![0]);
        assert_eq!(w.ball(0, 2).vertices.len(), 10);
        assert_eq!(w.sphere(0, 3).vertices.len(), 12);
        assert!(w.ball(0, 5).complete);
        assert!(!w.ball(1, 5).complete);
        for v in [0, 4, 17] {
            let depth2 = w.sphere(0, 2).vertices;
            if depth2.contains(&v) {
                assert_eq!(w.distance(0, v), Some(2));
            }
        }
    }

    #[test]
    fn tree_ball_sizes_match_closed_form_and_bfs() {
        for d in 3..=5 {
            let w = tree(d, 6, 0);
            let bfs = w.root_ball_sizes();
            for r in 0..=6 {
                assert_eq!(Some(bfs[r]), w.family().ball_size(r));
                if r > 0 {
                    let d = d as u64;
                    assert_eq!(bfs[r], bfs[r - 1] + d * (d - 1).pow(r as u32 - 1));
                }
            }
        }
    }

    #[test]
    fn ladder_ball_sizes() {
        let w = GraphWindow::build(GraphFamily::LadderDiagonal, 6, 0).unwrap();
        let bfs = w.root_ball_sizes();
        for r in 0..=6 {
            assert_eq!(Some(bfs[r]), GraphFamily::LadderDiagonal.ball_size(r));
        }
    }

    #[test]
    fn explicit_disconnected_distance_is_unreachable() {
        let g = GraphFamily::explicit(vec![vec![1], vec![0], vec![]]).unwrap();
        let w = GraphWindow::build(g, 0, 0).unwrap();
        assert_eq!(w.distance(0, 1), Some(1));
        assert_eq!(w.distance(0, 2), None);
    }

    #[test]
    fn explicit_rejects_asymmetric_lists() {
        assert!(GraphFamily::explicit(vec![vec![1], vec![]]).is_err());
        assert!(GraphFamily::explicit(vec![vec![0]]).is_err());
    }

    #[test]
    fn adjacency_text_round_trip() {
        let text = "0: 1 2\n1: 0\n# comment\n2: 0\n";
        let g = GraphFamily::parse_adjacency(text, "inline").unwrap();
        let again = GraphFamily::parse_adjacency(&g.to_adjacency_text().unwrap(), "again").unwrap();
        assert_eq!(g, again);
        assert!(GraphFamily::parse_adjacency("0: x", "bad").is_err());
    }

    #[test]
    fn cheeger_examples() {
        let w = tree(3, 4, 0);
        assert_eq!(cheeger_bound(&w, 1, 8).unwrap(), Ratio::new(3, 1));
        assert_eq!(cheeger_bound(&w, 2, 8).unwrap(), Ratio::new(2, 1));
        let p = GraphWindow::build(path(5), 0, 0).unwrap();
        assert!(cheeger_bound(&p, 5, 8).unwrap() <= Ratio::new(1, 4));
        assert_eq!(cheeger_bound(&p, 4, 8).unwrap(), Ratio::new(1, 4));
        assert!(matches!(
            cheeger_bound(&w, 9, 8),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn cheeger_is_non_increasing_in_k() {
        let w = tree(3, 7, 0);
        let values: Vec<_> = (1..=6).map(|k| cheeger_bound(&w, k, 8).unwrap()).collect();
        assert!(values.windows(2).all(|p| p[1] <= p[0]), "{values:?}");
        // Subtrees of the 3-regular tree have |∂A| = |A| + 2.
        assert_eq!(values[5], Ratio::new(8, 6));
    }

    #[test]
    fn radial_projection_matches_vertex_propagation() {
        let w = tree(3, 9, 0);
        let full = return_probabilities(&w, 0, 8).unwrap();
        let radial = radial_return_probabilities(3, 8);
        for (a, b) in full.iter().zip(&radial) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(matches!(
            return_probabilities(&w, 0, 9),
            Err(Error::Precision(_))
        ));
    }

    #[test]
    fn spectral_radius_closed_form_and_estimator_agree() {
        for (d, expected) in [(3usize, 2.0 * 2f64.sqrt() / 3.0), (4, 3f64.sqrt() / 2.0)] {
            let family = GraphFamily::regular_tree(d).unwrap();
            let closed = spectral_radius(&family, SpectralMethod::ClosedForm).unwrap();
            assert!((closed.value - expected).abs() < 1e-12);
            let est =
                spectral_radius(&family, SpectralMethod::ReturnProbability { steps: 40 }).unwrap();
            assert!(
                (est.value - expected).abs() / expected < 0.02,
                "d={d} est={}",
                est.value
            );
            // Log-convexity of p_2n: the ratio estimates increase towards rho.
            assert!(est.trajectory.windows(2).all(|p| p[1] >= p[0] - 1e-15));
            assert!(est.trajectory.iter().all(|&x| x <= expected + 1e-12));
        }
    }

    #[test]
    fn complete_graph_on_two_vertices_is_flagged() {
        let k2 = GraphFamily::explicit(vec![vec![1], vec![0]]).unwrap();
        let est = spectral_radius(&k2, SpectralMethod::ReturnProbability { steps: 5 }).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        assert!(est.amenable);
    }

    #[test]
    fn ladder_estimator_tends_to_one() {
        let est = spectral_radius(
            &GraphFamily::LadderDiagonal,
            SpectralMethod::ReturnProbability { steps: 30 },
        )
        .unwrap();
        assert!(est.value > 0.97, "{}", est.value);
    }
}
