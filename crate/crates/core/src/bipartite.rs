//! The bipartite graph on `Π ⊔ Π′` induced by the two radius fields.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{GraphWindow, Vertex};
use crate::processes::{Point, PointMultiset, Side};
use crate::radii::RadiusField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PointRef {
    pub side: Side,
    pub vertex: Vertex,
    pub index: u32,
}

impl PointRef {
    pub fn new(side: Side, (vertex, index): Point) -> Self {
        PointRef {
            side,
            vertex,
            index,
        }
    }
}

/// Which radius produced an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeOrigin {
    FromPi,
    FromPiPrime,
    Both,
}

impl EdgeOrigin {
    fn merge(self, other: EdgeOrigin) -> EdgeOrigin {
        if self == other {
            self
        } else {
            EdgeOrigin::Both
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchGraph {
    left: Vec<Point>,
    right: Vec<Point>,
    /// Sorted right indices per left point, with the generating clause.
    left_adj: Vec<Vec<(u32, EdgeOrigin)>>,
    right_adj: Vec<Vec<u32>>,
    /// Points dropped because their vertex radius is censored.
    pub dropped_left: usize,
    pub dropped_right: usize,
}

impl MatchGraph {
    /// Builds the graph from an explicit left-right edge list. Point `i` on
    /// either side sits at vertex `i` with index 1.
    pub fn from_edges(n_left: usize, n_right: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut left_adj = vec![Vec::new(); n_left];
        for &(a, b) in edges {
            if a >= n_left || b >= n_right {
                return Err(Error::Contract(format!(
                    "edge ({a}, {b}) outside {n_left}x{n_right}"
                )));
            }
            left_adj[a].push((b as u32, EdgeOrigin::Both));
        }
        Ok(Self::assemble(
            (0..n_left).map(|i| (i, 1)).collect(),
            (0..n_right).map(|j| (j, 1)).collect(),
            left_adj,
            0,
            0,
        ))
    }

    fn assemble(
        left: Vec<Point>,
        right: Vec<Point>,
        mut left_adj: Vec<Vec<(u32, EdgeOrigin)>>,
        dropped_left: usize,
        dropped_right: usize,
    ) -> Self {
        for row in &mut left_adj {
            row.sort_unstable_by_key(|&(j, _)| j);
            row.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 = kept.1.merge(next.1);
                    true
                } else {
                    false
                }
            });
        }
        let mut right_adj = vec![Vec::new(); right.len()];
        for (i, row) in left_adj.iter().enumerate() {
            for &(j, _) in row {
                right_adj[j as usize].push(i as u32);
            }
        }
        MatchGraph {
            left,
            right,
            left_adj,
            right_adj,
            dropped_left,
            dropped_right,
        }
    }

    pub fn left_len(&self) -> usize {
        self.left.len()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    pub fn left_point(&self, i: usize) -> Point {
        self.left[i]
    }

    pub fn right_point(&self, j: usize) -> Point {
        self.right[j]
    }

    pub fn point(&self, side: Side, i: usize) -> Point {
        match side {
            Side::Pi => self.left[i],
            Side::PiPrime => self.right[i],
        }
    }

    pub fn left_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.left_adj[i].iter().map(|&(j, _)| j as usize)
    }

    pub fn right_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.right_adj[j].iter().map(|&i| i as usize)
    }

    pub fn neighbors_of(&self, side: Side, i: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match side {
            Side::Pi => Box::new(self.left_neighbors(i)),
            Side::PiPrime => Box::new(self.right_neighbors(i)),
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.left_adj[i]
            .binary_search_by_key(&(j as u32), |&(x, _)| x)
            .is_ok()
    }

    pub fn edge_origin(&self, i: usize, j: usize) -> Option<EdgeOrigin> {
        let row = &self.left_adj[i];
        row.binary_search_by_key(&(j as u32), |&(x, _)| x)
            .ok()
            .map(|k| row[k].1)
    }

    pub fn edge_count(&self) -> usize {
        self.left_adj.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left_adj
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, _)| (i, j as usize)))
    }

    pub fn left_index(&self, p: Point) -> Option<usize> {
        self.left.binary_search(&p).ok()
    }

    pub fn right_index(&self, p: Point) -> Option<usize> {
        self.right.binary_search(&p).ok()
    }

    pub fn index_of(&self, p: PointRef) -> Option<usize> {
        match p.side {
            Side::Pi => self.left_index((p.vertex, p.index)),
            Side::PiPrime => self.right_index((p.vertex, p.index)),
        }
    }

    /// Lines `L vertex index | R vertex index`, one per undirected edge.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.edges() {
            let (a, ai) = self.left[i];
            let (b, bi) = self.right[j];
            let _ = writeln!(out, "L {a} {ai} | R {b} {bi}");
        }
        out
    }
}

/// `x -> x′` when `dist(x, x′) <= R_x`, `x′ -> x` when `dist <= R′_{x′}`; the
/// undirected graph is their union.
pub fn build_match_graph(
    window: &GraphWindow,
    pi: &PointMultiset,
    pi_prime: &PointMultiset,
    r: &RadiusField,
    r_prime: &RadiusField,
) -> MatchGraph {
    let keep = |pm: &PointMultiset, field: &RadiusField| -> (Vec<Point>, usize) {
        let mut kept = Vec::new();
        let mut dropped = 0;
        for p in pm.points() {
            if field.radius(p.0).is_some() {
                kept.push(p);
            } else {
                dropped += 1;
            }
        }
        (kept, dropped)
    };
    let (left, dropped_left) = keep(pi, r);
    let (right, dropped_right) = keep(pi_prime, r_prime);

    // Kept points per vertex, as index ranges into `left` / `right`.
    let ranges = |pts: &[Point]| -> Vec<(u32, u32)> {
        let mut out = vec![(0u32, 0u32); window.len()];
        let mut k = 0;
        while k < pts.len() {
            let v = pts[k].0;
            let start = k;
            while k < pts.len() && pts[k].0 == v {
                k += 1;
            }
            out[v] = (start as u32, k as u32);
        }
        out
    };
    let left_at = ranges(&left);
    let right_at = ranges(&right);

    let mut left_adj: Vec<Vec<(u32, EdgeOrigin)>> = left
        .par_iter()
        .map_init(
            || (window.scratch(), Vec::new()),
            |(scratch, buf), &(u, _)| {
                buf.clear();
                let radius = r.radius(u).expect("kept points have a radius");
                window.bfs_within(scratch, &[u], radius, buf);
                let mut row = Vec::new();
                for &(w, _) in buf.iter() {
                    let (a, b) = right_at[w];
                    row.extend((a..b).map(|j| (j, EdgeOrigin::FromPi)));
                }
                row
            },
        )
        .collect();

    let reverse: Vec<Vec<u32>> = right
        .par_iter()
        .map_init(
            || (window.scratch(), Vec::new()),
            |(scratch, buf), &(w, _)| {
                buf.clear();
                let radius = r_prime.radius(w).expect("kept points have a radius");
                window.bfs_within(scratch, &[w], radius, buf);
                let mut row = Vec::new();
                for &(u, _) in buf.iter() {
                    let (a, b) = left_at[u];
                    row.extend(a..b);
                }
                row
            },
        )
        .collect();
    for (j, row) in reverse.into_iter().enumerate() {
        for i in row {
            left_adj[i as usize].push((j as u32, EdgeOrigin::FromPiPrime));
        }
    }
    MatchGraph::assemble(left, right, left_adj, dropped_left, dropped_right)
}

/// `N_𝒢(A)` for a one-sided set `A`.
pub fn neighborhood(g: &MatchGraph, a: &[PointRef]) -> Result<Vec<PointRef>> {
    let Some(first) = a.first() else {
        return Ok(Vec::new());
    };
    let side = first.side;
    if a.iter().any(|p| p.side != side) {
        return Err(Error::Contract(
            "neighborhood of a set mixing both sides".into(),
        ));
    }
    let mut hit = vec![
        false;
        if side == Side::Pi {
            g.right_len()
        } else {
            g.left_len()
        }
    ];
    for &p in a {
        let i = g
            .index_of(p)
            .ok_or_else(|| Error::Contract(format!("{p:?} is not a point of the graph")))?;
        for j in g.neighbors_of(side, i) {
            hit[j] = true;
        }
    }
    let other = side.other();
    Ok(hit
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .map(|(j, _)| PointRef::new(other, g.point(other, j)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub stderr: f64,
    pub core_size: usize,
    pub trials: usize,
}

impl DensityEstimate {
    /// Mean and standard error across independent per-trial values.
    pub fn aggregate(values: &[f64], core_size: usize) -> Self {
        let (value, stderr) = mean_stderr(values);
        DensityEstimate {
            value,
            stderr,
            core_size,
            trials: values.len(),
        }
    }
}

pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Points of `A` per core vertex, averaged over the core. The standard error
/// treats per-vertex counts as independent.
pub fn density(window: &GraphWindow, a: impl IntoIterator<Item = Vertex>) -> DensityEstimate {
    let mut per_vertex = vec![0u32; window.len()];
    for v in a {
        per_vertex[v] += 1;
    }
    let values: Vec<f64> = window
        .core()
        .into_iter()
        .map(|v| per_vertex[v] as f64)
        .collect();
    let (value, stderr) = mean_stderr(&values);
    DensityEstimate {
        value,
        stderr,
        core_size: values.len(),
        trials: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::GraphFamily;
    use crate::processes::{sample, ProcessSpec};
    use crate::radii::{compute_radius_field, RadiusParams};

    fn degenerate(depth: usize, m: usize) -> (GraphWindow, PointMultiset, MatchGraph) {
        let w = GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), depth, m).unwrap();
        let ones = sample(&ProcessSpec::degenerate(), &w, 1, Side::Pi).unwrap();
        let params = RadiusParams::default();
        let r = compute_radius_field(&w, &ones, &ones, Side::Pi, &params).unwrap();
        let rp = compute_radius_field(&w, &ones, &ones, Side::PiPrime, &params).unwrap();
        let g = build_match_graph(&w, &ones, &ones, &r, &rp);
        (w, ones, g)
    }

    #[test]
    fn degenerate_graph_links_points_within_r0() {
        let (w, _, g) = degenerate(8, 4);
        for i in 0..g.left_len() {
            let (u, _) = g.left_point(i);
            assert_eq!(g.right_index((u, 1)).map(|j| g.has_edge(i, j)), Some(true));
            for j in g.left_neighbors(i) {
                assert!(w.distance(u, g.right_point(j).0).unwrap() <= 4);
            }
        }
        let all: Vec<PointRef> = (0..g.left_len())
            .map(|i| PointRef::new(Side::Pi, g.left_point(i)))
            .collect();
        assert_eq!(neighborhood(&g, &all).unwrap().len(), g.right_len());
    }

    #[test]
    fn max_clause_adds_edges_from_the_other_side() {
        use crate::radii::{BadSet, Clause, VertexRadius};
        let w = GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), 8, 0).unwrap();
        let mut pc = vec![0u32; w.len()];
        pc[0] = 1;
        let far = w.sphere(0, 5).vertices[0];
        let mut qc = vec![0u32; w.len()];
        qc[far] = 1;
        let pi = PointMultiset::from_counts(pc);
        let pip = PointMultiset::from_counts(qc);
        let field = |side, r: usize| RadiusField {
            side,
            params: RadiusParams::default(),
            values: vec![
                VertexRadius::Resolved {
                    r,
                    clause: Clause::Second
                };
                w.len()
            ],
            bad: BadSet {
                flags: Vec::new(),
                radius: 2,
                threshold: 0.9,
            },
        };
        let g = build_match_graph(&w, &pi, &pip, &field(Side::Pi, 4), &field(Side::PiPrime, 5));
        assert_eq!(g.edge_origin(0, 0), Some(EdgeOrigin::FromPiPrime));
        let g = build_match_graph(&w, &pi, &pip, &field(Side::Pi, 4), &field(Side::PiPrime, 4));
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn empty_right_side_leaves_left_isolated() {
        let g = MatchGraph::from_edges(3, 0, &[]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(neighborhood(&g, &[]).unwrap().is_empty());
    }

    #[test]
    fn mixed_sides_are_rejected() {
        let g = MatchGraph::from_edges(2, 2, &[(0, 0)]).unwrap();
        let a = [
            PointRef::new(Side::Pi, (0, 1)),
            PointRef::new(Side::PiPrime, (0, 1)),
        ];
        assert!(matches!(neighborhood(&g, &a), Err(Error::Contract(_))));
    }

    #[test]
    fn degenerate_density_is_one() {
        let (w, ones, _) = degenerate(6, 3);
        assert_eq!(density(&w, ones.points().map(|p| p.0)).value, 1.0);
        assert_eq!(density(&w, std::iter::empty()).value, 0.0);
    }
}
