use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{GraphWindow, Vertex};

/// The selected subsequence and every condition evaluated on it.
///
/// The `stated_*` fields use the bounds as written, which measure a set's
/// spread by its size; that is exact for `r = 1`. An `r`-connected set `U`
/// can have diameter up to `r (|U| - 1)`, so the `scaled_*` fields multiply
/// every size term by `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyOutcome {
    /// Shortest index path in the auxiliary graph, from a set holding `u`.
    pub path: Vec<usize>,
    /// Selected indices `j_1, ..., j_n`, in path order.
    pub selected: Vec<usize>,
    pub dist_uv: usize,
    /// `dist(U_{j_k}, U_{j_k'}) > r` for all `k != k'`.
    pub separated: bool,
    /// `dist(U_{j_k}, U_{j_{k+1}}) <= |U_{j_k}| + |U_{j_{k+1}}| + 3r`.
    pub stated_gaps: bool,
    /// `dist(u, U_{j_1}) <= |U_{j_1}| + r`, and likewise for `v`.
    pub stated_ends: bool,
    /// `dist(u, v) <= 3rn + 3 Σ |U_{j_k}|`.
    pub stated_bound: bool,
    pub scaled_gaps: bool,
    pub scaled_ends: bool,
    /// `dist(u, v) <= 3rn + 3r Σ |U_{j_k}|`.
    pub scaled_bound: bool,
}

impl GreedyOutcome {
    pub fn stated_holds(&self) -> bool {
        self.separated && self.stated_gaps && self.stated_ends && self.stated_bound
    }

    pub fn scaled_holds(&self) -> bool {
        self.separated && self.scaled_gaps && self.scaled_ends && self.scaled_bound
    }
}

fn is_r_connected(window: &GraphWindow, set: &[Vertex], r: usize) -> bool {
    if set.is_empty() {
        return false;
    }
    let mut seen = vec![false; set.len()];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(a) = queue.pop_front() {
        for b in 0..set.len() {
            if !seen[b] && window.distance(set[a], set[b]).is_some_and(|d| d <= r) {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Selects a sparse subsequence of a shortest path of sets from `u` to `v`,
/// greedily by decreasing set size (ties to the earlier path position).
pub fn greedy_sparse_subpath(
    window: &GraphWindow,
    sets: &[Vec<Vertex>],
    u: Vertex,
    v: Vertex,
    r: usize,
) -> Result<GreedyOutcome> {
    if r == 0 {
        return Err(Error::Contract("r must be positive".into()));
    }
    if let Some(k) = sets.iter().position(|s| !is_r_connected(window, s, r)) {
        return Err(Error::Contract(format!(
            "set {k} is empty or not {r}-connected"
        )));
    }
    let mut union: Vec<Vertex> = sets.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    if !is_r_connected(window, &union, r) {
        return Err(Error::Contract(format!(
            "the union of the family is not {r}-connected"
        )));
    }
    if union.binary_search(&u).is_err() || union.binary_search(&v).is_err() {
        return Err(Error::Contract("u and v must lie in the union".into()));
    }
    let n = sets.len();
    let dist = |a: usize, b: usize| {
        window
            .set_distance(&sets[a], &sets[b])
            .expect("window is connected")
    };
    let adjacent: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).filter(|&b| b != a && dist(a, b) <= r).collect())
        .collect();

    // Multi-source BFS from the sets holding u to the first set holding v.
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for (k, s) in sets.iter().enumerate() {
        if s.contains(&u) {
            seen[k] = true;
            queue.push_back(k);
        }
    }
    let mut end = None;
    while let Some(a) = queue.pop_front() {
        if sets[a].contains(&v) {
            end = Some(a);
            break;
        }
        for &b in &adjacent[a] {
            if !seen[b] {
                seen[b] = true;
                prev[b] = a;
                queue.push_back(b);
            }
        }
    }
    let mut path =
        vec![end.ok_or_else(|| Error::Invariant("auxiliary graph is disconnected".into()))?];
    while prev[*path.last().expect("non-empty")] != usize::MAX {
        path.push(prev[*path.last().expect("non-empty")]);
    }
    path.reverse();

    // Greedy maximal sparse set of path positions.
    let m = path.len();
    let mut taken = vec![false; m];
    let mut blocked = vec![false; m];
    loop {
        let pick = (0..m)
            .filter(|&p| !taken[p] && !blocked[p])
            .max_by(|&a, &b| {
                sets[path[a]]
                    .len()
                    .cmp(&sets[path[b]].len())
                    .then(b.cmp(&a))
            });
        let Some(p) = pick else { break };
        taken[p] = true;
        if p > 0 {
            blocked[p - 1] = true;
        }
        if p + 1 < m {
            blocked[p + 1] = true;
        }
    }
    let selected: Vec<usize> = (0..m).filter(|&p| taken[p]).map(|p| path[p]).collect();

    let size = |k: usize| sets[k].len();
    let separated = selected
        .iter()
        .enumerate()
        .all(|(a, &x)| selected[a + 1..].iter().all(|&y| dist(x, y) > r));
    let gaps: Vec<(usize, usize, usize)> = selected
        .windows(2)
        .map(|w| (dist(w[0], w[1]), size(w[0]), size(w[1])))
        .collect();
    let stated_gaps = gaps.iter().all(|&(d, a, b)| d <= a + b + 3 * r);
    let scaled_gaps = gaps.iter().all(|&(d, a, b)| d <= r * (a + b) + 3 * r);
    let (first, last) = (selected[0], *selected.last().expect("path is non-empty"));
    let du = window
        .set_distance(&[u], &sets[first])
        .expect("window is connected");
    let dv = window
        .set_distance(&[v], &sets[last])
        .expect("window is connected");
    let stated_ends = du <= size(first) + r && dv <= size(last) + r;
    let scaled_ends = du <= r * size(first) + r && dv <= r * size(last) + r;
    let dist_uv = window.distance(u, v).expect("window is connected");
    let total: usize = selected.iter().map(|&k| size(k)).sum();
    let count = selected.len();
    Ok(GreedyOutcome {
        path,
        dist_uv,
        separated,
        stated_gaps,
        stated_ends,
        stated_bound: dist_uv <= 3 * r * count + 3 * total,
        scaled_gaps,
        scaled_ends,
        scaled_bound: dist_uv <= 3 * r * count + 3 * r * total,
        selected,
    })
}

/// A random family of `r`-connected sets with `r`-connected union, built
/// by growing each set from a vertex within distance `r` of the sets so far,
/// and two random points `u`, `v` of the union.
pub fn random_family(
    window: &GraphWindow,
    r: usize,
    sets: usize,
    max_size: usize,
    rng: &mut impl Rng,
) -> (Vec<Vec<Vertex>>, Vertex, Vertex) {
    let mut scratch = window.scratch();
    let mut family: Vec<Vec<Vertex>> = Vec::with_capacity(sets);
    let mut union: Vec<Vertex> = Vec::new();
    for _ in 0..sets.max(1) {
        let start = if union.is_empty() {
            rng.random_range(0..window.len())
        } else {
            let near = window.set_ball_with(&mut scratch, &union, r).vertices;
            near[rng.random_range(0..near.len())]
        };
        let size = rng.random_range(1..=max_size.max(1));
        let mut set = vec![start];
        while set.len() < size {
            let mut near: Vec<Vertex> = window
                .set_ball_with(&mut scratch, &set, r)
                .vertices
                .into_iter()
                .filter(|x| !set.contains(x))
                .collect();
            if near.is_empty() {
                break;
            }
            near.sort_unstable();
            set.push(near[rng.random_range(0..near.len())]);
        }
        union.extend(&set);
        union.sort_unstable();
        union.dedup();
        family.push(set);
    }
    let u = union[rng.random_range(0..union.len())];
    let v = union[rng.random_range(0..union.len())];
    (family, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::GraphFamily;

    fn path_graph(n: usize) -> GraphWindow {
        let adjacency = (0..n)
            .map(|i| {
                let mut a = Vec::new();
                if i > 0 {
                    a.push(i - 1);
                }
                if i + 1 < n {
                    a.push(i + 1);
                }
                a
            })
            .collect();
        GraphWindow::build(GraphFamily::explicit(adjacency).unwrap(), 0, 0).unwrap()
    }

    #[test]
    fn single_set_is_selected_alone() {
        let w = path_graph(10);
        let out = greedy_sparse_subpath(&w, &[vec![2, 3, 4]], 2, 4, 1).unwrap();
        assert_eq!(out.selected, vec![0]);
        assert!(out.stated_holds() && out.scaled_holds());
    }

    #[test]
    fn small_bridge_is_dropped() {
        let w = path_graph(20);
        let sets = vec![vec![0, 1, 2, 3, 4], vec![5], vec![6, 7, 8, 9, 10]];
        let out = greedy_sparse_subpath(&w, &sets, 0, 10, 1).unwrap();
        assert_eq!(out.path, vec![0, 1, 2]);
        assert_eq!(out.selected, vec![0, 2]);
        assert!(out.stated_gaps && out.stated_holds());
    }

    #[test]
    fn spread_sets_break_the_unscaled_gap_bound() {
        let w = path_graph(24);
        let sets = vec![vec![0, 1, 2, 3], vec![7, 11, 15, 19], vec![23]];
        let out = greedy_sparse_subpath(&w, &sets, 0, 23, 4).unwrap();
        assert_eq!(out.selected, vec![0, 2]);
        assert!(out.separated);
        assert!(!out.stated_gaps);
        assert!(out.scaled_holds());
    }

    #[test]
    fn disconnected_union_is_rejected() {
        let w = path_graph(12);
        let sets = vec![vec![0, 1], vec![8, 9]];
        assert!(matches!(
            greedy_sparse_subpath(&w, &sets, 0, 9, 2),
            Err(Error::Contract(_))
        ));
    }
}
