//! Maximum-matching oracles sharing no code with the staged engine.

use std::collections::VecDeque;

use crate::bipartite::MatchGraph;

/// Maximum matching size and one maximum matching (left, right pairs), by
/// Hopcroft–Karp layered augmentation.
pub fn hopcroft_karp(g: &MatchGraph) -> (usize, Vec<(usize, usize)>) {
    const NIL: usize = usize::MAX;
    let nl = g.left_len();
    let nr = g.right_len();
    let adj: Vec<Vec<usize>> = (0..nl).map(|i| g.left_neighbors(i).collect()).collect();
    let mut ml = vec![NIL; nl];
    let mut mr = vec![NIL; nr];
    let mut dist = vec![0usize; nl];
    let mut size = 0;
    loop {
        let mut queue = VecDeque::new();
        let mut found = false;
        for i in 0..nl {
            if ml[i] == NIL {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let k = mr[j];
                if k == NIL {
                    found = true;
                } else if dist[k] == usize::MAX {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; nl];
        for i in 0..nl {
            if ml[i] == NIL && augment(i, &adj, &mut ml, &mut mr, &mut dist, &mut next) {
                size += 1;
            }
        }
    }
    let pairs = ml
        .iter()
        .enumerate()
        .filter(|(_, &j)| j != NIL)
        .map(|(i, &j)| (i, j))
        .collect();
    (size, pairs)
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    ml: &mut [usize],
    mr: &mut [usize],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    const NIL: usize = usize::MAX;
    while next[i] < adj[i].len() {
        let j = adj[i][next[i]];
        next[i] += 1;
        let k = mr[j];
        if k == NIL || (dist[k] == dist[i] + 1 && augment(k, adj, ml, mr, dist, next)) {
            ml[i] = j;
            mr[j] = i;
            return true;
        }
    }
    dist[i] = usize::MAX;
    false
}

/// Maximum matching size by exhaustive search over left points with a
/// bitmask of used right points. Exponential; for at most ~20 right points.
pub fn exhaustive_max_matching(g: &MatchGraph) -> usize {
    assert!(
        g.right_len() <= 24,
        "exhaustive oracle is for tiny instances"
    );
    let adj: Vec<Vec<usize>> = (0..g.left_len())
        .map(|i| g.left_neighbors(i).collect())
        .collect();
    let mut memo = std::collections::HashMap::new();
    best(0, 0u32, &adj, &mut memo)
}

fn best(
    i: usize,
    used: u32,
    adj: &[Vec<usize>],
    memo: &mut std::collections::HashMap<(usize, u32), usize>,
) -> usize {
    if i == adj.len() {
        return 0;
    }
    if let Some(&v) = memo.get(&(i, used)) {
        return v;
    }
    let mut value = best(i + 1, used, adj, memo);
    for &j in &adj[i] {
        if used >> j & 1 == 0 {
            value = value.max(1 + best(i + 1, used | 1 << j, adj, memo));
        }
    }
    memo.insert((i, used), value);
    value
}
