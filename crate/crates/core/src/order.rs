//! Total order on vertices from sphere-count signatures.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::graphs::{GraphWindow, Vertex};
use crate::processes::PointMultiset;

/// `(|Π ∩ S_r(v)|)_{r = 0..=r_max}`; `None` where the sphere leaves the window.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SphereSignature {
    pub vertex: Vertex,
    pub counts: Vec<Option<u64>>,
}

impl SphereSignature {
    /// Counts up to the first incomplete sphere.
    pub fn complete_prefix(&self) -> Vec<u64> {
        self.counts.iter().map_while(|c| *c).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.counts.iter().all(Option::is_some)
    }

    pub fn csv(&self) -> String {
        self.counts
            .iter()
            .map(|c| c.map_or_else(|| "-".to_string(), |x| x.to_string()))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Lexicographic comparison with absent entries above every count.
pub fn compare_signatures(a: &SphereSignature, b: &SphereSignature) -> Ordering {
    for (x, y) in a.counts.iter().zip(&b.counts) {
        let o = match (x, y) {
            (Some(x), Some(y)) => x.cmp(y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    a.counts.len().cmp(&b.counts.len())
}

pub fn sphere_signature(
    pi: &PointMultiset,
    window: &GraphWindow,
    v: Vertex,
    r_max: usize,
) -> SphereSignature {
    let mut found = Vec::new();
    window.bfs_within(&mut window.scratch(), &[v], r_max, &mut found);
    signature_from_bfs(pi, window, v, r_max, &found)
}

fn signature_from_bfs(
    pi: &PointMultiset,
    window: &GraphWindow,
    v: Vertex,
    r_max: usize,
    found: &[(Vertex, usize)],
) -> SphereSignature {
    let mut counts = vec![0u64; r_max + 1];
    for &(u, d) in found {
        counts[d] += pi.count(u) as u64;
    }
    SphereSignature {
        vertex: v,
        counts: counts
            .into_iter()
            .enumerate()
            .map(|(r, c)| window.ball_complete(v, r).then_some(c))
            .collect(),
    }
}

/// Exact dyadic value of the digit string `1^{a_1} 0 1^{a_2} 0 ...`, as a
/// reduced fraction `(numerator, denominator)`.
pub fn psi(seq: &[u64]) -> (BigUint, BigUint) {
    let mut num = BigUint::zero();
    let mut bits: u64 = 0;
    for &a in seq {
        // Append `a` ones and a zero: num <- (num << (a+1)) | ((2^a - 1) << 1).
        let ones = (BigUint::one() << a) - BigUint::one();
        num = (num << (a + 1)) | (ones << 1u32);
        bits += a + 1;
    }
    if num.is_zero() {
        return (num, BigUint::one());
    }
    let shift = num.trailing_zeros().unwrap_or(0).min(bits);
    (num >> shift, BigUint::one() << (bits - shift))
}

/// Recovers the sequence from `psi` given its length.
pub fn psi_decode(num: &BigUint, den: &BigUint, len: usize) -> Option<Vec<u64>> {
    let bits = den.bits().checked_sub(1)?;
    if den != &(BigUint::one() << bits) {
        return None;
    }
    let mut out = Vec::with_capacity(len);
    let mut run = 0u64;
    for k in (0..bits).rev() {
        if num.bit(k) {
            run += 1;
        } else {
            out.push(run);
            run = 0;
        }
    }
    // Reduction strips the trailing zero digits: the last run's separator
    // and any zero entries after it.
    if run > 0 {
        out.push(run);
    }
    while out.len() < len {
        out.push(0);
    }
    (out.len() == len).then_some(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderFactor {
    pub r_max: usize,
    pub signatures: Vec<SphereSignature>,
    /// Position of each vertex in the total order.
    pub ranks: Vec<usize>,
    /// Vertices whose signature ties another's, so the id fallback decided.
    pub fallback: Vec<bool>,
    /// Groups of vertices sharing a signature.
    pub tie_groups: Vec<Vec<Vertex>>,
}

impl OrderFactor {
    pub fn compare(&self, u: Vertex, v: Vertex) -> Ordering {
        self.ranks[u].cmp(&self.ranks[v])
    }

    /// Number of unordered pairs that needed the fallback.
    pub fn collision_pairs(&self) -> u64 {
        self.tie_groups
            .iter()
            .map(|g| (g.len() as u64) * (g.len() as u64 - 1) / 2)
            .sum()
    }

    pub fn core_collision_pairs(&self, window: &GraphWindow) -> u64 {
        self.tie_groups
            .iter()
            .map(|g| g.iter().filter(|&&v| window.in_core(v)).count() as u64)
            .map(|k| k * k.saturating_sub(1) / 2)
            .sum()
    }

    /// Lines `vertex_id signature_csv psi_numerator psi_denominator fallback_flag`;
    /// `psi` is taken over the complete prefix of the signature.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.signatures {
            let (num, den) = psi(&s.complete_prefix());
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                s.vertex,
                s.csv(),
                num,
                den,
                u8::from(self.fallback[s.vertex])
            );
        }
        out
    }
}

pub fn build_order(pi: &PointMultiset, window: &GraphWindow, r_max: usize) -> OrderFactor {
    let signatures: Vec<SphereSignature> = window
        .vertices()
        .into_par_iter()
        .map_init(
            || (window.scratch(), Vec::new()),
            |(scratch, found), v| {
                found.clear();
                window.bfs_within(scratch, &[v], r_max, found);
                signature_from_bfs(pi, window, v, r_max, found)
            },
        )
        .collect();
    let mut sorted: Vec<Vertex> = window.vertices().collect();
    sorted.par_sort_unstable_by(|&a, &b| {
        compare_signatures(&signatures[a], &signatures[b]).then(a.cmp(&b))
    });
    let mut ranks = vec![0; window.len()];
    for (pos, &v) in sorted.iter().enumerate() {
        ranks[v] = pos;
    }
    let mut fallback = vec![false; window.len()];
    let mut tie_groups = Vec::new();
    let mut k = 0;
    while k < sorted.len() {
        let mut end = k + 1;
        while end < sorted.len() && signatures[sorted[end]].counts == signatures[sorted[k]].counts {
            end += 1;
        }
        if end - k > 1 {
            for &v in &sorted[k..end] {
                fallback[v] = true;
            }
            tie_groups.push(sorted[k..end].to_vec());
        }
        k = end;
    }
    OrderFactor {
        r_max,
        signatures,
        ranks,
        fallback,
        tie_groups,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderPair {
    pub x: i64,
    pub lower: Vertex,
    pub upper: Vertex,
    pub tied: bool,
    pub lower_count: u32,
    pub upper_count: u32,
}

/// Vertical pairs `{(x,0), (x,1)}` of a ladder window and whether their
/// signatures coincide. For every radius `r >= 2` both spheres are the same
/// set, so a tie happens exactly when the two vertices carry equal counts.
pub fn ladder_vertical_pairs(
    order: &OrderFactor,
    pi: &PointMultiset,
    window: &GraphWindow,
) -> Vec<LadderPair> {
    let mut pairs = Vec::new();
    let depth = window.depth() as i64;
    for x in -depth..=depth {
        let (Some(lower), Some(upper)) = (
            window.vertex_of_coords((x, 0)),
            window.vertex_of_coords((x, 1)),
        ) else {
            continue;
        };
        if !window.in_core(lower) || !window.in_core(upper) {
            continue;
        }
        pairs.push(LadderPair {
            x,
            lower,
            upper,
            tied: order.signatures[lower].counts == order.signatures[upper].counts,
            lower_count: pi.count(lower),
            upper_count: pi.count(upper),
        });
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::GraphFamily;
    use crate::processes::{sample, ProcessSpec, Side};

    fn frac(n: u64, d: u64) -> (BigUint, BigUint) {
        (BigUint::from(n), BigUint::from(d))
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&[0, 0, 0]), frac(0, 1));
        assert_eq!(psi(&[1, 0, 0]), frac(1, 2));
        assert_eq!(psi(&[2, 0]), frac(3, 4));
        assert_eq!(psi(&[0, 1]), frac(1, 4));
    }

    #[test]
    fn psi_decodes() {
        for seq in [
            vec![0, 0, 0],
            vec![3, 0, 2],
            vec![1, 1, 1, 0],
            vec![0, 0, 5],
        ] {
            let (n, d) = psi(&seq);
            assert_eq!(psi_decode(&n, &d, seq.len()), Some(seq));
        }
    }

    #[test]
    fn degenerate_signature_counts_sphere_sizes() {
        let w = GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), 6, 3).unwrap();
        let ones = sample(&ProcessSpec::degenerate(), &w, 1, Side::Pi).unwrap();
        let s = sphere_signature(&ones, &w, 0, 4);
        assert_eq!(
            s.counts,
            vec![Some(1), Some(3), Some(6), Some(12), Some(24)]
        );
        let edge = sphere_signature(&ones, &w, w.len() - 1, 2);
        assert_eq!(edge.counts, vec![Some(1), None, None]);
    }

    #[test]
    fn empty_and_single_point_signatures() {
        let w = GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), 5, 3).unwrap();
        let empty = PointMultiset::empty(w.len());
        assert!(sphere_signature(&empty, &w, 0, 3)
            .counts
            .iter()
            .all(|&c| c == Some(0)));
        let mut counts = vec![0; w.len()];
        counts[0] = 4;
        let single = PointMultiset::from_counts(counts);
        assert_eq!(
            sphere_signature(&single, &w, 0, 3).counts,
            vec![Some(4), Some(0), Some(0), Some(0)]
        );
    }

    #[test]
    fn degenerate_order_falls_back_everywhere() {
        let w = GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), 6, 3).unwrap();
        let ones = sample(&ProcessSpec::degenerate(), &w, 1, Side::Pi).unwrap();
        let order = build_order(&ones, &w, 3);
        let core = w.core();
        assert!(core.iter().all(|&v| order.fallback[v]));
        assert_eq!(
            order.core_collision_pairs(&w),
            (core.len() * (core.len() - 1) / 2) as u64
        );
        let mut ranks = order.ranks.clone();
        ranks.sort_unstable();
        assert_eq!(ranks, (0..w.len()).collect::<Vec<_>>());
    }

    #[test]
    fn ladder_ties_match_equal_counts() {
        let w = GraphWindow::build(GraphFamily::LadderDiagonal, 12, 4).unwrap();
        let pi = sample(&ProcessSpec::Poisson, &w, 3, Side::Pi).unwrap();
        let order = build_order(&pi, &w, 4);
        let pairs = ladder_vertical_pairs(&order, &pi, &w);
        assert!(!pairs.is_empty());
        for p in pairs {
            assert_eq!(p.tied, p.lower_count == p.upper_count);
        }
    }
}
