//! Enumeration of connected vertex sets through an anchor (ESU scheme), each
//! set visited exactly once.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    /// Do not extend the current set, keep enumerating siblings.
    Prune,
    Stop,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Enumeration {
    pub visited: u64,
    /// The size cap stopped at least one set that could have been extended.
    pub size_capped: bool,
    /// The visit budget ran out before the enumeration finished.
    pub budget_exhausted: bool,
    /// The visitor asked to stop.
    pub stopped: bool,
}

/// Fixed-size vertex bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits {
    words: Vec<u64>,
}

impl Bits {
    pub fn new(n: usize) -> Self {
        Bits {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        self.words[v / 64] &= !(1 << (v % 64));
    }

    pub fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn copy_from(&mut self, other: &Bits) {
        self.words.copy_from_slice(&other.words);
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Largest member, removed.
    pub fn pop_last(&mut self) -> Option<usize> {
        for (k, w) in self.words.iter_mut().enumerate().rev() {
            if *w != 0 {
                let bit = 63 - w.leading_zeros() as usize;
                *w &= !(1 << bit);
                return Some(k * 64 + bit);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    k * 64 + bit
                })
            })
        })
    }

    /// Members of `self & !minus`.
    pub fn iter_minus<'a>(&'a self, minus: &'a Bits) -> impl Iterator<Item = usize> + 'a {
        self.words
            .iter()
            .zip(&minus.words)
            .enumerate()
            .flat_map(|(k, (&a, &b))| {
                let mut w = a & !b;
                std::iter::from_fn(move || {
                    (w != 0).then(|| {
                        let bit = w.trailing_zeros() as usize;
                        w &= w - 1;
                        k * 64 + bit
                    })
                })
            })
    }
}

struct State<N, F> {
    max_size: usize,
    neighbors: N,
    /// Vertices that may ever join the set.
    eligible: Bits,
    budget: u64,
    visit: F,
    /// `covered[k]`: closed neighbourhood of the first `k + 1` members.
    covered: Vec<Bits>,
    /// `ext[k]`: extension candidates at depth `k`.
    ext: Vec<Bits>,
    nb: Bits,
    set: Vec<usize>,
    stats: Enumeration,
}

/// Visits every connected set `S` with `anchor ∈ S`, `|S| <= max_size` and all
/// vertices `allowed`. Connectivity is with respect to `neighbors`, which
/// writes the neighbours of a vertex into a cleared bitset and must describe
/// a symmetric relation on `0..n`.
///
/// With `min_anchor` only sets whose smallest vertex is `anchor` are visited,
/// so running over all anchors lists every connected set once.
#[allow(clippy::too_many_arguments)]
pub fn for_each_connected_set<N, A, F>(
    n: usize,
    anchor: usize,
    max_size: usize,
    neighbors: N,
    allowed: A,
    min_anchor: bool,
    budget: u64,
    visit: F,
) -> Enumeration
where
    N: FnMut(usize, &mut Bits),
    A: Fn(usize) -> bool,
    F: FnMut(&[usize]) -> Control,
{
    if max_size == 0 || !allowed(anchor) {
        return Enumeration::default();
    }
    let mut eligible = Bits::new(n);
    for u in 0..n {
        if u != anchor && (!min_anchor || u > anchor) && allowed(u) {
            eligible.insert(u);
        }
    }
    let mut st = State {
        max_size,
        neighbors,
        eligible,
        budget,
        visit,
        covered: Vec::new(),
        ext: Vec::new(),
        nb: Bits::new(n),
        set: Vec::with_capacity(max_size.min(n)),
        stats: Enumeration::default(),
    };
    st.grow(0, n);
    st.nb.clear();
    (st.neighbors)(anchor, &mut st.nb);
    st.covered[0].copy_from(&st.nb);
    st.covered[0].insert(anchor);
    for k in 0..st.nb.words.len() {
        st.ext[0].words[k] = st.nb.words[k] & st.eligible.words[k];
    }
    st.set.push(anchor);
    st.extend(0);
    st.stats
}

impl<N, F> State<N, F>
where
    N: FnMut(usize, &mut Bits),
    F: FnMut(&[usize]) -> Control,
{
    fn grow(&mut self, depth: usize, n: usize) {
        while self.covered.len() <= depth {
            self.covered.push(Bits::new(n));
            self.ext.push(Bits::new(n));
        }
    }

    /// Visits the current set, then its extensions by members of `ext[depth]`.
    /// Returns false when the whole enumeration must stop.
    fn extend(&mut self, depth: usize) -> bool {
        if self.stats.visited >= self.budget {
            self.stats.budget_exhausted = true;
            return false;
        }
        self.stats.visited += 1;
        match (self.visit)(&self.set) {
            Control::Stop => {
                self.stats.stopped = true;
                return false;
            }
            Control::Prune => return true,
            Control::Continue => {}
        }
        if self.set.len() == self.max_size {
            if !self.ext[depth].is_empty() {
                self.stats.size_capped = true;
            }
            return true;
        }
        let n = self.nb.words.len() * 64;
        self.grow(depth + 1, n);
        while let Some(w) = self.ext[depth].pop_last() {
            self.nb.clear();
            (self.neighbors)(w, &mut self.nb);
            let (lo, hi) = self.ext.split_at_mut(depth + 1);
            let (clo, chi) = self.covered.split_at_mut(depth + 1);
            let (cur_ext, next_ext) = (&lo[depth], &mut hi[0]);
            let (cur_cov, next_cov) = (&clo[depth], &mut chi[0]);
            for k in 0..next_ext.words.len() {
                let fresh = self.nb.words[k] & !cur_cov.words[k] & self.eligible.words[k];
                next_ext.words[k] = cur_ext.words[k] | fresh;
                next_cov.words[k] = cur_cov.words[k] | self.nb.words[k];
            }
            next_cov.insert(w);
            next_ext.remove(w);
            self.set.push(w);
            let keep_going = self.extend(depth + 1);
            self.set.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
}
