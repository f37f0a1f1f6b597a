use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bipartite::{mean_stderr, neighborhood, MatchGraph, PointRef};
use crate::error::{Error, Result};
use crate::graphs::{spectral_radius, GraphWindow, SpectralMethod, Vertex};
use crate::matching::Matching;
use crate::pipeline::Realization;
use crate::processes::{landing, poisson_count, ProcessSpec, Side};
use crate::rng::{self, Role};

use super::stats::fit_line;

/// A vertex set built from the counts of one process at each vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetGenerator {
    All,
    Empty,
    /// `{v : ℓ_v >= k}`.
    MinLevel(u32),
}

impl SetGenerator {
    pub fn contains(self, count: u32) -> bool {
        match self {
            SetGenerator::All => true,
            SetGenerator::Empty => false,
            SetGenerator::MinLevel(k) => count >= k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub aux: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyGroup {
    /// `|U^{+r}|`.
    pub size: usize,
    pub trials: usize,
    pub violations: usize,
    pub frequency: f64,
    pub stderr: f64,
}

/// Per-trial sides of an inequality `lhs >= rhs` (or `lhs <= rhs` where the
/// statement is an upper bound), with exact failure counts kept apart from
/// the statistical violations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub id: String,
    pub lhs_name: String,
    pub rhs_name: String,
    pub aux_names: Vec<String>,
    pub rows: Vec<LemmaRow>,
    pub trials: usize,
    pub violations: usize,
    /// Failed per-realization assertions; nonzero means a bug.
    pub exact_failures: usize,
    pub lhs_mean: f64,
    pub lhs_stderr: f64,
    pub rhs_mean: f64,
    pub rhs_stderr: f64,
    pub groups: Vec<DiscrepancyGroup>,
    pub slope: Option<f64>,
    pub notes: Vec<String>,
}

impl LemmaReport {
    pub fn from_rows(id: &str, lhs: &str, rhs: &str, aux: &[&str], rows: Vec<LemmaRow>) -> Self {
        let (lhs_mean, lhs_stderr) = mean_stderr(&rows.iter().map(|r| r.lhs).collect::<Vec<_>>());
        let (rhs_mean, rhs_stderr) = mean_stderr(&rows.iter().map(|r| r.rhs).collect::<Vec<_>>());
        LemmaReport {
            id: id.to_string(),
            lhs_name: lhs.to_string(),
            rhs_name: rhs.to_string(),
            aux_names: aux.iter().map(|s| s.to_string()).collect(),
            trials: rows.len(),
            violations: rows.iter().filter(|r| !r.holds).count(),
            exact_failures: 0,
            lhs_mean,
            lhs_stderr,
            rhs_mean,
            rhs_stderr,
            rows,
            groups: Vec::new(),
            slope: None,
            notes: Vec::new(),
        }
    }

    /// `trial,<lhs>,<rhs>,holds,<aux...>` with one row per trial.
    pub fn csv(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "trial,{},{},holds", self.lhs_name, self.rhs_name);
        for a in &self.aux_names {
            let _ = write!(out, ",{a}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{},{}", r.trial, r.lhs, r.rhs, u8::from(r.holds));
            for a in &r.aux {
                let _ = write!(out, ",{a}");
            }
            out.push('\n');
        }
        out
    }
}

fn core_fraction(window: &GraphWindow, members: &[bool]) -> f64 {
    let core = window.core();
    core.iter().filter(|&&v| members[v]).count() as f64 / core.len().max(1) as f64
}

/// `p' >= p / (ρ² (1 - p) + p)` for `A` built from a fresh Poisson process
/// per trial and `N(A)` the vertices with a neighbour in `A`.
pub fn verify_chebyshev(
    window: &GraphWindow,
    generator: SetGenerator,
    trials: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let family = window.family();
    if !family.is_non_amenable() {
        return Err(Error::Contract(format!(
            "the density bound needs spectral radius below 1; {} is amenable",
            family.name()
        )));
    }
    if window.core_margin() == 0 {
        return Err(Error::Contract(
            "neighbourhoods of core vertices need a core margin of at least 1".into(),
        ));
    }
    let rho = spectral_radius(family, SpectralMethod::ClosedForm)?.value;
    let rho2 = rho * rho;
    let rows: Vec<LemmaRow> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = rng::trial_seed(seed, t as u64);
            let in_a: Vec<bool> = window
                .vertices()
                .map(|v| generator.contains(poisson_count(ts, Side::Pi, v)))
                .collect();
            let in_n: Vec<bool> = window
                .vertices()
                .map(|v| window.neighbors(v).any(|u| in_a[u]))
                .collect();
            let p = core_fraction(window, &in_a);
            let p_prime = core_fraction(window, &in_n);
            let bound = p / (rho2 * (1.0 - p) + p);
            LemmaRow {
                trial: t,
                lhs: p_prime,
                rhs: bound,
                holds: p_prime >= bound,
                aux: vec![p],
            }
        })
        .collect();
    let mut report = LemmaReport::from_rows("chebyshev", "p_prime", "bound", &["p"], rows);
    report.notes.push(format!("rho={rho}"));
    Ok(report)
}

/// `p(N_𝒢(A)) >= min(2 p(A), 4/5)` on one realization, with `A` the kept
/// `Π` points at core vertices selected by `generator`.
pub fn boosted_hall_row(
    window: &GraphWindow,
    run: &Realization,
    generator: SetGenerator,
    trial: usize,
) -> Result<LemmaRow> {
    let core_len = window.core_len().max(1) as f64;
    let g = &run.graph;
    let a: Vec<PointRef> = (0..g.left_len())
        .map(|i| PointRef::new(Side::Pi, g.left_point(i)))
        .filter(|p| window.in_core(p.vertex) && generator.contains(run.pi.count(p.vertex)))
        .collect();
    let n = neighborhood(g, &a)?;
    let pa = a.len() as f64 / core_len;
    let pn = n.iter().filter(|p| window.in_core(p.vertex)).count() as f64 / core_len;
    let rhs = (2.0 * pa).min(0.8);
    Ok(LemmaRow {
        trial,
        lhs: pn,
        rhs,
        holds: pn >= rhs,
        aux: vec![pa],
    })
}

/// Assembles per-trial rows into the boosted-Hall report. Diagnostic: finite
/// windows may violate the inequality, and each violation is noted.
pub fn boosted_hall_report(rows: Vec<LemmaRow>) -> LemmaReport {
    let notes = rows
        .iter()
        .filter(|r| !r.holds)
        .map(|r| format!("violation in trial {}: p(N)={} < {}", r.trial, r.lhs, r.rhs))
        .collect();
    let mut report = LemmaReport::from_rows(
        "boosted_hall",
        "p_neighbourhood",
        "min_2p_4_5",
        &["p_a"],
        rows,
    );
    report.notes = notes;
    report
}

pub fn verify_boosted_hall(
    window: &GraphWindow,
    runs: &[Realization],
    generator: SetGenerator,
) -> Result<LemmaReport> {
    let rows = runs
        .iter()
        .enumerate()
        .map(|(t, run)| boosted_hall_row(window, run, generator, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(boosted_hall_report(rows))
}

/// Alternating reachability from the unmatched points under `m`: `A_k` holds
/// the points reachable by an even alternating path of length at most `2k`,
/// `B_k` the points reachable by an odd one of length at most `2k + 1`.
struct Layers {
    a_left: Vec<bool>,
    a_right: Vec<bool>,
    b_left: Vec<bool>,
    b_right: Vec<bool>,
    frontier_left: Vec<usize>,
    frontier_right: Vec<usize>,
}

impl Layers {
    fn new(g: &MatchGraph, m: &Matching) -> Self {
        let frontier_left: Vec<usize> = m.unmatched_left().collect();
        let frontier_right: Vec<usize> = m.unmatched_right().collect();
        let mut a_left = vec![false; g.left_len()];
        let mut a_right = vec![false; g.right_len()];
        for &i in &frontier_left {
            a_left[i] = true;
        }
        for &j in &frontier_right {
            a_right[j] = true;
        }
        Layers {
            a_left,
            a_right,
            b_left: vec![false; g.left_len()],
            b_right: vec![false; g.right_len()],
            frontier_left,
            frontier_right,
        }
    }

    /// `B_k = N(A_k)` and `A_{k+1} = A_k ∪ mates(B_k)`; false once nothing grows.
    /// Returns the number of unmatched points found in `B_k`.
    fn advance(&mut self, g: &MatchGraph, m: &Matching) -> (bool, usize) {
        let mut unmatched_b = 0;
        let mut next_left = Vec::new();
        let mut next_right = Vec::new();
        for &i in &self.frontier_left {
            for j in g.left_neighbors(i) {
                if self.b_right[j] {
                    continue;
                }
                self.b_right[j] = true;
                match m.mate_of_right(j) {
                    None => unmatched_b += 1,
                    Some(k) if !self.a_left[k] => {
                        self.a_left[k] = true;
                        next_left.push(k);
                    }
                    Some(_) => {}
                }
            }
        }
        for &j in &self.frontier_right {
            for i in g.right_neighbors(j) {
                if self.b_left[i] {
                    continue;
                }
                self.b_left[i] = true;
                match m.mate_of_left(i) {
                    None => unmatched_b += 1,
                    Some(k) if !self.a_right[k] => {
                        self.a_right[k] = true;
                        next_right.push(k);
                    }
                    Some(_) => {}
                }
            }
        }
        let grew = !next_left.is_empty() || !next_right.is_empty();
        self.frontier_left = next_left;
        self.frontier_right = next_right;
        (grew, unmatched_b)
    }

    /// Edges of `𝒢` with both ends in `A`.
    fn internal_edges(&self, g: &MatchGraph) -> usize {
        g.edges()
            .filter(|&(i, j)| self.a_left[i] && self.a_right[j])
            .count()
    }
}

/// Replays the reachability layers on the matching after `stage`. For
/// `k < stage`, `A_k` must be independent and `B_k` fully matched; both are
/// exact. The reported quantity is `min(p(A_k ∩ Π), p(A_k ∩ Π′))` against 1/3.
pub fn verify_indep_set(
    window: &GraphWindow,
    run: &Realization,
    stage: usize,
) -> Result<LemmaReport> {
    let g = &run.graph;
    if stage == 0 || stage > run.outcome.snapshots.len() {
        return Err(Error::Contract(format!(
            "stage {stage} outside the {} recorded stages",
            run.outcome.snapshots.len()
        )));
    }
    let m = run.outcome.snapshot(g, stage);
    let core_len = window.core_len().max(1) as f64;
    let density = |marks: &[bool], side: Side| -> f64 {
        marks
            .iter()
            .enumerate()
            .filter(|&(i, &on)| on && window.in_core(g.point(side, i).0))
            .count() as f64
            / core_len
    };
    let mut layers = Layers::new(g, &m);
    let mut rows = Vec::new();
    let mut failures = 0;
    let mut notes = Vec::new();
    for k in 0..stage {
        let internal = layers.internal_edges(g);
        let pl = density(&layers.a_left, Side::Pi);
        let pr = density(&layers.a_right, Side::PiPrime);
        let (grew, unmatched_b) = layers.advance(g, &m);
        if internal > 0 {
            failures += 1;
            notes.push(format!("stage {stage}: A_{k} spans {internal} edges"));
        }
        if unmatched_b > 0 {
            failures += 1;
            notes.push(format!(
                "stage {stage}: B_{k} holds {unmatched_b} unmatched points"
            ));
        }
        let lhs = pl.min(pr);
        rows.push(LemmaRow {
            trial: k,
            lhs,
            rhs: 1.0 / 3.0,
            holds: lhs <= 1.0 / 3.0,
            aux: vec![stage as f64, pl, pr, internal as f64, unmatched_b as f64],
        });
        if !grew {
            break;
        }
    }
    let mut report = LemmaReport::from_rows(
        "indep_set",
        "min_density",
        "one_third",
        &[
            "stage",
            "p_a_pi",
            "p_a_pi_prime",
            "internal_edges",
            "unmatched_in_b",
        ],
        rows,
    );
    report.exact_failures = failures;
    report.notes = notes;
    Ok(report)
}

/// Points of `spec` landing in `set` under `seed`; `sources` must contain
/// every origin that can land there.
fn count_points(
    spec: &ProcessSpec,
    window: &GraphWindow,
    seed: u64,
    side: Side,
    set: &[Vertex],
    in_set: &[bool],
    sources: &[Vertex],
) -> u64 {
    match spec {
        ProcessSpec::Poisson => set
            .iter()
            .map(|&v| u64::from(poisson_count(seed, side, v)))
            .sum(),
        ProcessSpec::Perturbed { law } => sources
            .iter()
            .filter(|&&o| landing(window, law, seed, side, o).is_some_and(|l| in_set[l]))
            .count() as u64,
    }
}

/// Connected set of `size` vertices grown uniformly at random from a start
/// in `allowed`, staying inside `allowed`. May come out smaller when boxed in.
fn random_connected_set(
    window: &GraphWindow,
    allowed: &[bool],
    starts: &[Vertex],
    size: usize,
    rng: &mut impl Rng,
) -> Vec<Vertex> {
    let mut set = vec![starts[rng.random_range(0..starts.len())]];
    while set.len() < size {
        let mut frontier: Vec<Vertex> = set
            .iter()
            .flat_map(|&v| window.neighbors(v))
            .filter(|&u| allowed[u] && !set.contains(&u))
            .collect();
        frontier.sort_unstable();
        frontier.dedup();
        if frontier.is_empty() {
            break;
        }
        set.push(frontier[rng.random_range(0..frontier.len())]);
    }
    set
}

/// Frequency of `|Π′ ∩ U^{+r}| < r |Π ∩ U|` over random connected core sets
/// `U` of size `1..=max_set`, grouped by `|U^{+r}|`, with the slope of the
/// log-frequency against that size.
pub fn verify_discrepancy(
    window: &GraphWindow,
    pi: &ProcessSpec,
    pi_prime: &ProcessSpec,
    r: usize,
    max_set: usize,
    trials: u64,
    seed: u64,
) -> Result<LemmaReport> {
    let reach = r + pi.d_max().max(pi_prime.d_max());
    let allowed: Vec<bool> = window
        .vertices()
        .map(|v| window.ball_complete(v, reach))
        .collect();
    let starts: Vec<Vertex> = window.core().into_iter().filter(|&v| allowed[v]).collect();
    if starts.is_empty() || max_set == 0 {
        return Err(Error::Contract(format!(
            "no core vertex has a complete radius-{reach} ball for the set sampler"
        )));
    }
    let rows: Vec<LemmaRow> = (0..trials)
        .into_par_iter()
        .map_init(
            || {
                (
                    window.scratch(),
                    vec![false; window.len()],
                    vec![false; window.len()],
                )
            },
            |(scratch, in_u, in_ball), t| {
                let mut sampler = rng::stream(seed, Role::SetSampler, t);
                let size = sampler.random_range(1..=max_set);
                let u = random_connected_set(window, &allowed, &starts, size, &mut sampler);
                let ball = window.set_ball_with(scratch, &u, r).vertices;
                let ts = rng::trial_seed(seed, t);
                for &v in &u {
                    in_u[v] = true;
                }
                for &v in &ball {
                    in_ball[v] = true;
                }
                let u_sources = window.set_ball_with(scratch, &u, pi.d_max()).vertices;
                let ball_sources = window
                    .set_ball_with(scratch, &ball, pi_prime.d_max())
                    .vertices;
                let n_pi = count_points(pi, window, ts, Side::Pi, &u, in_u, &u_sources);
                let n_prime = count_points(
                    pi_prime,
                    window,
                    ts,
                    Side::PiPrime,
                    &ball,
                    in_ball,
                    &ball_sources,
                );
                for &v in &u {
                    in_u[v] = false;
                }
                for &v in &ball {
                    in_ball[v] = false;
                }
                let lhs = n_prime as f64;
                let rhs = (r as u64 * n_pi) as f64;
                LemmaRow {
                    trial: t as usize,
                    lhs,
                    rhs,
                    holds: lhs >= rhs,
                    aux: vec![u.len() as f64, ball.len() as f64],
                }
            },
        )
        .collect();
    let mut sizes: Vec<usize> = rows.iter().map(|row| row.aux[1] as usize).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let groups: Vec<DiscrepancyGroup> = sizes
        .into_iter()
        .map(|size| {
            let members: Vec<&LemmaRow> = rows
                .iter()
                .filter(|row| row.aux[1] as usize == size)
                .collect();
            let violations = members.iter().filter(|row| !row.holds).count();
            let n = members.len();
            let frequency = violations as f64 / n as f64;
            DiscrepancyGroup {
                size,
                trials: n,
                violations,
                frequency,
                stderr: (frequency * (1.0 - frequency) / n as f64).sqrt(),
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = groups
        .iter()
        .filter(|g| g.violations > 0)
        .map(|g| (g.size as f64, g.frequency.ln()))
        .unzip();
    let mut report = LemmaReport::from_rows(
        "discrepancy",
        "pi_prime_in_ball",
        "r_times_pi_in_u",
        &["u_size", "ball_size"],
        rows,
    );
    report.slope = fit_line(&xs, &ys).map(|(s, _)| s);
    report.groups = groups;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::GraphFamily;

    fn tree(depth: usize, m: usize) -> GraphWindow {
        GraphWindow::build(GraphFamily::regular_tree(3).unwrap(), depth, m).unwrap()
    }

    #[test]
    fn chebyshev_trivial_sets() {
        let w = tree(6, 1);
        let all = verify_chebyshev(&w, SetGenerator::All, 3, 1).unwrap();
        assert!(all
            .rows
            .iter()
            .all(|r| r.lhs == 1.0 && r.rhs == 1.0 && r.holds));
        let none = verify_chebyshev(&w, SetGenerator::Empty, 3, 1).unwrap();
        assert!(none
            .rows
            .iter()
            .all(|r| r.lhs == 0.0 && r.rhs == 0.0 && r.holds));
    }

    #[test]
    fn chebyshev_refuses_amenable_windows() {
        let w = GraphWindow::build(GraphFamily::LadderDiagonal, 6, 1).unwrap();
        assert!(matches!(
            verify_chebyshev(&w, SetGenerator::All, 1, 1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn discrepancy_at_radius_zero_never_fires() {
        let w = tree(5, 2);
        let rep = verify_discrepancy(
            &w,
            &ProcessSpec::degenerate(),
            &ProcessSpec::degenerate(),
            0,
            3,
            200,
            4,
        )
        .unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn random_sets_are_connected() {
        let w = tree(6, 2);
        let allowed = vec![true; w.len()];
        let starts = w.core();
        let mut rng = rng::stream(5, Role::SetSampler, 0);
        for size in 1..8 {
            let u = random_connected_set(&w, &allowed, &starts, size, &mut rng);
            assert_eq!(u.len(), size);
            for (k, &v) in u.iter().enumerate().skip(1) {
                assert!(u[..k].iter().any(|&x| w.distance(x, v) == Some(1)));
            }
        }
    }
}
