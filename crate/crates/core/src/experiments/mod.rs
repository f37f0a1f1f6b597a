//! Statistical harness over completed runs: tails, lemma checks, decay tables.
//!
//! Statements that hold per realization are checked exactly and counted as
//! failures; distributional ones are reported with trial counts and standard
//! errors but never asserted.

mod greedy;
mod lemmas;
mod stats;
mod tail;

pub use greedy::{greedy_sparse_subpath, random_family, GreedyOutcome};
pub use lemmas::{
    boosted_hall_report, boosted_hall_row, verify_boosted_hall, verify_chebyshev,
    verify_discrepancy, verify_indep_set, DiscrepancyGroup, LemmaReport, LemmaRow, SetGenerator,
};
pub use stats::{component_scan, fit_line, pn_decay, ComponentScan, PnDecay, PnRow};
pub use tail::{
    matching_distance_tail, tail_curve_of_runs, tail_hole_comparison, HoleRow, TailCurve, TailRow,
    TailSample,
};
