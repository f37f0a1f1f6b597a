//! Command-line front end: config loading, subcommands and artifacts.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{FamilyKind, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    component_scan, greedy_sparse_subpath, matching_distance_tail, pn_decay, random_family,
    tail_hole_comparison, verify_boosted_hall, verify_chebyshev, verify_discrepancy,
    verify_indep_set, HoleRow, LemmaReport, PnDecay, SetGenerator, TailCurve, TailSample,
};
use crate::graphs::GraphWindow;
use crate::order::{build_order, ladder_vertical_pairs};
use crate::output::Artifacts;
use crate::pipeline::{Pipeline, Realization};
use crate::processes::{hole_probability, HoleEstimate, ProcessSpec};
use crate::radii::{CensorReason, Clause, RadiusField, VertexRadius};
use crate::rng::{self, Role};

#[derive(Debug, Parser)]
#[command(
    name = "factor-matching",
    version,
    about = "Factor matchings of point processes on graph windows"
)]
pub struct Cli {
    /// TOML run configuration; defaults apply when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Config override `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Sample both point processes.
    Sample,
    /// Radius fields of both sides and high-radius components.
    Radii,
    /// One realization end to end: order, graph, staged matching.
    Match,
    /// Matching-distance tail and hole comparison over trials.
    Tail,
    /// Experiment suite with exact assertions and reported comparisons.
    Verify,
    /// Tied vertical pairs on the ladder window.
    DemoLadder,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Radii => "radii",
            Command::Match => "match",
            Command::Tail => "tail",
            Command::Verify => "verify",
            Command::DemoLadder => "demo-ladder",
        }
    }
}

/// What a command reports back besides its files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// Failed exact assertions; a nonzero count gives a nonzero exit.
    pub exact_failures: usize,
    pub out: PathBuf,
}

impl Cli {
    pub fn load_config(&self) -> Result<RunConfig> {
        let mut overrides = Vec::new();
        if let Some(s) = self.seed {
            overrides.push(format!("run.seed={s}"));
        }
        if let Some(t) = self.trials {
            overrides.push(format!("run.trials={t}"));
        }
        if matches!(self.command, Command::DemoLadder) {
            overrides.push("graph.family=\"ladder_diagonal\"".into());
        }
        overrides.extend(self.set.iter().cloned());
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path, &overrides)?,
            None => RunConfig::from_toml("", &overrides)?,
        };
        if let Some(out) = &self.out {
            config.run.out = out.clone();
        }
        Ok(config)
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        // A pool already built by the host keeps its size; outputs do not depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let start = Instant::now();
    let config = cli.load_config()?;
    if matches!(cli.command, Command::DemoLadder)
        && config.graph.family != FamilyKind::LadderDiagonal
    {
        return Err(Error::config(
            "graph.family",
            "demo-ladder needs the ladder family",
        ));
    }
    let out = config.run.out.clone();
    let mut art = Artifacts::create(&out, &config.hash(), config.run.seed)?;
    let pipeline = Pipeline::new(config)?;
    let exact_failures = match cli.command {
        Command::Sample => sample_cmd(&pipeline, &mut art)?,
        Command::Radii => radii_cmd(&pipeline, &mut art)?,
        Command::Match => match_cmd(&pipeline, &mut art)?,
        Command::Tail => tail_cmd(&pipeline, &mut art)?,
        Command::Verify => verify_cmd(&pipeline, &mut art)?,
        Command::DemoLadder => ladder_cmd(&pipeline, &mut art)?,
    };
    art.manifest(
        cli.command.name(),
        rayon::current_num_threads(),
        start.elapsed(),
    )?;
    Ok(Outcome {
        exact_failures,
        out,
    })
}

fn window_json(window: &GraphWindow) -> Value {
    json!({
        "family": window.family().name(),
        "depth": window.depth(),
        "core_margin": window.core_margin(),
        "vertices": window.len(),
        "core_vertices": window.core_len(),
    })
}

fn sample_cmd(p: &Pipeline, art: &mut Artifacts) -> Result<usize> {
    let (pi, pi_prime) = p.sample(p.config.run.seed)?;
    art.text("pi.txt", &pi.dump())?;
    art.text("pi_prime.txt", &pi_prime.dump())?;
    let core = p.window.core();
    let core_total = |counts: &[u32]| core.iter().map(|&v| u64::from(counts[v])).sum::<u64>();
    art.json(
        "summary.json",
        json!({
            "command": "sample",
            "window": window_json(&p.window),
            "pi": {"points": pi.total(), "core_points": core_total(pi.counts()), "discarded": pi.discarded()},
            "pi_prime": {"points": pi_prime.total(), "core_points": core_total(pi_prime.counts()), "discarded": pi_prime.discarded()},
        }),
    )?;
    Ok(0)
}

fn status(value: VertexRadius) -> (&'static str, String, String) {
    match value {
        VertexRadius::Resolved { r, clause } => (
            match clause {
                Clause::First => "clause1",
                Clause::Second => "clause2",
            },
            r.to_string(),
            String::new(),
        ),
        VertexRadius::Censored { reason, upper } => (
            match reason {
                CensorReason::BadSet => "censored_bad_set",
                CensorReason::Window => "censored_window",
                CensorReason::Truncated => "censored_truncated",
                CensorReason::RadiusCap => "censored_radius_cap",
            },
            String::new(),
            upper.map(|u| u.to_string()).unwrap_or_default(),
        ),
    }
}

fn radii_csv(window: &GraphWindow, fields: &[(&str, &RadiusField)]) -> String {
    let mut out = String::from("side,vertex,level,in_core,radius,status,upper,bad\n");
    for (side, field) in fields {
        for v in window.vertices() {
            let (status, radius, upper) = status(field.get(v));
            let level = window.level(v).map(|l| l.to_string()).unwrap_or_default();
            let bad = format!("{:?}", field.bad.flags[v]).to_lowercase();
            let _ = writeln!(
                out,
                "{side},{v},{level},{},{radius},{status},{upper},{bad}",
                u8::from(window.in_core(v))
            );
        }
    }
    out
}

fn field_json(window: &GraphWindow, field: &RadiusField) -> Value {
    let core = window.core();
    let resolved: Vec<usize> = core.iter().filter_map(|&v| field.radius(v)).collect();
    json!({
        "censored": field.censored_count(),
        "core_censored": core.len() - resolved.len(),
        "core_max_radius": resolved.iter().max(),
        "core_mean_radius": if resolved.is_empty() { None } else {
            Some(resolved.iter().sum::<usize>() as f64 / resolved.len() as f64)
        },
        "bad_vertices": field.bad.members().count(),
    })
}

fn components_csv(p: &Pipeline, fields: &[(&str, &RadiusField)]) -> (String, Vec<Value>) {
    let r = p.config.components_r();
    let mut out =
        String::from("side,depth,r,components,max_size,max_diameter,censored,core_size\n");
    let mut scans = Vec::new();
    for (side, field) in fields {
        let s = component_scan(&p.window, field, r);
        let _ = writeln!(
            out,
            "{side},{},{},{},{},{},{},{}",
            s.depth, s.r, s.components, s.max_size, s.max_diameter, s.censored, s.core_size
        );
        scans.push(json!({"side": side, "scan": s}));
    }
    (out, scans)
}

fn radii_cmd(p: &Pipeline, art: &mut Artifacts) -> Result<usize> {
    let (pi, pi_prime) = p.sample(p.config.run.seed)?;
    let (r, r_prime) = p.radii(&pi, &pi_prime)?;
    let fields = [("pi", &r), ("pi_prime", &r_prime)];
    art.text("radii.csv", &radii_csv(&p.window, &fields))?;
    let (csv, scans) = components_csv(p, &fields);
    art.text("components.csv", &csv)?;
    art.json(
        "summary.json",
        json!({
            "command": "radii",
            "window": window_json(&p.window),
            "radii": p.config.radii,
            "r": field_json(&p.window, &r),
            "r_prime": field_json(&p.window, &r_prime),
            "components": scans,
        }),
    )?;
    Ok(0)
}

fn matching_dump(p: &Pipeline, run: &Realization) -> String {
    let g = &run.graph;
    let m = run.matching();
    let mut out = String::from("left_vertex left_index right_vertex right_index distance\n");
    let dists = run.mate_distances(&p.window);
    for (i, d) in dists.iter().enumerate() {
        let (lv, li) = g.left_point(i);
        match (m.mate_of_left(i), d) {
            (Some(j), Some(d)) => {
                let (rv, ri) = g.right_point(j);
                let _ = writeln!(out, "{lv} {li} {rv} {ri} {d}");
            }
            _ => {
                let _ = writeln!(out, "{lv} {li} - - -");
            }
        }
    }
    for j in m.unmatched_right() {
        let (rv, ri) = g.right_point(j);
        let _ = writeln!(out, "- - {rv} {ri} -");
    }
    out
}

fn stages_csv(run: &Realization) -> String {
    let mut out = String::from(
        "stage,sweeps,flips,p_n_left,p_n_right,unmatched_left,unmatched_right,largest_sweep_chains\n",
    );
    for r in &run.outcome.reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.stage,
            r.sweeps,
            r.flips,
            r.p_n_left,
            r.p_n_right,
            r.unmatched_left,
            r.unmatched_right,
            r.largest_sweep_chains
        );
    }
    out
}

fn pn_csv(d: &PnDecay) -> String {
    let mut out = String::from("stage,p_n,ratio,reference\n");
    for r in &d.rows {
        let ratio = r.ratio.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{ratio},{}", r.stage, r.p_n, r.reference);
    }
    out
}

fn match_cmd(p: &Pipeline, art: &mut Artifacts) -> Result<usize> {
    let run = p.run(p.config.run.seed)?;
    run.matching().validate(&run.graph)?;
    art.text("order.txt", &run.order.dump())?;
    art.text("graph.txt", &run.graph.dump())?;
    art.text("matching.txt", &matching_dump(p, &run))?;
    art.text("stages.csv", &stages_csv(&run))?;
    art.text(
        "radii.csv",
        &radii_csv(&p.window, &[("pi", &run.r), ("pi_prime", &run.r_prime)]),
    )?;
    let decay = pn_decay(&run.outcome.reports);
    let dists: Vec<usize> = run
        .mate_distances(&p.window)
        .into_iter()
        .flatten()
        .collect();
    art.json(
        "summary.json",
        json!({
            "command": "match",
            "window": window_json(&p.window),
            "left_points": run.graph.left_len(),
            "right_points": run.graph.right_len(),
            "edges": run.graph.edge_count(),
            "matched": run.matching().size(),
            "stages": run.outcome.reports.len(),
            "max_flip_count": run.matching().max_flip_count(),
            "max_mate_distance": dists.iter().max(),
            "order_core_collisions": run.order.core_collision_pairs(&p.window),
            "p_n_monotone": decay.monotone,
            "p_n_fitted_ratio": decay.fitted_ratio,
            "final_p_n_left": run.outcome.reports.last().map(|r| r.p_n_left),
        }),
    )?;
    Ok(usize::from(!decay.monotone))
}

/// Per-trial tail samples; realizations are dropped as soon as they are measured.
fn tail_samples(p: &Pipeline, trials: usize) -> Result<Vec<Option<TailSample>>> {
    let r_max = p.config.experiment.tail_r_max;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let run = p.run(rng::trial_seed(p.config.run.seed, t as u64))?;
            Ok(TailSample::measure(&p.window, &run, r_max))
        })
        .collect()
}

fn tail_csv(curve: &TailCurve, holes: &[HoleRow]) -> String {
    let mut out = String::from(
        "r,b_r,estimate,stderr,unmatched,tail_gt,tail_gt_stderr,hole,hole_stderr,violations,trial_violations\n",
    );
    for (row, h) in curve.rows.iter().zip(holes) {
        let b = row.b_r.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{b},{},{},{},{},{},{},{},{},{}",
            row.r,
            row.estimate,
            row.stderr,
            row.unmatched,
            h.tail_gt,
            h.tail_gt_stderr,
            h.hole,
            h.hole_stderr,
            h.violations,
            h.trial_violations
        );
    }
    out
}

fn tail_cmd(p: &Pipeline, art: &mut Artifacts) -> Result<usize> {
    let samples = tail_samples(p, p.config.run.trials)?;
    let (summary, failures) = tail_report(p, art, samples)?;
    art.json(
        "summary.json",
        json!({"command": "tail", "window": window_json(&p.window), "tail": summary}),
    )?;
    Ok(failures)
}

fn tail_report(
    p: &Pipeline,
    art: &mut Artifacts,
    samples: Vec<Option<TailSample>>,
) -> Result<(Value, usize)> {
    let total = samples.len();
    let samples: Vec<TailSample> = samples.into_iter().flatten().collect();
    let curve = matching_distance_tail(&p.window, &samples)?;
    let holes = tail_hole_comparison(&samples)?;
    art.text("tail.csv", &tail_csv(&curve, &holes))?;
    let failures: usize = holes.iter().map(|h| h.violations).sum();
    Ok((
        json!({
            "trials": total,
            "censored_trials": total - samples.len(),
            "vertices_per_trial": curve.vertices,
            "slope": curve.slope,
            "hole_vertex_violations": failures,
            "hole_trial_violations": holes.iter().map(|h| h.trial_violations).sum::<usize>(),
        }),
        failures,
    ))
}

fn lemma_json(r: &LemmaReport) -> Value {
    json!({
        "trials": r.trials,
        "violations": r.violations,
        "exact_failures": r.exact_failures,
        "lhs": r.lhs_name, "lhs_mean": r.lhs_mean, "lhs_stderr": r.lhs_stderr,
        "rhs": r.rhs_name, "rhs_mean": r.rhs_mean, "rhs_stderr": r.rhs_stderr,
        "slope": r.slope,
        "groups": r.groups,
        "notes": r.notes,
    })
}

/// Index-path stages at which the independence replay is checked.
fn indep_stages(run: &Realization) -> Vec<usize> {
    let last = run.outcome.snapshots.len();
    let mut stages: Vec<usize> = [1, 2, 3, last]
        .into_iter()
        .filter(|&s| s >= 1 && s <= last)
        .collect();
    stages.dedup();
    stages
}

fn greedy_report(p: &Pipeline) -> Result<(String, Value, usize)> {
    let exp = &p.config.experiment;
    let rows = (0..exp.greedy_families)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(p.config.run.seed, Role::Instance, k as u64);
            let r = rng.random_range(1..=exp.greedy_max_r.max(1));
            let sets = rng.random_range(1..=6);
            let (family, u, v) = random_family(&p.window, r, sets, 4, &mut rng);
            greedy_sparse_subpath(&p.window, &family, u, v, r).map(|g| (k, r, family.len(), g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from(
        "trial,r,sets,selected,dist_uv,separated,stated_gaps,stated_ends,stated_bound,scaled_gaps,scaled_ends,scaled_bound\n",
    );
    let b = |x: bool| u8::from(x);
    for (k, r, n, g) in &rows {
        let _ = writeln!(
            csv,
            "{k},{r},{n},{},{},{},{},{},{},{},{},{}",
            g.selected.len(),
            g.dist_uv,
            b(g.separated),
            b(g.stated_gaps),
            b(g.stated_ends),
            b(g.stated_bound),
            b(g.scaled_gaps),
            b(g.scaled_ends),
            b(g.scaled_bound)
        );
    }
    let scaled_failures = rows.iter().filter(|(.., g)| !g.scaled_holds()).count();
    let stated_failures = rows.iter().filter(|(.., g)| !g.stated_holds()).count();
    let summary = json!({
        "families": rows.len(),
        "exact_failures": scaled_failures,
        "stated_condition_failures": stated_failures,
    });
    Ok((csv, summary, scaled_failures))
}

fn hole_json(h: std::result::Result<HoleEstimate, Error>) -> Value {
    match h {
        Ok(h) => json!(h),
        Err(e) => json!({"censored": e.to_string()}),
    }
}

fn verify_cmd(p: &Pipeline, art: &mut Artifacts) -> Result<usize> {
    let exp = &p.config.experiment;
    let seed = p.config.run.seed;
    let generator = SetGenerator::MinLevel(exp.set_min_level);
    let mut failures = 0;
    let mut lemmas = serde_json::Map::new();

    if p.window.family().is_non_amenable() && p.window.core_margin() > 0 {
        let r = verify_chebyshev(&p.window, generator, exp.chebyshev_trials as usize, seed)?;
        art.text("lemma_chebyshev.csv", &r.csv())?;
        failures += r.exact_failures;
        lemmas.insert("chebyshev".into(), lemma_json(&r));
    } else {
        lemmas.insert(
            "chebyshev".into(),
            json!({"skipped": "needs a non-amenable family and a positive core margin"}),
        );
    }

    let runs = (0..p.config.run.trials)
        .into_par_iter()
        .map(|t| p.run(rng::trial_seed(seed, t as u64)))
        .collect::<Result<Vec<_>>>()?;

    let hall = verify_boosted_hall(&p.window, &runs, generator)?;
    art.text("lemma_boosted_hall.csv", &hall.csv())?;
    failures += hall.exact_failures;
    lemmas.insert("boosted_hall".into(), lemma_json(&hall));

    let mut indep_rows = Vec::new();
    let mut indep_failures = 0;
    let mut names = None;
    for (t, run) in runs.iter().enumerate() {
        for stage in indep_stages(run) {
            let r = verify_indep_set(&p.window, run, stage)?;
            indep_failures += r.exact_failures;
            names.get_or_insert_with(|| {
                (r.lhs_name.clone(), r.rhs_name.clone(), r.aux_names.clone())
            });
            indep_rows.extend(r.rows.into_iter().map(|mut row| {
                row.trial = t;
                row
            }));
        }
    }
    if let Some((lhs, rhs, aux)) = names {
        let aux: Vec<&str> = aux.iter().map(String::as_str).collect();
        let mut r = LemmaReport::from_rows("indep_set", &lhs, &rhs, &aux, indep_rows);
        r.exact_failures = indep_failures;
        art.text("lemma_indep_set.csv", &r.csv())?;
        failures += indep_failures;
        lemmas.insert("indep_set".into(), lemma_json(&r));
    }

    let disc = verify_discrepancy(
        &p.window,
        &p.pi,
        &p.pi_prime,
        exp.discrepancy_r,
        exp.discrepancy_max_set,
        exp.discrepancy_trials,
        seed,
    )?;
    art.text("lemma_discrepancy.csv", &disc.csv())?;
    failures += disc.exact_failures;
    lemmas.insert("discrepancy".into(), lemma_json(&disc));

    let (csv, greedy, greedy_failures) = greedy_report(p)?;
    art.text("lemma_greedy.csv", &csv)?;
    failures += greedy_failures;
    lemmas.insert("greedy".into(), greedy);

    let mut pn = Value::Null;
    let mut components = Value::Null;
    if let Some(first) = runs.first() {
        let decay = pn_decay(&first.outcome.reports);
        art.text("pn_decay.csv", &pn_csv(&decay))?;
        failures += usize::from(!decay.monotone);
        pn = json!({"monotone": decay.monotone, "fitted_ratio": decay.fitted_ratio});
        let (csv, scans) = components_csv(p, &[("pi", &first.r), ("pi_prime", &first.r_prime)]);
        art.text("components.csv", &csv)?;
        components = json!(scans);
    }

    let r_max = exp.tail_r_max;
    let samples: Vec<Option<TailSample>> = runs
        .iter()
        .map(|run| TailSample::measure(&p.window, run, r_max))
        .collect();
    let tail = if samples.iter().any(Option::is_some) {
        let (summary, f) = tail_report(p, art, samples)?;
        failures += f;
        summary
    } else {
        json!({"censored": "every core vertex is censored in every trial"})
    };

    let hole = hole_json(hole_probability(
        &p.pi_prime,
        &p.window,
        1,
        exp.hole_trials,
        seed,
    ));

    art.json(
        "summary.json",
        json!({
            "command": "verify",
            "window": window_json(&p.window),
            "trials": runs.len(),
            "exact_failures": failures,
            "lemmas": lemmas,
            "pn_decay": pn,
            "components": components,
            "tail": tail,
            "hole_pi_prime_r1": hole,
        }),
    )?;
    Ok(failures)
}

/// `Σ_k P(N = k)²` for `N ~ Poisson(1)`: the chance that two independent
/// unit-rate counts agree.
pub fn poisson_tie_probability() -> f64 {
    let mut term = (-2.0f64).exp();
    let mut sum = 0.0;
    for k in 1..60 {
        sum += term;
        term /= (k * k) as f64;
    }
    sum
}

fn ladder_cmd(p: &Pipeline, art: &mut Artifacts) -> Result<usize> {
    let (pi, _) = p.sample(p.config.run.seed)?;
    let order = build_order(&pi, &p.window, p.config.order_r_max());
    let pairs = ladder_vertical_pairs(&order, &pi, &p.window);
    let mut csv = String::from("x,lower,upper,lower_count,upper_count,tied\n");
    for q in &pairs {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            q.x,
            q.lower,
            q.upper,
            q.lower_count,
            q.upper_count,
            u8::from(q.tied)
        );
        if q.tied {
            println!(
                "tied pair x={} vertices {} {} counts {} {}",
                q.x, q.lower, q.upper, q.lower_count, q.upper_count
            );
        }
    }
    art.text("ladder_pairs.csv", &csv)?;
    let tied = pairs.iter().filter(|q| q.tied).count();
    let fraction = tied as f64 / pairs.len().max(1) as f64;
    let stderr = (fraction * (1.0 - fraction) / pairs.len().max(1) as f64).sqrt();
    println!("{tied} of {} vertical pairs tied", pairs.len());
    art.json(
        "summary.json",
        json!({
            "command": "demo-ladder",
            "window": window_json(&p.window),
            "pairs": pairs.len(),
            "tied": tied,
            "tied_fraction": fraction,
            "tied_fraction_stderr": stderr,
            "poisson_tie_probability": matches!(p.pi, ProcessSpec::Poisson).then(poisson_tie_probability),
        }),
    )?;
    Ok(0)
}

/// Parses `args`, runs the command and maps the result to an exit code:
/// 0 on success, 1 on errors, 2 when exact assertions failed.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(o) if o.exact_failures > 0 => {
            eprintln!(
                "{} exact assertion failures; see {}",
                o.exact_failures,
                o.out.join("summary.json").display()
            );
            2
        }
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
