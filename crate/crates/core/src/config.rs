//! Run configuration: TOML sections, `--set` overrides, validation and hashing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graphs::{GraphFamily, DEFAULT_MAX_VERTICES};
use crate::matching::MatcherParams;
use crate::processes::{DistanceLaw, ProcessSpec};
use crate::radii::RadiusParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    RegularTree,
    LadderDiagonal,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub family: FamilyKind,
    pub degree: usize,
    pub depth: usize,
    pub core_margin: usize,
    /// Adjacency file for `explicit`, one `id: neighbours` line per vertex.
    pub adjacency: Option<PathBuf>,
    pub max_vertices: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            family: FamilyKind::RegularTree,
            degree: 3,
            depth: 8,
            core_margin: 4,
            adjacency: None,
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Poisson,
    Perturbed,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessEntry {
    pub kind: ProcessKind,
    /// Explicit distance law `P(R = k)` for `perturbed`.
    pub pmf: Option<Vec<f64>>,
    /// Geometric distance law ratio for `perturbed`, truncated at `d_max`.
    pub q: Option<f64>,
    pub d_max: Option<usize>,
}

impl Default for ProcessEntry {
    fn default() -> Self {
        ProcessEntry {
            kind: ProcessKind::Poisson,
            pmf: None,
            q: None,
            d_max: None,
        }
    }
}

impl ProcessEntry {
    pub fn spec(&self, field: &str) -> Result<ProcessSpec> {
        let law = match self.kind {
            ProcessKind::Poisson => {
                if self.pmf.is_some() || self.q.is_some() || self.d_max.is_some() {
                    return Err(Error::config(field, "poisson takes no distance law"));
                }
                return Ok(ProcessSpec::Poisson);
            }
            ProcessKind::Degenerate => DistanceLaw::degenerate(),
            ProcessKind::Perturbed => match (&self.pmf, self.q, self.d_max) {
                (Some(pmf), None, None) => {
                    DistanceLaw::new(pmf.clone()).map_err(|e| relabel(e, field))?
                }
                (None, Some(q), Some(d)) => {
                    DistanceLaw::geometric(q, d).map_err(|e| relabel(e, field))?
                }
                _ => {
                    return Err(Error::config(
                        field,
                        "perturbed needs either `pmf` or both `q` and `d_max`",
                    ))
                }
            },
        };
        Ok(ProcessSpec::Perturbed { law })
    }
}

fn relabel(e: Error, field: &str) -> Error {
    match e {
        Error::Config { message, .. } => Error::config(field, message),
        other => other,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessConfig {
    pub pi: ProcessEntry,
    pub pi_prime: ProcessEntry,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrderConfig {
    /// Signature length; defaults to `core_margin - r0`.
    pub r_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Largest radius in tail and hole tables.
    pub tail_r_max: usize,
    /// Samples per hole-probability estimate.
    pub hole_trials: u64,
    /// `A = {v : ℓ_v >= k}` for the density lemmas.
    pub set_min_level: u32,
    pub discrepancy_r: usize,
    pub discrepancy_max_set: usize,
    pub discrepancy_trials: u64,
    pub greedy_families: usize,
    pub greedy_max_r: usize,
    pub chebyshev_trials: u64,
    /// Radius for the high-radius component scan; defaults to `r0`.
    pub components_r: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            tail_r_max: 8,
            hole_trials: 10_000,
            set_min_level: 1,
            discrepancy_r: 1,
            discrepancy_max_set: 4,
            discrepancy_trials: 20_000,
            greedy_families: 100,
            greedy_max_r: 3,
            chebyshev_trials: 100,
            components_r: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 1,
            trials: 1,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub graph: GraphConfig,
    pub process: ProcessConfig,
    pub radii: RadiusParams,
    pub order: OrderConfig,
    pub matcher: MatcherParams,
    pub experiment: ExperimentConfig,
    pub run: RunSection,
}

impl RunConfig {
    /// Parses TOML text, applies `section.key=value` overrides and validates.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::config("config", e.message()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(field_of(&e), e.message()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, overrides)
    }

    pub fn pi_spec(&self) -> Result<ProcessSpec> {
        self.process.pi.spec("process.pi")
    }

    pub fn pi_prime_spec(&self) -> Result<ProcessSpec> {
        self.process.pi_prime.spec("process.pi_prime")
    }

    pub fn order_r_max(&self) -> usize {
        self.order
            .r_max
            .unwrap_or_else(|| self.graph.core_margin.saturating_sub(self.radii.r0))
    }

    pub fn components_r(&self) -> usize {
        self.experiment.components_r.unwrap_or(self.radii.r0)
    }

    pub fn family(&self) -> Result<GraphFamily> {
        match self.graph.family {
            FamilyKind::RegularTree => GraphFamily::regular_tree(self.graph.degree),
            FamilyKind::LadderDiagonal => Ok(GraphFamily::LadderDiagonal),
            FamilyKind::Explicit => {
                let path = self.graph.adjacency.as_ref().ok_or_else(|| {
                    Error::config("graph.adjacency", "explicit family needs an adjacency file")
                })?;
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                GraphFamily::parse_adjacency(&text, &path.display().to_string())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.radii.validate()?;
        let pi = self.pi_spec()?;
        let pi_prime = self.pi_prime_spec()?;
        let g = &self.graph;
        if g.family == FamilyKind::RegularTree && g.degree < 3 {
            return Err(Error::config(
                "graph.degree",
                "regular tree degree must be at least 3",
            ));
        }
        if g.family != FamilyKind::Explicit {
            if g.depth == 0 {
                return Err(Error::config("graph.depth", "must be positive"));
            }
            let need = [
                self.radii.r0,
                pi.d_max(),
                pi_prime.d_max(),
                self.order_r_max(),
            ]
            .into_iter()
            .max()
            .unwrap_or(0);
            if g.core_margin < need {
                return Err(Error::config(
                    "graph.core_margin",
                    format!(
                        "must be at least max(r0, d_max, order r_max) = {need}, got {}",
                        g.core_margin
                    ),
                ));
            }
            if g.core_margin > g.depth {
                return Err(Error::config(
                    "graph.core_margin",
                    "exceeds depth, so the core is empty",
                ));
            }
        }
        if g.max_vertices == 0 {
            return Err(Error::config("graph.max_vertices", "must be positive"));
        }
        if self.matcher.max_stage == Some(0) {
            return Err(Error::config("matcher.max_stage", "must be positive"));
        }
        if self.matcher.chain_cap == 0 {
            return Err(Error::config("matcher.chain_cap", "must be positive"));
        }
        if self.matcher.sweep_cap == 0 {
            return Err(Error::config("matcher.sweep_cap", "must be positive"));
        }
        if self.run.trials == 0 {
            return Err(Error::config("run.trials", "must be positive"));
        }
        let e = &self.experiment;
        if e.hole_trials == 0 || e.discrepancy_trials == 0 {
            return Err(Error::config("experiment", "trial counts must be positive"));
        }
        if e.discrepancy_max_set == 0 {
            return Err(Error::config(
                "experiment.discrepancy_max_set",
                "must be positive",
            ));
        }
        if e.greedy_max_r == 0 {
            return Err(Error::config("experiment.greedy_max_r", "must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, with the output directory blanked
    /// so that relocating a run keeps its hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.run.out = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serialises");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// `a.b.c=value`; the value is read as a TOML literal, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like section.key=value"))?;
    let path = path.trim();
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::config(path, "empty key in override path"));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let (last, parents) = keys.split_last().expect("non-empty path");
    let mut cur = table;
    for k in parents {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(path, format!("`{k}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn field_of(e: &toml::de::Error) -> String {
    // Unknown-field messages name the field; otherwise point at the config as a whole.
    let msg = e.message();
    msg.split('`')
        .nth(1)
        .map_or_else(|| "config".to_string(), str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid_defaults() {
        let c = RunConfig::from_toml("", &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.order_r_max(), 0);
    }

    #[test]
    fn overrides_reach_nested_sections() {
        let c = RunConfig::from_toml(
            "[graph]\ndepth = 6\n",
            &[
                "process.pi.kind=degenerate".into(),
                "radii.mode=exact".into(),
                "run.seed=42".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.graph.depth, 6);
        assert_eq!(c.process.pi.kind, ProcessKind::Degenerate);
        assert_eq!(c.run.seed, 42);
        assert!(c.pi_spec().unwrap().is_degenerate());
    }

    #[test]
    fn invalid_fields_are_named() {
        let err = |text: &str, o: &[&str]| {
            let o: Vec<String> = o.iter().map(|s| s.to_string()).collect();
            match RunConfig::from_toml(text, &o) {
                Err(Error::Config { field, .. }) => field,
                other => panic!("expected config error, got {other:?}"),
            }
        };
        assert_eq!(err("", &["radii.r0=3"]), "radii.r0");
        assert_eq!(err("", &["graph.core_margin=2"]), "graph.core_margin");
        assert_eq!(err("[graph]\ncolour = 1\n", &[]), "colour");
        assert_eq!(err("", &["run.trials=0"]), "run.trials");
        assert_eq!(err("", &["process.pi.kind=perturbed"]), "process.pi");
        assert_eq!(err("", &["nonsense"]), "nonsense");
    }

    #[test]
    fn perturbed_margin_accounts_for_d_max() {
        let o = vec![
            "process.pi_prime.kind=perturbed".into(),
            "process.pi_prime.q=0.5".into(),
            "process.pi_prime.d_max=6".into(),
        ];
        assert!(matches!(
            RunConfig::from_toml("", &o),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn hash_ignores_output_directory_only() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.run.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.run.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
