//! One realization end to end: window, processes, radii, order, graph, matching.

use crate::bipartite::{build_match_graph, MatchGraph};
use crate::config::RunConfig;
use crate::error::Result;
use crate::graphs::{GraphWindow, Vertex};
use crate::matching::{Census, Engine, Matching, RunOutcome};
use crate::order::{build_order, OrderFactor};
use crate::processes::{sample, PointMultiset, ProcessSpec, Side};
use crate::radii::{compute_radius_field, RadiusField};

/// The parts of a run that do not depend on the seed.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub config: RunConfig,
    pub window: GraphWindow,
    pub pi: ProcessSpec,
    pub pi_prime: ProcessSpec,
}

#[derive(Debug, Clone)]
pub struct Realization {
    pub seed: u64,
    pub pi: PointMultiset,
    pub pi_prime: PointMultiset,
    pub r: RadiusField,
    pub r_prime: RadiusField,
    pub order: OrderFactor,
    pub graph: MatchGraph,
    pub outcome: RunOutcome,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let window = GraphWindow::build_capped(
            config.family()?,
            config.graph.depth,
            config.graph.core_margin,
            config.graph.max_vertices,
        )?;
        Ok(Pipeline {
            pi: config.pi_spec()?,
            pi_prime: config.pi_prime_spec()?,
            config,
            window,
        })
    }

    pub fn sample(&self, seed: u64) -> Result<(PointMultiset, PointMultiset)> {
        Ok((
            sample(&self.pi, &self.window, seed, Side::Pi)?,
            sample(&self.pi_prime, &self.window, seed, Side::PiPrime)?,
        ))
    }

    pub fn radii(
        &self,
        pi: &PointMultiset,
        pi_prime: &PointMultiset,
    ) -> Result<(RadiusField, RadiusField)> {
        let params = &self.config.radii;
        Ok((
            compute_radius_field(&self.window, pi, pi_prime, Side::Pi, params)?,
            compute_radius_field(&self.window, pi_prime, pi, Side::PiPrime, params)?,
        ))
    }

    pub fn run(&self, seed: u64) -> Result<Realization> {
        let (pi, pi_prime) = self.sample(seed)?;
        let (r, r_prime) = self.radii(&pi, &pi_prime)?;
        let order = build_order(&pi, &self.window, self.config.order_r_max());
        let graph = build_match_graph(&self.window, &pi, &pi_prime, &r, &r_prime);
        let census = Census::core(&graph, &self.window);
        let outcome = Engine::new(&graph, &order.ranks, self.config.matcher, census).run()?;
        Ok(Realization {
            seed,
            pi,
            pi_prime,
            r,
            r_prime,
            order,
            graph,
            outcome,
        })
    }
}

impl Realization {
    pub fn matching(&self) -> &Matching {
        &self.outcome.matching
    }

    /// Distance from every left point to its mate; `None` when unmatched.
    pub fn mate_distances(&self, window: &GraphWindow) -> Vec<Option<usize>> {
        (0..self.graph.left_len())
            .map(|i| {
                self.matching().mate_of_left(i).map(|j| {
                    let (a, b): (Vertex, Vertex) =
                        (self.graph.left_point(i).0, self.graph.right_point(j).0);
                    window.distance(a, b).expect("matched points are connected")
                })
            })
            .collect()
    }
}
