pub mod bipartite;
pub mod cli;
pub mod config;
pub mod connected;
pub mod error;
pub mod experiments;
pub mod graphs;
pub mod matching;
pub mod order;
pub mod output;
pub mod pipeline;
pub mod processes;
pub mod radii;
pub mod rng;

pub use error::{Error, Result};
