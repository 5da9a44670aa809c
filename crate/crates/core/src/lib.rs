//! Threshold contact process on random in-regular digraphs.
//!
//! Each vertex `x` of an `n`-vertex graph reads `r` input vertices
//! `y_1(x), ..., y_r(x)` drawn uniformly without replacement from the other
//! vertices. At each step `x` is occupied iff its Bernoulli(`q`) noise bit is
//! on and at least one input was occupied. The dual process runs the arrows
//! backwards: an occupied vertex whose bit is on occupies all of its inputs.
//!
//! Modules:
//! - [`graph`]: graph sampling, in/out adjacency, text format.
//! - [`noise`]: counter-based noise fields addressable by `(t, x)`.
//! - [`dynamics`]: primal and dual steps, trajectories, duality checks.
//! - [`psi`]: the collision configuration `ψ` on the `r`-ary forest and its
//!   admissibility, goodness and robustness predicates.
//! - [`theory`]: the offspring law, survival probability `ρ`, Chernoff bounds.
//! - [`experiments`]: the numerical experiments, each returning plain records.
//! - [`cli`]: the `tcsim` command line.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod noise;
pub mod psi;
pub mod seed;
pub mod state;
pub mod theory;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use graph::{Digraph, GraphConfig, InGraph, InNeighbors, LazyGraph, OutGraph, Vertex};
pub use noise::NoiseField;
pub use state::State;
