use std::io::Write;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::dynamics::advance_dual_free;
use crate::error::Result;
use crate::graph::{GraphConfig, InGraph, Vertex};
use crate::noise::NoiseField;
use crate::seed::derive;
use crate::state::State;

use super::random_subset;

#[derive(Clone, Debug, PartialEq)]
pub struct SeedFractionResult {
    pub n: usize,
    /// `⌈a log n⌉`.
    pub steps: u64,
    /// `n^b`.
    pub threshold: f64,
    pub roots: usize,
    pub exceeding: usize,
    pub fraction: f64,
}

impl SeedFractionResult {
    pub const CSV_HEADER: &'static str = "n,a,b,steps,threshold,roots,exceeding,fraction";

    pub fn write_csv<W: Write>(&self, cfg: &ExperimentConfig, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        writeln!(
            w,
            "{},{},{},{},{:.6},{},{},{:.6}",
            self.n, cfg.a, cfg.b, self.steps, self.threshold, self.roots, self.exceeding, self.fraction
        )
    }
}

/// Fraction of roots `x` whose free dual has more than `n^b` members after
/// `⌈a log n⌉` steps. All roots share one graph and one dual noise field.
pub fn seed_fraction_experiment(cfg: &ExperimentConfig) -> Result<SeedFractionResult> {
    cfg.validate()?;
    let n = cfg.n;
    let graph = InGraph::generate(GraphConfig::new(n, cfg.r, derive(cfg.seed, "graph", n as u64))?)?;
    let noise = NoiseField::new(cfg.q, derive(cfg.seed, "dual-noise", n as u64))?;
    let steps = (cfg.a * (n as f64).ln()).ceil() as u64;
    let threshold = (n as f64).powf(cfg.b);
    let roots: Vec<Vertex> = if cfg.roots == 0 || cfg.roots >= n {
        (0..n as Vertex).collect()
    } else {
        random_subset(n, cfg.roots, derive(cfg.seed, "roots", n as u64))
    };
    let exceeding = roots
        .par_iter()
        .filter(|&&x| {
            let end = advance_dual_free(&graph, &State::singleton(n, x), &noise, 0, steps);
            end.count() as f64 > threshold
        })
        .count();
    Ok(SeedFractionResult {
        n,
        steps,
        threshold,
        roots: roots.len(),
        exceeding,
        fraction: exceeding as f64 / roots.len() as f64,
    })
}
