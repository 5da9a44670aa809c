use std::io::Write;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::graph::{GraphConfig, LazyGraph};
use crate::psi::{build_psi, PsiConfig, PsiParams, Shape};
use crate::seed::derive;

use super::{frequency_se, random_subset};

/// Number of fixed positions whose marginals are tracked.
const TRACKED_POSITIONS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct PositionStat {
    pub position: usize,
    pub sigma: String,
    pub level: usize,
    pub ones: usize,
    pub frequency: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairStat {
    pub first: usize,
    pub second: usize,
    pub both: usize,
    pub frequency: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiOnesResult {
    pub n: usize,
    pub m: usize,
    pub g: usize,
    pub trials: usize,
    pub mean_d: f64,
    pub se_d: f64,
    /// Fraction of trials with `d = 0`.
    pub zero_fraction: f64,
    /// Fraction of trials with `d > (1+δ)m`.
    pub over_fraction: f64,
    /// `(m + rm + ... + r^g m)/(n - r)`, the single-position bound.
    pub bound: f64,
    /// `|T_m| · bound`, the bound on `E[d]`.
    pub mean_bound: f64,
    pub positions: Vec<PositionStat>,
    pub pairs: Vec<PairStat>,
}

impl PsiOnesResult {
    pub const CSV_HEADER: &'static str = "kind,first,second,sigma,level,count,trials,frequency,se,bound";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for p in &self.positions {
            writeln!(
                w,
                "single,{},,{},{},{},{},{:.8},{:.8},{:.8}",
                p.position, p.sigma, p.level, p.ones, self.trials, p.frequency, p.se, self.bound
            )?;
        }
        for p in &self.pairs {
            writeln!(
                w,
                "pair,{},{},,,{},{},{:.8},{:.8},{:.8}",
                p.first,
                p.second,
                p.both,
                self.trials,
                p.frequency,
                p.se,
                self.bound * self.bound
            )?;
        }
        Ok(())
    }
}

/// Evenly spaced non-root positions, ending at the last one.
pub(crate) fn tracked_positions(shape: &Shape, count: usize) -> Vec<usize> {
    let first = shape.m;
    let span = shape.len() - first;
    let count = count.min(span);
    let mut v: Vec<usize> = (0..count)
        .map(|k| first + span * (k + 1) / count - 1)
        .collect();
    v.dedup();
    v
}

/// Statistics of `d = |{ψ(A) = 1}|` over random graphs and sets `A` of size `cfg.m`.
///
/// Only `g` and `δ` enter, so the `g`-constraint tying `q̃, δ, g` together
/// is not enforced here.
pub fn psi_ones_experiment(cfg: &ExperimentConfig) -> Result<PsiOnesResult> {
    cfg.validate()?;
    let (n, m, r) = (cfg.n, cfg.m, cfg.r);
    if m == 0 || m as f64 > cfg.epsilon * n as f64 {
        return Err(Error::precondition(format!(
            "need 1 <= m <= epsilon*n (m = {m}, epsilon*n = {})",
            cfg.epsilon * n as f64
        )));
    }
    let params = unchecked_params(cfg)?;
    let shape = Shape::new(m, r, params.g)?;
    let tracked = tracked_positions(&shape, TRACKED_POSITIONS);
    let configs: Vec<PsiConfig> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<PsiConfig> {
            let graph = LazyGraph::new(GraphConfig::new(n, r, derive(cfg.seed, "psi-graph", t as u64))?)?;
            let a = random_subset(n, m, derive(cfg.seed, "psi-set", t as u64));
            build_psi(&a, &graph, &params)
        })
        .collect::<Result<_>>()?;

    let trials = configs.len();
    let ds: Vec<f64> = configs.iter().map(|c| c.ones() as f64).collect();
    let mean_d = ds.iter().sum::<f64>() / trials as f64;
    let var = ds.iter().map(|d| (d - mean_d).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
    let limit = (1.0 + params.delta) * m as f64;
    let frac = |pred: &dyn Fn(&PsiConfig) -> bool| {
        configs.iter().filter(|c| pred(c)).count() as f64 / trials as f64
    };
    let zero_fraction = frac(&|c| c.ones() == 0);
    let over_fraction = frac(&|c| c.ones() as f64 > limit);

    let positions = tracked
        .iter()
        .map(|&p| {
            let ones = configs.iter().filter(|c| c.bit(p)).count();
            let f = ones as f64 / trials as f64;
            let idx = shape.index(p);
            PositionStat {
                position: p,
                sigma: idx.dotted(),
                level: idx.level(),
                ones,
                frequency: f,
                se: frequency_se(f, trials),
            }
        })
        .collect();
    let pairs = tracked
        .windows(2)
        .map(|w| {
            let both = configs.iter().filter(|c| c.bit(w[0]) && c.bit(w[1])).count();
            let f = both as f64 / trials as f64;
            PairStat {
                first: w[0],
                second: w[1],
                both,
                frequency: f,
                se: frequency_se(f, trials),
            }
        })
        .collect();
    let bound = shape.len() as f64 / (n - r) as f64;
    Ok(PsiOnesResult {
        n,
        m,
        g: params.g,
        trials,
        mean_d,
        se_d: (var / trials as f64).sqrt(),
        zero_fraction,
        over_fraction,
        bound,
        mean_bound: shape.len() as f64 * bound,
        positions,
        pairs,
    })
}

fn unchecked_params(cfg: &ExperimentConfig) -> Result<PsiParams> {
    if let Ok(p) = cfg.psi_params() {
        return Ok(p);
    }
    let base = crate::psi::default_params(cfg.q, cfg.r).ok();
    let q_tilde = cfg.q_tilde.or(base.map(|p| p.q_tilde));
    let delta = cfg.delta.or(base.map(|p| p.delta));
    let g = cfg.g.or(base.map(|p| p.g));
    match (q_tilde, delta, g) {
        (Some(q_tilde), Some(delta), Some(g)) => Ok(PsiParams { q_tilde, delta, g }),
        _ => Err(Error::precondition(
            "psi-ones needs g and delta, either given or derived from a supercritical (q, r)",
        )),
    }
}
