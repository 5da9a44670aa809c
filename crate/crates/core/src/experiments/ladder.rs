//! Instrumentation of the rung-by-rung argument for exponential persistence.
//!
//! From a root `x`: run the free dual to `s_0 = ⌈a log n⌉`, then repeatedly
//! keep the `α_i` smallest members (`ζ_i`), check that `ψ(ζ_i)` passes the
//! sufficient robustness test (`F_i`), and that the descendants of `ζ_i`
//! after `g` more steps number at least `(1+δ)|ζ_i|` (`G_i`).

use std::io::Write;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::dynamics::advance_dual_free;
use crate::error::Result;
use crate::graph::{GraphConfig, InGraph, Vertex};
use crate::noise::NoiseField;
use crate::psi::{build_psi, is_robust_sufficient, PsiParams};
use crate::seed::derive;
use crate::state::State;

use super::random_subset;

#[derive(Clone, Debug, PartialEq)]
pub struct Rung {
    /// `-1` for the initial event `H_{-1}`.
    pub index: i64,
    /// `s_i`, the dual time at which `ζ_i` is taken.
    pub time: u64,
    pub alpha: Option<usize>,
    pub zeta_size: usize,
    /// `|ξ̂_{s_0}|` for the initial rung, otherwise the descendants of `ζ_i` at `s_{i+1}`.
    pub descendants: usize,
    pub robust: Option<bool>,
    pub growth: Option<bool>,
    /// `H_i`.
    pub h: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// `H_{-1}` failed: at most `n^b` members at `s_0`.
    NotSeeded,
    Extinct,
    RobustnessFailed,
    GrowthFailed,
    /// `α_i` reached `⌊εn⌋` with the chain intact.
    Saturated,
    CapReached,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::NotSeeded => "not_seeded",
            Termination::Extinct => "extinct",
            Termination::RobustnessFailed => "robustness_failed",
            Termination::GrowthFailed => "growth_failed",
            Termination::Saturated => "saturated",
            Termination::CapReached => "cap_reached",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderTrace {
    pub root: Vertex,
    pub rungs: Vec<Rung>,
    pub termination: Termination,
}

impl LadderTrace {
    pub fn seeded(&self) -> bool {
        self.rungs.first().is_some_and(|r| r.h)
    }

    /// Whether `H_0, ..., H_{k-1}` all held, or the chain saturated intact before `k`.
    pub fn sustained(&self, k: usize) -> bool {
        if !self.seeded() {
            return false;
        }
        let passed = self.rungs.iter().skip(1).take_while(|r| r.h).count();
        passed >= k || (self.termination == Termination::Saturated && passed == self.rungs.len() - 1)
    }

    /// Index of the first failing rung, if the chain broke.
    pub fn first_failure(&self) -> Option<i64> {
        self.rungs.iter().find(|r| !r.h).map(|r| r.index)
    }
}

/// One ladder from root `x` on a fixed graph and dual noise field.
pub fn proof_ladder(
    cfg: &ExperimentConfig,
    params: &PsiParams,
    graph: &InGraph,
    noise: &NoiseField,
    x: Vertex,
) -> Result<LadderTrace> {
    let n = graph.config().n;
    let nf = n as f64;
    let s0 = (cfg.a * nf.ln()).ceil() as u64;
    let seed_size = nf.powf(cfg.b);
    let alpha_cap = (cfg.epsilon * nf).floor() as usize;
    let alpha = |i: usize| (seed_size.floor() as usize + i).min(alpha_cap);
    let gsteps = params.g as u64;

    let mut cur = advance_dual_free(graph, &State::singleton(n, x), noise, 0, s0);
    let seeded = cur.count() as f64 > seed_size;
    let mut rungs = vec![Rung {
        index: -1,
        time: s0,
        alpha: None,
        zeta_size: 1,
        descendants: cur.count(),
        robust: None,
        growth: None,
        h: seeded,
    }];
    if !seeded {
        let termination = if cur.is_empty() {
            Termination::Extinct
        } else {
            Termination::NotSeeded
        };
        return Ok(LadderTrace { root: x, rungs, termination });
    }

    let mut i = 0usize;
    let termination = loop {
        if i >= cfg.i_cap {
            break Termination::CapReached;
        }
        let a_i = alpha(i);
        let zeta = cur.first_k(a_i);
        let members = zeta.to_vec();
        let psi = build_psi(&members, graph, params)?;
        let robust = is_robust_sufficient(&psi, params);
        let s_i = s0 + i as u64 * gsteps;
        let desc = advance_dual_free(graph, &zeta, noise, s_i, gsteps);
        let growth = desc.count() as f64 >= (1.0 + params.delta) * members.len() as f64;
        let h = robust && growth;
        rungs.push(Rung {
            index: i as i64,
            time: s_i,
            alpha: Some(a_i),
            zeta_size: members.len(),
            descendants: desc.count(),
            robust: Some(robust),
            growth: Some(growth),
            h,
        });
        if desc.is_empty() {
            break Termination::Extinct;
        }
        if !robust {
            break Termination::RobustnessFailed;
        }
        if !growth {
            break Termination::GrowthFailed;
        }
        if a_i >= alpha_cap {
            break Termination::Saturated;
        }
        cur = desc;
        i += 1;
    };
    Ok(LadderTrace { root: x, rungs, termination })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderSummary {
    pub params: PsiParams,
    pub traces: Vec<LadderTrace>,
}

impl LadderSummary {
    pub const CSV_HEADER: &'static str =
        "root,rung,time,alpha,zeta_size,descendants,robust,growth,h_chain,termination";

    pub fn seeded(&self) -> usize {
        self.traces.iter().filter(|t| t.seeded()).count()
    }

    /// Fraction of seeded roots whose chain held for `k` rungs.
    pub fn sustained_fraction(&self, k: usize) -> f64 {
        let seeded = self.seeded();
        if seeded == 0 {
            return 0.0;
        }
        self.traces.iter().filter(|t| t.sustained(k)).count() as f64 / seeded as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let opt = |b: Option<bool>| b.map(|b| u8::from(b).to_string()).unwrap_or_default();
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for t in &self.traces {
            for r in &t.rungs {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    t.root,
                    r.index,
                    r.time,
                    r.alpha.map(|a| a.to_string()).unwrap_or_default(),
                    r.zeta_size,
                    r.descendants,
                    opt(r.robust),
                    opt(r.growth),
                    u8::from(r.h),
                    t.termination.label()
                )?;
            }
        }
        Ok(())
    }
}

/// Ladders from `cfg.roots` sampled roots (all roots when 0) on one graph.
pub fn ladder_experiment(cfg: &ExperimentConfig) -> Result<LadderSummary> {
    cfg.validate()?;
    let params = cfg.psi_params()?;
    let n = cfg.n;
    let graph = InGraph::generate(GraphConfig::new(n, cfg.r, derive(cfg.seed, "graph", n as u64))?)?;
    let noise = NoiseField::new(cfg.q, derive(cfg.seed, "dual-noise", n as u64))?;
    let roots: Vec<Vertex> = if cfg.roots == 0 || cfg.roots >= n {
        (0..n as Vertex).collect()
    } else {
        random_subset(n, cfg.roots, derive(cfg.seed, "roots", n as u64))
    };
    let traces = roots
        .par_iter()
        .map(|&x| proof_ladder(cfg, &params, &graph, &noise, x))
        .collect::<Result<_>>()?;
    Ok(LadderSummary { params, traces })
}
