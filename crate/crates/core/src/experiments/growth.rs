use std::io::Write;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::dynamics::dual_step_free;
use crate::error::{Error, Result};
use crate::graph::{GraphConfig, LazyGraph};
use crate::noise::NoiseField;
use crate::psi::{build_psi, is_robust_sufficient, PsiConfig, PsiParams};
use crate::seed::derive2;
use crate::state::State;

use super::random_subset;

/// Attempts per `m` are capped at this multiple of the requested sample count.
const ATTEMPT_FACTOR: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub m: usize,
    pub attempts: usize,
    /// Samples whose `ψ(A)` passed the sufficient robustness check.
    pub accepted: usize,
    /// Accepted samples with `|ξ̂^A_g| < (1+δ)m`.
    pub failures: usize,
    pub failure_frequency: f64,
    pub acceptance_rate: f64,
    /// Samples where some `|ξ̂^A_j| < |J(B_{j-1}) ∩ {ψ=0}|`, or where a
    /// position of `J(B_{j-1}) ∩ {ψ=0}` was not realized in `ξ̂^A_j`.
    pub inequality_violations: usize,
}

impl GrowthRow {
    pub fn low_acceptance(&self) -> bool {
        self.acceptance_rate < 0.5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthResult {
    pub params: PsiParams,
    pub rows: Vec<GrowthRow>,
}

impl GrowthResult {
    pub const CSV_HEADER: &'static str =
        "m,attempts,accepted,acceptance_rate,failures,failure_frequency,inequality_violations";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{:.6},{},{:.6},{}",
                r.m,
                r.attempts,
                r.accepted,
                r.acceptance_rate,
                r.failures,
                r.failure_frequency,
                r.inequality_violations
            )?;
        }
        Ok(())
    }
}

enum Sample {
    Rejected,
    Accepted { failed: bool, violated: bool },
}

/// Runs the free dual for `g` steps from the roots of `psi` and tracks the
/// realized birth family `B_j` alongside it.
fn instrumented_growth(
    graph: &LazyGraph,
    psi: &PsiConfig,
    noise: &NoiseField,
    n: usize,
) -> (usize, bool) {
    let shape = psi.shape();
    let z = psi.z_values().expect("built from a graph");
    let mut cur = State::from_vertices(n, z[..shape.m].iter().copied());
    // B_0: roots that give birth at time 0
    let mut family: Vec<usize> = (0..shape.m).filter(|&p| noise.bit(0, z[p])).collect();
    let mut violated = false;
    for j in 1..=shape.g {
        cur = dual_step_free(graph, &cur, noise, (j - 1) as u64);
        let zero_children: Vec<usize> = family
            .iter()
            .flat_map(|&p| shape.children_of(p))
            .filter(|&c| !psi.bit(c))
            .collect();
        if cur.count() < zero_children.len() || zero_children.iter().any(|&c| !cur.contains(z[c])) {
            violated = true;
        }
        family = zero_children
            .into_iter()
            .filter(|&c| noise.bit(j as u64, z[c]))
            .collect();
    }
    (cur.count(), violated)
}

fn growth_sample(cfg: &ExperimentConfig, params: &PsiParams, m: usize, s: usize) -> Result<Sample> {
    let n = cfg.n;
    let graph = LazyGraph::new(GraphConfig::new(
        n,
        cfg.r,
        derive2(cfg.seed, "growth-graph", m as u64, s as u64),
    )?)?;
    let a = random_subset(n, m, derive2(cfg.seed, "growth-set", m as u64, s as u64));
    let psi = build_psi(&a, &graph, params)?;
    if !is_robust_sufficient(&psi, params) {
        return Ok(Sample::Rejected);
    }
    let noise = NoiseField::new(cfg.q, derive2(cfg.seed, "growth-noise", m as u64, s as u64))?;
    let (size, violated) = instrumented_growth(&graph, &psi, &noise, n);
    Ok(Sample::Accepted {
        failed: (size as f64) < (1.0 + params.delta) * m as f64,
        violated,
    })
}

/// Conditional frequency of `|ξ̂^A_g| < (1+δ)m` given a sufficient-robust
/// `ψ(A)`, for each `m` in `cfg.m_grid`, over `cfg.trials` accepted samples.
pub fn growth_experiment(cfg: &ExperimentConfig) -> Result<GrowthResult> {
    cfg.validate()?;
    let params = cfg.psi_params()?;
    let mut rows = Vec::with_capacity(cfg.m_grid.len());
    for &m in &cfg.m_grid {
        if m == 0 || m as f64 > cfg.epsilon * cfg.n as f64 {
            return Err(Error::precondition(format!(
                "need 1 <= m <= epsilon*n (m = {m}, epsilon*n = {})",
                cfg.epsilon * cfg.n as f64
            )));
        }
        let cap = cfg.trials * ATTEMPT_FACTOR;
        let (mut attempts, mut accepted, mut failures, mut violations) = (0, 0, 0, 0);
        while accepted < cfg.trials && attempts < cap {
            let batch = (cfg.trials - accepted).max(16).min(cap - attempts);
            let samples = (attempts..attempts + batch)
                .into_par_iter()
                .map(|s| growth_sample(cfg, &params, m, s))
                .collect::<Result<Vec<_>>>()?;
            for sample in samples {
                if accepted == cfg.trials {
                    break;
                }
                attempts += 1;
                if let Sample::Accepted { failed, violated } = sample {
                    accepted += 1;
                    failures += usize::from(failed);
                    violations += usize::from(violated);
                }
            }
        }
        rows.push(GrowthRow {
            m,
            attempts,
            accepted,
            failures,
            failure_frequency: if accepted == 0 { f64::NAN } else { failures as f64 / accepted as f64 },
            acceptance_rate: accepted as f64 / attempts.max(1) as f64,
            inequality_violations: violations,
        });
    }
    Ok(GrowthResult { params, rows })
}
