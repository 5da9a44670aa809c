use std::io::Write;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, Regime};
use crate::dynamics::run_until_extinction;
use crate::error::{Error, Result};
use crate::graph::{Digraph, GraphConfig};
use crate::noise::NoiseField;
use crate::seed::derive2;
use crate::state::State;

use super::median;

/// One replicate started from full occupancy.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceRecord {
    pub n: usize,
    pub replicate: usize,
    /// `None` when the replicate was still alive at `t_max`.
    pub extinction_time: Option<u64>,
    pub censored: bool,
    /// Mean occupied fraction over steps `1..=end` of the run.
    pub mean_density: f64,
}

impl PersistenceRecord {
    pub const CSV_HEADER: &'static str = "n,replicate,extinction_time,censored,mean_density";

    pub fn write_csv<W: Write>(records: &[Self], mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in records {
            writeln!(
                w,
                "{},{},{},{},{:.6}",
                r.n,
                r.replicate,
                r.extinction_time.map(|t| t.to_string()).unwrap_or_default(),
                u8::from(r.censored),
                r.mean_density
            )?;
        }
        Ok(())
    }

    /// Median extinction time at size `n`, counting censored runs as longer
    /// than any observed time. `None` if the median itself is censored.
    pub fn median_extinction(records: &[Self], n: usize) -> Option<f64> {
        let rows: Vec<&Self> = records.iter().filter(|r| r.n == n).collect();
        let times: Vec<f64> = rows
            .iter()
            .map(|r| r.extinction_time.map_or(f64::INFINITY, |t| t as f64))
            .collect();
        median(&times).filter(|m| m.is_finite())
    }
}

pub(crate) fn replicate_streams(
    cfg: &ExperimentConfig,
    n: usize,
    rep: usize,
) -> Result<(Digraph, NoiseField)> {
    let graph = Digraph::generate(GraphConfig::new(
        n,
        cfg.r,
        derive2(cfg.seed, "graph", n as u64, rep as u64),
    )?)?;
    let noise = NoiseField::new(cfg.q, derive2(cfg.seed, "noise", n as u64, rep as u64))?;
    Ok((graph, noise))
}

fn persistence_one(cfg: &ExperimentConfig, n: usize, rep: usize) -> Result<PersistenceRecord> {
    let (graph, noise) = replicate_streams(cfg, n, rep)?;
    let run = run_until_extinction(&graph, &noise, &State::full(n), cfg.t_max);
    let steps = &run.counts[1..];
    let mean_density = if steps.is_empty() {
        0.0
    } else {
        steps.iter().sum::<usize>() as f64 / (steps.len() * n) as f64
    };
    Ok(PersistenceRecord {
        n,
        replicate: rep,
        extinction_time: run.extinction_time,
        censored: run.extinction_time.is_none(),
        mean_density,
    })
}

/// Extinction times from `ξ_0 = 1` for every `n` in the grid and every replicate.
pub fn persistence_experiment(cfg: &ExperimentConfig) -> Result<Vec<PersistenceRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_values()
        .into_iter()
        .flat_map(|n| (0..cfg.trials).map(move |rep| (n, rep)))
        .collect();
    jobs.into_par_iter()
        .map(|(n, rep)| persistence_one(cfg, n, rep))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlateauReplicate {
    pub replicate: usize,
    /// Time-averaged occupied fraction over the window; `None` if the
    /// replicate died before the window ended.
    pub mean_density: Option<f64>,
    pub extinction_time: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlateauResult {
    pub n: usize,
    pub window: (u64, u64),
    pub replicates: Vec<PlateauReplicate>,
    /// Average over replicates that survived the window.
    pub mean_density: f64,
    pub died_early: usize,
}

impl PlateauResult {
    pub const CSV_HEADER: &'static str = "replicate,window_start,window_end,mean_density,extinction_time";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.replicates {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.replicate,
                self.window.0,
                self.window.1,
                r.mean_density.map(|d| format!("{d:.6}")).unwrap_or_default(),
                r.extinction_time.map(|t| t.to_string()).unwrap_or_default()
            )?;
        }
        Ok(())
    }
}

/// Time-averaged density over `[burn_in, t_max]` from full occupancy at size `cfg.n`.
pub fn density_plateau(cfg: &ExperimentConfig) -> Result<PlateauResult> {
    cfg.validate()?;
    let n = cfg.n;
    let start = cfg.burn_in_for(n);
    if start > cfg.t_max {
        return Err(Error::precondition(format!(
            "burn-in {start} exceeds t_max {}",
            cfg.t_max
        )));
    }
    let replicates: Vec<PlateauReplicate> = (0..cfg.trials)
        .into_par_iter()
        .map(|rep| -> Result<PlateauReplicate> {
            let (graph, noise) = replicate_streams(cfg, n, rep)?;
            let run = run_until_extinction(&graph, &noise, &State::full(n), cfg.t_max);
            let mean_density = run.extinction_time.is_none().then(|| {
                let window = &run.counts[start as usize..=cfg.t_max as usize];
                window.iter().sum::<usize>() as f64 / (window.len() * n) as f64
            });
            Ok(PlateauReplicate {
                replicate: rep,
                mean_density,
                extinction_time: run.extinction_time,
            })
        })
        .collect::<Result<_>>()?;
    let alive: Vec<f64> = replicates.iter().filter_map(|r| r.mean_density).collect();
    let died_early = replicates.len() - alive.len();
    let mean_density = if alive.is_empty() {
        0.0
    } else {
        alive.iter().sum::<f64>() / alive.len() as f64
    };
    Ok(PlateauResult {
        n,
        window: (start, cfg.t_max),
        replicates,
        mean_density,
        died_early,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubcriticalSummary {
    pub records: Vec<PersistenceRecord>,
    /// `(n, median extinction time)`; `None` where the median is censored.
    pub medians: Vec<(usize, Option<f64>)>,
    pub all_extinct: bool,
}

impl SubcriticalSummary {
    /// Whether medians grow more slowly than `n` between consecutive grid points.
    pub fn is_sublinear(&self) -> bool {
        self.medians.windows(2).all(|w| match (w[0].1, w[1].1) {
            (Some(a), Some(b)) => b / a < w[1].0 as f64 / w[0].0 as f64,
            _ => false,
        })
    }
}

/// Extinction times in the regime `qr <= 1`.
pub fn subcritical_experiment(cfg: &ExperimentConfig) -> Result<SubcriticalSummary> {
    if cfg.regime() == Regime::Supercritical {
        return Err(Error::precondition(format!(
            "subcritical experiment needs q*r <= 1 (q*r = {})",
            cfg.q * cfg.r as f64
        )));
    }
    let records = persistence_experiment(cfg)?;
    let medians = cfg
        .n_values()
        .into_iter()
        .map(|n| (n, PersistenceRecord::median_extinction(&records, n)))
        .collect();
    let all_extinct = records.iter().all(|r| !r.censored);
    Ok(SubcriticalSummary {
        records,
        medians,
        all_extinct,
    })
}
