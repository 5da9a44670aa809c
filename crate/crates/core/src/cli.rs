//! The `tcsim` command line: argument resolution, dispatch, and run manifests.
//!
//! Parameters resolve as defaults < `--config` file < `SIM_*` environment
//! variables < flags. Every run with `--out` writes its data files plus a
//! `manifest.txt` from which `tcsim replay` reproduces them byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::{load_config, ExperimentConfig, KEYS};
use crate::dynamics::{check_duality, run_dual, run_primal, DualMode};
use crate::error::{Error, Result};
use crate::experiments::{
    density_plateau, growth_experiment, ladder_experiment, persistence_experiment,
    psi_ones_experiment, seed_fraction_experiment, subcritical_experiment, PersistenceRecord,
};
use crate::graph::{Digraph, GraphConfig, InGraph, LazyGraph, Vertex};
use crate::noise::NoiseField;
use crate::psi::{build_psi, is_robust_exact, is_robust_sufficient, Robustness};
use crate::seed::{derive, derive2};
use crate::state::State;
use crate::theory::{binomial_lower_tail_bound, rho, OffspringLaw, DEFAULT_RHO_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "tcsim", version, about = "Threshold contact process on random in-regular digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// `key = value` config file; flags and SIM_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    r: Option<String>,
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long = "t-max", global = true)]
    t_max: Option<String>,
    #[arg(long, global = true)]
    a: Option<String>,
    #[arg(long, global = true)]
    b: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    g: Option<String>,
    #[arg(long = "q-tilde", global = true)]
    q_tilde: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    m: Option<String>,
    #[arg(long = "m-grid", global = true)]
    m_grid: Option<String>,
    #[arg(long = "n-grid", global = true)]
    n_grid: Option<String>,
    /// Horizon for single runs and duality checks.
    #[arg(long = "T", visible_alias = "horizon", global = true)]
    horizon: Option<String>,
    #[arg(long = "burn-in", global = true)]
    burn_in: Option<String>,
    #[arg(long = "i-cap", global = true)]
    i_cap: Option<String>,
    #[arg(long, global = true)]
    roots: Option<String>,
    /// Size cap for exhaustive robustness search.
    #[arg(long, global = true)]
    budget: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Directory receiving CSV outputs and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write one JSON object per output record.
    #[arg(long, global = true)]
    jsonl: bool,
}

impl Common {
    fn flag_values(&self) -> Vec<(&'static str, &String)> {
        let pairs: [(&'static str, &Option<String>); 20] = [
            ("n", &self.n),
            ("r", &self.r),
            ("q", &self.q),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("t_max", &self.t_max),
            ("a", &self.a),
            ("b", &self.b),
            ("epsilon", &self.epsilon),
            ("g", &self.g),
            ("q_tilde", &self.q_tilde),
            ("delta", &self.delta),
            ("m", &self.m),
            ("m_grid", &self.m_grid),
            ("n_grid", &self.n_grid),
            ("horizon", &self.horizon),
            ("burn_in", &self.burn_in),
            ("i_cap", &self.i_cap),
            ("roots", &self.roots),
            ("budget", &self.budget),
        ];
        let mut v: Vec<_> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
            .collect();
        if let Some(t) = &self.threads {
            v.push(("threads", t));
        }
        v
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph and write it in text form.
    GenGraph {
        #[command(flatten)]
        common: Common,
    },
    /// Run the primal process from full occupancy for T steps.
    Run {
        #[command(flatten)]
        common: Common,
        /// Keep per-step hex snapshots.
        #[arg(long)]
        snapshots: bool,
    },
    /// Run the dual process from a single root for T steps.
    Dual {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        root: Vertex,
        /// Use reversed primal noise anchored at the horizon.
        #[arg(long)]
        anchored: bool,
        #[arg(long)]
        snapshots: bool,
    },
    /// Check the pathwise duality equation over seeded realizations.
    DualityCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Build the collision configuration of a set and dump it.
    Psi {
        #[command(flatten)]
        common: Common,
        /// Comma-separated vertex set; defaults to a random set of size m.
        #[arg(long)]
        set: Option<String>,
    },
    /// Sufficient and exhaustive robustness of a collision configuration.
    RobustCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        set: Option<String>,
    },
    /// Branching-process survival probability.
    Rho {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Chernoff bound exp(-gamma(x) k p) on P(Bin(k, p) < x k p).
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        x: f64,
    },
    /// Run a named experiment.
    Experiment {
        name: ExperimentName,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExperimentName {
    Persistence,
    Plateau,
    SeedFraction,
    Growth,
    PsiOnes,
    Ladder,
    Subcritical,
}

impl ExperimentName {
    fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Persistence => "persistence",
            ExperimentName::Plateau => "plateau",
            ExperimentName::SeedFraction => "seed-fraction",
            ExperimentName::Growth => "growth",
            ExperimentName::PsiOnes => "psi-ones",
            ExperimentName::Ladder => "ladder",
            ExperimentName::Subcritical => "subcritical",
        }
    }
}

/// A fully resolved invocation: what a manifest records.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    /// Subcommand words, e.g. `experiment persistence`.
    pub command: String,
    pub cfg: ExperimentConfig,
    /// Subcommand-specific arguments.
    pub extras: BTreeMap<String, String>,
}

/// Parameters and outputs of one run, as written to `manifest.txt`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub job: Job,
    pub version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = format!("command = {}\nversion = {}\n", self.job.command, self.version);
        s.push_str(&self.job.cfg.to_text());
        for (k, v) in &self.job.extras {
            s.push_str(&format!("extra.{k} = {v}\n"));
        }
        s.push_str(&format!("outputs = {}\n", self.outputs.join(",")));
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut command = None;
        let mut version = String::new();
        let mut outputs = Vec::new();
        let mut extras = BTreeMap::new();
        let mut cfg_lines = String::new();
        for (i, line) in text.lines().enumerate() {
            let Some((k, v)) = line.split_once('=') else {
                if line.trim().is_empty() {
                    cfg_lines.push('\n');
                    continue;
                }
                return Err(Error::Config {
                    line: i + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "command" => command = Some(v.to_string()),
                "version" => version = v.to_string(),
                "outputs" => {
                    outputs = v.split(',').filter(|s| !s.is_empty()).map(String::from).collect()
                }
                _ => {
                    if let Some(e) = k.strip_prefix("extra.") {
                        extras.insert(e.to_string(), v.to_string());
                    }
                }
            }
            // keep line numbering aligned for config errors
            if k == "command" || k == "version" || k == "outputs" || k.starts_with("extra.") {
                cfg_lines.push('\n');
            } else {
                cfg_lines.push_str(line);
                cfg_lines.push('\n');
            }
        }
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&cfg_lines)?;
        let command = command.ok_or_else(|| Error::Parse("manifest has no command".into()))?;
        Ok(RunManifest {
            job: Job { command, cfg, extras },
            version,
            outputs,
        })
    }
}

fn env_overrides(cfg: &mut ExperimentConfig) -> Result<()> {
    for key in KEYS {
        let var = format!("SIM_{}", key.to_uppercase());
        if let Ok(v) = std::env::var(&var) {
            match cfg.set(key, &v) {
                Ok(_) => {}
                Err(message) => {
                    return Err(Error::Config {
                        line: 0,
                        message: format!("{var}: {message}"),
                    })
                }
            }
        }
    }
    Ok(())
}

fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    env_overrides(&mut cfg)?;
    for (k, v) in common.flag_values() {
        cfg.set(k, v).map_err(|message| Error::Config {
            line: 0,
            message: format!("--{}: {message}", k.replace('_', "-")),
        })?;
    }
    Ok(cfg)
}

/// Where a run's files go, and whether JSONL companions are written.
struct Sink {
    out: Option<PathBuf>,
    jsonl: bool,
    written: Vec<String>,
}

impl Sink {
    fn csv(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
        match &self.out {
            Some(dir) => {
                let mut buf = Vec::new();
                f(&mut buf)?;
                fs::write(dir.join(name), buf)?;
                self.written.push(name.to_string());
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock)?;
            }
        }
        Ok(())
    }

    fn file_only(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
        if self.out.is_some() {
            self.csv(name, f)?;
        }
        Ok(())
    }

    fn events(&mut self, name: &str, rows: Vec<serde_json::Value>) -> Result<()> {
        if !self.jsonl {
            return Ok(());
        }
        self.file_only(name, |w| {
            for r in rows {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })
    }
}

fn parse_set(s: &str) -> Result<Vec<Vertex>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad vertex `{t}` in --set")))
        })
        .collect()
}

fn extra<T: std::str::FromStr>(job: &Job, key: &str) -> Result<Option<T>> {
    job.extras
        .get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Parse(format!("bad value `{v}` for {key}")))
        })
        .transpose()
}

fn flag(job: &Job, key: &str) -> bool {
    job.extras.get(key).is_some_and(|v| v == "true")
}

fn psi_set(job: &Job, n: usize) -> Result<Vec<Vertex>> {
    let cfg = &job.cfg;
    match job.extras.get("set") {
        Some(s) => parse_set(s),
        None => {
            if cfg.m == 0 || cfg.m > n {
                return Err(Error::precondition(format!("need 1 <= m <= n (m = {})", cfg.m)));
            }
            Ok(crate::experiments::random_subset(n, cfg.m, derive(cfg.seed, "psi-set", 0)))
        }
    }
}

/// Executes a resolved job, writing into `out` when given.
pub fn execute(job: &Job, out: Option<&Path>, jsonl: bool) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut sink = Sink {
        out: out.map(Path::to_path_buf),
        jsonl,
        written: Vec::new(),
    };
    let cfg = &job.cfg;
    let mut words = job.command.split_whitespace();
    let head = words.next().unwrap_or("");
    match head {
        "gen-graph" => {
            let g = InGraph::generate(GraphConfig::new(cfg.n, cfg.r, cfg.seed)?)?;
            sink.csv("graph.txt", |w| g.write_text(w))?;
        }
        "run" => {
            cfg.validate()?;
            let g = Digraph::generate(GraphConfig::new(cfg.n, cfg.r, derive(cfg.seed, "graph", 0))?)?;
            let noise = NoiseField::new(cfg.q, derive(cfg.seed, "noise", 0))?;
            let traj = run_primal(&g, &noise, &State::full(cfg.n), cfg.horizon, flag(job, "snapshots"));
            sink.csv("trajectory.csv", |w| traj.write_csv(w))?;
            if flag(job, "snapshots") {
                sink.file_only("snapshots.hex", |w| traj.write_snapshots(w))?;
            }
        }
        "dual" => {
            cfg.validate()?;
            let root: Vertex = extra(job, "root")?.unwrap_or(0);
            if root as usize >= cfg.n {
                return Err(Error::precondition(format!("root {root} out of range")));
            }
            let g = InGraph::generate(GraphConfig::new(cfg.n, cfg.r, derive(cfg.seed, "graph", 0))?)?;
            let (mode, label) = if flag(job, "anchored") {
                (DualMode::Anchored, "noise")
            } else {
                (DualMode::Free, "dual-noise")
            };
            let noise = NoiseField::new(cfg.q, derive(cfg.seed, label, 0))?;
            let traj = run_dual(
                &g,
                &noise,
                &State::singleton(cfg.n, root),
                cfg.horizon,
                mode,
                flag(job, "snapshots"),
            );
            sink.csv("dual.csv", |w| traj.write_csv(w))?;
            if flag(job, "snapshots") {
                sink.file_only("snapshots.hex", |w| traj.write_snapshots(w))?;
            }
        }
        "duality-check" => {
            cfg.validate()?;
            let n = cfg.n;
            let mut rows = Vec::with_capacity(cfg.trials);
            let (mut total, mut agree) = (0usize, 0usize);
            for k in 0..cfg.trials {
                let g = Digraph::generate(GraphConfig::new(n, cfg.r, derive2(cfg.seed, "graph", n as u64, k as u64))?)?;
                let noise = NoiseField::new(cfg.q, derive2(cfg.seed, "noise", n as u64, k as u64))?;
                let mut ok = 0;
                for x in 0..n as Vertex {
                    for y in 0..n as Vertex {
                        let a = State::singleton(n, x);
                        let b = State::singleton(n, y);
                        ok += usize::from(check_duality(&g, &noise, &a, &b, cfg.horizon));
                    }
                }
                total += n * n;
                agree += ok;
                rows.push((k, n * n, ok));
            }
            let pct = 100.0 * agree as f64 / total.max(1) as f64;
            println!("agree={pct:.2}%");
            sink.file_only("duality.csv", |w| {
                writeln!(w, "realization,pairs,agree")?;
                for (k, p, a) in &rows {
                    writeln!(w, "{k},{p},{a}")?;
                }
                Ok(())
            })?;
        }
        "psi" | "robust-check" => {
            let params = cfg.psi_params()?;
            let graph = LazyGraph::new(GraphConfig::new(cfg.n, cfg.r, derive(cfg.seed, "graph", 0))?)?;
            let set = psi_set(job, cfg.n)?;
            let psi = build_psi(&set, &graph, &params)?;
            if head == "psi" {
                sink.csv("psi.csv", |w| psi.write_csv(w))?;
            } else {
                let sufficient = is_robust_sufficient(&psi, &params);
                println!("m={} d={} sufficient={}", psi.shape().m, psi.ones(), sufficient);
                let exact = is_robust_exact(&psi, &params, cfg.budget)?;
                match &exact {
                    Robustness::Robust => println!("exact=robust"),
                    Robustness::NotRobust { counterexample } => {
                        println!("exact=not_robust");
                        for (j, b) in counterexample.levels.iter().enumerate() {
                            let idx: Vec<String> = b.iter().map(|&p| psi.shape().index(p).to_string()).collect();
                            println!("B_{j} = {{{}}}", idx.join(" "));
                        }
                    }
                }
                sink.file_only("robust.csv", |w| {
                    writeln!(w, "m,d,sufficient,exact")?;
                    writeln!(
                        w,
                        "{},{},{},{}",
                        psi.shape().m,
                        psi.ones(),
                        u8::from(sufficient),
                        u8::from(exact.is_robust())
                    )
                })?;
            }
        }
        "rho" => {
            let law = OffspringLaw::new(cfg.q, cfg.r)?;
            let tol = extra(job, "tol")?.unwrap_or(DEFAULT_RHO_TOL);
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::precondition("tol must be positive"));
            }
            let v = rho(law, tol);
            println!("{v:.12}");
            sink.file_only("rho.csv", |w| {
                writeln!(w, "q,r,rho")?;
                writeln!(w, "{},{},{v:.12}", cfg.q, cfg.r)
            })?;
        }
        "bound" => {
            let k: u64 = extra(job, "k")?.ok_or_else(|| Error::Parse("bound needs --k".into()))?;
            let p: f64 = extra(job, "p")?.ok_or_else(|| Error::Parse("bound needs --p".into()))?;
            let x: f64 = extra(job, "x")?.ok_or_else(|| Error::Parse("bound needs --x".into()))?;
            let v = binomial_lower_tail_bound(k, p, x)?;
            println!("{v:.12}");
            sink.file_only("bound.csv", |w| {
                writeln!(w, "k,p,x,bound")?;
                writeln!(w, "{k},{p},{x},{v:.12}")
            })?;
        }
        "experiment" => {
            let name = words.next().unwrap_or("");
            run_experiment(name, cfg, &mut sink)?;
        }
        other => return Err(Error::Parse(format!("unknown command `{other}`"))),
    }
    if let Some(dir) = out {
        let manifest = RunManifest {
            job: job.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: sink.written.clone(),
        };
        fs::write(dir.join("manifest.txt"), manifest.to_text())?;
    }
    Ok(())
}

fn run_experiment(name: &str, cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let quiet = sink.out.is_none();
    match name {
        "persistence" => {
            let recs = persistence_experiment(cfg)?;
            sink.file_only("persistence.csv", |w| PersistenceRecord::write_csv(&recs, &mut *w))?;
            sink.events(
                "persistence.jsonl",
                recs.iter()
                    .map(|r| json!({"n": r.n, "replicate": r.replicate, "extinction_time": r.extinction_time, "censored": r.censored}))
                    .collect(),
            )?;
            for n in cfg.n_values() {
                let censored = recs.iter().filter(|r| r.n == n && r.censored).count();
                match PersistenceRecord::median_extinction(&recs, n) {
                    Some(m) => println!("n={n} median_extinction={m} censored={censored}"),
                    None => println!("n={n} median_extinction>={} censored={censored}", cfg.t_max),
                }
            }
        }
        "plateau" => {
            let res = density_plateau(cfg)?;
            sink.file_only("plateau.csv", |w| res.write_csv(&mut *w))?;
            let target = OffspringLaw::new(cfg.q, cfg.r).map(|l| rho(l, DEFAULT_RHO_TOL))?;
            println!(
                "n={} window=[{},{}] mean_density={:.6} rho={:.6} died_early={}",
                res.n, res.window.0, res.window.1, res.mean_density, target, res.died_early
            );
        }
        "seed-fraction" => {
            let res = seed_fraction_experiment(cfg)?;
            sink.file_only("seed_fraction.csv", |w| res.write_csv(cfg, &mut *w))?;
            println!(
                "n={} steps={} threshold={:.3} fraction={:.6} ({} of {})",
                res.n, res.steps, res.threshold, res.fraction, res.exceeding, res.roots
            );
        }
        "growth" => {
            let res = growth_experiment(cfg)?;
            sink.file_only("growth.csv", |w| res.write_csv(&mut *w))?;
            println!(
                "q_tilde={} delta={} g={}",
                res.params.q_tilde, res.params.delta, res.params.g
            );
            for r in &res.rows {
                if r.low_acceptance() {
                    eprintln!("warning: m={} acceptance rate {:.3} below 0.5", r.m, r.acceptance_rate);
                }
                println!(
                    "m={} accepted={} failures={} frequency={:.6} violations={}",
                    r.m, r.accepted, r.failures, r.failure_frequency, r.inequality_violations
                );
            }
        }
        "psi-ones" => {
            let res = psi_ones_experiment(cfg)?;
            sink.file_only("psi_ones.csv", |w| res.write_csv(&mut *w))?;
            println!(
                "n={} m={} g={} trials={} mean_d={:.6} mean_bound={:.6} zero_fraction={:.4} over_fraction={:.4}",
                res.n, res.m, res.g, res.trials, res.mean_d, res.mean_bound, res.zero_fraction, res.over_fraction
            );
        }
        "ladder" => {
            let res = ladder_experiment(cfg)?;
            sink.file_only("ladder.csv", |w| res.write_csv(&mut *w))?;
            sink.events(
                "ladder.jsonl",
                res.traces
                    .iter()
                    .map(|t| json!({"root": t.root, "rungs": t.rungs.len(), "termination": t.termination.label()}))
                    .collect(),
            )?;
            println!(
                "roots={} seeded={} sustained_10={:.4}",
                res.traces.len(),
                res.seeded(),
                res.sustained_fraction(10)
            );
        }
        "subcritical" => {
            let res = subcritical_experiment(cfg)?;
            sink.file_only("subcritical.csv", |w| PersistenceRecord::write_csv(&res.records, &mut *w))?;
            for (n, m) in &res.medians {
                match m {
                    Some(m) => println!("n={n} median_extinction={m}"),
                    None => println!("n={n} median_extinction>={}", cfg.t_max),
                }
            }
            println!("all_extinct={} sublinear={}", res.all_extinct, res.is_sublinear());
        }
        other => return Err(Error::Parse(format!("unknown experiment `{other}`"))),
    }
    if quiet {
        eprintln!("(pass --out <dir> to write CSV output)");
    }
    Ok(())
}

fn job_from(command: Command) -> Result<(Job, Option<PathBuf>, bool)> {
    let mut extras = BTreeMap::new();
    let (name, common) = match command {
        Command::GenGraph { common } => ("gen-graph".to_string(), common),
        Command::Run { common, snapshots } => {
            if snapshots {
                extras.insert("snapshots".into(), "true".into());
            }
            ("run".into(), common)
        }
        Command::Dual { common, root, anchored, snapshots } => {
            extras.insert("root".into(), root.to_string());
            if anchored {
                extras.insert("anchored".into(), "true".into());
            }
            if snapshots {
                extras.insert("snapshots".into(), "true".into());
            }
            ("dual".into(), common)
        }
        Command::DualityCheck { common } => ("duality-check".into(), common),
        Command::Psi { common, set } => {
            if let Some(s) = set {
                extras.insert("set".into(), s);
            }
            ("psi".into(), common)
        }
        Command::RobustCheck { common, set } => {
            if let Some(s) = set {
                extras.insert("set".into(), s);
            }
            ("robust-check".into(), common)
        }
        Command::Rho { common, tol } => {
            if let Some(t) = tol {
                extras.insert("tol".into(), t.to_string());
            }
            ("rho".into(), common)
        }
        Command::Bound { common, k, p, x } => {
            extras.insert("k".into(), k.to_string());
            extras.insert("p".into(), p.to_string());
            extras.insert("x".into(), x.to_string());
            ("bound".into(), common)
        }
        Command::Experiment { name, common } => (format!("experiment {}", name.as_str()), common),
        Command::Replay { .. } => unreachable!("handled by caller"),
    };
    let cfg = resolve(&common)?;
    Ok((Job { command: name, cfg, extras }, common.out.clone(), common.jsonl))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_) => EXIT_PRECONDITION,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

fn run_parsed(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Replay { manifest, out } => {
            let text = fs::read_to_string(&manifest)?;
            let m = RunManifest::parse(&text)?;
            let jsonl = m.outputs.iter().any(|o| o.ends_with(".jsonl"));
            execute(&m.job, Some(&out), jsonl)
        }
        command => {
            let (job, out, jsonl) = job_from(command)?;
            if job.cfg.threads > 0 {
                // a global pool can only be installed once per process
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(job.cfg.threads)
                    .build_global();
            }
            execute(&job, out.as_deref(), jsonl)
        }
    }
}

/// Entry point: parses `args` (including the program name) and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("usage error");
                    eprintln!("{first}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run_parsed(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
