//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::psi::{default_params, PsiParams, DEFAULT_EXACT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub q: f64,
    pub r: usize,
    pub n: usize,
    /// Sizes swept by grid experiments; empty means just `n`.
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub t_max: u64,
    pub seed: u64,
    pub q_tilde: Option<f64>,
    pub delta: Option<f64>,
    pub g: Option<usize>,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub m: usize,
    pub m_grid: Vec<usize>,
    pub burn_in: Option<u64>,
    pub i_cap: usize,
    /// Roots sampled by dual experiments; 0 means every vertex.
    pub roots: usize,
    /// Horizon `T` for single runs and duality checks.
    pub horizon: u64,
    pub budget: usize,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            q: 0.75,
            r: 2,
            n: 1000,
            n_grid: Vec::new(),
            trials: 20,
            t_max: 500,
            seed: 1,
            q_tilde: None,
            delta: None,
            g: None,
            a: 2.0,
            b: 0.5,
            epsilon: 0.05,
            m: 10,
            m_grid: vec![20, 40, 80],
            burn_in: None,
            i_cap: 10_000,
            roots: 0,
            horizon: 5,
            budget: DEFAULT_EXACT_BUDGET,
            threads: 0,
        }
    }
}

/// Every recognized key, in manifest order.
pub const KEYS: &[&str] = &[
    "q", "r", "n", "n_grid", "trials", "t_max", "seed", "q_tilde", "delta", "g", "a", "b",
    "epsilon", "m", "m_grid", "burn_in", "i_cap", "roots", "horizon", "budget", "threads",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse()
        .map_err(|_| format!("`{v}` is not a valid value for `{key}`"))
}

fn parse_list(key: &str, v: &str) -> std::result::Result<Vec<usize>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_num(key, s.trim())).collect()
}

fn fmt_list(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Sets one key from its text form. `Ok(false)` means the key is unknown.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<bool, String> {
        let v = value.trim();
        match key {
            "q" => self.q = parse_num(key, v)?,
            "r" => self.r = parse_num(key, v)?,
            "n" => self.n = parse_num(key, v)?,
            "n_grid" => self.n_grid = parse_list(key, v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "t_max" => self.t_max = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "q_tilde" => self.q_tilde = Some(parse_num(key, v)?),
            "delta" => self.delta = Some(parse_num(key, v)?),
            "g" => self.g = Some(parse_num(key, v)?),
            "a" => self.a = parse_num(key, v)?,
            "b" => self.b = parse_num(key, v)?,
            "epsilon" => self.epsilon = parse_num(key, v)?,
            "m" => self.m = parse_num(key, v)?,
            "m_grid" => self.m_grid = parse_list(key, v)?,
            "burn_in" => self.burn_in = Some(parse_num(key, v)?),
            "i_cap" => self.i_cap = parse_num(key, v)?,
            "roots" => self.roots = parse_num(key, v)?,
            "horizon" => self.horizon = parse_num(key, v)?,
            "budget" => self.budget = parse_num(key, v)?,
            "threads" => self.threads = parse_num(key, v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Current value of `key` in the same text form [`set`](Self::set) accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let opt = |o: Option<String>| o.unwrap_or_default();
        Some(match key {
            "q" => self.q.to_string(),
            "r" => self.r.to_string(),
            "n" => self.n.to_string(),
            "n_grid" => fmt_list(&self.n_grid),
            "trials" => self.trials.to_string(),
            "t_max" => self.t_max.to_string(),
            "seed" => self.seed.to_string(),
            "q_tilde" => opt(self.q_tilde.map(|x| x.to_string())),
            "delta" => opt(self.delta.map(|x| x.to_string())),
            "g" => opt(self.g.map(|x| x.to_string())),
            "a" => self.a.to_string(),
            "b" => self.b.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "m" => self.m.to_string(),
            "m_grid" => fmt_list(&self.m_grid),
            "burn_in" => opt(self.burn_in.map(|x| x.to_string())),
            "i_cap" => self.i_cap.to_string(),
            "roots" => self.roots.to_string(),
            "horizon" => self.horizon.to_string(),
            "budget" => self.budget.to_string(),
            "threads" => self.threads.to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let k = k.trim();
            if v.trim().is_empty() {
                // blank optional values round-trip through manifests
                if matches!(k, "q_tilde" | "delta" | "g" | "burn_in" | "n_grid") {
                    continue;
                }
            }
            match self.set(k, v) {
                Ok(true) => {}
                Ok(false) => return Err(Error::UnknownKey(k.to_string())),
                Err(message) => return Err(Error::Config { line: i + 1, message }),
            }
        }
        Ok(())
    }

    /// Flat text form, one key per line, blank for unset optional keys.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            let _ = writeln!(s, "{k} = {}", self.get(k).unwrap_or_default());
        }
        s
    }

    pub fn regime(&self) -> Regime {
        let qr = self.q * self.r as f64;
        if qr > 1.0 {
            Regime::Supercritical
        } else if qr < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Critical
        }
    }

    pub fn n_values(&self) -> Vec<usize> {
        if self.n_grid.is_empty() {
            vec![self.n]
        } else {
            self.n_grid.clone()
        }
    }

    /// Default constants for `(q, r)` with any overrides applied, validated.
    pub fn psi_params(&self) -> Result<PsiParams> {
        let mut p = match default_params(self.q, self.r) {
            Ok(p) => p,
            Err(e) => {
                // without supercritical defaults every constant must be given
                match (self.q_tilde, self.delta, self.g) {
                    (Some(q_tilde), Some(delta), Some(g)) => {
                        return Ok(PsiParams { q_tilde, delta, g });
                    }
                    _ => return Err(e),
                }
            }
        };
        if let Some(v) = self.q_tilde {
            p.q_tilde = v;
        }
        if let Some(v) = self.delta {
            p.delta = v;
        }
        if let Some(v) = self.g {
            p.g = v;
        }
        p.validate(self.q, self.r)?;
        Ok(p)
    }

    /// `max(50, 5 ln n)` unless overridden.
    pub fn burn_in_for(&self, n: usize) -> u64 {
        self.burn_in
            .unwrap_or_else(|| 50u64.max((5.0 * (n as f64).ln()).ceil() as u64))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::precondition(format!("q = {} is not a probability", self.q)));
        }
        if self.r == 0 {
            return Err(Error::precondition("r must be at least 1"));
        }
        if self.t_max == 0 {
            return Err(Error::precondition("t_max must be at least 1"));
        }
        if let Some(&n) = self.n_values().iter().find(|&&n| n <= self.r) {
            return Err(Error::precondition(format!("need n > r (n = {n}, r = {})", self.r)));
        }
        Ok(())
    }
}

/// Reads a config file over the defaults.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text(&text)?;
    Ok(cfg)
}
