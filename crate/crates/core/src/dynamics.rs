//! Primal and dual threshold contact dynamics and the pathwise duality check.
//!
//! Time conventions, for a fixed horizon `T`:
//! - the primal step into time `t` (`t = 1..=T`) reads noise column `t`;
//! - the horizon-anchored dual step `t -> t+1` (`t = 0..T`) reads column `T - t`,
//!   which is `B̂^{z,T}_t = B^z_{T-t}`;
//! - the free-running dual step `t -> t+1` reads column `t` of its own field.

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{Digraph, InNeighbors, Vertex};
use crate::noise::NoiseField;
use crate::state::State;

/// Supports larger than `n / DENSE_DIVISOR` switch the primal step to a full sweep.
const DENSE_DIVISOR: usize = 32;

/// One primal update: `x` is occupied at `t_next` iff it receives input at
/// `t_next` and one of its inputs is occupied in `s`.
pub fn primal_step(g: &Digraph, s: &State, noise: &NoiseField, t_next: u64) -> State {
    let n = g.n();
    let support = s.count();
    if support == 0 {
        return State::empty(n);
    }
    if support * DENSE_DIVISOR * g.r() > n {
        primal_step_dense(g, s, noise, t_next)
    } else {
        primal_step_sparse(g, s, noise, t_next)
    }
}

fn primal_step_sparse(g: &Digraph, s: &State, noise: &NoiseField, t_next: u64) -> State {
    let n = g.n();
    let mut seen = State::empty(n);
    let mut next = State::empty(n);
    for y in s.iter() {
        for &(z, _) in g.outs.out_adj(y) {
            if seen.insert_new(z) && noise.bit(t_next, z) {
                next.insert(z);
            }
        }
    }
    next
}

fn primal_step_dense(g: &Digraph, s: &State, noise: &NoiseField, t_next: u64) -> State {
    let n = g.n();
    let mut fed = State::empty(n);
    for x in 0..n as Vertex {
        if g.ins.in_nbrs(x).iter().any(|&y| s.contains(y)) {
            fed.insert(x);
        }
    }
    let col = noise.column(t_next, n);
    let words = fed
        .words()
        .iter()
        .zip(col.words())
        .map(|(a, b)| a & b)
        .collect();
    State::from_words(n, words)
}

/// Dual step reading noise column `column`: every occupied `z` whose bit is set
/// gives birth onto all of its inputs.
fn dual_step_column<G: InNeighbors>(g: &G, s: &State, noise: &NoiseField, column: u64) -> State {
    let mut next = State::empty(g.n());
    for z in s.iter() {
        if noise.bit(column, z) {
            g.with_in_nbrs(z, |ys| {
                for &y in ys {
                    next.insert(y);
                }
            });
        }
    }
    next
}

/// Horizon-anchored dual step `t -> t+1`; requires `t < horizon`.
pub fn dual_step<G: InNeighbors>(
    g: &G,
    s: &State,
    noise: &NoiseField,
    horizon: u64,
    t: u64,
) -> Result<State> {
    if t >= horizon {
        return Err(Error::precondition(format!(
            "dual time {t} must be below the horizon {horizon}"
        )));
    }
    Ok(dual_step_column(g, s, noise, horizon - t))
}

/// Free-running dual step `t -> t+1`.
pub fn dual_step_free<G: InNeighbors>(g: &G, s: &State, noise: &NoiseField, t: u64) -> State {
    dual_step_column(g, s, noise, t)
}

/// Runs the free dual for `steps` steps starting at dual time `start`.
pub fn advance_dual_free<G: InNeighbors>(
    g: &G,
    s: &State,
    noise: &NoiseField,
    start: u64,
    steps: u64,
) -> State {
    let mut cur = s.clone();
    for t in start..start + steps {
        if cur.is_empty() {
            break;
        }
        cur = dual_step_free(g, &cur, noise, t);
    }
    cur
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryPoint {
    pub t: u64,
    pub occupied: usize,
    pub snapshot: Option<State>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    fn push(&mut self, t: u64, s: &State, keep: bool) {
        self.points.push(TrajectoryPoint {
            t,
            occupied: s.count(),
            snapshot: keep.then(|| s.clone()),
        });
    }

    pub fn counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.occupied).collect()
    }

    pub fn last_snapshot(&self) -> Option<&State> {
        self.points.last().and_then(|p| p.snapshot.as_ref())
    }

    /// CSV with header `t,occupied`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,occupied")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.t, p.occupied)?;
        }
        Ok(())
    }

    /// One hex-encoded snapshot per line, for points that kept one.
    pub fn write_snapshots<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for p in &self.points {
            if let Some(s) = &p.snapshot {
                writeln!(w, "{}", s.to_hex())?;
            }
        }
        Ok(())
    }
}

/// `ξ^A_t` for `t = 0..=horizon`.
pub fn run_primal(
    g: &Digraph,
    noise: &NoiseField,
    initial: &State,
    horizon: u64,
    keep_snapshots: bool,
) -> Trajectory {
    let mut traj = Trajectory::default();
    let mut cur = initial.clone();
    traj.push(0, &cur, keep_snapshots);
    for t in 1..=horizon {
        cur = primal_step(g, &cur, noise, t);
        traj.push(t, &cur, keep_snapshots);
    }
    traj
}

/// Final primal state at `horizon`.
pub fn primal_state_at(g: &Digraph, noise: &NoiseField, initial: &State, horizon: u64) -> State {
    let mut cur = initial.clone();
    for t in 1..=horizon {
        if cur.is_empty() {
            break;
        }
        cur = primal_step(g, &cur, noise, t);
    }
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualMode {
    /// Reversed noise `B^z_{T-t}`, as in the duality equation.
    Anchored,
    /// Noise column `t` at dual time `t`; the horizon only bounds the run.
    Free,
}

/// `ξ̂^{B,T}_t` for `t = 0..=horizon`.
pub fn run_dual<G: InNeighbors>(
    g: &G,
    noise: &NoiseField,
    initial: &State,
    horizon: u64,
    mode: DualMode,
    keep_snapshots: bool,
) -> Trajectory {
    let mut traj = Trajectory::default();
    let mut cur = initial.clone();
    traj.push(0, &cur, keep_snapshots);
    for t in 0..horizon {
        let column = match mode {
            DualMode::Anchored => horizon - t,
            DualMode::Free => t,
        };
        cur = dual_step_column(g, &cur, noise, column);
        traj.push(t + 1, &cur, keep_snapshots);
    }
    traj
}

fn anchored_dual_state_at<G: InNeighbors>(
    g: &G,
    noise: &NoiseField,
    initial: &State,
    horizon: u64,
) -> State {
    let mut cur = initial.clone();
    for t in 0..horizon {
        if cur.is_empty() {
            break;
        }
        cur = dual_step_column(g, &cur, noise, horizon - t);
    }
    cur
}

/// Whether `{ξ^A_T ∩ B ≠ ∅}` and `{ξ̂^{B,T}_T ∩ A ≠ ∅}` agree on this realization.
pub fn check_duality(g: &Digraph, noise: &NoiseField, a: &State, b: &State, horizon: u64) -> bool {
    let primal = primal_state_at(g, noise, a, horizon).intersects(b);
    let dual = anchored_dual_state_at(g, noise, b, horizon).intersects(a);
    primal == dual
}

/// Outcome of a primal run stopped at extinction or at `t_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtinctionRun {
    /// First `t` with an empty state, if reached by `t_max`.
    pub extinction_time: Option<u64>,
    /// Occupied counts for `t = 0..=end`.
    pub counts: Vec<usize>,
}

pub fn run_until_extinction(
    g: &Digraph,
    noise: &NoiseField,
    initial: &State,
    t_max: u64,
) -> ExtinctionRun {
    let mut counts = vec![initial.count()];
    let mut cur = initial.clone();
    if cur.is_empty() {
        return ExtinctionRun {
            extinction_time: Some(0),
            counts,
        };
    }
    for t in 1..=t_max {
        cur = primal_step(g, &cur, noise, t);
        let c = cur.count();
        counts.push(c);
        if c == 0 {
            return ExtinctionRun {
                extinction_time: Some(t),
                counts,
            };
        }
    }
    ExtinctionRun {
        extinction_time: None,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphConfig, InGraph};

    fn triangle() -> Digraph {
        Digraph::new(
            InGraph::from_lists(
                GraphConfig::new(3, 2, 0).unwrap(),
                &[vec![1, 2], vec![0, 2], vec![0, 1]],
            )
            .unwrap(),
        )
    }

    /// A field whose column `t` is exactly `bits` for vertices 0..3, found by search.
    fn noise_with_column(t: u64, bits: [bool; 3]) -> NoiseField {
        (0..)
            .map(|s| NoiseField::new(0.5, s).unwrap())
            .find(|f| (0..3).all(|x| f.bit(t, x) == bits[x as usize]))
            .unwrap()
    }

    #[test]
    fn hand_traced_primal_step() {
        let g = triangle();
        let noise = noise_with_column(1, [true, true, false]);
        // s = {1} (vertex 0); x=2 receives input from 1; x=1's inputs empty; x=3 blocked
        let s = State::singleton(3, 0);
        assert_eq!(primal_step(&g, &s, &noise, 1).to_vec(), vec![1]);
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let g = Digraph::generate(GraphConfig::new(500, 3, 4).unwrap()).unwrap();
        let noise = NoiseField::new(0.6, 8).unwrap();
        for k in [1usize, 5, 40, 300] {
            let s = State::from_vertices(500, (0..k as Vertex).map(|i| (i * 7) % 500));
            assert_eq!(
                primal_step_sparse(&g, &s, &noise, 3),
                primal_step_dense(&g, &s, &noise, 3)
            );
        }
    }

    #[test]
    fn dual_step_rejects_t_at_horizon() {
        let g = triangle();
        let noise = NoiseField::new(0.5, 1).unwrap();
        let s = State::singleton(3, 0);
        assert!(dual_step(&g, &s, &noise, 3, 3).is_err());
        assert!(dual_step(&g, &s, &noise, 3, 2).is_ok());
    }

    #[test]
    fn single_birth_covers_all_inputs() {
        let g = triangle();
        let on = NoiseField::new(1.0, 0).unwrap();
        let off = NoiseField::new(0.0, 0).unwrap();
        let s = State::singleton(3, 2);
        assert_eq!(dual_step(&g, &s, &on, 5, 0).unwrap().to_vec(), vec![0, 1]);
        assert!(dual_step(&g, &s, &off, 5, 0).unwrap().is_empty());
    }
}
