//! Collision configurations on the forest `T_m` and their robustness.
//!
//! `T_m` is `m` rooted `r`-ary trees of depth `g`. Positions are stored as
//! their rank in the order `≺` (level first, then lexicographic), so level
//! `i` occupies the contiguous block starting at `m(1 + r + ... + r^{i-1})`
//! and the children of the `k`-th position of a level are positions
//! `k·r .. k·r + r` of the next level.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::io::Write;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::graph::{InNeighbors, Vertex};
use crate::state::State;

/// Default size cap for [`is_robust_exact`].
pub const DEFAULT_EXACT_BUDGET: usize = 24;

/// The constants `q̃`, `δ` and `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiParams {
    pub q_tilde: f64,
    pub delta: f64,
    pub g: usize,
}

impl PsiParams {
    /// `(q̃r - 1 - δ)`, the per-level expansion coefficient.
    pub fn slack(&self, r: usize) -> f64 {
        self.q_tilde * r as f64 - 1.0 - self.delta
    }

    /// `(q̃r - 1 - δ)(q̃r)^j m`.
    pub fn growth_floor(&self, r: usize, j: usize, m: usize) -> f64 {
        self.slack(r) * (self.q_tilde * r as f64).powi(j as i32) * m as f64
    }

    /// Checks all three constraints against the model's `q` and `r`.
    pub fn validate(&self, q: f64, r: usize) -> Result<()> {
        let qr = self.q_tilde * r as f64;
        if !(self.q_tilde < q && qr > 1.0) {
            return Err(Error::precondition(format!(
                "need q_tilde < q and q_tilde*r > 1 (q_tilde = {}, q = {q}, r = {r})",
                self.q_tilde
            )));
        }
        if !(self.delta > 0.0 && self.delta < (qr - 1.0).min(1.0)) {
            return Err(Error::precondition(format!(
                "need 0 < delta < min(q_tilde*r - 1, 1) (delta = {})",
                self.delta
            )));
        }
        if self.g == 0 || self.growth_floor(r, self.g - 1, 1) <= 1.0 + self.delta {
            return Err(Error::precondition(format!(
                "g = {} does not satisfy (q_tilde*r - 1 - delta)(q_tilde*r)^(g-1) > 1 + delta",
                self.g
            )));
        }
        Ok(())
    }
}

/// Midpoint `q̃`, half-gap `δ`, and the smallest admissible `g`.
pub fn default_params(q: f64, r: usize) -> Result<PsiParams> {
    if !(0.0..=1.0).contains(&q) || r == 0 || q * r as f64 <= 1.0 {
        return Err(Error::precondition(format!(
            "need q*r > 1 (q = {q}, r = {r})"
        )));
    }
    let q_tilde = (q + 1.0 / r as f64) / 2.0;
    let qr = q_tilde * r as f64;
    let delta = (qr - 1.0).min(1.0) / 2.0;
    let slack = qr - 1.0 - delta;
    let mut g = 1usize;
    while slack * qr.powi(g as i32 - 1) <= 1.0 + delta {
        g += 1;
    }
    let p = PsiParams { q_tilde, delta, g };
    p.validate(q, r)?;
    Ok(p)
}

/// Dimensions `(m, r, g)` of the forest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub m: usize,
    pub r: usize,
    pub g: usize,
}

impl Shape {
    pub fn new(m: usize, r: usize, g: usize) -> Result<Self> {
        if m == 0 || r == 0 {
            return Err(Error::precondition("forest needs m >= 1 and r >= 1"));
        }
        Ok(Shape { m, r, g })
    }

    pub fn level_size(&self, i: usize) -> usize {
        self.m * self.r.pow(i as u32)
    }

    /// Rank of the first position of level `i`.
    pub fn level_start(&self, i: usize) -> usize {
        (0..i).map(|k| self.level_size(k)).sum()
    }

    /// `(1 + r + ... + r^g)·m`.
    pub fn len(&self) -> usize {
        self.level_start(self.g + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level_of(&self, pos: usize) -> usize {
        let mut i = 0;
        let mut end = self.level_size(0);
        while pos >= end {
            i += 1;
            end += self.level_size(i);
        }
        i
    }

    /// Parent position and the slot (`0..r`) leading from it; `None` for roots.
    pub fn parent(&self, pos: usize) -> Option<(usize, usize)> {
        let i = self.level_of(pos);
        if i == 0 {
            return None;
        }
        let off = pos - self.level_start(i);
        Some((self.level_start(i - 1) + off / self.r, off % self.r))
    }

    /// Children of `pos`; empty at level `g`.
    pub fn children_of(&self, pos: usize) -> std::ops::Range<usize> {
        let i = self.level_of(pos);
        if i >= self.g {
            return 0..0;
        }
        let off = pos - self.level_start(i);
        let first = self.level_start(i + 1) + off * self.r;
        first..first + self.r
    }

    pub fn index(&self, pos: usize) -> TreeIndex {
        let i = self.level_of(pos);
        let mut off = pos - self.level_start(i);
        let mut path = SmallVec::with_capacity(i);
        for _ in 0..i {
            path.push((off % self.r) as u16);
            off /= self.r;
        }
        path.reverse();
        TreeIndex {
            root: off as u32,
            path,
        }
    }

    pub fn position(&self, idx: &TreeIndex) -> Result<usize> {
        let i = idx.level();
        if i > self.g || idx.root as usize >= self.m || idx.path.iter().any(|&s| s as usize >= self.r)
        {
            return Err(Error::precondition(format!("{idx} is not a position of this forest")));
        }
        let mut off = idx.root as usize;
        for &s in &idx.path {
            off = off * self.r + s as usize;
        }
        Ok(self.level_start(i) + off)
    }
}

/// A position `(σ_0, σ_1, ..., σ_i)` of `T_m`, stored 0-based.
///
/// Displayed 1-based as `(1,2,1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeIndex {
    pub root: u32,
    pub path: SmallVec<[u16; 12]>,
}

impl TreeIndex {
    /// Builds from the 1-based coordinates used in notation.
    pub fn from_one_based(coords: &[usize]) -> Result<Self> {
        let (&root, rest) = coords
            .split_first()
            .ok_or_else(|| Error::precondition("empty tree index"))?;
        if root == 0 || rest.contains(&0) {
            return Err(Error::precondition("tree index coordinates are 1-based"));
        }
        Ok(TreeIndex {
            root: (root - 1) as u32,
            path: rest.iter().map(|&s| (s - 1) as u16).collect(),
        })
    }

    pub fn level(&self) -> usize {
        self.path.len()
    }

    /// Dot-separated 1-based coordinates, as used in CSV output.
    pub fn dotted(&self) -> String {
        std::iter::once(self.root as usize + 1)
            .chain(self.path.iter().map(|&s| s as usize + 1))
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl Ord for TreeIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level()
            .cmp(&other.level())
            .then(self.root.cmp(&other.root))
            .then_with(|| self.path.cmp(&other.path))
    }
}

impl PartialOrd for TreeIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TreeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.root + 1)?;
        for s in &self.path {
            write!(f, ",{}", s + 1)?;
        }
        write!(f, ")")
    }
}

/// `T_m` listed in increasing `≺` order.
pub fn enumerate_tm(m: usize, r: usize, g: usize) -> Result<Vec<TreeIndex>> {
    let shape = Shape::new(m, r, g)?;
    Ok((0..shape.len()).map(|p| shape.index(p)).collect())
}

/// `z^σ`: start at the `σ_0`-th smallest element of `a` and follow input slots.
pub fn z_map<G: InNeighbors>(a: &[Vertex], sigma: &TreeIndex, g: &G) -> Result<Vertex> {
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut z = *sorted
        .get(sigma.root as usize)
        .ok_or_else(|| Error::precondition(format!("{sigma} has no root in a set of size {}", sorted.len())))?;
    for &s in &sigma.path {
        if s as usize >= g.r() {
            return Err(Error::precondition(format!("{sigma} uses a slot beyond r = {}", g.r())));
        }
        z = g.with_in_nbrs(z, |ys| ys[s as usize]);
    }
    Ok(z)
}

/// A `{0,1}` configuration on `T_m`, with the realized `z^σ` when built from a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiConfig {
    shape: Shape,
    bits: State,
    z_values: Option<Vec<Vertex>>,
    ones: usize,
}

impl PsiConfig {
    /// Wraps a handcrafted configuration; roots must be 0 and no 1 may sit
    /// below another 1.
    pub fn from_bits(shape: Shape, bits: &[bool]) -> Result<Self> {
        if bits.len() != shape.len() {
            return Err(Error::precondition(format!(
                "configuration has {} entries, forest has {}",
                bits.len(),
                shape.len()
            )));
        }
        if bits[..shape.m].iter().any(|&b| b) {
            return Err(Error::precondition("root positions must be 0"));
        }
        let mut marked_above = vec![false; shape.len()];
        for pos in shape.m..shape.len() {
            let (p, _) = shape.parent(pos).expect("non-root");
            marked_above[pos] = marked_above[p] || bits[p];
            if bits[pos] && marked_above[pos] {
                return Err(Error::precondition(format!(
                    "{} is marked below a marked ancestor",
                    shape.index(pos)
                )));
            }
        }
        let state = State::from_vertices(
            shape.len(),
            bits.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i as Vertex),
        );
        Ok(PsiConfig {
            shape,
            ones: state.count(),
            bits: state,
            z_values: None,
        })
    }

    pub fn zeros(shape: Shape) -> Self {
        PsiConfig {
            shape,
            bits: State::empty(shape.len()),
            z_values: None,
            ones: 0,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    pub fn bit(&self, pos: usize) -> bool {
        self.bits.contains(pos as Vertex)
    }

    /// `d`, the number of marked positions.
    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn z_values(&self) -> Option<&[Vertex]> {
        self.z_values.as_deref()
    }

    pub fn has_marked_ancestor(&self, pos: usize) -> bool {
        let mut cur = pos;
        while let Some((p, _)) = self.shape.parent(cur) {
            if self.bit(p) {
                return true;
            }
            cur = p;
        }
        false
    }

    /// CSV rows `sigma,level,z_value,psi_bit` in `≺` order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sigma,level,z_value,psi_bit")?;
        for pos in 0..self.shape.len() {
            let idx = self.shape.index(pos);
            let z = self
                .z_values
                .as_ref()
                .map(|z| z[pos].to_string())
                .unwrap_or_default();
            writeln!(w, "{},{},{},{}", idx.dotted(), idx.level(), z, u8::from(self.bit(pos)))?;
        }
        Ok(())
    }
}

/// `ψ(A)`: inspect positions in `≺` order; a non-root position is marked when
/// no ancestor is marked and its `z^σ` already appeared at an earlier position.
pub fn build_psi<G: InNeighbors>(a: &[Vertex], graph: &G, params: &PsiParams) -> Result<PsiConfig> {
    let mut roots = a.to_vec();
    roots.sort_unstable();
    roots.dedup();
    if roots.is_empty() {
        return Err(Error::precondition("psi needs a nonempty set"));
    }
    if let Some(&x) = roots.iter().find(|&&x| x as usize >= graph.n()) {
        return Err(Error::precondition(format!("vertex {x} out of range")));
    }
    let shape = Shape::new(roots.len(), graph.r(), params.g)?;
    let len = shape.len();
    let mut z = Vec::with_capacity(len);
    z.extend_from_slice(&roots);
    let mut seen: HashSet<Vertex> = roots.iter().copied().collect();
    let mut blocked = vec![false; len];
    let mut bits = State::empty(len);
    let r = shape.r;
    for level in 1..=shape.g {
        let parents = shape.level_start(level - 1)..shape.level_start(level);
        for p in parents {
            let child0 = z.len();
            let above = blocked[p] || bits.contains(p as Vertex);
            graph.with_in_nbrs(z[p], |ys| z.extend_from_slice(&ys[..r]));
            for pos in child0..child0 + r {
                blocked[pos] = above;
                let fresh = seen.insert(z[pos]);
                if !above && !fresh {
                    bits.insert(pos as Vertex);
                }
            }
        }
    }
    debug_assert_eq!(z.len(), len);
    Ok(PsiConfig {
        shape,
        ones: bits.count(),
        bits,
        z_values: Some(z),
    })
}

/// `J(B)`, the children of every member of `b`; rejects members at level `g`.
pub fn children(shape: &Shape, b: &[usize]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(b.len() * shape.r);
    for &p in b {
        if p >= shape.len() {
            return Err(Error::precondition(format!("position {p} outside the forest")));
        }
        if shape.level_of(p) >= shape.g {
            return Err(Error::precondition(format!(
                "{} is at the top level and has no children",
                shape.index(p)
            )));
        }
        out.extend(shape.children_of(p));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// A nested collection `(B_0, ..., B_i)` of positions, `i < g`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Family {
    pub levels: Vec<Vec<usize>>,
}

impl Family {
    pub fn new(levels: Vec<Vec<usize>>) -> Self {
        let levels = levels
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        Family { levels }
    }

    /// `B_0 ⊆ T^0_m`, `B_{j+1} ⊆ J(B_j)`, and at most `g` levels.
    pub fn is_well_formed(&self, shape: &Shape) -> bool {
        if self.levels.is_empty() || self.levels.len() > shape.g {
            return false;
        }
        if self.levels[0].iter().any(|&p| p >= shape.m) {
            return false;
        }
        self.levels.windows(2).all(|w| {
            w[1].iter()
                .all(|p| shape.parent(*p).is_some_and(|(par, _)| w[0].binary_search(&par).is_ok()))
        })
    }
}

fn zero_children(psi: &PsiConfig, b: &[usize]) -> usize {
    b.iter()
        .flat_map(|&p| psi.shape.children_of(p))
        .filter(|&c| !psi.bit(c))
        .count()
}

/// Conditions (i) and (ii).
pub fn is_admissible(psi: &PsiConfig, fam: &Family, params: &PsiParams) -> bool {
    let shape = psi.shape;
    if !fam.is_well_formed(&shape) {
        return false;
    }
    if fam.levels.iter().flatten().any(|&p| psi.bit(p)) {
        return false;
    }
    let q_tilde = params.q_tilde;
    if (fam.levels[0].len() as f64) < q_tilde * shape.m as f64 {
        return false;
    }
    fam.levels.windows(2).all(|w| {
        w[1].len() as f64 >= q_tilde * zero_children(psi, &w[0]) as f64
    })
}

/// Admissible and condition (iii) at every level.
pub fn is_good(psi: &PsiConfig, fam: &Family, params: &PsiParams) -> bool {
    if !is_admissible(psi, fam, params) {
        return false;
    }
    let shape = psi.shape;
    fam.levels.iter().enumerate().all(|(j, b)| {
        zero_children(psi, b) as f64 >= params.growth_floor(shape.r, j, shape.m)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Robustness {
    Robust,
    /// An admissible family that is not good.
    NotRobust { counterexample: Family },
}

impl Robustness {
    pub fn is_robust(&self) -> bool {
        matches!(self, Robustness::Robust)
    }
}

/// Searches every admissible family for one that is not good.
///
/// Families are grown level by level. A prefix that breaks (ii) is dropped,
/// since every extension of it is inadmissible; an admissible prefix that
/// breaks (iii) at its last level is returned as the counterexample.
pub fn is_robust_exact(psi: &PsiConfig, params: &PsiParams, budget: usize) -> Result<Robustness> {
    let shape = psi.shape;
    if shape.len() > budget {
        return Err(Error::BudgetExceeded {
            size: shape.len(),
            budget,
        });
    }
    if shape.g == 0 {
        return Ok(Robustness::Robust);
    }
    let roots: Vec<usize> = (0..shape.m).filter(|&p| !psi.bit(p)).collect();
    let min_b0 = params.q_tilde * shape.m as f64;
    let mut stack = Vec::new();
    for b0 in subsets_at_least(&roots, min_b0)? {
        stack.push(b0);
        if let Some(fam) = search(psi, params, &mut stack)? {
            return Ok(Robustness::NotRobust { counterexample: fam });
        }
        stack.pop();
    }
    Ok(Robustness::Robust)
}

fn search(psi: &PsiConfig, params: &PsiParams, stack: &mut Vec<Vec<usize>>) -> Result<Option<Family>> {
    let shape = psi.shape;
    let j = stack.len() - 1;
    let last = stack.last().expect("nonempty");
    let zc: Vec<usize> = last
        .iter()
        .flat_map(|&p| shape.children_of(p))
        .filter(|&c| !psi.bit(c))
        .collect();
    if (zc.len() as f64) < params.growth_floor(shape.r, j, shape.m) {
        return Ok(Some(Family::new(stack.clone())));
    }
    if j + 1 < shape.g {
        let min_next = params.q_tilde * zc.len() as f64;
        for b in subsets_at_least(&zc, min_next)? {
            stack.push(b);
            let found = search(psi, params, stack)?;
            stack.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
    }
    Ok(None)
}

fn subsets_at_least(items: &[usize], min: f64) -> Result<Vec<Vec<usize>>> {
    if items.len() > 30 {
        return Err(Error::BudgetExceeded {
            size: items.len(),
            budget: 30,
        });
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << items.len()) {
        if (mask.count_ones() as f64) < min {
            continue;
        }
        out.push(
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect(),
        );
    }
    Ok(out)
}

/// `d <= (1 + δ)m`; `true` guarantees robustness, `false` is inconclusive.
pub fn is_robust_sufficient(psi: &PsiConfig, params: &PsiParams) -> bool {
    psi.ones as f64 <= (1.0 + params.delta) * psi.shape.m as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_examples() {
        let p = default_params(0.75, 2).unwrap();
        assert_eq!(p.q_tilde, 0.625);
        assert_eq!(p.delta, 0.125);
        assert_eq!(p.g, 11);
        let p = default_params(1.0, 2).unwrap();
        assert_eq!((p.q_tilde, p.delta, p.g), (0.75, 0.25, 5));
        assert!(default_params(0.5, 2).is_err());
    }

    #[test]
    fn shape_navigation_round_trips() {
        let s = Shape::new(3, 2, 3).unwrap();
        assert_eq!(s.len(), 3 * 15);
        for pos in 0..s.len() {
            let idx = s.index(pos);
            assert_eq!(s.position(&idx).unwrap(), pos);
            if let Some((p, slot)) = s.parent(pos) {
                assert!(s.children_of(p).contains(&pos));
                assert_eq!(s.children_of(p).start + slot, pos);
            }
        }
    }

    #[test]
    fn enumeration_small_cases() {
        let show = |v: Vec<TreeIndex>| v.iter().map(|i| i.to_string()).collect::<Vec<_>>();
        assert_eq!(show(enumerate_tm(1, 2, 1).unwrap()), ["(1)", "(1,1)", "(1,2)"]);
        assert_eq!(
            show(enumerate_tm(2, 2, 1).unwrap()),
            ["(1)", "(2)", "(1,1)", "(1,2)", "(2,1)", "(2,2)"]
        );
    }

    #[test]
    fn children_rejects_top_level() {
        let s = Shape::new(1, 2, 1).unwrap();
        assert_eq!(children(&s, &[]).unwrap(), Vec::<usize>::new());
        assert_eq!(children(&s, &[0]).unwrap(), vec![1, 2]);
        assert!(children(&s, &[1]).is_err());
    }

    #[test]
    fn admissibility_threshold_arithmetic() {
        let s = Shape::new(10, 2, 2).unwrap();
        let psi = PsiConfig::zeros(s);
        let p = PsiParams { q_tilde: 0.625, delta: 0.125, g: 2 };
        assert!(!is_admissible(&psi, &Family::new(vec![(0..6).collect()]), &p));
        assert!(is_admissible(&psi, &Family::new(vec![(0..7).collect()]), &p));
    }

    #[test]
    fn sufficient_check_threshold() {
        let s = Shape::new(10, 2, 2).unwrap();
        let p = PsiParams { q_tilde: 0.625, delta: 0.125, g: 2 };
        // 12 marks on distinct leaves: 12 > 11.25
        let mut bits = vec![false; s.len()];
        for b in bits.iter_mut().skip(s.level_start(2)).take(12) {
            *b = true;
        }
        let psi = PsiConfig::from_bits(s, &bits).unwrap();
        assert_eq!(psi.ones(), 12);
        assert!(!is_robust_sufficient(&psi, &p));
        assert!(is_robust_sufficient(&PsiConfig::zeros(s), &p));
    }

    #[test]
    fn from_bits_rejects_marked_chains_and_roots() {
        let s = Shape::new(1, 2, 2).unwrap();
        let mut bits = vec![false; s.len()];
        bits[0] = true;
        assert!(PsiConfig::from_bits(s, &bits).is_err());
        let mut bits = vec![false; s.len()];
        bits[1] = true;
        bits[3] = true; // child of position 1
        assert!(PsiConfig::from_bits(s, &bits).is_err());
    }
}
