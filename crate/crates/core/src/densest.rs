//! Densest and least-densest subset problems inside one equivalence class.
//!
//! For `X ⊆ U` free of stationary vertices the densities are
//!
//! ```text
//! max mode:  (c(incoming with receivers ⊆ X) - c(outgoing with givers ∩ X ≠ ∅)) / omega(X)
//! min mode:  (c(incoming with receivers ∩ X ≠ ∅) - c(outgoing with givers ⊆ X)) / omega(X)
//! ```
//!
//! and any `X` meeting a stationary vertex has density zero. [`solve`] finds
//! the inclusion-maximal optimizer with a Dinkelbach iteration over a
//! project-selection min cut; [`solve_lexicographic`] enumerates subsets and
//! ranks them by their density history across earlier levels.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;

/// Relative tolerance used when two densities are compared for equality.
pub const DENSITY_TOL: f64 = 1e-9;

/// Largest class handled by subset enumeration (bitmask width).
const MASK_LIMIT: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceEdge {
    pub edge: usize,
    pub c: f64,
    /// Receivers for incoming edges, givers for outgoing edges (global ids).
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensestInstance {
    /// Candidate vertex set `U`, sorted global ids.
    pub vertices: Vec<usize>,
    /// Weights aligned with `vertices`; ignored for stationary vertices.
    pub omega: Vec<f64>,
    pub stationary: Vec<bool>,
    pub incoming: Vec<InstanceEdge>,
    pub outgoing: Vec<InstanceEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensestSolution {
    pub set: Vec<usize>,
    pub density: f64,
    pub mode: Mode,
    /// Dinkelbach ratio iterates (empty for enumeration).
    pub iterates: Vec<f64>,
}

/// Equality up to [`DENSITY_TOL`], relative to magnitude.
pub fn densities_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= DENSITY_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Lexicographic order on density histories; earlier entries dominate.
pub fn lex_compare(h1: &[f64], h2: &[f64]) -> Result<Ordering> {
    if h1.len() != h2.len() {
        return Err(Error::LengthMismatch { left: h1.len(), right: h2.len() });
    }
    for (a, b) in h1.iter().zip(h2) {
        match a.total_cmp(b) {
            Ordering::Equal => continue,
            other => return Ok(other),
        }
    }
    Ok(Ordering::Equal)
}

/// [`lex_compare`] with entries treated as equal when they tie.
pub fn lex_compare_tol(h1: &[f64], h2: &[f64]) -> Result<Ordering> {
    if h1.len() != h2.len() {
        return Err(Error::LengthMismatch { left: h1.len(), right: h2.len() });
    }
    for (a, b) in h1.iter().zip(h2) {
        if !densities_tie(*a, *b) {
            return Ok(a.total_cmp(b));
        }
    }
    Ok(Ordering::Equal)
}

impl DensestInstance {
    pub fn new(vertices: Vec<usize>, omega: Vec<f64>, stationary: Vec<bool>) -> Result<Self> {
        if omega.len() != vertices.len() || stationary.len() != vertices.len() {
            return Err(Error::DimensionMismatch { expected: vertices.len(), got: omega.len() });
        }
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by_key(|&k| vertices[k]);
        let inst = DensestInstance {
            vertices: order.iter().map(|&k| vertices[k]).collect(),
            omega: order.iter().map(|&k| omega[k]).collect(),
            stationary: order.iter().map(|&k| stationary[k]).collect(),
            incoming: Vec::new(),
            outgoing: Vec::new(),
        };
        if inst.vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSet("duplicate vertex in instance".into()));
        }
        Ok(inst)
    }

    pub fn add_incoming(&mut self, edge: usize, c: f64, receivers: Vec<usize>) {
        self.incoming.push(InstanceEdge { edge, c, members: sorted(receivers) });
    }

    pub fn add_outgoing(&mut self, edge: usize, c: f64, givers: Vec<usize>) {
        self.outgoing.push(InstanceEdge { edge, c, members: sorted(givers) });
    }

    pub fn local(&self, u: usize) -> Option<usize> {
        self.vertices.binary_search(&u).ok()
    }

    pub fn is_stationary(&self, u: usize) -> bool {
        self.local(u).is_some_and(|k| self.stationary[k])
    }

    pub fn has_stationary(&self) -> bool {
        self.stationary.iter().any(|&s| s)
    }

    pub fn validate(&self) -> Result<()> {
        for e in self.incoming.iter().chain(&self.outgoing) {
            if e.members.is_empty() {
                return Err(Error::InvalidSet(format!("edge {} has no members", e.edge)));
            }
            if let Some(&u) = e.members.iter().find(|&&u| self.local(u).is_none()) {
                return Err(Error::InvalidSet(format!("edge {} member {u} outside U", e.edge)));
            }
            if !e.c.is_finite() {
                return Err(Error::Invalid(format!("edge {} has c = {}", e.edge, e.c)));
            }
        }
        for (k, &w) in self.omega.iter().enumerate() {
            if !self.stationary[k] && !(w > 0.0) {
                return Err(Error::NonPositiveVertexWeight { vertex: self.vertices[k], weight: w });
            }
        }
        Ok(())
    }

    /// Density of `set` (global ids) in the given mode.
    pub fn density(&self, set: &[usize], mode: Mode) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::InvalidSet("empty set".into()));
        }
        let mut inside = vec![false; self.vertices.len()];
        for &u in set {
            let k = self.local(u).ok_or_else(|| Error::InvalidSet(format!("vertex {u} not in U")))?;
            inside[k] = true;
        }
        Ok(self.density_of(&inside, mode))
    }

    fn density_of(&self, inside: &[bool], mode: Mode) -> f64 {
        if inside.iter().zip(&self.stationary).any(|(&i, &s)| i && s) {
            return 0.0;
        }
        let member_in = |u: &usize| self.local(*u).is_some_and(|k| inside[k]);
        let all_in = |e: &InstanceEdge| e.members.iter().all(member_in);
        let any_in = |e: &InstanceEdge| e.members.iter().any(member_in);
        let (gain, loss): (f64, f64) = match mode {
            Mode::Max => (
                self.incoming.iter().filter(|e| all_in(e)).map(|e| e.c).sum(),
                self.outgoing.iter().filter(|e| any_in(e)).map(|e| e.c).sum(),
            ),
            Mode::Min => (
                self.incoming.iter().filter(|e| any_in(e)).map(|e| e.c).sum(),
                self.outgoing.iter().filter(|e| all_in(e)).map(|e| e.c).sum(),
            ),
        };
        let vol: f64 = (0..inside.len()).filter(|&k| inside[k]).map(|k| self.omega[k]).sum();
        (gain - loss) / vol
    }

    /// Edges accounted for by `set` when it is extracted in `mode`, with
    /// members restricted to `set`.
    pub fn restrict(&self, set: &[usize], mode: Mode) -> DensestInstance {
        let (taken_in, taken_out) = self.split_edges(set, mode);
        let keep: Vec<usize> = set.to_vec();
        let mut out = DensestInstance {
            vertices: Vec::new(),
            omega: Vec::new(),
            stationary: Vec::new(),
            incoming: Vec::new(),
            outgoing: Vec::new(),
        };
        for (k, &u) in self.vertices.iter().enumerate() {
            if keep.contains(&u) {
                out.vertices.push(u);
                out.omega.push(self.omega[k]);
                out.stationary.push(self.stationary[k]);
            }
        }
        out.incoming = taken_in.into_iter().map(|e| intersect(e, set)).collect();
        out.outgoing = taken_out.into_iter().map(|e| intersect(e, set)).collect();
        out
    }

    /// The residual instance on `U \ set` after extracting `set` in `mode`.
    pub fn remove(&self, set: &[usize], mode: Mode) -> DensestInstance {
        let (taken_in, taken_out) = self.split_edges(set, mode);
        let rest = |edges: &[InstanceEdge], taken: &[&InstanceEdge]| -> Vec<InstanceEdge> {
            edges
                .iter()
                .filter(|e| !taken.iter().any(|t| std::ptr::eq(*t, *e)))
                .map(|e| InstanceEdge {
                    edge: e.edge,
                    c: e.c,
                    members: e.members.iter().copied().filter(|u| !set.contains(u)).collect(),
                })
                .collect()
        };
        let mut out = DensestInstance {
            incoming: rest(&self.incoming, &taken_in),
            outgoing: rest(&self.outgoing, &taken_out),
            ..Default::default()
        };
        for (k, &u) in self.vertices.iter().enumerate() {
            if !set.contains(&u) {
                out.vertices.push(u);
                out.omega.push(self.omega[k]);
                out.stationary.push(self.stationary[k]);
            }
        }
        out
    }

    fn split_edges(&self, set: &[usize], mode: Mode) -> (Vec<&InstanceEdge>, Vec<&InstanceEdge>) {
        let all_in = |e: &&InstanceEdge| e.members.iter().all(|u| set.contains(u));
        let any_in = |e: &&InstanceEdge| e.members.iter().any(|u| set.contains(u));
        match mode {
            Mode::Max => (
                self.incoming.iter().filter(all_in).collect(),
                self.outgoing.iter().filter(any_in).collect(),
            ),
            Mode::Min => (
                self.incoming.iter().filter(any_in).collect(),
                self.outgoing.iter().filter(all_in).collect(),
            ),
        }
    }

    /// Concatenates two edge-disjoint instances over disjoint vertex sets.
    pub fn merge(&self, other: &DensestInstance) -> DensestInstance {
        let mut entries: Vec<(usize, f64, bool)> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(k, &u)| (u, self.omega[k], self.stationary[k]))
            .chain(other.vertices.iter().enumerate().map(|(k, &u)| (u, other.omega[k], other.stationary[k])))
            .collect();
        entries.sort_by_key(|x| x.0);
        entries.dedup_by_key(|x| x.0);
        DensestInstance {
            vertices: entries.iter().map(|x| x.0).collect(),
            omega: entries.iter().map(|x| x.1).collect(),
            stationary: entries.iter().map(|x| x.2).collect(),
            incoming: self.incoming.iter().chain(&other.incoming).cloned().collect(),
            outgoing: self.outgoing.iter().chain(&other.outgoing).cloned().collect(),
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

fn intersect(e: &InstanceEdge, set: &[usize]) -> InstanceEdge {
    InstanceEdge {
        edge: e.edge,
        c: e.c,
        members: e.members.iter().copied().filter(|u| set.contains(u)).collect(),
    }
}

// ---------------------------------------------------------------------------
// Min-cut solver

struct Selection {
    c: f64,
    members: Vec<usize>,
}

/// Maximizes `(gain(X) - penalty(X)) / omega(X)` over nonempty `X ⊆ 0..k`,
/// where a gain edge pays when all its members are selected and a penalty
/// edge charges when any member is selected.
struct RatioProblem {
    omega: Vec<f64>,
    gains: Vec<Selection>,
    penalties: Vec<Selection>,
}

impl RatioProblem {
    fn ratio(&self, x: &[bool]) -> f64 {
        let gain: f64 = self
            .gains
            .iter()
            .filter(|g| g.members.iter().all(|&v| x[v]))
            .map(|g| g.c)
            .sum();
        let loss: f64 = self
            .penalties
            .iter()
            .filter(|p| p.members.iter().any(|&v| x[v]))
            .map(|p| p.c)
            .sum();
        let vol: f64 = (0..x.len()).filter(|&v| x[v]).map(|v| self.omega[v]).sum();
        (gain - loss) / vol
    }

    /// `max_X gain(X) - penalty(X) - lambda * omega(X)` (empty set allowed),
    /// returning the maximal maximizer.
    fn closure(&self, lambda: f64) -> Result<(f64, Vec<bool>)> {
        let k = self.omega.len();
        let (s, t) = (0, 1);
        let vertex = |v: usize| 2 + v;
        let gain_node = |i: usize| 2 + k + i;
        let penalty_node = |i: usize| 2 + k + self.gains.len() + i;
        let mut net = FlowNetwork::new(2 + k + self.gains.len() + self.penalties.len());
        let mut offset = 0.0;
        for (i, g) in self.gains.iter().enumerate() {
            net.add_arc(s, gain_node(i), g.c)?;
            offset += g.c;
            for &v in &g.members {
                net.add_arc(gain_node(i), vertex(v), f64::INFINITY)?;
            }
        }
        for (i, p) in self.penalties.iter().enumerate() {
            net.add_arc(penalty_node(i), t, p.c)?;
            for &v in &p.members {
                net.add_arc(vertex(v), penalty_node(i), f64::INFINITY)?;
            }
        }
        for v in 0..k {
            let cost = lambda * self.omega[v];
            if cost >= 0.0 {
                net.add_arc(vertex(v), t, cost)?;
            } else {
                net.add_arc(s, vertex(v), -cost)?;
                offset -= cost;
            }
        }
        let cut = net.solve(s, t)?;
        let selected = (0..k).map(|v| cut.source_side[vertex(v)]).collect();
        Ok((offset - cut.value, selected))
    }

    fn solve(&self) -> Result<(f64, Vec<bool>, Vec<f64>)> {
        let k = self.omega.len();
        let total_c: f64 = self.gains.iter().chain(&self.penalties).map(|e| e.c).sum();
        let total_w: f64 = self.omega.iter().sum();
        let mut current = vec![true; k];
        let mut lambda = self.ratio(&current);
        let mut iterates = vec![lambda];
        let guard = k + self.gains.len() + self.penalties.len() + 2;
        for _ in 0..guard {
            let (value, x) = self.closure(lambda)?;
            let scale = total_c + lambda.abs() * total_w;
            if !x.iter().any(|&b| b) || value <= 1e-12 * scale.max(1e-300) {
                break;
            }
            let next = self.ratio(&x);
            if next <= lambda + 1e-15 * (1.0 + lambda.abs()) {
                break;
            }
            lambda = next;
            current = x;
            iterates.push(lambda);
        }
        // Shifting lambda down by a hair makes every optimal set strictly
        // profitable, so the unique maximizer is the largest optimal set.
        let eps = 1e-10 * (1.0 + lambda.abs());
        let (_, maximal) = self.closure(lambda - eps)?;
        if maximal.iter().any(|&b| b) && self.ratio(&maximal) >= lambda - eps {
            current = maximal;
        }
        let best = self.ratio(&current);
        Ok((best, current, iterates))
    }
}

/// Exact maximal (least) densest subset via Dinkelbach over min cuts.
///
/// Requires every listed `c` to be nonnegative (zero entries are ignored).
/// The ratio problem over the free vertices of `inst`, with the free local
/// indices it ranges over.
fn ratio_problem(inst: &DensestInstance, mode: Mode) -> Result<(RatioProblem, Vec<usize>)> {
    inst.validate()?;
    if inst.vertices.is_empty() {
        return Err(Error::InvalidSet("empty instance".into()));
    }
    if let Some(e) = inst.incoming.iter().chain(&inst.outgoing).find(|e| e.c < 0.0) {
        return Err(Error::Invalid(format!(
            "min-cut solver needs c >= 0 (edge {} has {})",
            e.edge, e.c
        )));
    }
    let free: Vec<usize> = (0..inst.vertices.len()).filter(|&k| !inst.stationary[k]).collect();
    let mut index = vec![usize::MAX; inst.vertices.len()];
    for (i, &k) in free.iter().enumerate() {
        index[k] = i;
    }
    let to_local = |members: &[usize]| -> Vec<usize> {
        members.iter().map(|&u| inst.local(u).expect("validated")).collect()
    };
    // Gains need every member selectable; penalties only see free members.
    let as_gain = |e: &InstanceEdge| -> Option<Selection> {
        let ks = to_local(&e.members);
        (e.c > 0.0 && ks.iter().all(|&k| index[k] != usize::MAX))
            .then(|| Selection { c: e.c, members: ks.iter().map(|&k| index[k]).collect() })
    };
    let as_penalty = |e: &InstanceEdge| -> Option<Selection> {
        let ks: Vec<usize> = to_local(&e.members)
            .into_iter()
            .filter(|&k| index[k] != usize::MAX)
            .map(|k| index[k])
            .collect();
        (e.c > 0.0 && !ks.is_empty()).then_some(Selection { c: e.c, members: ks })
    };
    let (gain_edges, penalty_edges) = match mode {
        Mode::Max => (&inst.incoming, &inst.outgoing),
        Mode::Min => (&inst.outgoing, &inst.incoming),
    };
    let problem = RatioProblem {
        omega: free.iter().map(|&k| inst.omega[k]).collect(),
        gains: gain_edges.iter().filter_map(as_gain).collect(),
        penalties: penalty_edges.iter().filter_map(as_penalty).collect(),
    };
    Ok((problem, free))
}

/// One min-cut probe at `lambda`: the maximal `T`-free set maximizing
/// `c(I_X) - c(S_X) - λ ω(X)` (roles of `I` and `S` swapped in min mode),
/// and that maximum. The empty set scores 0.
pub fn parametric_closure(inst: &DensestInstance, mode: Mode, lambda: f64) -> Result<(f64, Vec<usize>)> {
    let (problem, free) = ratio_problem(inst, mode)?;
    if free.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let (profit, selected) = problem.closure(lambda)?;
    let set = (0..free.len()).filter(|&i| selected[i]).map(|i| inst.vertices[free[i]]).collect();
    Ok((profit, set))
}

pub fn solve(inst: &DensestInstance, mode: Mode) -> Result<DensestSolution> {
    let (problem, free) = ratio_problem(inst, mode)?;
    let has_t = free.len() < inst.vertices.len();
    let whole = || DensestSolution {
        set: inst.vertices.clone(),
        density: 0.0,
        mode,
        iterates: Vec::new(),
    };
    if free.is_empty() {
        return Ok(whole());
    }
    let (ratio, selected, iterates) = problem.solve()?;
    let (density, iterates) = match mode {
        Mode::Max => (ratio, iterates),
        Mode::Min => (-ratio, iterates.into_iter().map(|x| -x).collect()),
    };
    if has_t {
        let beaten_by_zero = match mode {
            Mode::Max => density < 0.0 || densities_tie(density, 0.0),
            Mode::Min => density > 0.0 || densities_tie(density, 0.0),
        };
        if beaten_by_zero {
            return Ok(DensestSolution { iterates, ..whole() });
        }
    }
    let set = (0..free.len()).filter(|&i| selected[i]).map(|i| inst.vertices[free[i]]).collect();
    Ok(DensestSolution { set, density, mode, iterates })
}

// ---------------------------------------------------------------------------
// Enumeration solver

struct MaskedEdge {
    c: f64,
    mask: u64,
    // All members lie inside the enumerated class.
    complete: bool,
}

/// An instance evaluated on subsets of a fixed class, encoded as bitmasks.
struct MaskedInstance {
    omega: Vec<f64>,
    stationary: u64,
    incoming: Vec<MaskedEdge>,
    outgoing: Vec<MaskedEdge>,
}

impl MaskedInstance {
    fn project(inst: &DensestInstance, class: &[usize]) -> Self {
        let bit = |u: usize| class.binary_search(&u).ok().map(|k| 1u64 << k);
        let masked = |e: &InstanceEdge| {
            let mut mask = 0;
            let mut complete = true;
            for &u in &e.members {
                match bit(u) {
                    Some(b) => mask |= b,
                    None => complete = false,
                }
            }
            MaskedEdge { c: e.c, mask, complete }
        };
        let mut omega = vec![0.0; class.len()];
        let mut stationary = 0;
        for (k, &u) in class.iter().enumerate() {
            if let Some(j) = inst.local(u) {
                omega[k] = inst.omega[j];
                if inst.stationary[j] {
                    stationary |= 1 << k;
                }
            }
        }
        MaskedInstance {
            omega,
            stationary,
            incoming: inst.incoming.iter().map(masked).collect(),
            outgoing: inst.outgoing.iter().map(masked).collect(),
        }
    }

    fn density(&self, x: u64, mode: Mode) -> f64 {
        if x & self.stationary != 0 {
            return 0.0;
        }
        let all_in = |e: &&MaskedEdge| e.complete && e.mask & !x == 0;
        let any_in = |e: &&MaskedEdge| e.mask & x != 0;
        let (gain, loss): (f64, f64) = match mode {
            Mode::Max => (
                self.incoming.iter().filter(all_in).map(|e| e.c).sum(),
                self.outgoing.iter().filter(any_in).map(|e| e.c).sum(),
            ),
            Mode::Min => (
                self.incoming.iter().filter(any_in).map(|e| e.c).sum(),
                self.outgoing.iter().filter(all_in).map(|e| e.c).sum(),
            ),
        };
        let mut vol = 0.0;
        let mut rest = x;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            vol += self.omega[k];
            rest &= rest - 1;
        }
        (gain - loss) / vol
    }
}

/// Maximal lexicographically (least) densest subset by enumeration.
///
/// Each candidate `X` is ranked by `(h_0(X), ..., h_{i-1}(X), delta(X))`,
/// where `h_j` is the density of `X` in `history[j]` under the same mode and
/// `delta` is its density in `inst`. Max mode keeps the largest vector, min
/// mode the smallest; the returned set is the union of all optimizers.
pub fn solve_lexicographic(
    inst: &DensestInstance,
    mode: Mode,
    history: &[DensestInstance],
    cap: usize,
) -> Result<DensestSolution> {
    inst.validate()?;
    let size = inst.vertices.len();
    if size == 0 {
        return Err(Error::InvalidSet("empty instance".into()));
    }
    let cap = cap.min(MASK_LIMIT);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let class = &inst.vertices;
    let current = MaskedInstance::project(inst, class);
    let past: Vec<MaskedInstance> = history.iter().map(|h| MaskedInstance::project(h, class)).collect();
    let vector = |x: u64| -> Vec<f64> {
        past.iter().map(|p| p.density(x, mode)).chain([current.density(x, mode)]).collect()
    };
    let better = |a: &[f64], b: &[f64]| -> bool {
        let ord = lex_compare_tol(a, b).expect("equal lengths");
        match mode {
            Mode::Max => ord == Ordering::Greater,
            Mode::Min => ord == Ordering::Less,
        }
    };

    let full = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
    let mut best = vector(full);
    let mut ties = vec![full];
    for x in 1..full {
        let v = vector(x);
        if better(&v, &best) {
            best = v;
            ties.clear();
            ties.push(x);
        } else if lex_compare_tol(&v, &best)? == Ordering::Equal {
            ties.push(x);
        }
    }
    // Optimizers should be closed under union; fall back to the largest tie.
    let mut chosen = ties.iter().fold(0u64, |acc, &x| acc | x);
    if lex_compare_tol(&vector(chosen), &best)? != Ordering::Equal {
        chosen = *ties.iter().max_by_key(|x| x.count_ones()).expect("at least one tie");
    }
    let set = (0..size).filter(|&k| chosen >> k & 1 == 1).map(|k| class[k]).collect();
    Ok(DensestSolution { set, density: current.density(chosen, mode), mode, iterates: Vec::new() })
}

/// Enumeration-based solver with no history; the oracle for [`solve`].
pub fn solve_exhaustive(inst: &DensestInstance, mode: Mode, cap: usize) -> Result<DensestSolution> {
    solve_lexicographic(inst, mode, &[], cap)
}
