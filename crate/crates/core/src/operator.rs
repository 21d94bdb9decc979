//! The diffusion operator: first derivative `f^(1)`, the higher-order
//! derivative tower, and the per-edge flow assignment.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::densest::{self, DensestInstance, Mode};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::hypergraph::{DirectedHypergraph, DEFAULT_ENUM_CAP};
use crate::partition::{induced_partition, OrderedPartition, DEFAULT_TAU_GROUP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level0Solver {
    MinCut,
    Enumeration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConfig {
    pub tau_group: f64,
    /// Largest class handled by enumeration at levels >= 1.
    pub enum_cap: usize,
    pub level0: Level0Solver,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig { tau_group: DEFAULT_TAU_GROUP, enum_cap: DEFAULT_ENUM_CAP, level0: Level0Solver::MinCut }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    Active,
    Inactive,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionKind {
    Densest,
    LeastDensest,
    /// What is left of a class with a stationary vertex; derivative zero.
    Stationary,
}

/// One group of vertices sharing a derivative value, with the edges it
/// accounted for when it was separated.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub vertices: Vec<usize>,
    pub value: f64,
    pub kind: ExtractionKind,
    pub own: DensestInstance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerLevel {
    /// `f^(i)`.
    pub derivative: Vec<f64>,
    /// `σ_i`.
    pub partition: OrderedPartition,
    pub status: Vec<EdgeStatus>,
    /// `Δ^(i)_e`, zero for ambiguous edges.
    pub discrepancy: Vec<f64>,
    pub tail_argmax: Vec<Vec<usize>>,
    pub head_argmin: Vec<Vec<usize>>,
}

impl TowerLevel {
    pub fn active_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.status.len()).filter(|&e| self.status[e] == EdgeStatus::Active)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTower {
    /// `levels[i]` holds `f^(i)` and `σ_i`, for `i = 0..=k`.
    pub levels: Vec<TowerLevel>,
    /// `extractions[i]` is the split of `σ_i` that produced `f^(i+1)`.
    pub extractions: Vec<Vec<Extraction>>,
}

impl DerivativeTower {
    pub fn order(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn derivative(&self, i: usize) -> &[f64] {
        &self.levels[i].derivative
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstDerivative {
    pub f1: Vec<f64>,
    /// `L_ω f = -f^(1)` on `N`, zero on stationary coordinates.
    pub l_omega: Vec<f64>,
    pub tower: DerivativeTower,
}

fn level_from(
    h: &DirectedHypergraph,
    values: Vec<f64>,
    partition: OrderedPartition,
    prev: Option<&TowerLevel>,
) -> TowerLevel {
    let m = h.num_edges();
    let mut level = TowerLevel {
        derivative: values,
        partition,
        status: Vec::with_capacity(m),
        discrepancy: Vec::with_capacity(m),
        tail_argmax: Vec::with_capacity(m),
        head_argmin: Vec::with_capacity(m),
    };
    for (i, e) in h.edges().iter().enumerate() {
        let s = level.partition.argmax(&e.tail);
        let t = level.partition.argmin(&e.head);
        let by_rank = || match level.partition.rank(s[0]).cmp(&level.partition.rank(t[0])) {
            std::cmp::Ordering::Greater => EdgeStatus::Active,
            std::cmp::Ordering::Equal => EdgeStatus::Ambiguous,
            std::cmp::Ordering::Less => EdgeStatus::Inactive,
        };
        let status = match prev.map(|p| p.status[i]) {
            None | Some(EdgeStatus::Ambiguous) => by_rank(),
            Some(other) => other,
        };
        let delta = if status == EdgeStatus::Ambiguous {
            0.0
        } else {
            let top = s.iter().map(|&u| level.derivative[u]).fold(f64::NEG_INFINITY, f64::max);
            let bottom = t.iter().map(|&v| level.derivative[v]).fold(f64::INFINITY, f64::min);
            top - bottom
        };
        level.status.push(status);
        level.discrepancy.push(delta);
        level.tail_argmax.push(s);
        level.head_argmin.push(t);
    }
    level
}

/// The instance for one class: active edges whose receivers (incoming) or
/// givers (outgoing) fall in it.
fn class_instance(h: &DirectedHypergraph, level: &TowerLevel, class: &[usize]) -> Result<DensestInstance> {
    let omega = class.iter().map(|&u| h.omega()[u]).collect();
    let stationary = class.iter().map(|&u| h.is_stationary(u)).collect();
    let mut inst = DensestInstance::new(class.to_vec(), omega, stationary)?;
    let r = level.partition.rank(class[0]);
    for e in level.active_edges() {
        let c = h.edges()[e].weight * level.discrepancy[e];
        if level.partition.rank(level.head_argmin[e][0]) == r {
            inst.add_incoming(e, c, level.head_argmin[e].clone());
        }
        if level.partition.rank(level.tail_argmax[e][0]) == r {
            inst.add_outgoing(e, c, level.tail_argmax[e].clone());
        }
    }
    Ok(inst)
}

enum Search<'a> {
    MinCut,
    Enumerate { history: &'a [DensestInstance], cap: usize },
}

impl Search<'_> {
    fn find(&self, inst: &DensestInstance, mode: Mode) -> Result<densest::DensestSolution> {
        match self {
            Search::MinCut => densest::solve(inst, mode),
            Search::Enumerate { history, cap } => densest::solve_lexicographic(inst, mode, history, *cap),
        }
    }
}

/// Splits one class into groups of equal derivative value.
fn separate_class(inst: DensestInstance, search: &Search) -> Result<Vec<Extraction>> {
    let mut pieces = Vec::new();
    let mut current = inst;
    while !current.vertices.is_empty() {
        let no_edges = current.incoming.is_empty() && current.outgoing.is_empty();
        if no_edges || current.vertices.len() == 1 {
            let (value, kind) = if current.has_stationary() {
                (0.0, ExtractionKind::Stationary)
            } else {
                (current.density(&current.vertices, Mode::Max)?, ExtractionKind::Densest)
            };
            let vertices = current.vertices.clone();
            pieces.push(Extraction { vertices, value, kind, own: current });
            break;
        }
        let top = search.find(&current, Mode::Max)?;
        let (found, kind) = if top.set.iter().any(|&u| current.is_stationary(u)) {
            let bottom = search.find(&current, Mode::Min)?;
            if bottom.set.iter().any(|&u| current.is_stationary(u)) {
                let vertices = current.vertices.clone();
                pieces.push(Extraction { vertices, value: 0.0, kind: ExtractionKind::Stationary, own: current });
                break;
            }
            (bottom, ExtractionKind::LeastDensest)
        } else {
            (top, ExtractionKind::Densest)
        };
        let own = current.restrict(&found.set, found.mode);
        current = current.remove(&found.set, found.mode);
        pieces.push(Extraction { vertices: found.set, value: found.density, kind, own });
    }
    Ok(pieces)
}

/// Runs the separation procedure on every class of `level`, returning the
/// pieces per class and the next derivative.
fn advance(
    h: &DirectedHypergraph,
    level: &TowerLevel,
    histories: &[Vec<DensestInstance>],
    search_level0: bool,
    cfg: &OperatorConfig,
) -> Result<(Vec<Vec<Extraction>>, Vec<f64>)> {
    let mut next = vec![0.0; h.n()];
    let mut all = Vec::with_capacity(level.partition.num_classes());
    for (r, class) in level.partition.classes().iter().enumerate() {
        let inst = class_instance(h, level, class)?;
        let search = if search_level0 && cfg.level0 == Level0Solver::MinCut {
            Search::MinCut
        } else {
            Search::Enumerate { history: &histories[r], cap: cfg.enum_cap }
        };
        let pieces = separate_class(inst, &search)?;
        for piece in &pieces {
            for &u in &piece.vertices {
                next[u] = if h.is_stationary(u) { 0.0 } else { piece.value };
            }
        }
        all.push(pieces);
    }
    Ok((all, next))
}

fn level0(h: &DirectedHypergraph, f: &[f64], cfg: &OperatorConfig) -> Result<TowerLevel> {
    h.check_dimension(f)?;
    if let Some(u) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::Invalid(format!("non-finite density at vertex {u}")));
    }
    Ok(level_from(h, f.to_vec(), induced_partition(f, cfg.tau_group), None))
}

/// `f^(1)` alone; the hot path used by integrators.
pub fn time_derivative(h: &DirectedHypergraph, f: &[f64], cfg: &OperatorConfig) -> Result<Vec<f64>> {
    let level = level0(h, f, cfg)?;
    let histories = vec![Vec::new(); level.partition.num_classes()];
    Ok(advance(h, &level, &histories, true, cfg)?.1)
}

/// `L_ω f = -Π_N f^(1)`.
pub fn laplacian(h: &DirectedHypergraph, f: &[f64], cfg: &OperatorConfig) -> Result<Vec<f64>> {
    Ok(time_derivative(h, f, cfg)?.into_iter().map(|x| -x).collect())
}

pub fn first_derivative(h: &DirectedHypergraph, f: &[f64], cfg: &OperatorConfig) -> Result<FirstDerivative> {
    let tower = derivative_tower(h, f, 1, cfg)?;
    let f1 = tower.levels[1].derivative.clone();
    let l_omega = f1.iter().map(|&x| if x == 0.0 { 0.0 } else { -x }).collect();
    Ok(FirstDerivative { f1, l_omega, tower })
}

/// `f^(0), ..., f^(k)` with partitions, edge statuses and discrepancies.
pub fn derivative_tower(
    h: &DirectedHypergraph,
    f: &[f64],
    k: usize,
    cfg: &OperatorConfig,
) -> Result<DerivativeTower> {
    let mut levels = vec![level0(h, f, cfg)?];
    let mut extractions = Vec::with_capacity(k);
    let mut histories: Vec<Vec<DensestInstance>> = vec![Vec::new(); levels[0].partition.num_classes()];
    for i in 0..k {
        let current = &levels[i];
        let (pieces, next) = advance(h, current, &histories, i == 0, cfg)?;
        let partition = current.partition.refine(&next, cfg.tau_group);

        let mut piece_of = vec![(0, 0); h.n()];
        for (r, class_pieces) in pieces.iter().enumerate() {
            for (p, piece) in class_pieces.iter().enumerate() {
                for &u in &piece.vertices {
                    piece_of[u] = (r, p);
                }
            }
        }
        let mut next_histories = Vec::with_capacity(partition.num_classes());
        for class in partition.classes() {
            let mut seen: Vec<(usize, usize)> = class.iter().map(|&u| piece_of[u]).collect();
            seen.sort_unstable();
            seen.dedup();
            let (r, _) = seen[0];
            let own = seen[1..]
                .iter()
                .fold(pieces[r][seen[0].1].own.clone(), |acc, &(q, p)| acc.merge(&pieces[q][p].own));
            let mut history = histories[r].clone();
            history.push(own);
            next_histories.push(history);
        }
        histories = next_histories;

        let level = level_from(h, next, partition, Some(current));
        levels.push(level);
        extractions.push(pieces.into_iter().flatten().collect());
    }
    Ok(DerivativeTower { levels, extractions })
}

/// `φ^(1)_u(e)`: measure rates per (edge, vertex).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FlowAssignment {
    pub rates: BTreeMap<(usize, usize), f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowResiduals {
    /// Worst `|ω_u f^(1)_u - Σ_e φ_u(e)|` over `N`.
    pub r0: f64,
    /// Worst rate on a pair the rules forbid.
    pub r1: f64,
    /// Worst edge imbalance against `w_e Δ_e`.
    pub r2: f64,
}

impl FlowAssignment {
    pub fn rate(&self, edge: usize, vertex: usize) -> f64 {
        self.rates.get(&(edge, vertex)).copied().unwrap_or(0.0)
    }

    pub fn residuals(&self, h: &DirectedHypergraph, fd: &FirstDerivative) -> FlowResiduals {
        let level = &fd.tower.levels[0];
        let mut net = vec![0.0; h.n()];
        let mut r1: f64 = 0.0;
        let mut giver_sum = vec![0.0; h.num_edges()];
        let mut receiver_sum = vec![0.0; h.num_edges()];
        for (&(e, u), &phi) in &self.rates {
            net[u] += phi;
            let active = level.status[e] == EdgeStatus::Active;
            let giver = active && level.tail_argmax[e].contains(&u);
            let receiver = active && level.head_argmin[e].contains(&u);
            if giver {
                giver_sum[e] += phi;
            }
            if receiver {
                receiver_sum[e] += phi;
            }
            let allowed = (giver && phi <= 0.0) || (receiver && phi >= 0.0);
            if !allowed {
                r1 = r1.max(phi.abs());
            }
        }
        let r0 = h
            .non_stationary()
            .into_iter()
            .map(|u| (h.omega()[u] * fd.f1[u] - net[u]).abs())
            .fold(0.0, f64::max);
        let r2 = level
            .active_edges()
            .map(|e| {
                let c = h.edges()[e].weight * level.discrepancy[e];
                (giver_sum[e] + c).abs().max((receiver_sum[e] - c).abs())
            })
            .fold(0.0, f64::max);
        FlowResiduals { r0, r1, r2 }
    }
}

/// Realizes the first derivative as per-edge rates by a feasible flow inside
/// every extracted group.
pub fn flow_assignment(h: &DirectedHypergraph, fd: &FirstDerivative) -> Result<FlowAssignment> {
    let mut rates = BTreeMap::new();
    let Some(pieces) = fd.tower.extractions.first() else {
        return Err(Error::Invalid("first derivative carries no extraction".into()));
    };
    for piece in pieces {
        let own = &piece.own;
        if own.incoming.is_empty() && own.outgoing.is_empty() {
            continue;
        }
        let k = own.vertices.len();
        let (s, t, sink_t) = (0, 1, 2);
        let vertex = |j: usize| 3 + j;
        let in_node = |i: usize| 3 + k + i;
        let out_node = |i: usize| 3 + k + own.incoming.len() + i;
        let mut net = FlowNetwork::new(3 + k + own.incoming.len() + own.outgoing.len());
        let mut supply = 0.0;
        let mut in_arcs = Vec::new();
        let mut out_arcs = Vec::new();
        let mut balance_t = 0.0;
        for (i, e) in own.incoming.iter().enumerate() {
            net.add_arc(s, in_node(i), e.c)?;
            supply += e.c;
            balance_t += e.c;
            for &u in &e.members {
                let j = own.local(u).expect("member of own instance");
                in_arcs.push((e.edge, u, net.add_arc(in_node(i), vertex(j), f64::INFINITY)?));
            }
        }
        for (i, e) in own.outgoing.iter().enumerate() {
            net.add_arc(out_node(i), t, e.c)?;
            balance_t -= e.c;
            for &u in &e.members {
                let j = own.local(u).expect("member of own instance");
                out_arcs.push((e.edge, u, net.add_arc(vertex(j), out_node(i), f64::INFINITY)?));
            }
        }
        for (j, &u) in own.vertices.iter().enumerate() {
            if own.stationary[j] {
                net.add_arc(vertex(j), sink_t, f64::INFINITY)?;
                net.add_arc(sink_t, vertex(j), f64::INFINITY)?;
                continue;
            }
            let b = h.omega()[u] * fd.f1[u];
            balance_t -= b;
            if b > 0.0 {
                net.add_arc(vertex(j), t, b)?;
            } else if b < 0.0 {
                net.add_arc(s, vertex(j), -b)?;
                supply -= b;
            }
        }
        if own.has_stationary() {
            if balance_t > 0.0 {
                net.add_arc(sink_t, t, balance_t)?;
            } else if balance_t < 0.0 {
                net.add_arc(s, sink_t, -balance_t)?;
                supply -= balance_t;
            }
        }
        let result = net.solve(s, t)?;
        if (result.value - supply).abs() > 1e-9 * supply.max(1.0) {
            return Err(Error::Infeasible(format!(
                "flow {} short of supply {} on group {:?}",
                result.value, supply, piece.vertices
            )));
        }
        for (e, u, arc) in in_arcs {
            *rates.entry((e, u)).or_insert(0.0) += net.flow(arc);
        }
        for (e, u, arc) in out_arcs {
            *rates.entry((e, u)).or_insert(0.0) -= net.flow(arc);
        }
    }
    rates.retain(|_, phi| *phi != 0.0);
    Ok(FlowAssignment { rates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hyperedge;

    fn cfg() -> OperatorConfig {
        OperatorConfig::default()
    }

    #[test]
    fn single_edge() {
        let h = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]).unwrap();
        let fd = first_derivative(&h, &[1.0, 0.0], &cfg()).unwrap();
        assert_eq!(fd.f1, vec![-1.0, 1.0]);
        let flow = flow_assignment(&h, &fd).unwrap();
        assert_eq!(flow.rate(0, 0), -1.0);
        assert_eq!(flow.rate(0, 1), 1.0);
    }

    #[test]
    fn fan_in_splits_evenly() {
        let h = DirectedHypergraph::with_unit_weights(3, vec![Hyperedge::new(vec![0, 1], vec![2], 1.0)], &[])
            .unwrap();
        let fd = first_derivative(&h, &[1.0, 1.0, 0.0], &cfg()).unwrap();
        assert_eq!(fd.f1, vec![-0.5, -0.5, 1.0]);
        let flow = flow_assignment(&h, &fd).unwrap();
        assert_eq!(flow.rate(0, 0), -0.5);
        assert_eq!(flow.rate(0, 1), -0.5);
        assert_eq!(flow.rate(0, 2), 1.0);
    }

    #[test]
    fn stationary_sink() {
        // s = 0 stationary, v = 1; edge v -> s.
        let h = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![1], vec![0], 1.0)], &[0]).unwrap();
        let fd = first_derivative(&h, &[0.0, 1.0], &cfg()).unwrap();
        assert_eq!(fd.f1, vec![0.0, -1.0]);
        assert_eq!(fd.l_omega, vec![0.0, 1.0]);
        let flow = flow_assignment(&h, &fd).unwrap();
        assert_eq!(flow.rate(0, 1), -1.0);
        assert_eq!(flow.rate(0, 0), 1.0);
    }

    #[test]
    fn k2_eigenpair() {
        let h = DirectedHypergraph::with_degree_weights(2, vec![Hyperedge::undirected(vec![0, 1], 1.0)]).unwrap();
        let fd = first_derivative(&h, &[1.0, -1.0], &cfg()).unwrap();
        assert_eq!(fd.l_omega, vec![2.0, -2.0]);
    }

    #[test]
    fn tower_examples() {
        let h = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]).unwrap();
        let tower = derivative_tower(&h, &[1.0, 0.0], 2, &cfg()).unwrap();
        assert_eq!(tower.derivative(1), &[-1.0, 1.0]);
        assert_eq!(tower.derivative(2), &[2.0, -2.0]);

        let h = DirectedHypergraph::with_unit_weights(
            3,
            vec![Hyperedge::new(vec![0], vec![1], 1.0), Hyperedge::new(vec![1], vec![2], 1.0)],
            &[],
        )
        .unwrap();
        let tower = derivative_tower(&h, &[2.0, 1.0, 1.0], 1, &cfg()).unwrap();
        assert_eq!(tower.derivative(1), &[-1.0, 1.0, 0.0]);
        assert_eq!(tower.levels[0].status[1], EdgeStatus::Ambiguous);
        assert_eq!(tower.levels[1].status[1], EdgeStatus::Active);
        assert_eq!(tower.levels[1].discrepancy[1], 1.0);

        let h = DirectedHypergraph::with_degree_weights(3, vec![Hyperedge::undirected(vec![0, 1, 2], 1.0)]).unwrap();
        let tower = derivative_tower(&h, &[0.3; 3], 3, &cfg()).unwrap();
        for i in 1..=3 {
            assert!(tower.derivative(i).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn enumeration_level0_matches_min_cut() {
        let h = DirectedHypergraph::with_unit_weights(
            4,
            vec![
                Hyperedge::new(vec![0], vec![1, 2], 2.0),
                Hyperedge::new(vec![1, 2], vec![3], 1.0),
                Hyperedge::new(vec![3], vec![0], 0.5),
            ],
            &[],
        )
        .unwrap();
        let f = [2.0, 1.0, 1.0, 0.0];
        let a = time_derivative(&h, &f, &cfg()).unwrap();
        let enumerate = OperatorConfig { level0: Level0Solver::Enumeration, ..cfg() };
        let b = time_derivative(&h, &f, &enumerate).unwrap();
        assert_eq!(a, b);
    }
}
