//! Directed hypergraph model, the weighted inner product on non-stationary
//! vertices, cut/expansion computations and JSON ingestion.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

/// Default vertex-count bound for exhaustive subset enumeration.
pub const DEFAULT_ENUM_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `omega_u` is the total weight of edges incident to `u`.
    Degree,
    Unit,
    Custom,
}

/// A directed hyperedge `(tail, head, w)`. Tail and head are sorted and
/// deduplicated; they may intersect.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    pub tail: Vec<usize>,
    pub head: Vec<usize>,
    pub weight: f64,
}

impl Hyperedge {
    pub fn new(tail: impl Into<Vec<usize>>, head: impl Into<Vec<usize>>, weight: f64) -> Self {
        let mut tail = tail.into();
        let mut head = head.into();
        tail.sort_unstable();
        tail.dedup();
        head.sort_unstable();
        head.dedup();
        Hyperedge { tail, head, weight }
    }

    /// An undirected hyperedge is the special case `tail == head`.
    pub fn undirected(members: impl Into<Vec<usize>>, weight: f64) -> Self {
        let members = members.into();
        Hyperedge::new(members.clone(), members, weight)
    }

    /// Vertices in `tail ∪ head`, sorted.
    pub fn incident(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.tail.iter().chain(self.head.iter()).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedHypergraph {
    n: usize,
    names: Option<Vec<String>>,
    edges: Vec<Hyperedge>,
    stationary: Vec<bool>,
    weight_mode: WeightMode,
    // Zero on stationary vertices; strictly positive elsewhere.
    omega: Vec<f64>,
}

impl DirectedHypergraph {
    /// Builds and validates a hypergraph. `custom` must list a weight for every
    /// non-stationary vertex when `mode` is [`WeightMode::Custom`] and is
    /// rejected otherwise.
    pub fn new(
        n: usize,
        edges: Vec<Hyperedge>,
        stationary: &[usize],
        mode: WeightMode,
        custom: Option<&[(usize, f64)]>,
    ) -> Result<Self> {
        let mut is_stationary = vec![false; n];
        for &s in stationary {
            if s >= n {
                return Err(Error::VertexOutOfRange { id: s, n });
            }
            is_stationary[s] = true;
        }
        for (i, e) in edges.iter().enumerate() {
            if e.tail.is_empty() {
                return Err(Error::EmptyTail { edge: i });
            }
            if e.head.is_empty() {
                return Err(Error::EmptyHead { edge: i });
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::NonPositiveEdgeWeight { edge: i, weight: e.weight });
            }
            for &u in e.tail.iter().chain(e.head.iter()) {
                if u >= n {
                    return Err(Error::VertexOutOfRange { id: u, n });
                }
            }
        }

        let mut omega = vec![0.0; n];
        match mode {
            WeightMode::Degree => {
                for e in &edges {
                    for u in e.incident() {
                        omega[u] += e.weight;
                    }
                }
            }
            WeightMode::Unit => omega.iter_mut().for_each(|w| *w = 1.0),
            WeightMode::Custom => {
                let custom = custom.ok_or_else(|| {
                    Error::Invalid("custom weight mode requires an omega map".into())
                })?;
                let mut seen = vec![false; n];
                for &(u, w) in custom {
                    if u >= n {
                        return Err(Error::VertexOutOfRange { id: u, n });
                    }
                    if is_stationary[u] {
                        return Err(Error::StationaryWeight { vertex: u });
                    }
                    omega[u] = w;
                    seen[u] = true;
                }
                if let Some(u) = (0..n).find(|&u| !is_stationary[u] && !seen[u]) {
                    return Err(Error::MissingVertexWeight { vertex: u });
                }
            }
        }
        if mode != WeightMode::Custom && custom.is_some_and(|c| !c.is_empty()) {
            return Err(Error::Invalid("omega map given outside custom weight mode".into()));
        }
        for u in 0..n {
            if is_stationary[u] {
                omega[u] = 0.0;
            } else if !(omega[u] > 0.0) || !omega[u].is_finite() {
                return Err(Error::NonPositiveVertexWeight { vertex: u, weight: omega[u] });
            }
        }

        Ok(DirectedHypergraph {
            n,
            names: None,
            edges,
            stationary: is_stationary,
            weight_mode: mode,
            omega,
        })
    }

    pub fn with_degree_weights(n: usize, edges: Vec<Hyperedge>) -> Result<Self> {
        Self::new(n, edges, &[], WeightMode::Degree, None)
    }

    pub fn with_unit_weights(n: usize, edges: Vec<Hyperedge>, stationary: &[usize]) -> Result<Self> {
        Self::new(n, edges, stationary, WeightMode::Unit, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    pub fn is_stationary(&self, u: usize) -> bool {
        self.stationary[u]
    }

    pub fn stationary_mask(&self) -> &[bool] {
        &self.stationary
    }

    pub fn stationary(&self) -> Vec<usize> {
        (0..self.n).filter(|&u| self.stationary[u]).collect()
    }

    pub fn non_stationary(&self) -> Vec<usize> {
        (0..self.n).filter(|&u| !self.stationary[u]).collect()
    }

    pub fn has_stationary(&self) -> bool {
        self.stationary.iter().any(|&s| s)
    }

    /// Vertex weights indexed by vertex; stationary entries are zero.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn weight(&self, u: usize) -> Option<f64> {
        (!self.stationary[u]).then_some(self.omega[u])
    }

    pub fn total_weight(&self) -> f64 {
        self.omega.iter().sum()
    }

    pub fn weight_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&u| self.omega[u]).sum()
    }

    /// True when every non-stationary vertex has weight exactly one.
    pub fn has_unit_weights(&self) -> bool {
        (0..self.n).all(|u| self.stationary[u] || self.omega[u] == 1.0)
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn vertex_name(&self, u: usize) -> String {
        match &self.names {
            Some(names) => names[u].clone(),
            None => u.to_string(),
        }
    }

    /// Resolves a vertex by name, or by decimal id when no name matches.
    pub fn vertex_id(&self, key: &str) -> Result<usize> {
        if let Some(names) = &self.names {
            if let Some(pos) = names.iter().position(|s| s == key) {
                return Ok(pos);
            }
        }
        let id: usize = key.parse().map_err(|_| Error::UnknownVertex(key.to_string()))?;
        if id >= self.n {
            return Err(Error::VertexOutOfRange { id, n: self.n });
        }
        Ok(id)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: names.len() });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn require_no_stationary(&self) -> Result<()> {
        if self.has_stationary() {
            Err(Error::StationaryPresent)
        } else {
            Ok(())
        }
    }

    pub fn require_unit_weights(&self) -> Result<()> {
        if self.has_unit_weights() {
            Ok(())
        } else {
            Err(Error::NonUnitWeights)
        }
    }

    pub fn check_dimension(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: f.len() });
        }
        Ok(())
    }

    /// Serializes to the same JSON schema accepted by [`load_hypergraph`].
    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| json!({"tail": e.tail, "head": e.head, "w": e.weight}))
            .collect();
        let mut value = json!({
            "n": self.n,
            "stationary": self.stationary(),
            "weight_mode": self.weight_mode,
            "edges": edges,
        });
        if let Some(names) = &self.names {
            value["vertices"] = json!(names);
        }
        if self.weight_mode == WeightMode::Custom {
            let omega: BTreeMap<String, f64> = self
                .non_stationary()
                .into_iter()
                .map(|u| (u.to_string(), self.omega[u]))
                .collect();
            value["omega"] = json!(omega);
        }
        value
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum VertexRef {
    Id(usize),
    Name(String),
}

#[derive(Debug, Deserialize)]
struct EdgeFile {
    tail: Vec<VertexRef>,
    head: Vec<VertexRef>,
    w: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypergraphFile {
    n: Option<usize>,
    vertices: Option<Vec<String>>,
    #[serde(default)]
    stationary: Vec<VertexRef>,
    weight_mode: Option<WeightMode>,
    omega: Option<BTreeMap<String, f64>>,
    edges: Vec<EdgeFile>,
}

fn resolve(r: &VertexRef, n: usize, names: Option<&[String]>) -> Result<usize> {
    match r {
        VertexRef::Id(id) if *id < n => Ok(*id),
        VertexRef::Id(id) => Err(Error::VertexOutOfRange { id: *id, n }),
        VertexRef::Name(s) => resolve_key(s, n, names),
    }
}

fn resolve_key(s: &str, n: usize, names: Option<&[String]>) -> Result<usize> {
    if let Some(pos) = names.and_then(|names| names.iter().position(|x| x == s)) {
        return Ok(pos);
    }
    match s.parse::<usize>() {
        Ok(id) if id < n => Ok(id),
        Ok(id) => Err(Error::VertexOutOfRange { id, n }),
        Err(_) => Err(Error::UnknownVertex(s.to_string())),
    }
}

/// Parses a hypergraph from its JSON text. Weight mode defaults to `degree`.
pub fn parse_hypergraph(text: &str) -> Result<DirectedHypergraph> {
    let file: HypergraphFile = serde_json::from_str(text)?;
    let n = match (&file.vertices, file.n) {
        (Some(v), Some(n)) if v.len() != n => {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() })
        }
        (Some(v), _) => v.len(),
        (None, Some(n)) => n,
        (None, None) => return Err(Error::Invalid("either \"n\" or \"vertices\" is required".into())),
    };
    let names = file.vertices.as_deref();

    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        if e.tail.is_empty() {
            return Err(Error::EmptyTail { edge: i });
        }
        if e.head.is_empty() {
            return Err(Error::EmptyHead { edge: i });
        }
        let tail = e.tail.iter().map(|r| resolve(r, n, names)).collect::<Result<Vec<_>>>()?;
        let head = e.head.iter().map(|r| resolve(r, n, names)).collect::<Result<Vec<_>>>()?;
        edges.push(Hyperedge::new(tail, head, e.w));
    }
    let stationary = file
        .stationary
        .iter()
        .map(|r| resolve(r, n, names))
        .collect::<Result<Vec<_>>>()?;
    let mode = file.weight_mode.unwrap_or(WeightMode::Degree);
    let custom = match &file.omega {
        Some(map) => Some(
            map.iter()
                .map(|(k, &w)| Ok((resolve_key(k, n, names)?, w)))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };

    let h = DirectedHypergraph::new(n, edges, &stationary, mode, custom.as_deref())?;
    match file.vertices {
        Some(v) => h.with_names(v),
        None => Ok(h),
    }
}

pub fn load_hypergraph(path: impl AsRef<Path>) -> Result<DirectedHypergraph> {
    let text = std::fs::read_to_string(path)?;
    parse_hypergraph(&text)
}

/// `<f, g>_omega = sum_{u in N} omega_u f_u g_u`.
///
/// Both vectors are either full density vectors of length `n` (stationary
/// coordinates are ignored) or restrictions to `N` in increasing vertex order.
pub fn inner_product_omega(h: &DirectedHypergraph, f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: f.len(), got: g.len() });
    }
    if f.len() == h.n() {
        Ok((0..h.n()).map(|u| h.omega[u] * f[u] * g[u]).sum())
    } else {
        let free = h.non_stationary();
        if f.len() != free.len() {
            return Err(Error::DimensionMismatch { expected: h.n(), got: f.len() });
        }
        Ok(free.iter().enumerate().map(|(k, &u)| h.omega[u] * f[k] * g[k]).sum())
    }
}

pub fn norm_omega(h: &DirectedHypergraph, f: &[f64]) -> Result<f64> {
    Ok(inner_product_omega(h, f, f)?.sqrt())
}

/// Expansion of a single vertex set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutReport {
    pub set: Vec<usize>,
    pub out_weight: f64,
    pub in_weight: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub phi: f64,
}

fn membership(h: &DirectedHypergraph, set: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; h.n()];
    for &u in set {
        if u >= h.n() {
            return Err(Error::VertexOutOfRange { id: u, n: h.n() });
        }
        inside[u] = true;
    }
    Ok(inside)
}

/// Out-going and in-coming cut weights `w(∂+(S))`, `w(∂-(S))`.
pub fn cut_weights(h: &DirectedHypergraph, inside: &[bool]) -> (f64, f64) {
    let mut out_w = 0.0;
    let mut in_w = 0.0;
    for e in &h.edges {
        let tail_in = e.tail.iter().any(|&u| inside[u]);
        let tail_out = e.tail.iter().any(|&u| !inside[u]);
        let head_in = e.head.iter().any(|&u| inside[u]);
        let head_out = e.head.iter().any(|&u| !inside[u]);
        if tail_in && head_out {
            out_w += e.weight;
        }
        if tail_out && head_in {
            in_w += e.weight;
        }
    }
    (out_w, in_w)
}

fn report_from_mask(h: &DirectedHypergraph, inside: &[bool]) -> CutReport {
    let set: Vec<usize> = (0..h.n()).filter(|&u| inside[u]).collect();
    let (out_weight, in_weight) = cut_weights(h, inside);
    let vol = h.weight_of(&set);
    let phi_plus = out_weight / vol;
    let phi_minus = in_weight / vol;
    CutReport {
        set,
        out_weight,
        in_weight,
        phi_plus,
        phi_minus,
        phi: phi_plus.min(phi_minus),
    }
}

/// `phi±(S) = w(∂±(S)) / omega(S)` for `∅ ≠ S ⊊ V`.
pub fn expansion(h: &DirectedHypergraph, set: &[usize]) -> Result<CutReport> {
    h.require_no_stationary()?;
    let inside = membership(h, set)?;
    let size = inside.iter().filter(|&&b| b).count();
    if size == 0 {
        return Err(Error::InvalidSet("empty set".into()));
    }
    if size == h.n() {
        return Err(Error::InvalidSet("set equals V".into()));
    }
    Ok(report_from_mask(h, &inside))
}

/// Exact `phi_H` by enumerating every `S` with `omega(S) <= omega(V)/2`.
pub fn brute_force_phi_h(h: &DirectedHypergraph, cap: usize) -> Result<CutReport> {
    h.require_no_stationary()?;
    let n = h.n();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    if n < 2 {
        return Err(Error::InvalidSet("need at least two vertices".into()));
    }
    let half = h.total_weight() / 2.0;
    let slack = 1e-12 * h.total_weight().max(1.0);
    let mut best: Option<CutReport> = None;
    let mut inside = vec![false; n];
    for mask in 1u64..(1u64 << n) - 1 {
        for (u, slot) in inside.iter_mut().enumerate() {
            *slot = mask >> u & 1 == 1;
        }
        let vol: f64 = (0..n).filter(|&u| inside[u]).map(|u| h.omega[u]).sum();
        if vol > half + slack {
            continue;
        }
        let report = report_from_mask(h, &inside);
        if best.as_ref().is_none_or(|b| report.phi < b.phi) {
            best = Some(report);
        }
    }
    best.ok_or_else(|| Error::InvalidSet("no admissible subset".into()))
}
