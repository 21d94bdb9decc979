//! Maximum flow (Dinic) on real capacities, with min-cut extraction.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcId(usize);

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<f64>,
    capacity: Vec<f64>,
    eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub value: f64,
    /// The inclusion-maximal source side of a minimum cut.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            residual: Vec::new(),
            capacity: Vec::new(),
            eps: 0.0,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    /// Adds `u -> v`; `f64::INFINITY` marks an uncapacitated arc.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64) -> Result<ArcId> {
        let n = self.adj.len();
        if u >= n || v >= n {
            return Err(Error::MalformedNetwork(format!("arc {u}->{v} outside 0..{n}")));
        }
        if cap.is_nan() || cap < 0.0 {
            return Err(Error::MalformedNetwork(format!("arc {u}->{v} has capacity {cap}")));
        }
        let id = self.to.len();
        self.adj[u].push(id);
        self.to.push(v);
        self.residual.push(cap);
        self.capacity.push(cap);
        self.adj[v].push(id + 1);
        self.to.push(u);
        self.residual.push(0.0);
        self.capacity.push(0.0);
        Ok(ArcId(id))
    }

    /// Flow currently routed through `arc`.
    pub fn flow(&self, arc: ArcId) -> f64 {
        self.residual[arc.0 ^ 1]
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.residual[a] > self.eps && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, limit: f64, level: &[usize], next: &mut [usize]) -> f64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let a = self.adj[u][next[u]];
            let v = self.to[a];
            if self.residual[a] > self.eps && level[v] == level[u] + 1 {
                let pushed = self.augment(v, t, limit.min(self.residual[a]), level, next);
                if pushed > 0.0 {
                    if self.residual[a].is_finite() {
                        self.residual[a] -= pushed;
                    }
                    self.residual[a ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    /// Computes a maximum `s`-`t` flow.
    pub fn solve(&mut self, s: usize, t: usize) -> Result<MaxFlow> {
        let n = self.adj.len();
        if s >= n || t >= n || s == t {
            return Err(Error::MalformedNetwork(format!("bad terminals s={s}, t={t}")));
        }
        let scale = self
            .capacity
            .iter()
            .copied()
            .filter(|c| c.is_finite())
            .fold(1.0_f64, f64::max);
        self.eps = 1e-13 * scale;

        let mut value = 0.0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                break;
            }
            let mut next = vec![0; n];
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, &level, &mut next);
                if pushed <= 0.0 {
                    break;
                }
                if pushed.is_infinite() {
                    return Err(Error::MalformedNetwork("unbounded flow".into()));
                }
                value += pushed;
            }
        }
        Ok(MaxFlow { value, source_side: self.maximal_source_side(t) })
    }

    /// Nodes that cannot reach `t` in the residual graph.
    pub fn maximal_source_side(&self, t: usize) -> Vec<bool> {
        let n = self.adj.len();
        let mut reaches = vec![false; n];
        reaches[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            // Residual arc u -> v is the partner of the stored arc v -> u.
            for &a in &self.adj[v] {
                let u = self.to[a];
                if !reaches[u] && self.residual[a ^ 1] > self.eps {
                    reaches[u] = true;
                    queue.push_back(u);
                }
            }
        }
        reaches.iter().map(|&r| !r).collect()
    }

    /// Nodes reachable from `s` in the residual graph.
    pub fn minimal_source_side(&self, s: usize) -> Vec<bool> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if !seen[v] && self.residual[a] > self.eps {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}
