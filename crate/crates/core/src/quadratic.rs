//! Edge discrepancies, the quadratic form `Q`, the discrepancy ratio `D` and
//! permutation-resolved gradients.

use crate::error::{Error, Result};
use crate::hypergraph::DirectedHypergraph;
use crate::partition::{induced_partition, OrderedPartition};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDiscrepancy {
    pub edge: usize,
    /// `max_{u in tail} f_u - min_{v in head} f_v`.
    pub delta: f64,
    /// Tail vertices attaining the maximum (up to tie tolerance).
    pub tail_argmax: Vec<usize>,
    /// Head vertices attaining the minimum (up to tie tolerance).
    pub head_argmin: Vec<usize>,
}

/// Raw discrepancy of one edge, without tie handling.
pub fn edge_delta(h: &DirectedHypergraph, f: &[f64], edge: usize) -> f64 {
    let e = &h.edges()[edge];
    let top = e.tail.iter().map(|&u| f[u]).fold(f64::NEG_INFINITY, f64::max);
    let bottom = e.head.iter().map(|&v| f[v]).fold(f64::INFINITY, f64::min);
    top - bottom
}

/// Discrepancies of all edges; argmax/argmin sets are read off `ς(f)`.
pub fn discrepancies(h: &DirectedHypergraph, f: &[f64], tol: f64) -> Result<Vec<EdgeDiscrepancy>> {
    h.check_dimension(f)?;
    let sigma = induced_partition(f, tol);
    Ok(discrepancies_in(h, f, &sigma))
}

pub(crate) fn discrepancies_in(
    h: &DirectedHypergraph,
    f: &[f64],
    sigma: &OrderedPartition,
) -> Vec<EdgeDiscrepancy> {
    h.edges()
        .iter()
        .enumerate()
        .map(|(i, e)| EdgeDiscrepancy {
            edge: i,
            delta: edge_delta(h, f, i),
            tail_argmax: sigma.argmax(&e.tail),
            head_argmin: sigma.argmin(&e.head),
        })
        .collect()
}

/// `Q(f) = 1/2 sum_e w_e ([Delta_e(f)]^+)^2`.
pub fn quadratic_form(h: &DirectedHypergraph, f: &[f64]) -> f64 {
    0.5 * h
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let d = edge_delta(h, f, i).max(0.0);
            e.weight * d * d
        })
        .sum::<f64>()
}

/// `D(f) = sum_e w_e ([Delta_e]^+)^2 / sum_u omega_u f_u^2`, defined when `V = N`.
pub fn discrepancy_ratio(h: &DirectedHypergraph, f: &[f64]) -> Result<f64> {
    h.require_no_stationary()?;
    h.check_dimension(f)?;
    let denom: f64 = f.iter().zip(h.omega()).map(|(x, w)| w * x * x).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(2.0 * quadratic_form(h, f) / denom)
}

/// A total order on `V`; `order()[0]` is the smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl Permutation {
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (r, &u) in order.iter().enumerate() {
            if u >= n {
                return Err(Error::VertexOutOfRange { id: u, n });
            }
            if rank[u] != usize::MAX {
                return Err(Error::InvalidSet(format!("vertex {u} repeated in permutation")));
            }
            rank[u] = r;
        }
        Ok(Permutation { order, rank })
    }

    /// Sorts by `f`, breaking ties by vertex id.
    pub fn sorted_by(f: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
        Permutation::from_order(order).expect("valid permutation")
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rank(&self, u: usize) -> usize {
        self.rank[u]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Checks that `u ≺ v` implies `f_u <= f_v` up to `tol`.
    pub fn check_consistent(&self, f: &[f64], tol: f64) -> Result<()> {
        if f.len() != self.order.len() {
            return Err(Error::DimensionMismatch { expected: self.order.len(), got: f.len() });
        }
        for r in 1..self.order.len() {
            if f[self.order[r - 1]] > f[self.order[r]] + tol {
                return Err(Error::InconsistentPermutation { rank: r });
            }
        }
        Ok(())
    }

    pub fn argmax<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> usize {
        *set.into_iter().max_by_key(|&&u| self.rank[u]).expect("nonempty set")
    }

    pub fn argmin<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> usize {
        *set.into_iter().min_by_key(|&&u| self.rank[u]).expect("nonempty set")
    }
}

/// Gradient of the quadratic form resolved by `sigma`.
///
/// Each edge active with respect to `sigma` pushes `+w_e Delta_e(f)` onto its
/// sigma-maximal tail vertex and `-w_e Delta_e(f)` onto its sigma-minimal head
/// vertex. The result has length `n` with stationary coordinates zero.
pub fn grad_q_sigma(
    h: &DirectedHypergraph,
    f: &[f64],
    sigma: &Permutation,
    tol: f64,
) -> Result<Vec<f64>> {
    h.check_dimension(f)?;
    h.require_unit_weights()?;
    sigma.check_consistent(f, tol)?;
    let mut grad = vec![0.0; h.n()];
    for (i, e) in h.edges().iter().enumerate() {
        let top = sigma.argmax(&e.tail);
        let bottom = sigma.argmin(&e.head);
        if sigma.rank(top) <= sigma.rank(bottom) {
            continue;
        }
        let c = e.weight * edge_delta(h, f, i).max(0.0);
        grad[top] += c;
        grad[bottom] -= c;
    }
    for u in h.stationary() {
        grad[u] = 0.0;
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{Hyperedge, WeightMode};

    fn arc() -> DirectedHypergraph {
        DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]).unwrap()
    }

    fn fan_in() -> DirectedHypergraph {
        DirectedHypergraph::with_unit_weights(3, vec![Hyperedge::new(vec![0, 1], vec![2], 1.0)], &[])
            .unwrap()
    }

    #[test]
    fn quadratic_form_examples() {
        assert_eq!(quadratic_form(&arc(), &[1.0, 0.0]), 0.5);
        assert_eq!(quadratic_form(&arc(), &[0.0, 1.0]), 0.0);
        assert_eq!(quadratic_form(&fan_in(), &[1.0, 2.0, 0.0]), 2.0);
    }

    #[test]
    fn discrepancy_ratio_examples() {
        let k2 = DirectedHypergraph::with_degree_weights(2, vec![Hyperedge::undirected(vec![0, 1], 1.0)])
            .unwrap();
        assert_eq!(discrepancy_ratio(&k2, &[1.0, -1.0]).unwrap(), 2.0);
        assert_eq!(discrepancy_ratio(&k2, &[0.7, 0.7]).unwrap(), 0.0);
        assert_eq!(discrepancy_ratio(&arc(), &[1.0, -1.0]).unwrap(), 2.0);
        assert!(matches!(discrepancy_ratio(&arc(), &[0.0, 0.0]), Err(Error::ZeroVector)));
        assert_eq!(
            discrepancy_ratio(&k2, &[3.0, -1.0]).unwrap(),
            discrepancy_ratio(&k2, &[1.5, -0.5]).unwrap()
        );
    }

    #[test]
    fn discrepancy_sets() {
        let d = discrepancies(&fan_in(), &[1.0, 1.0, 0.0], 1e-9).unwrap();
        assert_eq!(d[0].delta, 1.0);
        assert_eq!(d[0].tail_argmax, vec![0, 1]);
        assert_eq!(d[0].head_argmin, vec![2]);
    }

    #[test]
    fn gradient_examples() {
        let sigma = Permutation::sorted_by(&[1.0, 0.0]);
        assert_eq!(grad_q_sigma(&arc(), &[1.0, 0.0], &sigma, 1e-9).unwrap(), vec![1.0, -1.0]);

        // a ≺ b: b is the sigma-max of the tail.
        let sigma = Permutation::from_order(vec![2, 0, 1]).unwrap();
        assert_eq!(
            grad_q_sigma(&fan_in(), &[1.0, 1.0, 0.0], &sigma, 1e-9).unwrap(),
            vec![0.0, 1.0, -1.0]
        );
        // One-sided directional derivative along +e_b matches the b component.
        let eps = 1e-7;
        let q0 = quadratic_form(&fan_in(), &[1.0, 1.0, 0.0]);
        let q1 = quadratic_form(&fan_in(), &[1.0, 1.0 + eps, 0.0]);
        assert!(((q1 - q0) / eps - 1.0).abs() < 1e-6);

        let hs = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[0])
            .unwrap();
        let sigma = Permutation::sorted_by(&[1.0, 0.0]);
        assert_eq!(grad_q_sigma(&hs, &[1.0, 0.0], &sigma, 1e-9).unwrap(), vec![0.0, -1.0]);
    }

    #[test]
    fn gradient_rejects_bad_inputs() {
        let sigma = Permutation::from_order(vec![0, 1]).unwrap();
        assert!(matches!(
            grad_q_sigma(&arc(), &[1.0, 0.0], &sigma, 1e-9),
            Err(Error::InconsistentPermutation { .. })
        ));
        let weighted = DirectedHypergraph::new(
            2,
            vec![Hyperedge::new(vec![0], vec![1], 1.0)],
            &[],
            WeightMode::Custom,
            Some(&[(0, 2.0), (1, 1.0)]),
        )
        .unwrap();
        let sigma = Permutation::sorted_by(&[1.0, 0.0]);
        assert!(matches!(
            grad_q_sigma(&weighted, &[1.0, 0.0], &sigma, 1e-9),
            Err(Error::NonUnitWeights)
        ));
        assert!(Permutation::from_order(vec![0, 0]).is_err());
    }
}
