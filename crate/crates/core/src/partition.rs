//! Ordered equivalence relations on the vertex set.

use crate::error::{Error, Result};

/// Default absolute tolerance for treating two densities as tied.
pub const DEFAULT_TAU_GROUP: f64 = 1e-9;

/// Disjoint classes covering `0..n`, listed in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedPartition {
    classes: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

impl OrderedPartition {
    /// The relation with `V` as its only class.
    pub fn trivial(n: usize) -> Self {
        if n == 0 {
            return OrderedPartition { classes: Vec::new(), rank: Vec::new() };
        }
        OrderedPartition { classes: vec![(0..n).collect()], rank: vec![0; n] }
    }

    pub fn from_classes(classes: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut rank = vec![usize::MAX; n];
        for (r, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidSet(format!("class {r} is empty")));
            }
            for &u in class {
                if u >= n {
                    return Err(Error::VertexOutOfRange { id: u, n });
                }
                if rank[u] != usize::MAX {
                    return Err(Error::InvalidSet(format!("vertex {u} appears twice")));
                }
                rank[u] = r;
            }
        }
        if let Some(u) = rank.iter().position(|&r| r == usize::MAX) {
            return Err(Error::InvalidSet(format!("vertex {u} is not covered")));
        }
        let mut classes = classes;
        classes.iter_mut().for_each(|c| c.sort_unstable());
        Ok(OrderedPartition { classes, rank })
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n(&self) -> usize {
        self.rank.len()
    }

    /// Position of the class containing `u`.
    pub fn rank(&self, u: usize) -> usize {
        self.rank[u]
    }

    /// Rank of the largest class meeting `set`.
    pub fn max_rank(&self, set: &[usize]) -> usize {
        set.iter().map(|&u| self.rank[u]).max().expect("nonempty set")
    }

    pub fn min_rank(&self, set: &[usize]) -> usize {
        set.iter().map(|&u| self.rank[u]).min().expect("nonempty set")
    }

    /// Members of `set` lying in the largest class that meets it.
    pub fn argmax(&self, set: &[usize]) -> Vec<usize> {
        let r = self.max_rank(set);
        set.iter().copied().filter(|&u| self.rank[u] == r).collect()
    }

    pub fn argmin(&self, set: &[usize]) -> Vec<usize> {
        let r = self.min_rank(set);
        set.iter().copied().filter(|&u| self.rank[u] == r).collect()
    }

    /// Least refinement compatible with `g`: each class is split by `g`
    /// values, and the parts are ordered by value.
    pub fn refine(&self, g: &[f64], tol: f64) -> OrderedPartition {
        let mut classes = Vec::with_capacity(self.classes.len());
        for class in &self.classes {
            classes.extend(group_by_value(class, g, tol));
        }
        let mut rank = vec![0; self.rank.len()];
        for (r, class) in classes.iter().enumerate() {
            for &u in class {
                rank[u] = r;
            }
        }
        OrderedPartition { classes, rank }
    }

    /// True if every class is a singleton.
    pub fn is_total(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }

    pub fn is_refinement_of(&self, coarser: &OrderedPartition) -> bool {
        if self.n() != coarser.n() {
            return false;
        }
        for class in &self.classes {
            let r = coarser.rank[class[0]];
            if class.iter().any(|&u| coarser.rank[u] != r) {
                return false;
            }
        }
        (1..self.classes.len()).all(|k| {
            coarser.rank[self.classes[k - 1][0]] <= coarser.rank[self.classes[k][0]]
        })
    }
}

/// Sorts `members` by value and chains neighbours whose gap is at most `tol`.
pub fn group_by_value(members: &[usize], g: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut sorted = members.to_vec();
    sorted.sort_by(|&a, &b| g[a].total_cmp(&g[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for u in sorted {
        match groups.last_mut() {
            Some(group) if g[u] - last <= tol => group.push(u),
            _ => groups.push(vec![u]),
        }
        last = g[u];
    }
    for group in &mut groups {
        group.sort_unstable();
    }
    groups
}

/// `ς(f)`: classes are maximal groups of tied values, ascending.
pub fn induced_partition(f: &[f64], tol: f64) -> OrderedPartition {
    OrderedPartition::trivial(f.len()).refine(f, tol)
}
