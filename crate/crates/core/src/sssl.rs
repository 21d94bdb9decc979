//! Semi-supervised quadratic optimization: minimize `Q` with the labels on
//! stationary vertices fixed, plus finite checks that `L_ω f` is a
//! subgradient and a mixture of permutation gradients.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{self, IntegratorConfig, Method};
use crate::error::{Error, Result};
use crate::hypergraph::{inner_product_omega, DirectedHypergraph};
use crate::operator::{laplacian, time_derivative, OperatorConfig};
use crate::partition::induced_partition;
use crate::quadratic::{grad_q_sigma, quadratic_form, Permutation};
use crate::random;

/// Largest class whose orderings are enumerated.
pub const MIXTURE_CAP: usize = 7;

/// Reconstruction error accepted for a mixture witness.
pub const MIXTURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelProblem {
    graph: DirectedHypergraph,
    /// Full-length start vector with labels on stationary coordinates.
    init: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelsFile {
    labels: BTreeMap<String, f64>,
    #[serde(default)]
    init: BTreeMap<String, f64>,
}

impl LabelProblem {
    /// `labels` must cover every stationary vertex and nothing else; `init`
    /// optionally sets starting values on free vertices (default 0).
    pub fn new(graph: DirectedHypergraph, labels: &[(usize, f64)], init: &[(usize, f64)]) -> Result<Self> {
        if !graph.has_stationary() {
            return Err(Error::NoStationary);
        }
        graph.require_unit_weights()?;
        let n = graph.n();
        let mut f = vec![0.0; n];
        let mut labeled = vec![false; n];
        for &(u, y) in labels {
            if u >= n {
                return Err(Error::VertexOutOfRange { id: u, n });
            }
            if !graph.is_stationary(u) {
                return Err(Error::Invalid(format!("vertex {u} is labeled but not stationary")));
            }
            if !y.is_finite() {
                return Err(Error::Invalid(format!("label of vertex {u} is not finite")));
            }
            f[u] = y;
            labeled[u] = true;
        }
        if let Some(u) = graph.stationary().into_iter().find(|&u| !labeled[u]) {
            return Err(Error::MissingLabel { vertex: u });
        }
        for &(u, x) in init {
            if u >= n {
                return Err(Error::VertexOutOfRange { id: u, n });
            }
            if graph.is_stationary(u) {
                return Err(Error::Invalid(format!("initial value given for stationary vertex {u}")));
            }
            f[u] = x;
        }
        Ok(LabelProblem { graph, init: f })
    }

    /// Parses `{"labels": {vertex: value}, "init": {vertex: value}}`; keys
    /// are ids or vertex names.
    pub fn from_json(graph: DirectedHypergraph, text: &str) -> Result<Self> {
        let file: LabelsFile = serde_json::from_str(text)?;
        let resolve = |map: &BTreeMap<String, f64>| -> Result<Vec<(usize, f64)>> {
            map.iter().map(|(k, &v)| Ok((graph.vertex_id(k)?, v))).collect()
        };
        let labels = resolve(&file.labels)?;
        let init = resolve(&file.init)?;
        LabelProblem::new(graph, &labels, &init)
    }

    pub fn graph(&self) -> &DirectedHypergraph {
        &self.graph
    }

    pub fn initial(&self) -> &[f64] {
        &self.init
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Diffusion,
    Subgradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveParams {
    pub mode: SolveMode,
    /// Euler step in diffusion mode.
    pub step: f64,
    /// `η₀` in subgradient mode; [`default_eta0`] when unset.
    pub eta0: Option<f64>,
    pub max_time: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub operator: OperatorConfig,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            mode: SolveMode::Diffusion,
            step: 0.01,
            eta0: None,
            max_time: 500.0,
            max_iters: 100_000,
            grad_tol: 1e-9,
            operator: OperatorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub f_star: Vec<f64>,
    #[serde(rename = "Q_star")]
    pub q_star: f64,
    pub iterations: usize,
    pub grad_norm_final: f64,
    pub q_history: Vec<f64>,
}

/// `1 / (2 max_u Σ_{e ∋ u} w_e)` over free vertices: a step at which the
/// first subgradient iterations cannot overshoot.
pub fn default_eta0(h: &DirectedHypergraph) -> f64 {
    let mut degree = vec![0.0; h.n()];
    for e in h.edges() {
        for u in e.incident() {
            degree[u] += e.weight;
        }
    }
    let max = h.non_stationary().into_iter().map(|u| degree[u]).fold(0.0, f64::max);
    if max > 0.0 {
        0.5 / max
    } else {
        1.0
    }
}

pub fn solve(problem: &LabelProblem, params: &SolveParams) -> Result<SolveReport> {
    let h = &problem.graph;
    h.require_unit_weights()?;
    match params.mode {
        SolveMode::Diffusion => {
            let cfg = IntegratorConfig {
                method: Method::Euler,
                step: params.step,
                adaptive: false,
                max_time: params.max_time,
                stop_grad_tol: params.grad_tol,
                record_every: 1,
                operator: params.operator,
            };
            let records = diffusion::run(h, &problem.init, &cfg)?;
            let last = records.last().expect("run records the start");
            Ok(SolveReport {
                f_star: last.f.clone(),
                q_star: last.q,
                iterations: records.len() - 1,
                grad_norm_final: last.grad_norm,
                q_history: records.iter().map(|r| r.q).collect(),
            })
        }
        SolveMode::Subgradient => {
            let eta0 = params.eta0.unwrap_or_else(|| default_eta0(h));
            if !(eta0 > 0.0) || !eta0.is_finite() {
                return Err(Error::Config(format!("eta0 must be positive, got {eta0}")));
            }
            let mut f = problem.init.clone();
            let mut q = quadratic_form(h, &f);
            let mut best = (q, f.clone());
            let mut q_history = vec![q];
            let mut grad_norm = f64::INFINITY;
            let mut iterations = 0;
            for k in 0..params.max_iters {
                let g = laplacian(h, &f, &params.operator)?;
                grad_norm = inner_product_omega(h, &g, &g)?.sqrt();
                if grad_norm <= params.grad_tol {
                    break;
                }
                let eta = eta0 / ((k + 1) as f64).sqrt();
                f.iter_mut().zip(&g).for_each(|(x, d)| *x -= eta * d);
                q = quadratic_form(h, &f);
                q_history.push(q);
                iterations = k + 1;
                if q < best.0 {
                    best = (q, f.clone());
                }
            }
            if iterations == params.max_iters {
                let g = laplacian(h, &best.1, &params.operator)?;
                grad_norm = inner_product_omega(h, &g, &g)?.sqrt();
            }
            Ok(SolveReport {
                f_star: best.1,
                q_star: best.0,
                iterations,
                grad_norm_final: grad_norm,
                q_history,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgradientReport {
    pub samples: usize,
    /// Largest `Q(f) + ⟨g - f, L_ω f⟩ - Q(g)` seen (nonpositive when valid).
    pub worst_violation: f64,
    pub holds: bool,
}

/// Samples `g = f + ξ` on `N` with `ξ` standard normal and checks
/// `Q(g) ≥ Q(f) + ⟨g - f, L_ω f⟩` up to `tol · max(1, Q(g))`.
pub fn verify_subgradient(
    h: &DirectedHypergraph,
    f: &[f64],
    num_samples: usize,
    seed: u64,
    tol: f64,
    cfg: &OperatorConfig,
) -> Result<SubgradientReport> {
    h.require_unit_weights()?;
    h.check_dimension(f)?;
    let lf = laplacian(h, f, cfg)?;
    let qf = quadratic_form(h, f);
    let mut rng = random::rng(seed);
    let samples: Vec<Vec<f64>> = (0..num_samples)
        .map(|_| {
            let xi = random::normal_vector(&mut rng, h.n());
            (0..h.n()).map(|u| if h.is_stationary(u) { f[u] } else { f[u] + xi[u] }).collect()
        })
        .collect();
    let violations: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|g| {
            let diff: Vec<f64> = g.iter().zip(f).map(|(a, b)| a - b).collect();
            let lin: f64 = (0..h.n()).map(|u| h.omega()[u] * diff[u] * lf[u]).sum();
            let qg = quadratic_form(h, g);
            (qf + lin - qg, qg)
        })
        .collect();
    let worst_violation = violations.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    let holds = violations.iter().all(|&(v, qg)| v <= tol * qg.max(1.0));
    Ok(SubgradientReport { samples: num_samples, worst_violation, holds })
}

/// A distribution over orderings of one tied class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassWitness {
    pub vertices: Vec<usize>,
    /// (class vertices from smallest to largest, probability).
    pub support: Vec<(Vec<usize>, f64)>,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureReport {
    pub classes: Vec<ClassWitness>,
    pub reconstruction_error: f64,
    pub l_omega: Vec<f64>,
}

impl MixtureReport {
    /// The product distribution over full permutations consistent with `f`.
    pub fn full_distribution(&self, f: &[f64]) -> Result<Vec<(Permutation, f64)>> {
        let sigma = induced_partition(f, crate::partition::DEFAULT_TAU_GROUP);
        let mut dist: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
        for class in sigma.classes() {
            let witness = self
                .classes
                .iter()
                .find(|w| &w.vertices == class)
                .ok_or_else(|| Error::Invalid("witness does not match the classes of f".into()))?;
            dist = dist
                .into_iter()
                .flat_map(|(prefix, p)| {
                    witness.support.iter().map(move |(order, q)| {
                        let mut full = prefix.clone();
                        full.extend(order);
                        (full, p * q)
                    })
                })
                .collect();
        }
        dist.into_iter().map(|(order, p)| Ok((Permutation::from_order(order)?, p))).collect()
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Finds, for every class of `ς(f)`, a distribution over its orderings whose
/// expected `∇Q_σ` equals `L_ω f` on that class.
///
/// Gradient coordinates in one class depend only on the order inside it, so
/// the problem splits by class; each split is solved by nonnegative least
/// squares with the sum-to-one row appended.
pub fn verify_gradient_mixture(h: &DirectedHypergraph, f: &[f64], cfg: &OperatorConfig) -> Result<MixtureReport> {
    h.require_unit_weights()?;
    h.check_dimension(f)?;
    let sigma = induced_partition(f, cfg.tau_group);
    if let Some(big) = sigma.classes().iter().find(|c| c.len() > MIXTURE_CAP) {
        return Err(Error::CapExceeded { size: big.len(), cap: MIXTURE_CAP });
    }
    let f1 = time_derivative(h, f, cfg)?;
    let l_omega: Vec<f64> = f1.iter().map(|&x| if x == 0.0 { 0.0 } else { -x }).collect();
    let base: Vec<usize> = sigma.classes().iter().flatten().copied().collect();
    let offsets: Vec<usize> = sigma
        .classes()
        .iter()
        .scan(0, |acc, c| {
            let start = *acc;
            *acc += c.len();
            Some(start)
        })
        .collect();

    let mut classes = Vec::with_capacity(sigma.num_classes());
    let mut worst: f64 = 0.0;
    for (r, class) in sigma.classes().iter().enumerate() {
        let free: Vec<usize> = class.iter().copied().filter(|&u| !h.is_stationary(u)).collect();
        let mut columns: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
        for order in permutations(class) {
            let mut full = base.clone();
            full[offsets[r]..offsets[r] + class.len()].copy_from_slice(&order);
            let perm = Permutation::from_order(full)?;
            let grad = grad_q_sigma(h, f, &perm, cfg.tau_group)?;
            let column: Vec<f64> = free.iter().map(|&u| grad[u]).collect();
            let duplicate = columns
                .iter()
                .any(|(_, c)| c.iter().zip(&column).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs())));
            if !duplicate {
                columns.push((order, column));
            }
        }
        let target: Vec<f64> = free.iter().map(|&u| l_omega[u]).collect();
        let weights = mixture_weights(&columns.iter().map(|c| c.1.clone()).collect::<Vec<_>>(), &target);
        let error = free
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let mix: f64 = columns.iter().zip(&weights).map(|((_, c), w)| w * c[i]).sum();
                (mix - target[i]).abs()
            })
            .fold(0.0, f64::max);
        worst = worst.max(error);
        let support = columns
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|((order, _), w)| (order, w))
            .collect();
        classes.push(ClassWitness { vertices: class.clone(), support, reconstruction_error: error });
    }
    if worst > MIXTURE_TOL {
        return Err(Error::Infeasible(format!("gradient mixture misses L_ω f by {worst:e}")));
    }
    Ok(MixtureReport { classes, reconstruction_error: worst, l_omega })
}

/// Convex weights `λ` with `Σ λ_j columns[j] ≈ target`.
fn mixture_weights(columns: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let rows = target.len();
    let k = columns.len();
    let scale = columns
        .iter()
        .flatten()
        .chain(target)
        .fold(1.0_f64, |m, x| m.max(x.abs()));
    let a = DMatrix::from_fn(rows + 1, k, |i, j| if i < rows { columns[j][i] } else { scale });
    let b = DVector::from_fn(rows + 1, |i, _| if i < rows { target[i] } else { scale });
    let mut x = nnls(&a, &b);
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        x /= total;
    }
    x.iter().copied().collect()
}

/// Lawson-Hanson nonnegative least squares: `min ‖Ax - b‖` s.t. `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    let mut x = DVector::zeros(k);
    let mut passive = vec![false; k];
    let tol = 1e-12 * a.abs().max().max(1.0) * b.abs().max().max(1.0);
    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(a.nrows(), idx.len(), |i, c| a[(i, idx[c])]);
        let z = sub.svd(true, true).solve(b, 1e-14).expect("svd with u and v");
        let mut s = DVector::zeros(k);
        for (c, &j) in idx.iter().enumerate() {
            s[j] = z[c];
        }
        s
    };
    for _ in 0..3 * k + 10 {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let s = solve_passive(&passive);
            if (0..k).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..k)
                .filter(|&j| passive[j] && s[j] <= 0.0)
                .map(|j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for j in 0..k {
                if passive[j] && x[j] <= tol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}
