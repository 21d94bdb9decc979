//! The acceptance suite: property checks on seeded random corpora plus
//! closed-form instances. Shared by the `verify` command and the test suite.

use rand::Rng;
use serde::Serialize;

use crate::densest::{self, Mode};
use crate::diffusion::{self, default_step, IntegratorConfig, Method};
use crate::error::Result;
use crate::hypergraph::{
    brute_force_phi_h, inner_product_omega, norm_omega, DirectedHypergraph, Hyperedge, WeightMode, DEFAULT_ENUM_CAP,
};
use crate::operator::{first_derivative, flow_assignment, time_derivative, OperatorConfig};
use crate::partition::induced_partition;
use crate::quadratic::quadratic_form;
use crate::random::{self, GraphShape};
use crate::spectral::{estimate_gamma2, gamma2_oracle, SpectralConfig, CHEEGER_SLACK};
use crate::sssl::{self, LabelProblem, SolveParams};

pub const DEFAULT_SEED: u64 = 20240531;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {:<28} {verdict}  {}", self.id, self.name, self.detail)
    }
}

pub const CRITERIA: [(usize, &str); 11] = [
    (1, "rayleigh identity"),
    (2, "kernel and conservation"),
    (3, "norm identity"),
    (4, "densest subset oracle"),
    (5, "flow assignment"),
    (6, "monotone descent"),
    (7, "cheeger sandwich"),
    (8, "eigenpair at convergence"),
    (9, "subgradient and mixture"),
    (10, "sssl optimum"),
    (11, "single-edge trajectory"),
];

/// Runs one criterion; internal errors count as failures.
pub fn run_criterion(id: usize, seed: u64) -> CriterionReport {
    let outcome = match id {
        1 => rayleigh(seed),
        2 => kernel(seed),
        3 => norm_identity(seed),
        4 => densest_oracle(seed),
        5 => flow(seed),
        6 => descent(seed),
        7 => cheeger(seed),
        8 => eigenpair(),
        9 => subgradient(seed),
        10 => sssl_optimum(seed),
        11 => trajectory(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    report(id, outcome)
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, seed)).collect()
}

fn report(id: usize, outcome: Outcome) -> CriterionReport {
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport { id, name, passed, detail }
}

/// The invariants that apply to one given hypergraph, checked on `vectors`
/// seeded random density vectors. Criteria that do not apply to its shape
/// (for example the Cheeger sandwich with stationary vertices) are skipped.
pub fn check_instance(h: &DirectedHypergraph, seed: u64, vectors: usize) -> Vec<CriterionReport> {
    let cfg = OperatorConfig::default();
    let mut rng = random::stream(seed, 100);
    let fs: Vec<Vec<f64>> = (0..vectors).map(|_| random::vector(&mut rng, h.n())).collect();
    let mut out = Vec::new();
    if !h.has_stationary() {
        out.push(report(1, (|| {
            let mut worst: f64 = 0.0;
            for f in &fs {
                let lf = crate::operator::laplacian(h, f, &cfg)?;
                let q = quadratic_form(h, f);
                worst = worst.max((inner_product_omega(h, f, &lf)? - 2.0 * q).abs() / q.max(1.0));
            }
            Ok((worst <= 1e-9, format!("{} vectors, worst scaled gap {worst:.2e}", fs.len())))
        })()));
        out.push(report(2, (|| {
            let ones = vec![1.0; h.n()];
            let one = norm_omega(h, &time_derivative(h, &ones, &cfg)?)?;
            let mut mass: f64 = 0.0;
            for f in &fs {
                mass = mass.max(inner_product_omega(h, &ones, &time_derivative(h, f, &cfg)?)?.abs());
            }
            Ok((one <= 1e-12 && mass <= 1e-9, format!("‖L1‖ {one:.2e}, max |<1,Lf>| {mass:.2e}")))
        })()));
    }
    out.push(report(3, (|| {
        let mut worst: f64 = 0.0;
        for f in &fs {
            worst = worst.max(norm_identity_gap(h, f, &cfg)?);
        }
        Ok((worst <= 1e-9, format!("{} vectors, worst gap {worst:.2e}", fs.len())))
    })()));
    out.push(report(5, (|| {
        let mut worst: f64 = 0.0;
        for f in &fs {
            let fd = first_derivative(h, f, &cfg)?;
            let r = flow_assignment(h, &fd)?.residuals(h, &fd);
            worst = worst.max(r.r0).max(r.r1).max(r.r2);
        }
        Ok((worst <= 1e-9, format!("{} vectors, worst residual {worst:.2e}", fs.len())))
    })()));
    out.push(report(6, (|| {
        let f0 = random::normal_vector(&mut random::stream(seed, 101), h.n());
        let check = check_descent(h, &f0, default_step(h), 1000)?;
        Ok((
            check.excess <= 0.0 && check.fd_worst <= 1e-3,
            format!("{} steps, excess {:.2e}, dQ/dt rel err {:.2e} at {} points", check.steps, check.excess, check.fd_worst, check.fd_points),
        ))
    })()));
    if h.weight_mode() == WeightMode::Degree && !h.has_stationary() && h.n() <= DEFAULT_ENUM_CAP {
        out.push(report(7, (|| {
            let phi = brute_force_phi_h(h, DEFAULT_ENUM_CAP)?.phi;
            let (gamma2, _) = gamma2_oracle(h, seed, 4)?;
            Ok((sandwich(gamma2, phi), format!("φ_H={phi:.6} γ₂={gamma2:.6}")))
        })()));
    }
    if h.has_stationary() && h.has_unit_weights() {
        out.push(report(9, (|| {
            let mut worst: f64 = f64::NEG_INFINITY;
            let mut failures = 0;
            for (i, f) in fs.iter().enumerate() {
                let rep = sssl::verify_subgradient(h, f, 100, seed.wrapping_add(i as u64), 1e-9, &cfg)?;
                worst = worst.max(rep.worst_violation);
                failures += usize::from(!rep.holds);
            }
            Ok((failures == 0, format!("{} vectors x 100 samples, {failures} failures, worst violation {worst:.2e}", fs.len())))
        })()));
    }
    out
}

/// The shared corpus: degree weights, no stationary vertices, `n ≤ 10`,
/// at most 12 edges, one random vector each.
pub fn degree_corpus(seed: u64, count: usize) -> Vec<(DirectedHypergraph, Vec<f64>)> {
    let mut rng = random::stream(seed, 0);
    (0..count)
        .map(|_| {
            let h = loop {
                let shape = GraphShape::sample(&mut rng, 10, 12, WeightMode::Degree);
                let h = random::hypergraph(&mut rng, &shape);
                if h.num_edges() <= 12 {
                    break h;
                }
            };
            let f = random::vector(&mut rng, h.n());
            (h, f)
        })
        .collect()
}

type Outcome = Result<(bool, String)>;

fn rayleigh(seed: u64) -> Outcome {
    let cfg = OperatorConfig::default();
    let mut worst: f64 = 0.0;
    for (h, f) in degree_corpus(seed, 200) {
        let lf: Vec<f64> = time_derivative(&h, &f, &cfg)?.iter().map(|x| -x).collect();
        let q = quadratic_form(&h, &f);
        let gap = (inner_product_omega(&h, &f, &lf)? - 2.0 * q).abs() / q.max(1.0);
        worst = worst.max(gap);
    }
    Ok((worst <= 1e-9, format!("200 instances, worst scaled gap {worst:.2e}")))
}

fn kernel(seed: u64) -> Outcome {
    let cfg = OperatorConfig::default();
    let (mut worst_one, mut worst_mass): (f64, f64) = (0.0, 0.0);
    for (h, f) in degree_corpus(seed, 200) {
        let ones = vec![1.0; h.n()];
        worst_one = worst_one.max(norm_omega(&h, &time_derivative(&h, &ones, &cfg)?)?);
        let f1 = time_derivative(&h, &f, &cfg)?;
        worst_mass = worst_mass.max(inner_product_omega(&h, &ones, &f1)?.abs());
    }
    Ok((
        worst_one <= 1e-12 && worst_mass <= 1e-9,
        format!("200 instances, max ‖L1‖ {worst_one:.2e}, max |<1,Lf>| {worst_mass:.2e}"),
    ))
}

/// `‖f^(1)‖²_ω + Σ_{active} w_e Δ^(0)_e Δ^(1)_e` for level 0.
pub fn norm_identity_gap(h: &DirectedHypergraph, f: &[f64], cfg: &OperatorConfig) -> Result<f64> {
    let fd = first_derivative(h, f, cfg)?;
    let (l0, l1) = (&fd.tower.levels[0], &fd.tower.levels[1]);
    let cross: f64 = l0
        .active_edges()
        .map(|e| h.edges()[e].weight * l0.discrepancy[e] * l1.discrepancy[e])
        .sum();
    Ok((norm_omega(h, &fd.f1)?.powi(2) + cross).abs())
}

fn norm_identity(seed: u64) -> Outcome {
    let cfg = OperatorConfig::default();
    let mut worst: f64 = 0.0;
    for (h, f) in degree_corpus(seed, 200) {
        worst = worst.max(norm_identity_gap(&h, &f, &cfg)?);
    }
    Ok((worst <= 1e-9, format!("200 instances, worst gap {worst:.2e}")))
}

fn densest_oracle(seed: u64) -> Outcome {
    let mut rng = random::stream(seed, 4);
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    for trial in 0..500 {
        let size = rng.random_range(1..=12);
        let inst = random::densest_instance(&mut rng, size, trial % 3 == 0);
        for mode in [Mode::Max, Mode::Min] {
            let fast = densest::solve(&inst, mode)?;
            let slow = densest::solve_exhaustive(&inst, mode, DEFAULT_ENUM_CAP)?;
            let gap = (fast.density - slow.density).abs() / slow.density.abs().max(1.0);
            worst = worst.max(gap);
            if gap > 1e-12 || fast.set != slow.set {
                mismatches += 1;
            }
        }
    }
    Ok((mismatches == 0, format!("500 instances x 2 modes, {mismatches} mismatches, worst density gap {worst:.2e}")))
}

fn flow(seed: u64) -> Outcome {
    let cfg = OperatorConfig::default();
    let mut worst: f64 = 0.0;
    for (h, f) in degree_corpus(seed, 200) {
        let fd = first_derivative(&h, &f, &cfg)?;
        let r = flow_assignment(&h, &fd)?.residuals(&h, &fd);
        worst = worst.max(r.r0).max(r.r1).max(r.r2);
    }
    Ok((worst <= 1e-9, format!("200 instances, worst R0/R1/R2 residual {worst:.2e}")))
}

/// Statistics of one monitored diffusion run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DescentCheck {
    pub steps: usize,
    /// Largest energy increase beyond the `10 h²` slack (≤ 0 when monotone).
    pub excess: f64,
    pub fd_points: usize,
    pub fd_worst: f64,
}

/// True when `f` is not near a class merge or split: tied classes move
/// rigidly and distinct classes are separated by more than `margin`.
pub fn classes_stable(f: &[f64], f1: &[f64], tau: f64, margin: f64) -> bool {
    let sigma = induced_partition(f, tau);
    let rigid = sigma.classes().iter().all(|c| {
        c.iter().all(|&u| (f1[u] - f1[c[0]]).abs() <= 1e-9 * (1.0 + f1[c[0]].abs()))
    });
    let separated = sigma.classes().windows(2).all(|w| f[w[1][0]] - f[w[0][0]] > margin);
    rigid && separated
}

/// Runs adaptive Euler diffusion with base step `step` for `steps` steps,
/// checking monotone `Q` (and `D` when `V = N`) within `10 step²` slack,
/// and `dQ/dt = -‖L_ω f‖²_ω` by tangent central differences at points away
/// from class merges.
pub fn check_descent(h: &DirectedHypergraph, f0: &[f64], step: f64, steps: usize) -> Result<DescentCheck> {
    let cfg = IntegratorConfig {
        method: Method::Euler,
        step,
        adaptive: true,
        max_time: step * steps as f64,
        stop_grad_tol: 0.0,
        record_every: 1,
        operator: OperatorConfig::default(),
    };
    let records = diffusion::run(h, f0, &cfg)?;
    let max_grad_sq = records.iter().map(|r| r.grad_norm * r.grad_norm).fold(0.0, f64::max);
    let slack = 10.0 * step * step * max_grad_sq;
    let mut out = DescentCheck { steps: records.len() - 1, ..Default::default() };
    for w in records.windows(2) {
        out.excess = out.excess.max(w[1].q - w[0].q - slack);
        if let (Some(d0), Some(d1)) = (w[0].d, w[1].d) {
            let norm_sq = norm_omega(h, &w[0].f)?.powi(2);
            out.excess = out.excess.max(d1 - d0 - slack / norm_sq);
        }
    }
    let delta = 1e-7;
    for r in records.iter().step_by(10) {
        let g2 = r.grad_norm * r.grad_norm;
        if g2 < 1e-6 {
            continue;
        }
        let f1 = time_derivative(h, &r.f, &cfg.operator)?;
        if !classes_stable(&r.f, &f1, cfg.operator.tau_group, 1e-6) {
            continue;
        }
        let scale = delta / r.grad_norm;
        let fwd: Vec<f64> = r.f.iter().zip(&f1).map(|(x, g)| x + scale * g).collect();
        let bwd: Vec<f64> = r.f.iter().zip(&f1).map(|(x, g)| x - scale * g).collect();
        let slope = (quadratic_form(h, &fwd) - quadratic_form(h, &bwd)) / (2.0 * scale);
        out.fd_points += 1;
        out.fd_worst = out.fd_worst.max((slope + g2).abs() / g2);
    }
    Ok(out)
}

fn descent(seed: u64) -> Outcome {
    let mut rng = random::stream(seed, 6);
    let (mut worst_excess, mut fd_worst, mut fd_points): (f64, f64, usize) = (f64::NEG_INFINITY, 0.0, 0);
    for run in 0..50 {
        let h = if run % 2 == 0 {
            let shape = GraphShape::sample(&mut rng, 8, 10, WeightMode::Degree);
            random::hypergraph(&mut rng, &shape)
        } else {
            let mut shape = GraphShape::sample(&mut rng, 8, 10, WeightMode::Unit);
            shape.stationary = rng.random_range(1..shape.n);
            random::hypergraph(&mut rng, &shape)
        };
        let f0 = random::normal_vector(&mut rng, h.n());
        let check = check_descent(&h, &f0, default_step(&h), 2000)?;
        worst_excess = worst_excess.max(check.excess);
        fd_worst = fd_worst.max(check.fd_worst);
        fd_points += check.fd_points;
    }
    Ok((
        worst_excess <= 0.0 && fd_worst <= 1e-3 && fd_points > 0,
        format!("50 runs, worst excess over slack {worst_excess:.2e}, dQ/dt rel err {fd_worst:.2e} at {fd_points} points"),
    ))
}

fn sandwich(gamma2: f64, phi: f64) -> bool {
    gamma2 / 2.0 - CHEEGER_SLACK <= phi && phi <= 2.0 * gamma2.sqrt() + CHEEGER_SLACK
}

pub fn cycle(n: usize) -> DirectedHypergraph {
    let edges = (0..n).map(|i| Hyperedge::undirected(vec![i, (i + 1) % n], 1.0)).collect();
    DirectedHypergraph::with_degree_weights(n, edges).expect("cycle")
}

pub fn k2() -> DirectedHypergraph {
    DirectedHypergraph::with_degree_weights(2, vec![Hyperedge::undirected(vec![0, 1], 1.0)]).expect("k2")
}

pub fn two_k2() -> DirectedHypergraph {
    DirectedHypergraph::with_degree_weights(
        4,
        vec![Hyperedge::undirected(vec![0, 1], 1.0), Hyperedge::undirected(vec![2, 3], 1.0)],
    )
    .expect("two edges")
}

fn cheeger(seed: u64) -> Outcome {
    let mut rng = random::stream(seed, 7);
    let mut failures = 0;
    for _ in 0..100 {
        let shape = GraphShape::sample(&mut rng, 8, 10, WeightMode::Degree);
        let h = random::hypergraph(&mut rng, &shape);
        let phi = brute_force_phi_h(&h, DEFAULT_ENUM_CAP)?.phi;
        let (gamma2, _) = gamma2_oracle(&h, rng.random(), 4)?;
        if !sandwich(gamma2, phi) {
            failures += 1;
        }
    }
    let mut closed = Vec::new();
    for (label, h, gamma_expected, phi_expected) in
        [("K2", k2(), 2.0, Some(1.0)), ("C4", cycle(4), 1.0, None), ("2xK2", two_k2(), 0.0, Some(0.0))]
    {
        let phi = brute_force_phi_h(&h, DEFAULT_ENUM_CAP)?.phi;
        let (gamma2, _) = gamma2_oracle(&h, seed, 4)?;
        let ok = (gamma2 - gamma_expected).abs() <= 1e-6
            && phi_expected.is_none_or(|p| (phi - p).abs() <= 1e-12)
            && sandwich(gamma2, phi);
        if !ok {
            failures += 1;
        }
        closed.push(format!("{label}: γ₂={gamma2:.6} φ={phi:.3}"));
    }
    Ok((failures == 0, format!("100 random + closed forms ({}), {failures} failures", closed.join(", "))))
}

fn eigenpair() -> Outcome {
    let cfg = SpectralConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, h, expected) in [("K2", k2(), 2.0), ("C4", cycle(4), 1.0)] {
        let res = estimate_gamma2(&h, &cfg)?;
        ok &= (res.gamma2 - expected).abs() <= 1e-3 && res.residual <= 1e-3;
        parts.push(format!("{label}: γ₂={:.6} residual {:.1e}", res.gamma2, res.residual));
    }
    Ok((ok, parts.join(", ")))
}

/// Random semi-supervised instance: unit weights, `1..=max_free` free
/// vertices and one or two stationary vertices with distinct labels.
pub fn stationary_instance(rng: &mut impl Rng, max_free: usize, max_edges: usize) -> DirectedHypergraph {
    let free = rng.random_range(1..=max_free);
    let stationary = rng.random_range(1..=2);
    let shape = GraphShape {
        n: free + stationary,
        edges: rng.random_range(1..=max_edges),
        max_side: 3,
        stationary,
        mode: WeightMode::Unit,
        integer_weights: rng.random_bool(0.5),
    };
    random::hypergraph(rng, &shape)
}

fn labeled_vector(rng: &mut impl Rng, h: &DirectedHypergraph) -> Vec<f64> {
    let mut f = random::vector(rng, h.n());
    let mut label = 0.0;
    for u in h.stationary() {
        f[u] = label;
        label += 1.0;
    }
    f
}

fn subgradient(seed: u64) -> Outcome {
    let mut rng = random::stream(seed, 9);
    let cfg = OperatorConfig::default();
    let mut sub_failures = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let h = stationary_instance(&mut rng, 6, 8);
        let f = labeled_vector(&mut rng, &h);
        let rep = sssl::verify_subgradient(&h, &f, 100, rng.random(), 1e-9, &cfg)?;
        worst = worst.max(rep.worst_violation);
        if !rep.holds {
            sub_failures += 1;
        }
    }
    let mut mixture_failures = 0;
    let mut mixture_worst: f64 = 0.0;
    let mut done = 0;
    while done < 50 {
        let h = stationary_instance(&mut rng, 5, 8);
        let f = labeled_vector(&mut rng, &h);
        if induced_partition(&f, cfg.tau_group).classes().iter().any(|c| c.len() > 5) {
            continue;
        }
        done += 1;
        match sssl::verify_gradient_mixture(&h, &f, &cfg) {
            Ok(rep) => mixture_worst = mixture_worst.max(rep.reconstruction_error),
            Err(_) => mixture_failures += 1,
        }
    }
    Ok((
        sub_failures == 0 && mixture_failures == 0,
        format!(
            "subgradient: 100x100 samples, {sub_failures} failures, worst violation {worst:.2e}; \
             mixture: 50 instances, {mixture_failures} failures, worst error {mixture_worst:.2e}"
        ),
    ))
}

/// Minimum of `Q` over `f_N ∈ [lo, hi]^N` by a zooming grid: each round
/// scans 25 points per axis and shrinks the box to three cells around the
/// best point, until the cell width drops below `1e-9 (hi - lo)`.
pub fn grid_minimum(h: &DirectedHypergraph, base: &[f64], lo: f64, hi: f64) -> f64 {
    let free = h.non_stationary();
    let d = free.len();
    let points = 25usize;
    let mut lower = vec![lo; d];
    let mut upper = vec![hi; d];
    let mut best = (f64::INFINITY, vec![lo; d]);
    let mut f = base.to_vec();
    loop {
        let cells: Vec<f64> = (0..d).map(|i| (upper[i] - lower[i]) / (points - 1) as f64).collect();
        let total = points.pow(d as u32);
        for idx in 0..total {
            let mut rest = idx;
            for i in 0..d {
                f[free[i]] = lower[i] + cells[i] * (rest % points) as f64;
                rest /= points;
            }
            let q = quadratic_form(h, &f);
            if q < best.0 {
                best = (q, free.iter().map(|&u| f[u]).collect());
            }
        }
        if cells.iter().all(|&c| c <= 1e-9 * (hi - lo).max(1e-12)) {
            break;
        }
        for i in 0..d {
            lower[i] = (best.1[i] - 3.0 * cells[i]).max(lo);
            upper[i] = (best.1[i] + 3.0 * cells[i]).min(hi);
        }
    }
    best.0
}

pub fn path_problem() -> LabelProblem {
    let h = DirectedHypergraph::with_unit_weights(
        3,
        vec![Hyperedge::undirected(vec![0, 1], 1.0), Hyperedge::undirected(vec![1, 2], 1.0)],
        &[0, 2],
    )
    .expect("path");
    LabelProblem::new(h, &[(0, 0.0), (2, 1.0)], &[]).expect("labels")
}

fn sssl_optimum(seed: u64) -> Outcome {
    let params = SolveParams::default();
    let path = sssl::solve(&path_problem(), &params)?;
    let path_ok = (path.f_star[1] - 0.5).abs() <= 1e-6 && (path.q_star - 0.25).abs() <= 1e-6;

    let mut rng = random::stream(seed, 10);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let h = stationary_instance(&mut rng, 3, 6);
        let mut labels = Vec::new();
        for u in h.stationary() {
            labels.push((u, rng.random_range(0.0..1.0)));
        }
        let problem = LabelProblem::new(h.clone(), &labels, &[])?;
        let report = sssl::solve(&problem, &params)?;
        let (lo, hi) = labels.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, y)| (a.min(y), b.max(y)));
        let (lo, hi) = if hi - lo < 1e-9 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
        let oracle = grid_minimum(&h, problem.initial(), lo, hi);
        let gap = (report.q_star - oracle).abs() / oracle.max(1e-6);
        worst = worst.max(gap);
        if gap > 1e-4 {
            failures += 1;
        }
    }
    Ok((
        path_ok && failures == 0,
        format!(
            "path f_v={:.8} Q*={:.8}; 20 random problems, {failures} failures, worst rel gap {worst:.2e}",
            path.f_star[1], path.q_star
        ),
    ))
}

fn trajectory() -> Outcome {
    let h = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[])?;
    let cfg = OperatorConfig::default();
    let dt = 1e-4;
    let mut f = vec![1.0, 0.0];
    let mut worst: f64 = 0.0;
    let mut k = 0;
    for target in [5_000usize, 10_000, 20_000] {
        while k < target {
            f = diffusion::step(&h, &f, dt, Method::Euler, &cfg)?;
            k += 1;
        }
        let t = k as f64 * dt;
        let exact = (1.0 + (-2.0 * t).exp()) / 2.0;
        worst = worst.max((f[0] - exact).abs());
    }
    Ok((worst <= 1e-3, format!("t in {{0.5, 1, 2}}, worst |f_u - exact| {worst:.2e}")))
}
