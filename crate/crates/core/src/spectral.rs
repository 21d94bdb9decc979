//! Estimating `γ₂` by normalized diffusion, sweep-cut rounding, and the
//! Cheeger sandwich `γ₂/2 ≤ φ_H ≤ 2√γ₂`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{brute_force_phi_h, cut_weights, CutReport, DirectedHypergraph, WeightMode, DEFAULT_ENUM_CAP};
use crate::operator::{time_derivative, OperatorConfig};
use crate::quadratic::{discrepancy_ratio, quadratic_form};
use crate::random;

/// Slack allowed on both sides of the Cheeger sandwich.
pub const CHEEGER_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    pub restarts: usize,
    pub step: f64,
    pub max_time: f64,
    /// Stop a restart once `‖L_ω f - D(f) f‖_ω` falls below this.
    pub residual_tol: f64,
    pub seed: u64,
    pub operator: OperatorConfig,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            restarts: 8,
            step: 0.05,
            max_time: 200.0,
            residual_tol: 1e-8,
            seed: 0,
            operator: OperatorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    pub gamma2: f64,
    pub minimizer: Vec<f64>,
    pub residual: f64,
    pub sweep: CutReport,
    /// `D` along the winning restart, one entry per step.
    pub d_history: Vec<f64>,
    /// Final `D` of every restart.
    pub restart_values: Vec<f64>,
}

/// Removes the `ω`-weighted mean, making `f ⊥_ω 1`.
pub fn project_out_constant(h: &DirectedHypergraph, f: &mut [f64]) {
    let omega = h.omega();
    let mean = f.iter().zip(omega).map(|(x, w)| x * w).sum::<f64>() / h.total_weight();
    f.iter_mut().for_each(|x| *x -= mean);
}

fn normalize(h: &DirectedHypergraph, f: &mut [f64]) -> Result<()> {
    let norm = f.iter().zip(h.omega()).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    f.iter_mut().for_each(|x| *x /= norm);
    Ok(())
}

/// `‖L_ω f - λ f‖_ω`.
pub fn eigen_residual(h: &DirectedHypergraph, f: &[f64], lambda: f64, cfg: &OperatorConfig) -> Result<f64> {
    let f1 = time_derivative(h, f, cfg)?;
    let sq: f64 = (0..h.n()).map(|u| h.omega()[u] * (-f1[u] - lambda * f[u]).powi(2)).sum();
    Ok(sq.sqrt())
}

struct Descent {
    value: f64,
    f: Vec<f64>,
    residual: f64,
    history: Vec<f64>,
}

fn descend(h: &DirectedHypergraph, cfg: &SpectralConfig, restart: u64) -> Result<Descent> {
    let mut rng = random::stream(cfg.seed, restart);
    let mut f = random::normal_vector(&mut rng, h.n());
    project_out_constant(h, &mut f);
    normalize(h, &mut f)?;
    let steps = (cfg.max_time / cfg.step).ceil() as usize;
    let mut history = Vec::new();
    for k in 0..=steps {
        let f1 = time_derivative(h, &f, &cfg.operator)?;
        let d = discrepancy_ratio(h, &f)?;
        history.push(d);
        let residual = (0..h.n())
            .map(|u| h.omega()[u] * (-f1[u] - d * f[u]).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= cfg.residual_tol || k == steps {
            return Ok(Descent { value: d, f, residual, history });
        }
        f.iter_mut().zip(&f1).for_each(|(x, g)| *x += cfg.step * g);
        project_out_constant(h, &mut f);
        normalize(h, &mut f)?;
    }
    unreachable!("loop returns on its last iteration")
}

/// Diffusion descent on `D` over the unit sphere orthogonal to `1`, best of
/// several seeded restarts (run in parallel, reduced deterministically).
pub fn estimate_gamma2(h: &DirectedHypergraph, cfg: &SpectralConfig) -> Result<SpectralResult> {
    h.require_no_stationary()?;
    if h.n() < 2 {
        return Err(Error::InvalidSet("need at least two vertices".into()));
    }
    if cfg.restarts == 0 || !(cfg.step > 0.0) || !(cfg.max_time >= 0.0) {
        return Err(Error::Config("restarts, step and max_time must be positive".into()));
    }
    let runs: Vec<Descent> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|r| descend(h, cfg, r))
        .collect::<Result<_>>()?;
    let restart_values = runs.iter().map(|r| r.value).collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one restart");
    let sweep = sweep_cut(h, &best.f)?;
    Ok(SpectralResult {
        gamma2: best.value.max(0.0),
        minimizer: best.f,
        residual: best.residual,
        sweep,
        d_history: best.history,
        restart_values,
    })
}

/// Best `φ` over prefixes of `f`-sorted orders with `ω(S) ≤ ω(V)/2`.
///
/// Four orders are scanned (values ascending and descending, each with ids
/// ascending and descending), so suffixes and both tie orders are covered.
pub fn sweep_cut(h: &DirectedHypergraph, f: &[f64]) -> Result<CutReport> {
    h.require_no_stationary()?;
    h.check_dimension(f)?;
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
        return Err(Error::ConstantVector);
    }
    let n = h.n();
    let half = h.total_weight() / 2.0;
    let slack = 1e-12 * h.total_weight().max(1.0);
    let mut best: Option<CutReport> = None;
    for descending in [false, true] {
        for ids_descending in [false, true] {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                let by_value = if descending { f[b].total_cmp(&f[a]) } else { f[a].total_cmp(&f[b]) };
                by_value.then(if ids_descending { b.cmp(&a) } else { a.cmp(&b) })
            });
            let mut inside = vec![false; n];
            let mut vol = 0.0;
            for &u in &order[..n - 1] {
                inside[u] = true;
                vol += h.omega()[u];
                if vol > half + slack {
                    break;
                }
                let (out_weight, in_weight) = cut_weights(h, &inside);
                let (phi_plus, phi_minus) = (out_weight / vol, in_weight / vol);
                let phi = phi_plus.min(phi_minus);
                if best.as_ref().is_none_or(|b| phi < b.phi) {
                    let set = (0..n).filter(|&v| inside[v]).collect();
                    best = Some(CutReport { set, out_weight, in_weight, phi_plus, phi_minus, phi });
                }
            }
        }
    }
    best.ok_or_else(|| Error::InvalidSet("no admissible sweep prefix".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerReport {
    pub phi_h: f64,
    pub phi_set: Vec<usize>,
    pub gamma2_diffusion: f64,
    pub gamma2_oracle: f64,
    /// The smaller of the two estimates.
    pub gamma2: f64,
    pub phi_sweep: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl CheegerReport {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Checks `γ₂/2 ≤ φ_H ≤ 2√γ₂` with exact `φ_H` and two `γ₂` estimates.
pub fn cheeger_verify(h: &DirectedHypergraph, cfg: &SpectralConfig) -> Result<CheegerReport> {
    if h.weight_mode() != WeightMode::Degree {
        return Err(Error::NotDegreeMode);
    }
    let exact = brute_force_phi_h(h, DEFAULT_ENUM_CAP)?;
    let diffusion = estimate_gamma2(h, cfg)?;
    let (oracle, _) = gamma2_oracle(h, cfg.seed, 8)?;
    let gamma2 = diffusion.gamma2.min(oracle);
    Ok(CheegerReport {
        phi_h: exact.phi,
        phi_set: exact.set,
        gamma2_diffusion: diffusion.gamma2,
        gamma2_oracle: oracle,
        gamma2,
        phi_sweep: diffusion.sweep.phi,
        lower_ok: gamma2 / 2.0 - CHEEGER_SLACK <= exact.phi,
        upper_ok: exact.phi <= 2.0 * gamma2.sqrt() + CHEEGER_SLACK,
    })
}

/// Largest `n` for which the oracle seeds from every indicator vector.
const ORACLE_SUBSET_LIMIT: usize = 12;

/// Derivative-free minimization of `D` on `1^⊥`, independent of the
/// diffusion operator: Nelder-Mead from projected indicator vectors `±χ_S`
/// and `random_starts` Gaussian points.
pub fn gamma2_oracle(h: &DirectedHypergraph, seed: u64, random_starts: usize) -> Result<(f64, Vec<f64>)> {
    h.require_no_stationary()?;
    let n = h.n();
    if n < 2 {
        return Err(Error::InvalidSet("need at least two vertices".into()));
    }
    let objective = |x: &[f64]| -> f64 {
        let mut y = x.to_vec();
        project_out_constant(h, &mut y);
        let norm_sq: f64 = y.iter().zip(h.omega()).map(|(a, w)| w * a * a).sum();
        if norm_sq <= 1e-24 {
            return f64::INFINITY;
        }
        2.0 * quadratic_form(h, &y) / norm_sq
    };

    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    if n <= ORACLE_SUBSET_LIMIT {
        for mask in 1u64..(1u64 << n) - 1 {
            for sign in [1.0, -1.0] {
                let mut x: Vec<f64> = (0..n).map(|u| if mask >> u & 1 == 1 { sign } else { 0.0 }).collect();
                project_out_constant(h, &mut x);
                starts.push((objective(&x), x));
            }
        }
        starts.sort_by(|a, b| a.0.total_cmp(&b.0));
        starts.truncate(16);
    }
    let mut rng = random::stream(seed, u64::MAX);
    for _ in 0..random_starts {
        let mut x = random::normal_vector(&mut rng, n);
        project_out_constant(h, &mut x);
        starts.push((objective(&x), x));
    }

    let results: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|(_, x)| {
            let mut best = (objective(&x), x);
            for _ in 0..4 {
                let mut y = best.1.clone();
                project_out_constant(h, &mut y);
                let scale = y.iter().map(|a| a.abs()).fold(0.0, f64::max).max(1e-3);
                let found = nelder_mead(&objective, &y, 0.25 * scale, 4000);
                if found.0 < best.0 - 1e-15 {
                    best = found;
                } else {
                    break;
                }
            }
            best
        })
        .collect();
    let (value, mut x) = results
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start");
    project_out_constant(h, &mut x);
    if normalize(h, &mut x).is_err() {
        return Err(Error::ZeroVector);
    }
    Ok((value, x))
}

/// Nelder-Mead minimization from an axis-aligned simplex of size `scale`.
pub fn nelder_mead(objective: &dyn Fn(&[f64]) -> f64, x0: &[f64], scale: f64, max_evals: usize) -> (f64, Vec<f64>) {
    let d = x0.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(d + 1);
    simplex.push((objective(x0), x0.to_vec()));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += scale;
        simplex.push((objective(&x), x));
    }
    let mut evals = d + 1;
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (lo, hi) = (simplex[0].0, simplex[d].0);
        if hi.is_finite() && hi - lo <= 1e-14 * (1.0 + lo.abs()) {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (_, x) in &simplex[..d] {
            centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / d as f64);
        }
        let worst = simplex[d].1.clone();
        let reflected = combine(&centroid, &worst, -1.0);
        let fr = objective(&reflected);
        evals += 1;
        if fr < simplex[0].0 {
            let expanded = combine(&centroid, &worst, -2.0);
            let fe = objective(&expanded);
            evals += 1;
            simplex[d] = if fe < fr { (fe, expanded) } else { (fr, reflected) };
        } else if fr < simplex[d - 1].0 {
            simplex[d] = (fr, reflected);
        } else {
            let contracted = if fr < simplex[d].0 {
                combine(&centroid, &reflected, 0.5)
            } else {
                combine(&centroid, &worst, 0.5)
            };
            let fc = objective(&contracted);
            evals += 1;
            if fc < simplex[d].0.min(fr) {
                simplex[d] = (fc, contracted);
            } else {
                let best = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &entry.1, 0.5);
                    *entry = (objective(&x), x);
                }
                evals += d;
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    simplex.swap_remove(0)
}
