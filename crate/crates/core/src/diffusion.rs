//! Explicit time integration of `df_N/dt = -L_ω f`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{norm_omega, DirectedHypergraph};
use crate::operator::{time_derivative, OperatorConfig};
use crate::quadratic::{discrepancy_ratio, quadratic_form};

/// Smallest step accepted by adaptive integration.
pub const MIN_STEP: f64 = 1e-15;

/// Increase of the monitored energy tolerated before a step is halved.
pub const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step: f64,
    pub adaptive: bool,
    pub max_time: f64,
    pub stop_grad_tol: f64,
    pub record_every: usize,
    pub operator: OperatorConfig,
}

impl IntegratorConfig {
    /// Euler with `h = 1e-3 · ω_min / w_max`.
    pub fn default_for(h: &DirectedHypergraph) -> Self {
        IntegratorConfig {
            method: Method::Euler,
            step: default_step(h),
            adaptive: false,
            max_time: 10.0,
            stop_grad_tol: 1e-9,
            record_every: 1,
            operator: OperatorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.max_time >= 0.0) || !self.max_time.is_finite() {
            return Err(Error::Config(format!("max_time must be nonnegative, got {}", self.max_time)));
        }
        if !(self.stop_grad_tol >= 0.0) {
            return Err(Error::Config(format!("stop_grad_tol must be nonnegative, got {}", self.stop_grad_tol)));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn default_step(h: &DirectedHypergraph) -> f64 {
    let omega_min = h
        .non_stationary()
        .into_iter()
        .map(|u| h.omega()[u])
        .fold(f64::INFINITY, f64::min);
    let w_max = h.edges().iter().map(|e| e.weight).fold(0.0, f64::max);
    if !omega_min.is_finite() || w_max == 0.0 {
        return 1e-3;
    }
    1e-3 * omega_min / w_max
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub f: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: f64,
    /// Present only when there are no stationary vertices.
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub grad_norm: f64,
}

fn axpy(f: &[f64], a: f64, g: &[f64]) -> Vec<f64> {
    f.iter().zip(g).map(|(x, y)| x + a * y).collect()
}

fn advance(
    h: &DirectedHypergraph,
    f: &[f64],
    k1: &[f64],
    dt: f64,
    method: Method,
    cfg: &OperatorConfig,
) -> Result<Vec<f64>> {
    match method {
        Method::Euler => Ok(axpy(f, dt, k1)),
        Method::Rk4 => {
            let k2 = time_derivative(h, &axpy(f, dt / 2.0, k1), cfg)?;
            let k3 = time_derivative(h, &axpy(f, dt / 2.0, &k2), cfg)?;
            let k4 = time_derivative(h, &axpy(f, dt, &k3), cfg)?;
            Ok((0..f.len())
                .map(|u| f[u] + dt / 6.0 * (k1[u] + 2.0 * k2[u] + 2.0 * k3[u] + k4[u]))
                .collect())
        }
    }
}

/// One explicit step of size `dt`; stationary coordinates stay fixed.
pub fn step(
    h: &DirectedHypergraph,
    f: &[f64],
    dt: f64,
    method: Method,
    cfg: &OperatorConfig,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {dt}")));
    }
    let k1 = time_derivative(h, f, cfg)?;
    advance(h, f, &k1, dt, method, cfg)
}

fn record(h: &DirectedHypergraph, t: f64, f: &[f64], f1: &[f64]) -> Result<TrajectoryRecord> {
    let d = if h.has_stationary() || f.iter().all(|&x| x == 0.0) {
        None
    } else {
        Some(discrepancy_ratio(h, f)?)
    };
    Ok(TrajectoryRecord { t, f: f.to_vec(), q: quadratic_form(h, f), d, grad_norm: norm_omega(h, f1)? })
}

/// True when `next` raises `Q`, or `D` when `V = N`, beyond [`MONOTONE_TOL`].
fn increases_energy(h: &DirectedHypergraph, f: &[f64], next: &[f64]) -> bool {
    if quadratic_form(h, next) > quadratic_form(h, f) + MONOTONE_TOL {
        return true;
    }
    if h.has_stationary() {
        return false;
    }
    match (discrepancy_ratio(h, f), discrepancy_ratio(h, next)) {
        (Ok(d0), Ok(d1)) => d1 > d0 + MONOTONE_TOL,
        _ => false,
    }
}

/// Integrates from `f0` until `max_time` or until `‖L_ω f‖_ω ≤ stop_grad_tol`.
///
/// The first and last states are always recorded; in between every
/// `record_every`-th accepted step is.
pub fn run(h: &DirectedHypergraph, f0: &[f64], cfg: &IntegratorConfig) -> Result<Vec<TrajectoryRecord>> {
    cfg.validate()?;
    h.check_dimension(f0)?;
    let mut f = f0.to_vec();
    let mut f1 = time_derivative(h, &f, &cfg.operator)?;
    let mut t = 0.0;
    let mut dt_base = cfg.step;
    let mut records = vec![record(h, t, &f, &f1)?];
    let mut steps = 0usize;
    let mut last_recorded = true;
    let end = cfg.max_time * (1.0 - 1e-14);
    loop {
        let grad = norm_omega(h, &f1)?;
        if grad <= cfg.stop_grad_tol || t >= end {
            break;
        }
        let dt = dt_base.min(cfg.max_time - t);
        let candidate = advance(h, &f, &f1, dt, cfg.method, &cfg.operator)?;
        if cfg.adaptive && increases_energy(h, &f, &candidate) {
            dt_base /= 2.0;
            if dt_base < MIN_STEP {
                return Err(Error::StepUnderflow { t, h: dt_base });
            }
            continue;
        }
        if cfg.adaptive {
            dt_base = (dt_base * 2.0).min(cfg.step);
        }
        f = candidate;
        t += dt;
        steps += 1;
        f1 = time_derivative(h, &f, &cfg.operator)?;
        last_recorded = steps % cfg.record_every == 0;
        if last_recorded {
            records.push(record(h, t, &f, &f1)?);
        }
    }
    if !last_recorded {
        records.push(record(h, t, &f, &f1)?);
    }
    Ok(records)
}

/// Writes `t,Q,D,grad_norm` rows; `D` is empty when undefined.
pub fn write_csv(records: &[TrajectoryRecord], mut out: impl Write) -> Result<()> {
    writeln!(out, "t,Q,D,grad_norm")?;
    for r in records {
        let d = r.d.map(|d| format!("{d:e}")).unwrap_or_default();
        writeln!(out, "{:e},{:e},{},{:e}", r.t, r.q, d, r.grad_norm)?;
    }
    Ok(())
}

/// One JSON object `{"t": .., "f": [..]}` per line.
pub fn write_densities(records: &[TrajectoryRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        let line = serde_json::json!({ "t": r.t, "f": r.f });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hyperedge;

    fn arc() -> DirectedHypergraph {
        DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]).unwrap()
    }

    #[test]
    fn euler_step() {
        let g = step(&arc(), &[1.0, 0.0], 0.1, Method::Euler, &OperatorConfig::default()).unwrap();
        assert!((g[0] - 0.9).abs() < 1e-15 && (g[1] - 0.1).abs() < 1e-15);
        let c = step(&arc(), &[0.4, 0.4], 0.5, Method::Rk4, &OperatorConfig::default()).unwrap();
        assert_eq!(c, vec![0.4, 0.4]);
    }

    #[test]
    fn constant_start_stops_immediately() {
        let cfg = IntegratorConfig::default_for(&arc());
        let recs = run(&arc(), &[2.0, 2.0], &cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].f, vec![2.0, 2.0]);
    }

    #[test]
    fn converges_to_average() {
        let cfg = IntegratorConfig { method: Method::Rk4, step: 0.01, max_time: 20.0, ..IntegratorConfig::default_for(&arc()) };
        let recs = run(&arc(), &[1.0, 0.0], &cfg).unwrap();
        let last = recs.last().unwrap();
        assert!((last.f[0] - 0.5).abs() < 1e-8 && (last.f[1] - 0.5).abs() < 1e-8);
        assert!(last.q < 1e-15);
    }

    #[test]
    fn csv_header() {
        let cfg = IntegratorConfig { max_time: 0.002, ..IntegratorConfig::default_for(&arc()) };
        let recs = run(&arc(), &[1.0, 0.0], &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,Q,D,grad_norm\n"));
        assert_eq!(text.lines().count(), recs.len() + 1);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig { step: 0.0, ..IntegratorConfig::default_for(&arc()) };
        assert!(run(&arc(), &[1.0, 0.0], &cfg).is_err());
    }
}
