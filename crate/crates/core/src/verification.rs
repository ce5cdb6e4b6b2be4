//! Grid suprema for the Tauberian condition, the three lemma bounds, and the
//! step-function counterexample showing the small-`x` rescaling cannot be
//! pushed past `x0`.
//!
//! All profiles are computed by sweeping a sorted `t` grid once per `x`:
//! `G(t2) = e^{-z (t2 - t1)} G(t1) + int_{[t1, t2)} e^{z (s - t2)} dA(s)`,
//! which never forms `e^{zs}` on its own and costs one pass over the jumps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bv_model::{BVFunction, Integrand};
use crate::error::{LabError, Result};
use crate::transform::TauberianCertificate;

/// Default grid parameters.
pub const DEFAULT_T_MAX: f64 = 50.0;
pub const DEFAULT_UNIFORM_POINTS: usize = 512;
pub const DEFAULT_POINTS_PER_JUMP: usize = 64;
pub const DEFAULT_JUMP_WINDOW: f64 = 0.1;
/// Only this many leading jumps get a refined window.
pub const MAX_REFINED_JUMPS: usize = 256;
pub const DEFAULT_X_POINTS: usize = 64;

/// Relative slack for quadrature noise when reading a margin or hypothesis.
pub const NOISE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub t_max: f64,
    pub points: usize,
    pub spacing: String,
}

/// A sorted, deduplicated grid of times.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid {
    points: Vec<f64>,
    spacing: String,
}

impl TGrid {
    pub fn from_points(mut points: Vec<f64>, spacing: impl Into<String>) -> Result<Self> {
        if points.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(LabError::Invalid("time grid points must be finite and >= 0".into()));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.is_empty() {
            return Err(LabError::Invalid("time grid is empty".into()));
        }
        Ok(Self {
            points,
            spacing: spacing.into(),
        })
    }

    /// `n` equally spaced points on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::from_points(linspace(a, b, n)?, format!("uniform {a}:{b}:{n}"))
    }

    /// Uniform points on `[0, t_max]` plus, for each of the first
    /// [`MAX_REFINED_JUMPS`] jump locations and density endpoints `tau`, the
    /// point `tau` itself and a geometric cluster in `(tau, tau + window]`.
    pub fn hybrid(a: &BVFunction, t_max: f64, uniform: usize, per_jump: usize, window: f64) -> Result<Self> {
        let mut pts = linspace(0.0, t_max, uniform)?;
        let mut marks: Vec<f64> = a.jump_locations().iter().copied().take(MAX_REFINED_JUMPS).collect();
        marks.extend(a.densities().iter().flat_map(|d| [Some(d.from), d.to]).flatten());
        marks.sort_by(f64::total_cmp);
        marks.dedup();
        for &tau in marks.iter().take(MAX_REFINED_JUMPS) {
            if tau >= t_max {
                break;
            }
            pts.push(tau);
            let w = window.min(t_max - tau);
            let lo = 1e-7f64.min(0.5 * w);
            for k in 0..per_jump {
                let frac = if per_jump == 1 { 1.0 } else { k as f64 / (per_jump - 1) as f64 };
                pts.push(tau + lo * (w / lo).powf(frac));
            }
        }
        Self::from_points(
            pts,
            format!("hybrid uniform {uniform} on [0, {t_max}] + {per_jump} per jump in (tau, tau + {window}]"),
        )
    }

    /// The default grid, clipped to the represented range of `a`.
    pub fn default_for(a: &BVFunction) -> Result<Self> {
        let t_max = a.domain_end().map_or(DEFAULT_T_MAX, |e| e.min(DEFAULT_T_MAX));
        Self::hybrid(a, t_max, DEFAULT_UNIFORM_POINTS, DEFAULT_POINTS_PER_JUMP, DEFAULT_JUMP_WINDOW)
    }

    /// The same construction with twice the points.
    pub fn refined_default_for(a: &BVFunction) -> Result<Self> {
        let t_max = a.domain_end().map_or(DEFAULT_T_MAX, |e| e.min(DEFAULT_T_MAX));
        Self::hybrid(a, t_max, 2 * DEFAULT_UNIFORM_POINTS, 2 * DEFAULT_POINTS_PER_JUMP, DEFAULT_JUMP_WINDOW)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            t_max: *self.points.last().expect("nonempty"),
            points: self.points.len(),
            spacing: self.spacing.clone(),
        }
    }

    fn above(&self, t: f64) -> Vec<f64> {
        self.points.iter().copied().filter(|&s| s > t).collect()
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && b >= a) || n == 0 {
        return Err(LabError::Invalid(format!("bad grid {a}:{b}:{n}")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// `n` log-spaced points on `[a, b]`, `0 < a <= b`.
pub fn logspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b >= a && b.is_finite()) {
        return Err(LabError::Invalid(format!("bad log grid {a}:{b}:{n}")));
    }
    Ok(linspace(a.ln(), b.ln(), n)?.into_iter().map(f64::exp).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupReport {
    pub case_id: String,
    pub grid_sup: f64,
    pub bound: f64,
    /// `bound - grid_sup`; negative means the bound is violated on the grid.
    pub margin: f64,
    pub witness_t: f64,
    pub witness_x: Option<f64>,
    pub grid_spec: GridSpec,
    pub hypothesis_failed: bool,
}

impl SupReport {
    fn new(grid_sup: f64, bound: f64, witness_t: f64, witness_x: Option<f64>, grid: GridSpec) -> Self {
        Self {
            case_id: String::new(),
            grid_sup,
            bound,
            margin: bound - grid_sup,
            witness_t,
            witness_x,
            grid_spec: grid,
            hypothesis_failed: false,
        }
    }

    pub fn with_case(mut self, id: impl Into<String>) -> Self {
        self.case_id = id.into();
        self
    }

    /// Margin nonnegative up to relative quadrature noise, hypothesis intact.
    pub fn passes(&self) -> bool {
        !self.hypothesis_failed && self.margin >= -NOISE * self.bound.abs()
    }
}

/// `|int_0^t e^{z (s - t)} dA(s)|` at each point of the ascending `ts`.
///
/// For real `z = x` this is `|e^{-xt} int_0^t e^{xs} dA(s)|`; for complex `z`
/// it equals `|e^{-xt} int_0^t e^{zs} dA(s)|`.
pub fn forward_profile(a: &BVFunction, z: Complex64, ts: &[f64], quad_tol: f64) -> Result<Vec<f64>> {
    let mut g = a.zero_value();
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        if t < prev {
            return Err(LabError::Invalid("profile times must be ascending".into()));
        }
        if t > prev {
            let inc = a.stieltjes_range(&Integrand::shifted_exp(z, t), prev, t, quad_tol)?;
            g = &g.scale((-z * (t - prev)).exp()) + &inc;
            prev = t;
        }
        out.push(g.norm());
    }
    Ok(out)
}

/// `|int_{[t, v)} e^{-z (s - t)} dA(s)|` at each point of the ascending `ts`,
/// all of which must be `<= v`.
pub fn backward_tail_profile(a: &BVFunction, z: Complex64, ts: &[f64], v: f64, quad_tol: f64) -> Result<Vec<f64>> {
    let mut h = a.zero_value();
    let mut next = v;
    let mut out = vec![0.0; ts.len()];
    for (k, &t) in ts.iter().enumerate().rev() {
        if t > next {
            return Err(LabError::Invalid("tail profile times must be ascending and <= v".into()));
        }
        if t < next {
            let inc = a.stieltjes_range(&Integrand::shifted_exp(-z, t), t, next, quad_tol)?;
            h = &h.scale((-z * (next - t)).exp()) + &inc;
            next = t;
        }
        out[k] = h.norm();
    }
    Ok(out)
}

fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Sup of `x |e^{-xt} int_0^t e^{xs} dA(s)|` over grid `t > T` and
/// `x in x_grid` with `x0 <= x <= R(t)`; the bound is `C`.
pub fn check_tauberian(
    a: &BVFunction,
    cert: &TauberianCertificate,
    t_grid: &TGrid,
    x_grid: &[f64],
    quad_tol: f64,
) -> Result<SupReport> {
    let ts = t_grid.above(cert.t);
    let xs: Vec<f64> = x_grid.iter().copied().filter(|&x| x >= cert.x0 && x.is_finite()).collect();
    if ts.is_empty() || xs.is_empty() {
        return Err(LabError::Invalid("no grid points with t > T and x >= x0".into()));
    }
    let per_x: Vec<Option<(f64, f64)>> = xs
        .par_iter()
        .map(|&x| -> Result<Option<(f64, f64)>> {
            let first = ts.partition_point(|&t| !cert.cutoff.value(t).at_least(x));
            if first == ts.len() {
                return Ok(None);
            }
            let prof = forward_profile(a, real(x), &ts, quad_tol)?;
            let (k, v) = argmax(&prof[first..]);
            Ok(Some((x * v, ts[first + k])))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, f64, f64)> = None;
    for (x, r) in xs.iter().zip(per_x) {
        if let Some((v, t)) = r {
            if best.map_or(true, |b| v > b.0) {
                best = Some((v, t, *x));
            }
        }
    }
    let (sup, t, x) = best.ok_or_else(|| LabError::Invalid("no grid pair satisfies x <= R(t)".into()))?;
    Ok(SupReport::new(sup, cert.c, t, Some(x), t_grid.spec()))
}

/// Sup over the grid of `|e^{-xt} int_0^t e^{xs} dA(s)|`, the quantity the
/// lemmas take as hypothesis.
pub fn hypothesis_sup(a: &BVFunction, x: f64, t_grid: &TGrid, quad_tol: f64) -> Result<(f64, f64)> {
    let prof = forward_profile(a, real(x), t_grid.points(), quad_tol)?;
    let (k, v) = argmax(&prof);
    Ok((v, t_grid.points()[k]))
}

fn check_positive(x: f64, c: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(LabError::Domain(format!("abscissa x = {x} must be positive")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(LabError::Invalid(format!("constant C = {c} must be positive")));
    }
    Ok(())
}

/// Sup of `|e^{-xt} int_0^t e^{zs} dA(s)|`, `z = x + iy`, against `C (1 + |y|/x)`.
pub fn check_lemma_2_1(a: &BVFunction, c: f64, x: f64, y: f64, t_grid: &TGrid, quad_tol: f64) -> Result<SupReport> {
    check_positive(x, c)?;
    let (h, _) = hypothesis_sup(a, x, t_grid, quad_tol)?;
    let prof = forward_profile(a, Complex64::new(x, y), t_grid.points(), quad_tol)?;
    let (k, v) = argmax(&prof);
    let mut r = SupReport::new(v, c * (1.0 + y.abs() / x), t_grid.points()[k], Some(x), t_grid.spec());
    r.hypothesis_failed = h > c * (1.0 + NOISE);
    Ok(r)
}

/// Upper integration limit making the omitted remainder `C (3 + |y|/x) e^{x (t - v)}`
/// at most `1e-6` for every grid `t`, clipped to the represented range of `A`.
pub fn lemma_2_2_upper_limit(a: &BVFunction, c: f64, x: f64, y: f64, t_max: f64) -> f64 {
    let k = c * (3.0 + y.abs() / x);
    let v = t_max + (k / 1e-6).ln().max(0.0) / x;
    a.domain_end().map_or(v, |e| v.min(e))
}

/// Sup of `|e^{xt} int_t^v e^{-zs} dA(s)|` against `C (3 + |y|/x)`.
///
/// The bound holds for every finite `v > t` (the integration by parts gives
/// `C e^{-xt} (1 + e^{-x(v-t)} + (2 + |y|/x)(1 - e^{-x(v-t)}))`), so clipping
/// `v` to the represented range of `A` keeps the comparison valid.
pub fn check_lemma_2_2(a: &BVFunction, c: f64, x: f64, y: f64, t_grid: &TGrid, quad_tol: f64) -> Result<SupReport> {
    check_positive(x, c)?;
    let (h, _) = hypothesis_sup(a, x, t_grid, quad_tol)?;
    let t_max = *t_grid.points().last().expect("nonempty");
    let v = lemma_2_2_upper_limit(a, c, x, y, t_max);
    let ts: Vec<f64> = t_grid.points().iter().copied().filter(|&t| t <= v).collect();
    let prof = backward_tail_profile(a, Complex64::new(x, y), &ts, v, quad_tol)?;
    let (k, s) = argmax(&prof);
    let mut r = SupReport::new(s, c * (3.0 + y.abs() / x), ts[k], Some(x), t_grid.spec());
    r.hypothesis_failed = h > c * (1.0 + NOISE);
    Ok(r)
}

/// For each `x` in `x_grid` with `0 < x <= x0`, the sup of
/// `|e^{-xt} int_0^t e^{xs} dA(s)|` against `C x0 / x`; reports the worst margin.
pub fn check_lemma_2_3(
    a: &BVFunction,
    c: f64,
    x0: f64,
    x_grid: &[f64],
    t_grid: &TGrid,
    quad_tol: f64,
) -> Result<SupReport> {
    check_positive(x0, c)?;
    let (h, _) = hypothesis_sup(a, x0, t_grid, quad_tol)?;
    let xs: Vec<f64> = x_grid.iter().copied().filter(|&x| x > 0.0 && x <= x0).collect();
    if xs.is_empty() {
        return Err(LabError::Invalid(format!("no grid abscissa in (0, {x0}]")));
    }
    let sups: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&x| hypothesis_sup(a, x, t_grid, quad_tol))
        .collect::<Result<_>>()?;
    let mut worst: Option<SupReport> = None;
    for (&x, (s, t)) in xs.iter().zip(sups) {
        let r = SupReport::new(s, c * x0 / x, t, Some(x), t_grid.spec());
        if worst.as_ref().map_or(true, |w| r.margin < w.margin) {
            worst = Some(r);
        }
    }
    let mut r = worst.expect("nonempty");
    r.hypothesis_failed = h > c * (1.0 + NOISE);
    Ok(r)
}

/// `g_x(t) = e^{-xt} int_0^t e^{xs} dA(s)` for `A` the unit step after `T`,
/// evaluated through the Stieltjes integral and checked against
/// `e^{x (T - t)} 1_{t > T}`.
pub fn counterexample_2_4(big_t: f64, x: f64, t: f64) -> Result<f64> {
    if !(big_t > 0.0) || !(x > 0.0) {
        return Err(LabError::Domain(format!("need T > 0 and x > 0, got T = {big_t}, x = {x}")));
    }
    let a = BVFunction::step(big_t, 1.0)?;
    let v = a
        .stieltjes_integral(&Integrand::shifted_exp(real(x), t), t, 1e-14)?
        .as_scalar()
        .expect("scalar")
        .re;
    let closed = if t > big_t { (x * (big_t - t)).exp() } else { 0.0 };
    if (v - closed).abs() > 1e-12 {
        return Err(LabError::Invalid(format!(
            "step transform {v} disagrees with closed form {closed} at t = {t}"
        )));
    }
    Ok(v)
}

/// Explicit time past which `e^{x (T - t)} < 1/x`: `T + max(log x, 0)/x + 1`.
///
/// The existence statement gives no formula; any `t > T + log(x)/x` works and
/// the `+ 1` keeps the grid clear of the boundary.
pub fn counterexample_t_prime(big_t: f64, x: f64) -> f64 {
    big_t + x.ln().max(0.0) / x + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    /// Sup over the whole grid against `C x0 / x`; negative margin for `x > x0`.
    pub global: SupReport,
    /// Sup over grid `t > T'` against `1/x`.
    pub tail: SupReport,
    pub t_prime: f64,
}

/// Both claims about the step at `T` with `x0 = 1`, `C = 1`.
pub fn counterexample_report(big_t: f64, x: f64, t_grid: &TGrid) -> Result<CounterexampleReport> {
    let vals: Vec<f64> = t_grid
        .points()
        .iter()
        .map(|&t| counterexample_2_4(big_t, x, t))
        .collect::<Result<_>>()?;
    let (k, s) = argmax(&vals);
    let global = SupReport::new(s, 1.0 / x, t_grid.points()[k], Some(x), t_grid.spec());

    let t_prime = counterexample_t_prime(big_t, x);
    let tail_ts = t_grid.above(t_prime);
    if tail_ts.is_empty() {
        return Err(LabError::Invalid(format!("time grid has no points beyond T' = {t_prime}")));
    }
    let start = t_grid.points().len() - tail_ts.len();
    let (j, ts) = argmax(&vals[start..]);
    let tail = SupReport::new(ts, 1.0 / x, tail_ts[j], Some(x), t_grid.spec());
    Ok(CounterexampleReport { global, tail, t_prime })
}
