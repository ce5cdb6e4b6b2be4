//! The contour `Gamma = Gamma1 + Gamma2` around the origin, the fudge factor
//! `(1 + z^2/R^2)^2`, and a numerical check of the Cauchy representation
//!
//! ```text
//! A(t) - f(0) = (1/2 pi i) [ int_{Gamma1} (f_t - f) g + int_{Gamma1bar} f_t g - int_{Gamma2} f g ]
//! ```
//!
//! with `g(z) = e^{tz} (1 + z^2/R^2)^2 / z`.
//!
//! On `Gamma1` the product `e^{tz} (f_t - f)(z)` is taken as
//! `-int_{[t, inf)} e^{-z (s - t)} dA(s)` whenever the integrator can supply
//! that tail; subtracting two numbers of size `e^{tR}` would otherwise lose
//! every digit once `tR` passes about 35.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bv_model::{BVFunction, Integrand};
use crate::error::{LabError, Result};
use crate::growth::GrowthBound;
use crate::quadrature::gauss_legendre;
use crate::series;
use crate::transform::TauberianCertificate;

pub const DEFAULT_QUAD_DENSITY: f64 = 1.0;
pub const NODES_PER_PANEL: usize = 10;
pub const PANEL_BUDGET: usize = 200_000;

/// `(1 + z^2/R^2)^2`
pub fn fudge_factor(z: Complex64, r: f64) -> Complex64 {
    let w = 1.0 + z * z / (r * r);
    w * w
}

/// Closed-form `f` on `Q` and the right half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtensionEvaluator {
    /// `1 / (1 + z)`
    Rational,
    /// `eta(z + 1) = sum_n (-1)^{n+1} n^{-1-z}`
    EtaShift,
    /// `p(z) / q(z)`, coefficients in ascending powers as `[re, im]` pairs.
    UserRational { num: Vec<[f64; 2]>, den: Vec<[f64; 2]> },
}

fn horner(coeffs: &[[f64; 2]], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + Complex64::new(c[0], c[1]))
}

impl ExtensionEvaluator {
    pub fn name(&self) -> &'static str {
        match self {
            ExtensionEvaluator::Rational => "rational",
            ExtensionEvaluator::EtaShift => "eta_shift",
            ExtensionEvaluator::UserRational { .. } => "user_rational",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ExtensionEvaluator::UserRational { num, den } = self {
            if num.is_empty() || den.is_empty() {
                return Err(LabError::Invalid("user_rational needs nonempty num and den".into()));
            }
            if num.iter().chain(den).flatten().any(|v| !v.is_finite()) {
                return Err(LabError::Invalid("user_rational coefficients must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let v = match self {
            ExtensionEvaluator::Rational => 1.0 / (1.0 + z),
            ExtensionEvaluator::EtaShift => series::eta(z + 1.0)?,
            ExtensionEvaluator::UserRational { num, den } => {
                let q = horner(den, z);
                if q.norm() == 0.0 {
                    return Err(LabError::Domain(format!("user_rational denominator vanishes at z = {z}")));
                }
                horner(num, z) / q
            }
        };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LabError::Domain(format!("{} is singular at z = {z}", self.name())));
        }
        Ok(v)
    }
}

/// An integrator that can supply `int_{[t, inf)} e^{-z (s - t)} dA(s)` for
/// `Re z >= 0`.
pub trait ScaledTail: Sync {
    fn scaled_tail(&self, z: Complex64, t: f64, quad_tol: f64) -> Result<Complex64>;
}

impl ScaledTail for BVFunction {
    fn scaled_tail(&self, z: Complex64, t: f64, quad_tol: f64) -> Result<Complex64> {
        scalar(self.stieltjes_tail(&Integrand::shifted_exp(-z, t), t, quad_tol)?.as_scalar(), self.dim())
    }
}

/// An integrator with no tail information; `Gamma1` falls back to `e^{tz} (f_t - f)`.
pub struct NoTail;

impl ScaledTail for NoTail {
    fn scaled_tail(&self, _z: Complex64, t: f64, _quad_tol: f64) -> Result<Complex64> {
        Err(LabError::TailUnavailable {
            t,
            reason: "no tail supplied".into(),
        })
    }
}

fn scalar(v: Option<Complex64>, dim: usize) -> Result<Complex64> {
    v.ok_or(LabError::Dimension { expected: 1, got: dim })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    Gamma1,
    Gamma1Bar,
    Gamma2,
}

impl Piece {
    pub fn as_str(self) -> &'static str {
        match self {
            Piece::Gamma1 => "gamma1",
            Piece::Gamma1Bar => "gamma1_bar",
            Piece::Gamma2 => "gamma2",
        }
    }
}

/// One quadrature node: `int F dz ~ sum F(z) dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub piece: Piece,
    /// Arc angle on the circles; on `Gamma2` the arc-length position from `iR`.
    pub s_param: f64,
    pub z: Complex64,
    pub dz: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub r: f64,
    pub t: f64,
    /// `-1 / (2 M(R))`
    pub left_abscissa: f64,
    pub density: f64,
}

impl ContourSpec {
    pub fn new(growth: &GrowthBound, t: f64, r: f64, density: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(LabError::Domain(format!("contour needs t > 0, got {t}")));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(LabError::Domain(format!("contour radius R = {r} must be >= 1")));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(LabError::Invalid(format!("quadrature density {density} must be positive")));
        }
        Ok(Self {
            r,
            t,
            left_abscissa: -1.0 / (2.0 * growth.eval(r)),
            density,
        })
    }

    fn count(&self, base: f64) -> usize {
        (self.density * base).ceil().max(1.0) as usize
    }

    fn check_budget(&self, piece: Piece, required: usize) -> Result<()> {
        if required > PANEL_BUDGET {
            return Err(LabError::ContourBudget {
                piece: piece.as_str(),
                required,
                budget: PANEL_BUDGET,
            });
        }
        Ok(())
    }

    /// The right arc `R e^{i theta}`, `theta` from `-pi/2` to `pi/2`.
    pub fn gamma1(&self) -> Result<Vec<ContourNode>> {
        let panels = self.count(4.0 + self.t * self.r);
        self.check_budget(Piece::Gamma1, panels)?;
        let gl = gauss_legendre(NODES_PER_PANEL);
        let h = PI / panels as f64;
        let mut out = Vec::with_capacity(panels * NODES_PER_PANEL);
        for p in 0..panels {
            let mid = -FRAC_PI_2 + (p as f64 + 0.5) * h;
            for &(x, w) in &gl {
                let theta = mid + 0.5 * h * x;
                let z = Complex64::from_polar(self.r, theta);
                out.push(ContourNode {
                    piece: Piece::Gamma1,
                    s_param: theta,
                    z,
                    dz: Complex64::i() * z * (0.5 * h * w),
                });
            }
        }
        Ok(out)
    }

    /// The left arc, `theta` from `pi/2` to `3 pi/2`: node for node the
    /// negation of [`Self::gamma1`].
    pub fn gamma1_bar(&self) -> Result<Vec<ContourNode>> {
        Ok(self
            .gamma1()?
            .into_iter()
            .map(|n| ContourNode {
                piece: Piece::Gamma1Bar,
                s_param: n.s_param + PI,
                z: -n.z,
                dz: -n.dz,
            })
            .collect())
    }

    /// `iR -> l + iR -> l - iR -> -iR`, `l = -1/(2 M(R))`.
    ///
    /// The vertical segment is split at `y = 0` and `|y| = 1` and graded
    /// geometrically towards `y = 0`, where `1/z` peaks at `1/|l|`.
    pub fn gamma2(&self) -> Result<Vec<ContourNode>> {
        let (l, r, t) = (self.left_abscissa, self.r, self.t);
        let top = Complex64::new(0.0, r);
        let corner_top = Complex64::new(l, r);
        let corner_bottom = Complex64::new(l, -r);
        let bottom = Complex64::new(0.0, -r);

        // Breakpoints in y on the vertical segment, descending from R to -R.
        let mut ys = vec![0.0];
        let inner = r.min(1.0);
        let mut y = l.abs();
        while y < inner {
            ys.push(y);
            y *= 2.0;
        }
        ys.push(inner);
        if r > 1.0 {
            ys.push(r);
        }
        let mut breaks: Vec<f64> = ys.iter().rev().copied().collect();
        breaks.extend(ys.iter().skip(1).map(|y| -y));

        let mut segments: Vec<(Complex64, Complex64, usize)> = vec![(top, corner_top, self.count(2.0 + t * l.abs()))];
        for w in breaks.windows(2) {
            let len = w[0] - w[1];
            segments.push((
                Complex64::new(l, w[0]),
                Complex64::new(l, w[1]),
                self.count(1.0 + t * len),
            ));
        }
        segments.push((corner_bottom, bottom, self.count(2.0 + t * l.abs())));
        let total: usize = segments.iter().map(|s| s.2).sum();
        self.check_budget(Piece::Gamma2, total)?;

        let gl = gauss_legendre(NODES_PER_PANEL);
        let mut out = Vec::with_capacity(total * NODES_PER_PANEL);
        let mut arc = 0.0;
        for (za, zb, panels) in segments {
            let len = (zb - za).norm();
            for p in 0..panels {
                let a = za + (zb - za) * (p as f64 / panels as f64);
                let b = za + (zb - za) * ((p + 1) as f64 / panels as f64);
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                for &(x, w) in &gl {
                    out.push(ContourNode {
                        piece: Piece::Gamma2,
                        s_param: arc + len * (p as f64 + 0.5 + 0.5 * x) / panels as f64,
                        z: mid + half * x,
                        dz: half * w,
                    });
                }
            }
            arc += len;
        }
        Ok(out)
    }
}

/// The integrand factors, without `dz`.
struct Evaluator<'a> {
    a: &'a BVFunction,
    tail: &'a dyn ScaledTail,
    f_ext: &'a ExtensionEvaluator,
    t: f64,
    r: f64,
    quad_tol: f64,
}

impl Evaluator<'_> {
    /// `e^{tz} (f_t - f)(z)` on `Gamma1`.
    fn scaled_difference(&self, z: Complex64) -> Result<Complex64> {
        match self.tail.scaled_tail(z, self.t, self.quad_tol) {
            Ok(v) => Ok(-v),
            Err(LabError::TailUnavailable { .. }) => {
                let ft = self.scaled_partial(z)?;
                Ok(ft - (self.t * z).exp() * self.f_ext.eval(z)?)
            }
            Err(e) => Err(e),
        }
    }

    /// `e^{tz} f_t(z) = int_0^t e^{-z (s - t)} dA(s)`.
    fn scaled_partial(&self, z: Complex64) -> Result<Complex64> {
        let v = self
            .a
            .stieltjes_integral(&Integrand::shifted_exp(-z, self.t), self.t, self.quad_tol)?;
        scalar(v.as_scalar(), self.a.dim())
    }

    /// The bracketed term of the piece, multiplied by `e^{tz}`.
    fn core(&self, piece: Piece, z: Complex64) -> Result<Complex64> {
        match piece {
            Piece::Gamma1 => self.scaled_difference(z),
            Piece::Gamma1Bar => self.scaled_partial(z),
            Piece::Gamma2 => Ok((self.t * z).exp() * self.f_ext.eval(z)?),
        }
    }

    /// `core * fudge / z`, signed so the three pieces add up to `2 pi i LHS'`.
    fn integrand(&self, node: &ContourNode) -> Result<(Complex64, Complex64)> {
        let core = self.core(node.piece, node.z)?;
        let kernel = fudge_factor(node.z, self.r) / node.z;
        let sign = if node.piece == Piece::Gamma2 { -1.0 } else { 1.0 };
        Ok((core, sign * core * kernel))
    }
}

/// Per-piece sums of the Cauchy identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyReport {
    /// `(1 / 2 pi i) int` over each piece, with `Gamma2` already negated.
    pub pieces: [Complex64; 3],
    pub lhs: Complex64,
    /// `A(t) - f(0)`.
    pub target: Complex64,
    pub residual: f64,
}

fn check_scalar(a: &BVFunction) -> Result<()> {
    if a.dim() != 1 {
        return Err(LabError::Dimension { expected: 1, got: a.dim() });
    }
    Ok(())
}

fn all_nodes(spec: &ContourSpec) -> Result<[Vec<ContourNode>; 3]> {
    Ok([spec.gamma1()?, spec.gamma1_bar()?, spec.gamma2()?])
}

fn evaluate_nodes(ev: &Evaluator, nodes: &[ContourNode]) -> Result<Vec<(Complex64, Complex64)>> {
    nodes.par_iter().map(|n| ev.integrand(n)).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn cauchy_report(
    a: &BVFunction,
    tail: &dyn ScaledTail,
    f_ext: &ExtensionEvaluator,
    growth: &GrowthBound,
    t: f64,
    r: f64,
    density: f64,
    quad_tol: f64,
) -> Result<CauchyReport> {
    check_scalar(a)?;
    let spec = ContourSpec::new(growth, t, r, density)?;
    let ev = Evaluator {
        a,
        tail,
        f_ext,
        t,
        r,
        quad_tol,
    };
    let scale = 1.0 / (2.0 * PI * Complex64::i());
    let mut pieces = [Complex64::new(0.0, 0.0); 3];
    for (slot, nodes) in pieces.iter_mut().zip(all_nodes(&spec)?) {
        let vals = evaluate_nodes(&ev, &nodes)?;
        let sum: Complex64 = nodes.iter().zip(&vals).map(|(n, v)| v.1 * n.dz).sum();
        *slot = sum * scale;
    }
    let lhs = pieces[0] + pieces[1] + pieces[2];
    let at = scalar(a.evaluate(t)?.as_scalar(), 1)?;
    let target = at - f_ext.eval(Complex64::new(0.0, 0.0))?;
    let residual = (lhs - target).norm() / target.norm().max(1e-30);
    Ok(CauchyReport {
        pieces,
        lhs,
        target,
        residual,
    })
}

/// `|LHS' - (A(t) - f(0))| / max(1e-30, |A(t) - f(0)|)`.
#[allow(clippy::too_many_arguments)]
pub fn cauchy_residual(
    a: &BVFunction,
    tail: &dyn ScaledTail,
    f_ext: &ExtensionEvaluator,
    growth: &GrowthBound,
    t: f64,
    r: f64,
    density: f64,
    quad_tol: f64,
) -> Result<f64> {
    Ok(cauchy_report(a, tail, f_ext, growth, t, r, density, quad_tol)?.residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PieceBound {
    pub measured: f64,
    /// The constant as displayed (`6C/R`, `4C/R`, or the `III` formula).
    pub displayed_bound: f64,
    /// The constant the estimate actually produces before rounding up.
    pub derived_bound: f64,
    pub margin_displayed: f64,
    pub margin_derived: f64,
}

impl PieceBound {
    fn new(measured: f64, displayed_bound: f64, derived_bound: f64) -> Self {
        Self {
            measured,
            displayed_bound,
            derived_bound,
            margin_displayed: displayed_bound - measured,
            margin_derived: derived_bound - measured,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermBounds {
    pub i: PieceBound,
    pub ii: PieceBound,
    pub iii: PieceBound,
}

/// `M(R) / (t R^3) + 2 R M(R)^2 e^{-t / (2 M(R))}`.
pub fn iii_bound(growth: &GrowthBound, t: f64, r: f64) -> f64 {
    let m = growth.eval(r);
    m / (t * r.powi(3)) + 2.0 * r * m * m * (-t / (2.0 * m)).exp()
}

/// `(1 / 2 pi) int |core| |fudge / z| |dz|` over each piece, against the
/// three estimates.
#[allow(clippy::too_many_arguments)]
pub fn term_bounds(
    a: &BVFunction,
    tail: &dyn ScaledTail,
    cert: &TauberianCertificate,
    f_ext: &ExtensionEvaluator,
    growth: &GrowthBound,
    t: f64,
    r: f64,
    density: f64,
    quad_tol: f64,
) -> Result<TermBounds> {
    check_scalar(a)?;
    let spec = ContourSpec::new(growth, t, r, density)?;
    let ev = Evaluator {
        a,
        tail,
        f_ext,
        t,
        r,
        quad_tol,
    };
    let mut measured = [0.0; 3];
    for (slot, nodes) in measured.iter_mut().zip(all_nodes(&spec)?) {
        let vals = evaluate_nodes(&ev, &nodes)?;
        *slot = nodes
            .iter()
            .zip(&vals)
            .map(|(n, v)| v.1.norm() * n.dz.norm())
            .sum::<f64>()
            / (2.0 * PI);
    }
    let c = cert.c;
    let iii = iii_bound(growth, t, r);
    Ok(TermBounds {
        i: PieceBound::new(measured[0], 6.0 * c / r, (12.0 / PI + 2.0) * c / r),
        ii: PieceBound::new(measured[1], 4.0 * c / r, (4.0 / PI + 2.0) * c / r),
        iii: PieceBound::new(measured[2], iii, iii),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSample {
    pub piece: &'static str,
    pub s_param: f64,
    pub re_z: f64,
    pub im_z: f64,
    pub abs_integrand: f64,
}

/// Every quadrature node with `|integrand|`, in contour order, for plotting.
#[allow(clippy::too_many_arguments)]
pub fn contour_samples(
    a: &BVFunction,
    tail: &dyn ScaledTail,
    f_ext: &ExtensionEvaluator,
    growth: &GrowthBound,
    t: f64,
    r: f64,
    density: f64,
    quad_tol: f64,
) -> Result<Vec<ContourSample>> {
    check_scalar(a)?;
    let spec = ContourSpec::new(growth, t, r, density)?;
    let ev = Evaluator {
        a,
        tail,
        f_ext,
        t,
        r,
        quad_tol,
    };
    let mut out = Vec::new();
    for nodes in all_nodes(&spec)? {
        let vals = evaluate_nodes(&ev, &nodes)?;
        out.extend(nodes.iter().zip(vals).map(|(n, v)| ContourSample {
            piece: n.piece.as_str(),
            s_param: n.s_param,
            re_z: n.z.re,
            im_z: n.z.im,
            abs_integrand: v.1.norm(),
        }));
    }
    Ok(out)
}
