//! Functions of locally bounded variation `A: [0, inf) -> C^d`, stored as a
//! sorted list of jumps plus piecewise densities, and Riemann-Stieltjes
//! integrals against them.
//!
//! `A` is left-continuous with `A(0) = 0`: a jump at `tau` is felt by
//! `A(t)` (and by `int_0^t phi dA`) exactly when `tau < t`, including
//! `tau = 0`.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::quadrature;
use crate::vector::{NormKind, VectorValue};

const MAX_INITIAL_PANELS: usize = 20_000;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Scalar profile family of a density piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityShape {
    /// `c`
    Constant,
    /// `c e^{lambda s}`
    Exponential,
    /// `c s^p`
    Power,
    /// `c s^p e^{lambda s}`
    DampedPower,
}

impl DensityShape {
    pub fn name(self) -> &'static str {
        match self {
            DensityShape::Constant => "constant",
            DensityShape::Exponential => "exponential",
            DensityShape::Power => "power",
            DensityShape::DampedPower => "damped_power",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(DensityShape::Constant),
            "exponential" => Ok(DensityShape::Exponential),
            "power" => Ok(DensityShape::Power),
            "damped_power" => Ok(DensityShape::DampedPower),
            other => Err(LabError::Invalid(format!("unknown density kind '{other}'"))),
        }
    }
}

/// `dA = weight * c s^p e^{lambda s} ds` on `[from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece {
    pub from: f64,
    /// `None` means the piece extends to infinity.
    pub to: Option<f64>,
    pub shape: DensityShape,
    pub coeff: f64,
    pub lambda: Complex64,
    pub power: f64,
    pub weight: VectorValue,
}

impl DensityPiece {
    pub fn constant(from: f64, to: Option<f64>, c: f64, weight: VectorValue) -> Self {
        Self {
            from,
            to,
            shape: DensityShape::Constant,
            coeff: c,
            lambda: zero(),
            power: 0.0,
            weight,
        }
    }

    pub fn exponential(from: f64, to: Option<f64>, c: f64, lambda: Complex64, weight: VectorValue) -> Self {
        Self {
            from,
            to,
            shape: DensityShape::Exponential,
            coeff: c,
            lambda,
            power: 0.0,
            weight,
        }
    }

    pub fn power(from: f64, to: Option<f64>, c: f64, p: f64, weight: VectorValue) -> Self {
        Self {
            from,
            to,
            shape: DensityShape::Power,
            coeff: c,
            lambda: zero(),
            power: p,
            weight,
        }
    }

    pub fn damped_power(
        from: f64,
        to: Option<f64>,
        c: f64,
        p: f64,
        lambda: Complex64,
        weight: VectorValue,
    ) -> Self {
        Self {
            from,
            to,
            shape: DensityShape::DampedPower,
            coeff: c,
            lambda,
            power: p,
            weight,
        }
    }

    /// The scalar profile `c s^p e^{lambda s}`.
    pub fn profile(&self, s: f64) -> Complex64 {
        let mut v = Complex64::new(self.coeff, 0.0);
        if self.power != 0.0 {
            v *= s.powf(self.power);
        }
        if self.lambda != zero() {
            v *= (self.lambda * s).exp();
        }
        v
    }

    fn end(&self) -> f64 {
        self.to.unwrap_or(f64::INFINITY)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        self.weight.check_dim(dim)?;
        if !(self.from >= 0.0 && self.from.is_finite()) {
            return Err(LabError::Invalid(format!("density piece starts at {}", self.from)));
        }
        if let Some(to) = self.to {
            if !(to > self.from) {
                return Err(LabError::Invalid(format!(
                    "density piece [{}, {}) is empty or reversed",
                    self.from, to
                )));
            }
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(LabError::Invalid(format!("density power {} must be >= 0", self.power)));
        }
        if !self.coeff.is_finite() || !self.lambda.re.is_finite() || !self.lambda.im.is_finite() {
            return Err(LabError::Invalid("density parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Scalar integrand `phi(s) = e^{rate (s - origin)} * sum_k poly[k] s^k`.
///
/// The `origin` shift lets callers fold normalisations like `e^{-xt}` into
/// the exponent, so `e^{-xt} int_0^t e^{xs} dA(s)` never overflows.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    pub rate: Complex64,
    pub origin: f64,
    /// Empty means the constant polynomial 1.
    pub poly: Vec<Complex64>,
}

impl Integrand {
    /// `e^{c s}`
    pub fn exp(c: Complex64) -> Self {
        Self::shifted_exp(c, 0.0)
    }

    /// `e^{c (s - origin)}`
    pub fn shifted_exp(c: Complex64, origin: f64) -> Self {
        Self {
            rate: c,
            origin,
            poly: Vec::new(),
        }
    }

    pub fn constant(k: Complex64) -> Self {
        Self {
            rate: zero(),
            origin: 0.0,
            poly: vec![k],
        }
    }

    /// `e^{c s} * sum_k coeffs[k] s^k`
    pub fn exp_poly(c: Complex64, coeffs: Vec<Complex64>) -> Self {
        Self {
            rate: c,
            origin: 0.0,
            poly: coeffs,
        }
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        let e = if self.rate == zero() {
            Complex64::new(1.0, 0.0)
        } else {
            (self.rate * (s - self.origin)).exp()
        };
        if self.poly.is_empty() {
            e
        } else {
            let p = self.poly.iter().rev().fold(zero(), |acc, &c| acc * s + c);
            e * p
        }
    }

    /// Supremum of `|phi|` over `[a, b]`, sampled (exact for pure exponentials).
    pub fn sup_abs(&self, a: f64, b: f64) -> f64 {
        if self.poly.len() <= 1 {
            self.eval(a).norm().max(self.eval(b).norm())
        } else {
            (0..=256)
                .map(|k| self.eval(a + (b - a) * k as f64 / 256.0).norm())
                .fold(0.0, f64::max)
        }
    }
}

/// A function of locally bounded variation with values in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BVFunction {
    dim: usize,
    norm_kind: NormKind,
    jump_locs: Vec<f64>,
    /// Flat, `dim` entries per jump.
    jump_sizes: Vec<Complex64>,
    /// Flat prefix sums, `(jumps + 1) * dim` entries.
    prefix: Vec<Complex64>,
    densities: Vec<DensityPiece>,
    /// `None` when `A` is represented on all of `[0, inf)`; otherwise the
    /// largest `t` for which the stored jumps and densities describe `A`.
    domain_end: Option<f64>,
}

impl BVFunction {
    /// The zero function.
    pub fn zero(dim: usize, norm_kind: NormKind) -> Self {
        Self::from_parts(dim, norm_kind, Vec::new(), Vec::new(), Vec::new(), None)
            .expect("zero function is valid")
    }

    /// A single scalar step of size `size` at `at`.
    pub fn step(at: f64, size: f64) -> Result<Self> {
        Self::builder(1, NormKind::Euclidean)
            .jump(at, VectorValue::scalar(Complex64::new(size, 0.0)))
            .build()
    }

    pub fn builder(dim: usize, norm_kind: NormKind) -> BVBuilder {
        BVBuilder {
            dim,
            norm_kind,
            jumps: Vec::new(),
            densities: Vec::new(),
            domain_end: None,
        }
    }

    /// Builds directly from flat jump storage: `sizes` holds `dim` entries per
    /// location and locations must be strictly increasing.
    pub fn from_parts(
        dim: usize,
        norm_kind: NormKind,
        jump_locs: Vec<f64>,
        jump_sizes: Vec<Complex64>,
        densities: Vec<DensityPiece>,
        domain_end: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::Invalid("dimension must be at least 1".into()));
        }
        if jump_sizes.len() != jump_locs.len() * dim {
            return Err(LabError::Invalid(format!(
                "{} jump locations need {} size components, got {}",
                jump_locs.len(),
                jump_locs.len() * dim,
                jump_sizes.len()
            )));
        }
        for (k, &loc) in jump_locs.iter().enumerate() {
            if !(loc >= 0.0 && loc.is_finite()) {
                return Err(LabError::Invalid(format!("jump location {loc} must be finite and >= 0")));
            }
            if k > 0 && loc <= jump_locs[k - 1] {
                return Err(LabError::Invalid(format!(
                    "jump locations must be strictly increasing ({} then {loc})",
                    jump_locs[k - 1]
                )));
            }
        }
        if jump_sizes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(LabError::Invalid("jump sizes must be finite".into()));
        }
        for piece in &densities {
            piece.validate(dim)?;
        }
        if let Some(end) = domain_end {
            if !(end > 0.0) {
                return Err(LabError::Invalid(format!("domain end {end} must be positive")));
            }
        }
        let mut prefix = vec![zero(); (jump_locs.len() + 1) * dim];
        for k in 0..jump_locs.len() {
            for d in 0..dim {
                prefix[(k + 1) * dim + d] = prefix[k * dim + d] + jump_sizes[k * dim + d];
            }
        }
        Ok(Self {
            dim,
            norm_kind,
            jump_locs,
            jump_sizes,
            prefix,
            densities,
            domain_end,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn domain_end(&self) -> Option<f64> {
        self.domain_end
    }

    pub fn jump_count(&self) -> usize {
        self.jump_locs.len()
    }

    pub fn jump_locations(&self) -> &[f64] {
        &self.jump_locs
    }

    pub fn jump(&self, k: usize) -> (f64, VectorValue) {
        let size = self.jump_sizes[k * self.dim..(k + 1) * self.dim].to_vec();
        (
            self.jump_locs[k],
            VectorValue::new(size, self.norm_kind).expect("dim >= 1"),
        )
    }

    pub fn densities(&self) -> &[DensityPiece] {
        &self.densities
    }

    pub fn zero_value(&self) -> VectorValue {
        VectorValue::zeros(self.dim, self.norm_kind)
    }

    /// Pointwise sum `A + B`; jumps at a shared location are merged.
    pub fn sum(&self, other: &BVFunction) -> Result<BVFunction> {
        if self.dim != other.dim {
            return Err(LabError::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let d = self.dim;
        let (mut locs, mut sizes) = (Vec::new(), Vec::new());
        let (mut i, mut j) = (0, 0);
        while i < self.jump_locs.len() || j < other.jump_locs.len() {
            let li = self.jump_locs.get(i).copied().unwrap_or(f64::INFINITY);
            let lj = other.jump_locs.get(j).copied().unwrap_or(f64::INFINITY);
            if li < lj {
                locs.push(li);
                sizes.extend_from_slice(&self.jump_sizes[i * d..(i + 1) * d]);
                i += 1;
            } else if lj < li {
                locs.push(lj);
                sizes.extend_from_slice(&other.jump_sizes[j * d..(j + 1) * d]);
                j += 1;
            } else {
                locs.push(li);
                for k in 0..d {
                    sizes.push(self.jump_sizes[i * d + k] + other.jump_sizes[j * d + k]);
                }
                i += 1;
                j += 1;
            }
        }
        let mut densities = self.densities.clone();
        densities.extend(other.densities.iter().cloned());
        let domain_end = match (self.domain_end, other.domain_end) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        BVFunction::from_parts(d, self.norm_kind, locs, sizes, densities, domain_end)
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(LabError::Domain(format!("time t = {t} must be >= 0")));
        }
        match self.domain_end {
            Some(end) if t > end => Err(LabError::Range { t, limit: end }),
            _ => Ok(()),
        }
    }

    /// Number of jumps with location `< t`.
    fn jumps_before(&self, t: f64) -> usize {
        self.jump_locs.partition_point(|&loc| loc < t)
    }

    fn density_integral(
        &self,
        piece: &DensityPiece,
        phi: &Integrand,
        lo: f64,
        hi: f64,
        tol: f64,
    ) -> Result<Complex64> {
        let a = lo.max(piece.from);
        let b = hi.min(piece.end());
        if !(b > a) {
            return Ok(zero());
        }
        let rate = phi.rate + piece.lambda;
        let scale = piece.weight.norm().max(f64::MIN_POSITIVE);
        let (a, b) = if phi.poly.len() <= 1 {
            clip_to_mass(|s| (phi.eval(s) * piece.profile(s)).norm() * scale, rate.re, piece.power, a, b, 0.5 * tol)
        } else {
            (a, b)
        };
        let len = b - a;
        let panels = 1.0 + (len * rate.im.abs() / std::f64::consts::PI).ceil() + (len * rate.re.abs() / 16.0).ceil();
        let panels = panels.min(MAX_INITIAL_PANELS as f64) as usize;
        let r = quadrature::integrate(|s| phi.eval(s) * piece.profile(s), a, b, 0.5 * tol / scale, panels)?;
        Ok(r.value)
    }

    /// `int_{[lo, hi)} phi dA`: jumps with `lo <= tau < hi` plus the density
    /// parts over `[lo, hi)`, each smooth piece to absolute accuracy `tol`.
    pub fn stieltjes_range(&self, phi: &Integrand, lo: f64, hi: f64, tol: f64) -> Result<VectorValue> {
        if !(tol > 0.0) {
            return Err(LabError::Domain(format!("quadrature tolerance {tol} must be positive")));
        }
        self.check_range(hi)?;
        if !(hi > lo) {
            return Ok(self.zero_value());
        }
        let first = self.jump_locs.partition_point(|&loc| loc < lo);
        let last = self.jumps_before(hi);
        let d = self.dim;
        let mut acc = vec![zero(); d];
        for k in first..last {
            let s = self.jump_locs[k];
            let w = phi.eval(s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(LabError::NonFinite { s });
            }
            for (c, size) in acc.iter_mut().zip(&self.jump_sizes[k * d..(k + 1) * d]) {
                *c += w * size;
            }
        }
        let mut out = VectorValue::new(acc, self.norm_kind).expect("dim >= 1");
        for piece in &self.densities {
            let v = self.density_integral(piece, phi, lo, hi, tol)?;
            out.axpy(v, &piece.weight);
        }
        Ok(out)
    }

    /// `int_0^t phi(s) dA(s)`.
    pub fn stieltjes_integral(&self, phi: &Integrand, t: f64, quad_tol: f64) -> Result<VectorValue> {
        self.stieltjes_range(phi, 0.0, t, quad_tol)
    }

    /// `int_{[lo, inf)} phi dA` for a pure exponential `phi = k e^{c (s - s0)}`.
    ///
    /// Needs the whole of `A` to be represented (no `domain_end`) and every
    /// unbounded density piece to decay against `phi`.
    pub fn stieltjes_tail(&self, phi: &Integrand, lo: f64, tol: f64) -> Result<VectorValue> {
        if let Some(end) = self.domain_end {
            return Err(LabError::TailUnavailable {
                t: lo,
                reason: format!("A is only represented up to {end}"),
            });
        }
        if phi.poly.len() > 1 {
            return Err(LabError::TailUnavailable {
                t: lo,
                reason: "tail integrals take pure exponential integrands only".into(),
            });
        }
        let mut out = self.zero_value();
        let first = self.jump_locs.partition_point(|&loc| loc < lo);
        for k in first..self.jump_locs.len() {
            let (s, size) = self.jump(k);
            let w = phi.eval(s);
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(LabError::NonFinite { s });
            }
            out.axpy(w, &size);
        }
        for piece in &self.densities {
            let a = lo.max(piece.from);
            match piece.to {
                Some(to) => {
                    let v = self.density_integral(piece, phi, a, to, tol)?;
                    out.axpy(v, &piece.weight);
                }
                None => {
                    let decay = -(phi.rate + piece.lambda).re;
                    if !(decay > 0.0) {
                        return Err(LabError::TailUnavailable {
                            t: lo,
                            reason: format!("density on [{}, inf) does not decay against the integrand", piece.from),
                        });
                    }
                    let p = piece.power;
                    let wnorm = piece.weight.norm();
                    let magnitude = |s: f64| (phi.eval(s) * piece.profile(s)).norm() * wnorm;
                    // Beyond cut >= 2p/decay the integrand is dominated by
                    // magnitude(cut) e^{-decay (s - cut) / 2}.
                    let start = a.max(2.0 * p / decay);
                    let mut cut = start + 1.0;
                    let mut guard = 0;
                    while magnitude(cut) * 2.0 / decay > 0.25 * tol && guard < 200 {
                        cut = start + 2.0 * (cut - start);
                        guard += 1;
                    }
                    let v = self.density_integral(piece, phi, a, cut, 0.5 * tol)?;
                    out.axpy(v, &piece.weight);
                }
            }
        }
        Ok(out)
    }

    /// Left-continuous value `A(t) = sum_{tau < t} jump + int_0^t density`.
    pub fn evaluate(&self, t: f64) -> Result<VectorValue> {
        self.check_range(t)?;
        let k = self.jumps_before(t);
        let d = self.dim;
        let mut out = VectorValue::new(self.prefix[k * d..(k + 1) * d].to_vec(), self.norm_kind)
            .expect("dim >= 1");
        let one = Integrand::constant(Complex64::new(1.0, 0.0));
        for piece in &self.densities {
            let v = self.density_integral(piece, &one, 0.0, t, 1e-15)?;
            out.axpy(v, &piece.weight);
        }
        Ok(out)
    }

    /// `sum_{tau < t} |jump| + sum int_0^t |density|`.
    pub fn total_variation(&self, t: f64) -> Result<f64> {
        self.check_range(t)?;
        let k = self.jumps_before(t);
        let d = self.dim;
        let mut tv: f64 = (0..k)
            .map(|j| self.norm_kind.of(&self.jump_sizes[j * d..(j + 1) * d]))
            .sum();
        for piece in &self.densities {
            let a = piece.from;
            let b = t.min(piece.end());
            if b > a {
                let panels = 1 + (((b - a) * piece.lambda.im.abs()) / std::f64::consts::PI).ceil() as usize;
                let r = quadrature::integrate(
                    |s| Complex64::new(piece.profile(s).norm(), 0.0),
                    a,
                    b,
                    1e-14,
                    panels.min(MAX_INITIAL_PANELS),
                )?;
                tv += r.value.re * piece.weight.norm();
            }
        }
        Ok(tv)
    }
}

/// Shrink `[a, b]` to where `|s^p e^{rho s}|`-type mass lives, dropping at
/// most `budget` of `int |integrand|`.
///
/// `mag` is the integrand magnitude, `K s^p e^{rho s}` up to a constant. For
/// `rho > 0` it increases on `s > 0`, so `int_a^c mag <= (c - a) mag(c)`; for
/// `rho < 0` it decreases past `p / |rho|` and `int_c^b mag <= (b - c) mag(c)`.
fn clip_to_mass(mag: impl Fn(f64) -> f64, rho: f64, p: f64, a: f64, b: f64, budget: f64) -> (f64, f64) {
    if (b - a) * rho.abs() < 64.0 {
        return (a, b);
    }
    let mut width = 32.0 / rho.abs();
    while width < b - a {
        if rho > 0.0 {
            let c = b - width;
            if (c - a) * mag(c) <= budget {
                return (c, b);
            }
        } else {
            let c = a + width;
            if c >= p / rho.abs() && (b - c) * mag(c) <= budget {
                return (a, c);
            }
        }
        width *= 2.0;
    }
    (a, b)
}

/// Incremental construction of a [`BVFunction`].
#[derive(Debug, Clone)]
pub struct BVBuilder {
    dim: usize,
    norm_kind: NormKind,
    jumps: Vec<(f64, VectorValue)>,
    densities: Vec<DensityPiece>,
    domain_end: Option<f64>,
}

impl BVBuilder {
    pub fn jump(mut self, at: f64, size: VectorValue) -> Self {
        self.jumps.push((at, size));
        self
    }

    pub fn density(mut self, piece: DensityPiece) -> Self {
        self.densities.push(piece);
        self
    }

    pub fn domain_end(mut self, end: f64) -> Self {
        self.domain_end = Some(end);
        self
    }

    pub fn build(mut self) -> Result<BVFunction> {
        self.jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locs = Vec::with_capacity(self.jumps.len());
        let mut sizes = Vec::with_capacity(self.jumps.len() * self.dim);
        for (at, size) in self.jumps {
            size.check_dim(self.dim)?;
            locs.push(at);
            sizes.extend_from_slice(size.components());
        }
        BVFunction::from_parts(self.dim, self.norm_kind, locs, sizes, self.densities, self.domain_end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> VectorValue {
        VectorValue::scalar(c(1.0, 0.0))
    }

    fn exp_density(lambda: f64) -> BVFunction {
        BVFunction::builder(1, NormKind::Euclidean)
            .density(DensityPiece::exponential(0.0, None, 1.0, c(lambda, 0.0), one()))
            .build()
            .unwrap()
    }

    fn dirichlet_block(n_max: usize, coeff: impl Fn(usize) -> f64) -> BVFunction {
        let locs = (1..=n_max).map(|n| (n as f64).ln()).collect();
        let sizes = (1..=n_max).map(|n| c(coeff(n) / n as f64, 0.0)).collect();
        BVFunction::from_parts(1, NormKind::Euclidean, locs, sizes, vec![], None).unwrap()
    }

    fn alternating(n: usize) -> f64 {
        if n % 2 == 1 { 1.0 } else { -1.0 }
    }

    #[test]
    fn zero_integrator() {
        let a = BVFunction::zero(1, NormKind::Euclidean);
        let v = a.stieltjes_integral(&Integrand::exp(c(1.0, 0.0)), 5.0, 1e-12).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn single_jump_against_exponential() {
        let a = BVFunction::step(1.0, 1.0).unwrap();
        let v = a.stieltjes_integral(&Integrand::exp(c(1.0, 0.0)), 2.0, 1e-12).unwrap();
        let e = std::f64::consts::E;
        assert!((v.as_scalar().unwrap() - c(e, 0.0)).norm() < 1e-15);
        // e^{-xt} times the integral is g_x(2) = e^{x (T - t)}
        let g = a
            .stieltjes_integral(&Integrand::shifted_exp(c(1.0, 0.0), 2.0), 2.0, 1e-12)
            .unwrap();
        assert!((g.norm() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn unit_density_measures_length() {
        let a = BVFunction::builder(1, NormKind::Euclidean)
            .density(DensityPiece::constant(0.0, None, 1.0, one()))
            .build()
            .unwrap();
        let v = a.stieltjes_integral(&Integrand::constant(c(1.0, 0.0)), 3.0, 1e-12).unwrap();
        assert!((v.as_scalar().unwrap() - c(3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn dirichlet_integrator_is_a_finite_sum() {
        let a = dirichlet_block(2_000, alternating);
        for &(x, t) in &[(0.7, 5.0), (2.0, 7.5), (0.1, 1.0)] {
            let v = a.stieltjes_integral(&Integrand::exp(c(x, 0.0)), t, 1e-12).unwrap();
            let direct: f64 = (1..=2_000usize)
                .filter(|&n| (n as f64).ln() < t)
                .map(|n| (n as f64).powf(x) * alternating(n) / n as f64)
                .sum();
            let got = v.as_scalar().unwrap();
            assert!((got.re - direct).abs() <= 1e-12 * direct.abs().max(1.0), "x={x} t={t}");
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn jump_at_zero_counts_only_for_positive_t() {
        let a = BVFunction::step(0.0, 1.0).unwrap();
        assert_eq!(a.evaluate(0.0).unwrap().norm(), 0.0);
        assert_eq!(a.evaluate(1e-300).unwrap().norm(), 1.0);
        let phi = Integrand::constant(c(1.0, 0.0));
        assert_eq!(a.stieltjes_integral(&phi, 0.0, 1e-12).unwrap().norm(), 0.0);
    }

    #[test]
    fn left_continuous_evaluation() {
        let a = BVFunction::step(1.0, 1.0).unwrap();
        assert_eq!(a.evaluate(1.0).unwrap().norm(), 0.0);
        assert_eq!(a.evaluate(1.5).unwrap().norm(), 1.0);
        assert_eq!(BVFunction::zero(1, NormKind::Sup).evaluate(4.0).unwrap().norm(), 0.0);
        let v = exp_density(-1.0).evaluate(1.0).unwrap();
        assert!((v.norm() - (1.0 - (-1f64).exp())).abs() < 1e-14);
        assert!((v.norm() - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(BVFunction::step(1.0, 1.0).unwrap().total_variation(2.0).unwrap(), 1.0);
        let tv = exp_density(-1.0).total_variation(60.0).unwrap();
        assert!((tv - 1.0).abs() < 1e-12);
        let a = dirichlet_block(10, alternating);
        // The jump at log 4 is felt only for t > log 4.
        let tv = a.total_variation(4f64.ln()).unwrap();
        assert!((tv - (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-14);
        assert!((tv - 1.833333).abs() < 1e-6);
        let tv = a.total_variation(4f64.ln() + 1e-9).unwrap();
        assert!((tv - (1.0 + 0.5 + 1.0 / 3.0 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_is_diagnosed() {
        let a = exp_density(800.0);
        match a.stieltjes_integral(&Integrand::exp(c(1.0, 0.0)), 2.0, 1e-10) {
            Err(LabError::NonFinite { s }) => assert!(s > 0.8 && s <= 2.0),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn range_and_structure_errors() {
        let a = dirichlet_block(10, |_| 1.0);
        let a = BVFunction::from_parts(
            1,
            NormKind::Euclidean,
            a.jump_locations().to_vec(),
            (0..10).map(|_| c(1.0, 0.0)).collect(),
            vec![],
            Some(11f64.ln()),
        )
        .unwrap();
        assert!(matches!(a.evaluate(3.0), Err(LabError::Range { .. })));
        let dup = BVFunction::builder(1, NormKind::Euclidean)
            .jump(1.0, one())
            .jump(1.0, one())
            .build();
        assert!(dup.is_err());
        let bad_dim = BVFunction::builder(2, NormKind::Euclidean).jump(1.0, one()).build();
        assert!(matches!(bad_dim, Err(LabError::Dimension { .. })));
    }

    #[test]
    fn vector_valued_integrals() {
        let w = VectorValue::new(vec![c(1.0, 0.0), c(0.0, -2.0)], NormKind::Sup).unwrap();
        let a = BVFunction::builder(2, NormKind::Sup)
            .jump(0.5, w.clone())
            .density(DensityPiece::exponential(0.0, Some(4.0), 1.0, c(-1.0, 0.0), w.clone()))
            .build()
            .unwrap();
        let v = a.evaluate(5.0).unwrap();
        let scalar = 1.0 + (1.0 - (-4f64).exp());
        assert!((&v - &w.scale(c(scalar, 0.0))).norm() < 1e-13);
        assert!((v.norm() - 2.0 * scalar).abs() < 1e-13);
        assert!((a.total_variation(5.0).unwrap() - 2.0 * scalar).abs() < 1e-12);
    }

    #[test]
    fn tail_of_exponential_density() {
        // int_t^inf e^{-z (s - t)} e^{-s} ds = e^{-t} / (1 + z)
        let a = exp_density(-1.0);
        for (z, t) in [(c(0.5, 2.0), 3.0), (c(0.0, 5.0), 1.0), (c(4.0, -1.0), 10.0)] {
            let v = a.stieltjes_tail(&Integrand::shifted_exp(-z, t), t, 1e-15).unwrap();
            let exact = (-t as f64).exp() / (1.0 + z);
            assert!((v.as_scalar().unwrap() - exact).norm() < 1e-14, "z={z}");
        }
        let grows = exp_density(0.5);
        assert!(matches!(
            grows.stieltjes_tail(&Integrand::exp(c(-0.1, 0.0)), 1.0, 1e-10),
            Err(LabError::TailUnavailable { .. })
        ));
    }

    #[test]
    fn narrow_bump_converges_to_jump() {
        let tau = 1.0;
        let phi = Integrand::exp(c(0.5, 3.0));
        let jump = phi.eval(tau);
        let errors: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&w| {
                let a = BVFunction::builder(1, NormKind::Euclidean)
                    .density(DensityPiece::constant(tau, Some(tau + w), 1.0 / w, one()))
                    .build()
                    .unwrap();
                let v = a.stieltjes_integral(&phi, 3.0, 1e-14).unwrap();
                (v.as_scalar().unwrap() - jump).norm()
            })
            .collect();
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    }

    fn preset(kind: u8, p: f64, lam: f64, from: f64, jump_at: f64) -> BVFunction {
        let piece = match kind % 4 {
            0 => DensityPiece::constant(from, Some(from + 3.0), p, one()),
            1 => DensityPiece::exponential(from, None, 1.0, c(-lam, lam), one()),
            2 => DensityPiece::power(from, Some(from + 2.0), 1.0, p, one()),
            _ => DensityPiece::damped_power(from, None, 1.0, p, c(-lam, 0.0), one()),
        };
        BVFunction::builder(1, NormKind::Euclidean)
            .jump(jump_at, VectorValue::scalar(c(p, -1.0)))
            .density(piece)
            .build()
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn linearity(
            k1 in 0u8..4, k2 in 0u8..4, p in 0.0f64..2.0, lam in 0.2f64..2.0,
            from in 0.0f64..2.0, jump in 0.0f64..4.0, zr in -1.0f64..1.0, zi in -5.0f64..5.0,
            t in 0.1f64..6.0,
        ) {
            let tol = 1e-11;
            let a1 = preset(k1, p, lam, from, jump);
            let a2 = preset(k2, 1.0 + p, 0.5 * lam, 0.5 * from, jump + 0.5);
            let phi = Integrand::exp(c(zr, zi));
            let lhs = a1.sum(&a2).unwrap().stieltjes_integral(&phi, t, tol).unwrap();
            let rhs = &a1.stieltjes_integral(&phi, t, tol).unwrap()
                + &a2.stieltjes_integral(&phi, t, tol).unwrap();
            prop_assert!((&lhs - &rhs).norm() <= 2.0 * tol + 1e-14 * lhs.norm());
        }

        #[test]
        fn bounded_by_sup_times_variation(
            k in 0u8..4, p in 0.0f64..2.0, lam in 0.2f64..2.0, from in 0.0f64..2.0,
            jump in 0.0f64..4.0, zr in -1.0f64..1.0, zi in -5.0f64..5.0, t in 0.1f64..6.0,
        ) {
            let tol = 1e-11;
            let a = preset(k, p, lam, from, jump);
            let phi = Integrand::exp(c(zr, zi));
            let v = a.stieltjes_integral(&phi, t, tol).unwrap();
            let bound = phi.sup_abs(0.0, t) * a.total_variation(t).unwrap();
            prop_assert!(v.norm() <= bound * (1.0 + 1e-12) + tol);
        }
    }
}
