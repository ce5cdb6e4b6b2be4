//! Applications: Dirichlet series `sum b_n n^{-(z+1)}` as the transform of
//! `A(s) = sum_{log n < s} b_n / n`, and integrators with a bounded density.

use std::f64::consts::E;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::bv_model::{BVFunction, DensityPiece};
use crate::contour_lab::{ExtensionEvaluator, ScaledTail};
use crate::error::{LabError, Result};
use crate::growth::{CutoffRule, GrowthBound, GrowthKind};
use crate::rate_engine::{RateEngine, RateInputs};
use crate::series;
use crate::transform::TauberianCertificate;
use crate::vector::{NormKind, VectorValue};
use crate::verification::{GridSpec, SupReport};

pub const DEFAULT_N_MAX: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Alternating,
    Ones,
    Zero,
    /// Scalar pattern repeated with period `len`, starting at `n = 1`.
    Periodic(Vec<Complex64>),
    /// `dim` components per coefficient, row-major.
    Explicit(Vec<Complex64>),
}

/// A bounded coefficient sequence `(b_n)`, `n >= 1`, in `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    source: Source,
    dim: usize,
    norm_kind: NormKind,
}

impl CoefficientSequence {
    /// `b_n = (-1)^{n+1}`
    pub fn alternating() -> Self {
        Self::preset(Source::Alternating)
    }

    pub fn ones() -> Self {
        Self::preset(Source::Ones)
    }

    pub fn zero() -> Self {
        Self::preset(Source::Zero)
    }

    pub fn periodic(pattern: Vec<Complex64>) -> Result<Self> {
        if pattern.is_empty() || pattern.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(LabError::Invalid("periodic pattern must be nonempty and finite".into()));
        }
        Ok(Self::preset(Source::Periodic(pattern)))
    }

    fn preset(source: Source) -> Self {
        Self {
            source,
            dim: 1,
            norm_kind: NormKind::Euclidean,
        }
    }

    /// One coefficient per line as whitespace-separated `re im` pairs, one
    /// pair per component; blank lines are skipped.
    pub fn parse(text: &str, norm_kind: NormKind) -> Result<Self> {
        let mut dim = 0;
        let mut values = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if !tokens.len().is_multiple_of(2) {
                return Err(LabError::Parse {
                    line: line_no,
                    message: format!("expected re/im pairs, found {} numbers", tokens.len()),
                });
            }
            let d = tokens.len() / 2;
            if dim == 0 {
                dim = d;
            } else if d != dim {
                return Err(LabError::Parse {
                    line: line_no,
                    message: format!("expected {dim} components, found {d}"),
                });
            }
            for pair in tokens.chunks(2) {
                let parse = |s: &str| {
                    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| LabError::Parse {
                        line: line_no,
                        message: format!("not a finite number: {s:?}"),
                    })
                };
                values.push(Complex64::new(parse(pair[0])?, parse(pair[1])?));
            }
        }
        if dim == 0 {
            return Err(LabError::Invalid("coefficient file contains no coefficients".into()));
        }
        Ok(Self {
            source: Source::Explicit(values),
            dim,
            norm_kind,
        })
    }

    pub fn from_file(path: &Path, norm_kind: NormKind) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, norm_kind)
    }

    pub fn name(&self) -> &'static str {
        match self.source {
            Source::Alternating => "alternating",
            Source::Ones => "ones",
            Source::Zero => "zero",
            Source::Periodic(_) => "periodic",
            Source::Explicit(_) => "file",
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of available coefficients; `None` for unbounded presets.
    pub fn len(&self) -> Option<usize> {
        match &self.source {
            Source::Explicit(v) => Some(v.len() / self.dim),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `b_n` for `n >= 1`.
    pub fn get(&self, n: usize) -> VectorValue {
        assert!(n >= 1, "coefficients start at n = 1");
        let one = |c: Complex64| VectorValue::scalar(c);
        match &self.source {
            Source::Alternating => one(Complex64::new(if n % 2 == 1 { 1.0 } else { -1.0 }, 0.0)),
            Source::Ones => one(Complex64::new(1.0, 0.0)),
            Source::Zero => one(Complex64::new(0.0, 0.0)),
            Source::Periodic(p) => one(p[(n - 1) % p.len()]),
            Source::Explicit(v) => {
                VectorValue::new(v[(n - 1) * self.dim..n * self.dim].to_vec(), self.norm_kind).expect("dim >= 1")
            }
        }
    }

    /// `D = max(sup_{n <= n_max} |b_n|, 1)`.
    pub fn d(&self, n_max: usize) -> f64 {
        let sup = match &self.source {
            Source::Alternating | Source::Ones | Source::Zero => {
                if matches!(self.source, Source::Zero) { 0.0 } else { 1.0 }
            }
            Source::Periodic(p) => p.iter().take(n_max).map(|c| c.norm()).fold(0.0, f64::max),
            Source::Explicit(_) => (1..=n_max.min(self.len().unwrap_or(0)))
                .map(|n| self.get(n).norm())
                .fold(0.0, f64::max),
        };
        sup.max(1.0)
    }
}

/// A limit value `f(0)` with a note on where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitValue {
    pub value: VectorValue,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct DirichletInstance {
    pub coeffs: CoefficientSequence,
    pub n_max: usize,
    /// Jumps `b_n / n` at `log n`, represented up to `log(n_max + 1)`.
    pub a: BVFunction,
    pub cert: TauberianCertificate,
    pub f0: Option<LimitValue>,
}

/// `A(s) = sum_{log n < s} b_n / n` for `n <= n_max`, with certificate
/// `C = D e`, `x0 = 1`, `T = 0`, `R(t) = e^t`.
pub fn build_instance(coeffs: CoefficientSequence, n_max: usize) -> Result<DirichletInstance> {
    if n_max < 1 {
        return Err(LabError::Invalid("n_max must be >= 1".into()));
    }
    if let Some(len) = coeffs.len() {
        if len < n_max {
            return Err(LabError::Invalid(format!(
                "coefficient source provides {len} coefficients, n_max = {n_max}"
            )));
        }
    }
    let mut b = BVFunction::builder(coeffs.dim(), coeffs.norm_kind).domain_end(((n_max + 1) as f64).ln());
    for n in 1..=n_max {
        b = b.jump((n as f64).ln(), coeffs.get(n).scale(Complex64::new(1.0 / n as f64, 0.0)));
    }
    let a = b.build()?;
    let cert = TauberianCertificate::new(coeffs.d(n_max) * E, 1.0, 0.0, CutoffRule::Exponential)?;
    let f0 = match coeffs.source {
        Source::Alternating => Some(LimitValue {
            value: VectorValue::scalar(Complex64::new(series::ln2_oracle(), 0.0)),
            provenance: "log 2 from accelerated alternating harmonic series".into(),
        }),
        Source::Zero => Some(LimitValue {
            value: VectorValue::scalar(Complex64::new(0.0, 0.0)),
            provenance: "exact: all coefficients vanish".into(),
        }),
        _ => None,
    };
    Ok(DirichletInstance {
        coeffs,
        n_max,
        a,
        cert,
        f0,
    })
}

impl DirichletInstance {
    /// Last `t` at which `A` is fully represented.
    pub fn t_limit(&self) -> f64 {
        self.a.domain_end().expect("Dirichlet integrators are truncated")
    }

    pub fn with_f0(mut self, value: VectorValue, provenance: impl Into<String>) -> Result<Self> {
        value.check_dim(self.coeffs.dim())?;
        self.f0 = Some(LimitValue {
            value,
            provenance: provenance.into(),
        });
        Ok(self)
    }

    /// The closed-form extension of the transform, where one is known.
    pub fn extension(&self) -> Option<ExtensionEvaluator> {
        match self.coeffs.source {
            Source::Alternating => Some(ExtensionEvaluator::EtaShift),
            Source::Zero => Some(ExtensionEvaluator::UserRational {
                num: vec![[0.0, 0.0]],
                den: vec![[1.0, 0.0]],
            }),
            _ => None,
        }
    }

    /// Smallest `n` with `log n >= t`.
    fn first_index_at(t: f64) -> u64 {
        let mut n = t.exp().ceil().max(1.0) as u64;
        while n > 1 && ((n - 1) as f64).ln() >= t {
            n -= 1;
        }
        while (n as f64).ln() < t {
            n += 1;
        }
        n
    }
}

/// The tail of the full (untruncated) series, for alternating and zero coefficients.
impl ScaledTail for DirichletInstance {
    fn scaled_tail(&self, z: Complex64, t: f64, _quad_tol: f64) -> Result<Complex64> {
        match self.coeffs.source {
            Source::Zero => Ok(Complex64::new(0.0, 0.0)),
            Source::Alternating => {
                let n = series::terms_for(z.im)?;
                Ok(series::alternating_tail(z + 1.0, Self::first_index_at(t), t, n))
            }
            _ => Err(LabError::TailUnavailable {
                t,
                reason: format!("no tail formula for {} coefficients", self.coeffs.name()),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub t: f64,
    pub decay_norm: f64,
    /// `B(t, min(R_opt, R(t)))`, absent for `t <= T'`.
    pub bound_b: Option<f64>,
    pub margin: Option<f64>,
}

/// `|A(t) - f0|` on the grid, paired with the rate bound where it applies.
pub fn partial_sum_decay(inst: &DirichletInstance, engine: &RateEngine, t_grid: &[f64]) -> Result<Vec<DecaySample>> {
    let f0 = inst
        .f0
        .as_ref()
        .ok_or_else(|| LabError::MissingLimit(format!("{} coefficients have no known f(0)", inst.coeffs.name())))?;
    let limit = inst.t_limit();
    t_grid
        .iter()
        .map(|&t| {
            if t > limit {
                return Err(LabError::Range { t, limit });
            }
            if !(t > 0.0) {
                return Err(LabError::Domain(format!("decay grid needs t > 0, got {t}")));
            }
            let decay_norm = (&inst.a.evaluate(t)? - &f0.value).norm();
            let bound_b = (t > engine.t_prime().value)
                .then(|| engine.decay_rate(t).map(|r| r.bound))
                .transpose()?;
            Ok(DecaySample {
                t,
                decay_norm,
                bound_b,
                margin: bound_b.map(|b| b - decay_norm),
            })
        })
        .collect()
}

/// Rate inputs for a Dirichlet instance under growth bound `m`.
pub fn rate_inputs(inst: &DirichletInstance, m: GrowthBound) -> Result<RateInputs> {
    RateInputs::new(inst.cert.c, inst.cert.t, m, inst.cert.cutoff)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityPreset {
    /// `e^{-s}`, extension `1 / (1 + z)`
    ExpDecay,
    Zero,
    /// `cos s`, extension `z / (1 + z^2)` (poles at `+-i`)
    Cosine,
}

impl DensityPreset {
    pub fn extension(self) -> ExtensionEvaluator {
        match self {
            DensityPreset::ExpDecay => ExtensionEvaluator::Rational,
            DensityPreset::Zero => ExtensionEvaluator::UserRational {
                num: vec![[0.0, 0.0]],
                den: vec![[1.0, 0.0]],
            },
            DensityPreset::Cosine => ExtensionEvaluator::UserRational {
                num: vec![[0.0, 0.0], [1.0, 0.0]],
                den: vec![[1.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            },
        }
    }
}

/// `A(t) = int_0^t f(s) ds` with `|f| <= c0`, certificate `C = c0`,
/// `R = inf`, `T = 0`, `x0 = 1`.
pub fn remark_4_1_instance(preset: DensityPreset, c0: f64) -> Result<(BVFunction, TauberianCertificate)> {
    let one = VectorValue::scalar(Complex64::new(1.0, 0.0));
    let b = BVFunction::builder(1, NormKind::Euclidean);
    let a = match preset {
        DensityPreset::ExpDecay => b
            .density(DensityPiece::exponential(0.0, None, 1.0, Complex64::new(-1.0, 0.0), one))
            .build()?,
        DensityPreset::Zero => b.build()?,
        DensityPreset::Cosine => b
            .density(DensityPiece::exponential(0.0, None, 0.5, Complex64::new(0.0, 1.0), one.clone()))
            .density(DensityPiece::exponential(0.0, None, 0.5, Complex64::new(0.0, -1.0), one))
            .build()?,
    };
    let sup = (0..=4096)
        .map(|k| {
            let s = 50.0 * k as f64 / 4096.0;
            a.densities().iter().map(|p| p.profile(s)).sum::<Complex64>().norm()
        })
        .fold(0.0, f64::max);
    if sup > c0 * (1.0 + 1e-12) {
        return Err(LabError::Invalid(format!("density reaches {sup}, above the claimed bound {c0}")));
    }
    let cert = TauberianCertificate::new(c0, 1.0, 0.0, CutoffRule::Infinite)?;
    Ok((a, cert))
}

/// Sample grid on `{x + iy : -1/M(|y|) < x <= 0, |y| <= y_max}`.
pub fn q_grid(m: &GrowthBound, y_max: f64, ny: usize, nx: usize) -> Result<Vec<Complex64>> {
    if !(y_max > 0.0) || ny < 2 || nx < 1 {
        return Err(LabError::Invalid("Q grid needs y_max > 0, ny >= 2, nx >= 1".into()));
    }
    let mut out = Vec::with_capacity(ny * (nx + 1));
    for j in 0..ny {
        let y = -y_max + 2.0 * y_max * j as f64 / (ny - 1) as f64;
        let width = 1.0 / m.eval(y.abs());
        for k in 0..nx {
            out.push(Complex64::new(-width * k as f64 / nx as f64, y));
        }
        out.push(Complex64::new(-width * (1.0 - 1e-6), y));
    }
    Ok(out)
}

/// Sup over the grid of `|f(z)| - M(|Im z|)` against 0. A singular sample
/// counts as `+inf`. The witness is reported as `(Re z, Im z)` in
/// `(witness_x, witness_t)`.
pub fn check_admissibility(f_ext: &ExtensionEvaluator, m: &GrowthBound, grid: &[Complex64]) -> Result<SupReport> {
    if grid.is_empty() {
        return Err(LabError::Invalid("admissibility grid is empty".into()));
    }
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &z in grid {
        let excess = match f_ext.eval(z) {
            Ok(v) => v.norm() - m.eval(z.im.abs()),
            Err(_) => f64::INFINITY,
        };
        if excess > best.0 {
            best = (excess, z);
        }
    }
    let y_max = grid.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(SupReport {
        case_id: String::new(),
        grid_sup: best.0,
        bound: 0.0,
        margin: -best.0,
        witness_t: best.1.im,
        witness_x: Some(best.1.re),
        grid_spec: GridSpec {
            t_max: y_max,
            points: grid.len(),
            spacing: "Q strip samples".into(),
        },
        hypothesis_failed: false,
    })
}

/// An affine `M(s) = c (1 + s)` fitted to samples of `f` on the strip
/// `{-1/(1 + |y|) < x <= 0}`, which contains the region of any such `M`.
///
/// Only grid-admissible: nothing is known about `f` off the samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCalibration {
    pub growth: GrowthBound,
    pub c: f64,
    pub sup_ratio: f64,
    pub y_max: f64,
}

impl GrowthCalibration {
    pub const LABEL: &'static str = "empirically admissible";
}

pub fn calibrate_affine_growth(f_ext: &ExtensionEvaluator, y_max: f64) -> Result<GrowthCalibration> {
    let probe = GrowthBound::new(GrowthKind::Affine { c: 1.0 })?;
    let grid = q_grid(&probe, y_max, 801, 16)?;
    let mut sup_ratio: f64 = 0.0;
    for z in grid {
        let v = f_ext.eval(z)?;
        sup_ratio = sup_ratio.max(v.norm() / (1.0 + z.im.abs()));
    }
    let c = (1.05 * sup_ratio).max(1.0);
    Ok(GrowthCalibration {
        growth: GrowthBound::new(GrowthKind::Affine { c })?,
        c,
        sup_ratio,
        y_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour_lab::cauchy_residual;

    #[test]
    fn ones_jumps() {
        let inst = build_instance(CoefficientSequence::ones(), 3).unwrap();
        let expected = [(0.0, 1.0), (2f64.ln(), 0.5), (3f64.ln(), 1.0 / 3.0)];
        for (k, (loc, size)) in expected.iter().enumerate() {
            let (l, s) = inst.a.jump(k);
            assert_eq!(l, *loc);
            assert!((s.as_scalar().unwrap().re - size).abs() < 1e-16);
        }
        assert!(inst.f0.is_none());
        assert_eq!(inst.cert.c, E);
    }

    #[test]
    fn alternating_values() {
        let inst = build_instance(CoefficientSequence::alternating(), 10).unwrap();
        let v = inst.a.evaluate(3f64.ln() + 1e-9).unwrap().as_scalar().unwrap().re;
        assert!((v - (1.0 - 0.5 + 1.0 / 3.0)).abs() < 1e-15);
        assert!((v - 0.8333).abs() < 1e-4);
        assert_eq!(inst.a.evaluate(0.0).unwrap().norm(), 0.0);
        for k in 0..10 {
            let (loc, _) = inst.a.jump(k);
            assert!((loc.exp() - (k + 1) as f64).abs() <= 1e-14 * (k + 1) as f64);
        }
    }

    #[test]
    fn file_parsing() {
        let c = CoefficientSequence::parse("1 0\n\n-0.5 0.25\n", NormKind::Euclidean).unwrap();
        assert_eq!(c.len(), Some(2));
        assert_eq!(c.get(2).as_scalar().unwrap(), Complex64::new(-0.5, 0.25));
        match CoefficientSequence::parse("1 0\n2 x\n", NormKind::Euclidean) {
            Err(LabError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match CoefficientSequence::parse("1 0\n2 0 3 0\n", NormKind::Euclidean) {
            Err(LabError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let v = CoefficientSequence::parse("1 0 0 2\n3 0 0 0\n", NormKind::Sup).unwrap();
        assert_eq!(v.dim(), 2);
        assert_eq!(v.d(2), 3.0);
        assert!(build_instance(v, 3).is_err());
    }

    #[test]
    fn decay_examples() {
        let inst = build_instance(CoefficientSequence::alternating(), 100_000).unwrap();
        let cal = calibrate_affine_growth(&ExtensionEvaluator::EtaShift, 30.0).unwrap();
        let engine = RateEngine::new(rate_inputs(&inst, cal.growth).unwrap()).unwrap();
        let s = partial_sum_decay(&inst, &engine, &[10.0]).unwrap()[0];
        // The alternating remainder after N terms is about 1/(2N).
        let n = (10f64).exp().ceil();
        assert!((s.decay_norm * 2.0 * n - 1.0).abs() < 1e-3);
        assert!(s.margin.unwrap() > 0.0);
        assert!(matches!(
            partial_sum_decay(&inst, &engine, &[20.0]),
            Err(LabError::Range { .. })
        ));

        let ones = build_instance(CoefficientSequence::ones(), 100).unwrap();
        assert!(matches!(partial_sum_decay(&ones, &engine, &[1.0]), Err(LabError::MissingLimit(_))));

        let zero = build_instance(CoefficientSequence::zero(), 100).unwrap();
        assert_eq!(zero.cert.c, E);
        for s in partial_sum_decay(&zero, &engine, &[0.5, 2.0, 4.0]).unwrap() {
            assert_eq!(s.decay_norm, 0.0);
        }
    }

    #[test]
    fn remark_instances() {
        let (a, cert) = remark_4_1_instance(DensityPreset::ExpDecay, 1.0).unwrap();
        assert_eq!(cert.cutoff, CutoffRule::Infinite);
        assert!((a.evaluate(3.0).unwrap().as_scalar().unwrap().re - (1.0 - (-3f64).exp())).abs() < 1e-14);
        let (z, _) = remark_4_1_instance(DensityPreset::Zero, 1.0).unwrap();
        assert_eq!(z.evaluate(5.0).unwrap().norm(), 0.0);
        assert!(remark_4_1_instance(DensityPreset::ExpDecay, 0.5).is_err());
        let (c, _) = remark_4_1_instance(DensityPreset::Cosine, 1.0).unwrap();
        assert!((c.evaluate(1.0).unwrap().as_scalar().unwrap().re - 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn admissibility_examples() {
        let two = GrowthBound::constant(2.0).unwrap();
        let grid = q_grid(&two, 20.0, 401, 8).unwrap();
        assert!(check_admissibility(&ExtensionEvaluator::Rational, &two, &grid).unwrap().passes());

        let pole = ExtensionEvaluator::UserRational {
            num: vec![[1.0, 0.0]],
            den: vec![[0.0, 0.0], [1.0, 0.0]],
        };
        let r = check_admissibility(&pole, &two, &grid).unwrap();
        assert!(!r.passes());
        assert!(r.witness_t.abs() < 0.1 && r.witness_x.unwrap().abs() < 0.1);

        let cos = DensityPreset::Cosine.extension();
        let r = check_admissibility(&cos, &two, &grid).unwrap();
        assert!(!r.passes());
        assert!((r.witness_t.abs() - 1.0).abs() < 0.1, "{r:?}");

        let cal = calibrate_affine_growth(&ExtensionEvaluator::EtaShift, 30.0).unwrap();
        let grid = q_grid(&cal.growth, 30.0, 601, 8).unwrap();
        assert!(check_admissibility(&ExtensionEvaluator::EtaShift, &cal.growth, &grid).unwrap().passes());
    }

    #[test]
    fn eta_shift_contour() {
        let inst = build_instance(CoefficientSequence::alternating(), 1000).unwrap();
        let cal = calibrate_affine_growth(&ExtensionEvaluator::EtaShift, 30.0).unwrap();
        let r = cauchy_residual(&inst.a, &inst, &ExtensionEvaluator::EtaShift, &cal.growth, 3.0, 1.5, 1.0, 1e-13).unwrap();
        assert!(r <= 1e-5, "{r}");
    }

    #[test]
    fn dirichlet_tail_matches_direct_sum() {
        let inst = build_instance(CoefficientSequence::alternating(), 10).unwrap();
        let z = Complex64::new(1.0, 0.5);
        let t = 1.0;
        let tail = inst.scaled_tail(z, t, 1e-13).unwrap();
        let head: Complex64 = (1..=2u64)
            .map(|n| {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                sign / n as f64 * (-z * ((n as f64).ln() - t)).exp()
            })
            .sum();
        let whole = series::eta(z + 1.0).unwrap() * (t * z).exp();
        assert!((head + tail - whole).norm() < 1e-13);
    }
}
