//! JSON problem files: an integrator plus the optional sections each CLI
//! command reads. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bv_model::{BVFunction, DensityPiece, DensityShape};
use crate::contour_lab::ExtensionEvaluator;
use crate::dirichlet_app::{CoefficientSequence, DEFAULT_N_MAX};
use crate::error::{LabError, Result};
use crate::growth::{CutoffRule, GrowthBound, GrowthKind};
use crate::transform::TauberianCertificate;
use crate::vector::{NormKind, VectorValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    #[serde(default = "one")]
    pub dimension: usize,
    #[serde(default)]
    pub norm: NormKind,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
    #[serde(default)]
    pub densities: Vec<DensitySpec>,
    /// Last time at which `A` is represented; absent means `A` is complete.
    pub domain_end: Option<f64>,
    pub growth: Option<GrowthKind>,
    pub cutoff: Option<CutoffRule>,
    pub certificate: Option<CertificateSpec>,
    pub extension: Option<ExtensionEvaluator>,
    /// Supplied limit `f(0)`, one `[re, im]` pair per component.
    pub f0: Option<Vec<[f64; 2]>>,
    pub dirichlet: Option<DirichletSpec>,
    pub contour: Option<ContourSection>,
    pub lemmas: Option<LemmaSection>,
    pub remark_2_4: Option<CounterexampleSection>,
    pub admissibility: Option<AdmissibilitySection>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub t: f64,
    pub value: Vec<[f64; 2]>,
}

/// `to` is a number, the string `"inf"`, or absent (also infinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Finite(f64),
    Symbol(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub from: f64,
    pub to: Option<Endpoint>,
    pub kind: String,
    #[serde(default)]
    pub params: DensityParams,
    pub value: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    #[serde(default = "unit")]
    pub c: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub lambda_im: f64,
    #[serde(default)]
    pub p: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            lambda: 0.0,
            lambda_im: 0.0,
            p: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(default = "unit")]
    pub x0: f64,
    #[serde(rename = "T", default)]
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    Alternating,
    Ones,
    Zero,
    Periodic,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSpec {
    pub coefficients: CoefficientKind,
    pub pattern: Option<Vec<[f64; 2]>>,
    /// Relative paths resolve against the problem file's directory.
    pub file: Option<PathBuf>,
    pub n_max: Option<usize>,
    /// Half-height of the strip sampled when `M` is calibrated.
    pub calibrate_y_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSection {
    pub t: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSection {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Extra `(x, y)` cases drawn from the run seed.
    #[serde(default)]
    pub random_cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSection {
    #[serde(rename = "T")]
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilitySection {
    pub y_max: f64,
    #[serde(default = "default_ny")]
    pub ny: usize,
    #[serde(default = "default_nx")]
    pub nx: usize,
}

fn default_ny() -> usize {
    1001
}

fn default_nx() -> usize {
    8
}

fn vector(pairs: &[[f64; 2]], dim: usize, norm: NormKind, what: &str) -> Result<VectorValue> {
    if pairs.len() != dim {
        return Err(LabError::Invalid(format!(
            "{what}: expected {dim} [re, im] components, got {}",
            pairs.len()
        )));
    }
    VectorValue::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(), norm)
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Invalid(format!("problem file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn integrator(&self) -> Result<BVFunction> {
        let (d, norm) = (self.dimension, self.norm);
        if d == 0 {
            return Err(LabError::Invalid("dimension must be >= 1".into()));
        }
        let mut b = BVFunction::builder(d, norm);
        for (k, j) in self.jumps.iter().enumerate() {
            b = b.jump(j.t, vector(&j.value, d, norm, &format!("jumps[{k}].value"))?);
        }
        for (k, s) in self.densities.iter().enumerate() {
            let to = match &s.to {
                None => None,
                Some(Endpoint::Finite(v)) => Some(*v),
                Some(Endpoint::Symbol(v)) if v == "inf" => None,
                Some(Endpoint::Symbol(v)) => {
                    return Err(LabError::Invalid(format!("densities[{k}].to: expected a number or \"inf\", got {v:?}")))
                }
            };
            let weight = match &s.value {
                Some(v) => vector(v, d, norm, &format!("densities[{k}].value"))?,
                None if d == 1 => VectorValue::scalar(Complex64::new(1.0, 0.0)),
                None => return Err(LabError::Invalid(format!("densities[{k}].value is required when dimension > 1"))),
            };
            let p = s.params;
            let lambda = Complex64::new(p.lambda, p.lambda_im);
            let piece = match DensityShape::from_name(&s.kind)? {
                DensityShape::Constant => DensityPiece::constant(s.from, to, p.c, weight),
                DensityShape::Exponential => DensityPiece::exponential(s.from, to, p.c, lambda, weight),
                DensityShape::Power => DensityPiece::power(s.from, to, p.c, p.p, weight),
                DensityShape::DampedPower => DensityPiece::damped_power(s.from, to, p.c, p.p, lambda, weight),
            };
            b = b.density(piece);
        }
        if let Some(end) = self.domain_end {
            b = b.domain_end(end);
        }
        b.build()
    }

    pub fn growth_bound(&self) -> Result<Option<GrowthBound>> {
        self.growth.map(GrowthBound::new).transpose()
    }

    pub fn cutoff_rule(&self) -> CutoffRule {
        self.cutoff.unwrap_or(CutoffRule::Infinite)
    }

    pub fn tauberian_certificate(&self) -> Result<Option<TauberianCertificate>> {
        self.certificate
            .map(|c| TauberianCertificate::new(c.c, c.x0, c.t, self.cutoff_rule()))
            .transpose()
    }

    pub fn f0_value(&self) -> Result<Option<VectorValue>> {
        self.f0
            .as_ref()
            .map(|v| vector(v, self.dimension, self.norm, "f0"))
            .transpose()
    }

    /// The coefficient sequence of the `dirichlet` section and its `n_max`.
    pub fn coefficients(&self, base_dir: &Path) -> Result<Option<(CoefficientSequence, usize)>> {
        let Some(spec) = &self.dirichlet else {
            return Ok(None);
        };
        let seq = match spec.coefficients {
            CoefficientKind::Alternating => CoefficientSequence::alternating(),
            CoefficientKind::Ones => CoefficientSequence::ones(),
            CoefficientKind::Zero => CoefficientSequence::zero(),
            CoefficientKind::Periodic => {
                let pattern = spec
                    .pattern
                    .as_ref()
                    .ok_or_else(|| LabError::Invalid("dirichlet.pattern is required for periodic coefficients".into()))?;
                CoefficientSequence::periodic(pattern.iter().map(|p| Complex64::new(p[0], p[1])).collect())?
            }
            CoefficientKind::File => {
                let file = spec
                    .file
                    .as_ref()
                    .ok_or_else(|| LabError::Invalid("dirichlet.file is required for file coefficients".into()))?;
                CoefficientSequence::from_file(&base_dir.join(file), self.norm)?
            }
        };
        let n_max = spec.n_max.or(seq.len()).unwrap_or(DEFAULT_N_MAX);
        Ok(Some((seq, n_max)))
    }
}
