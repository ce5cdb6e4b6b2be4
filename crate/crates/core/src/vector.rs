//! Finite-dimensional complex vectors standing in for the Banach space `X`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    Euclidean,
    Sup,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Euclidean => "euclidean",
            NormKind::Sup => "sup",
        }
    }

    pub fn of(self, components: &[Complex64]) -> f64 {
        match self {
            NormKind::Euclidean => components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::Sup => components.iter().map(|c| c.norm()).fold(0.0, f64::max),
        }
    }
}

/// An element of `C^d` carrying the norm it is measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValue {
    components: Vec<Complex64>,
    norm_kind: NormKind,
}

impl VectorValue {
    pub fn new(components: Vec<Complex64>, norm_kind: NormKind) -> Result<Self> {
        if components.is_empty() {
            return Err(LabError::Invalid("vector dimension must be at least 1".into()));
        }
        Ok(Self { components, norm_kind })
    }

    pub fn zeros(dim: usize, norm_kind: NormKind) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Self {
            components: vec![Complex64::new(0.0, 0.0); dim],
            norm_kind,
        }
    }

    pub fn scalar(value: Complex64) -> Self {
        Self {
            components: vec![value],
            norm_kind: NormKind::Euclidean,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.norm_kind.of(&self.components)
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        Self {
            components: self.components.iter().map(|c| c * alpha).collect(),
            norm_kind: self.norm_kind,
        }
    }

    /// `self += alpha * other`; dimensions must agree.
    pub fn axpy(&mut self, alpha: Complex64, other: &VectorValue) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            *a += alpha * b;
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            components: self.components.iter().map(|c| c.conj()).collect(),
            norm_kind: self.norm_kind,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// The single component of a one-dimensional value.
    pub fn as_scalar(&self) -> Option<Complex64> {
        (self.components.len() == 1).then(|| self.components[0])
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(LabError::Dimension {
                expected: dim,
                got: self.dim(),
            })
        }
    }
}

impl Add for &VectorValue {
    type Output = VectorValue;

    fn add(self, rhs: &VectorValue) -> VectorValue {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), rhs);
        out
    }
}

impl Sub for &VectorValue {
    type Output = VectorValue;

    fn sub(self, rhs: &VectorValue) -> VectorValue {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), rhs);
        out
    }
}

impl Neg for &VectorValue {
    type Output = VectorValue;

    fn neg(self) -> VectorValue {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl fmt::Display for VectorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, "]")
    }
}
