//! The growth bound `M`, the cutoff rule `R`, and `M_log` with its inverse.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

const MONOTONICITY_GRID: usize = 10_000;
const MONOTONICITY_SPAN: f64 = 1e6;
const BRANCH_SCAN: usize = 2_000;

/// Closed-form presets for `M: [0, inf) -> [1, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthKind {
    /// `c`
    Constant { c: f64 },
    /// `c (1 + s)`
    Affine { c: f64 },
    /// `c (1 + s)^alpha`
    Power { c: f64, alpha: f64 },
    /// `c log(e + s)^beta`
    Log { c: f64, beta: f64 },
    /// `c e^{kappa s}`
    Exp { c: f64, kappa: f64 },
}

/// A continuous non-decreasing `M >= 1`, certified on a grid at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    kind: GrowthKind,
}

impl GrowthBound {
    pub fn new(kind: GrowthKind) -> Result<Self> {
        let (c, extra) = match kind {
            GrowthKind::Constant { c } | GrowthKind::Affine { c } => (c, 0.0),
            GrowthKind::Power { c, alpha } => (c, alpha),
            GrowthKind::Log { c, beta } => (c, beta),
            GrowthKind::Exp { c, kappa } => (c, kappa),
        };
        if !(c >= 1.0 && c.is_finite()) {
            return Err(LabError::Invalid(format!("growth scale c = {c} must be a finite value >= 1")));
        }
        if !(extra >= 0.0 && extra.is_finite()) {
            return Err(LabError::Invalid(format!("growth exponent {extra} must be finite and >= 0")));
        }
        let m = Self { kind };
        m.certify_monotone()?;
        Ok(m)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(GrowthKind::Constant { c })
    }

    pub fn kind(&self) -> GrowthKind {
        self.kind
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self.kind {
            GrowthKind::Constant { c } => c,
            GrowthKind::Affine { c } => c * (1.0 + s),
            GrowthKind::Power { c, alpha } => c * (1.0 + s).powf(alpha),
            GrowthKind::Log { c, beta } => c * (std::f64::consts::E + s).ln().powf(beta),
            GrowthKind::Exp { c, kappa } => c * (kappa * s).exp(),
        }
    }

    fn certify_monotone(&self) -> Result<()> {
        let span = MONOTONICITY_SPAN.ln_1p();
        let mut prev = self.eval(0.0);
        for k in 1..=MONOTONICITY_GRID {
            let s = (span * k as f64 / MONOTONICITY_GRID as f64).exp_m1();
            let v = self.eval(s);
            if !(v >= 1.0) || v < prev {
                return Err(LabError::Invalid(format!(
                    "growth bound fails M >= 1 and monotonicity at s = {s} (M = {v})"
                )));
            }
            prev = v;
        }
        Ok(())
    }

    /// `M(a) (log a + log M(a) - log(5C) / 2)`.
    pub fn m_log(&self, c: f64, a: f64) -> f64 {
        let m = self.eval(a);
        m * (a.ln() + m.ln() - 0.5 * (5.0 * c).ln())
    }
}

impl fmt::Display for GrowthBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GrowthKind::Constant { c } => write!(f, "M(s) = {c}"),
            GrowthKind::Affine { c } => write!(f, "M(s) = {c}(1+s)"),
            GrowthKind::Power { c, alpha } => write!(f, "M(s) = {c}(1+s)^{alpha}"),
            GrowthKind::Log { c, beta } => write!(f, "M(s) = {c} log(e+s)^{beta}"),
            GrowthKind::Exp { c, kappa } => write!(f, "M(s) = {c} e^({kappa} s)"),
        }
    }
}

/// `M_log` for fixed `(M, C)`, restricted to the branch on which it increases.
#[derive(Debug, Clone, Copy)]
pub struct MLog {
    growth: GrowthBound,
    c: f64,
    branch_start: f64,
}

impl MLog {
    pub fn new(growth: GrowthBound, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::Invalid(format!("constant C = {c} must be positive")));
        }
        let mut mlog = Self {
            growth,
            c,
            branch_start: 1.0,
        };
        mlog.branch_start = mlog.find_branch_start();
        Ok(mlog)
    }

    pub fn eval(&self, a: f64) -> f64 {
        self.growth.m_log(self.c, a)
    }

    pub fn branch_start(&self) -> f64 {
        self.branch_start
    }

    pub fn branch_minimum(&self) -> f64 {
        self.eval(self.branch_start)
    }

    // Once log a + log M(a) >= log(5C)/2 both factors of M_log are
    // non-decreasing and the log term strictly increasing, so M_log is
    // strictly increasing from there on. Below that point, scan a grid.
    fn find_branch_start(&self) -> f64 {
        let bracket = |a: f64| a.ln() + self.growth.eval(a).ln() - 0.5 * (5.0 * self.c).ln();
        if bracket(1.0) >= 0.0 {
            return 1.0;
        }
        let mut hi = 2.0;
        while bracket(hi) < 0.0 {
            hi *= 2.0;
        }
        let mut lo = 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bracket(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        let positive_from = hi;
        let span = positive_from.ln();
        let grid: Vec<f64> = (0..=BRANCH_SCAN)
            .map(|k| (span * k as f64 / BRANCH_SCAN as f64).exp())
            .collect();
        let mut start = 1.0;
        for w in grid.windows(2) {
            if self.eval(w[1]) <= self.eval(w[0]) {
                start = w[1];
            }
        }
        start
    }

    /// The `a >= branch_start` with `M_log(a) = y`, by bisection after
    /// geometric expansion of the upper bracket.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(LabError::Domain(format!("M_log inverse needs a finite argument, got {y}")));
        }
        let minimum = self.branch_minimum();
        if y < minimum {
            return Err(LabError::BelowBranch {
                y,
                minimum,
                branch_start: self.branch_start,
            });
        }
        if y == minimum {
            return Ok(self.branch_start);
        }
        let mut lo = self.branch_start;
        let mut hi = 2.0 * lo;
        while self.eval(hi) < y {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() || hi > 1e300 {
                return Err(LabError::Domain(format!("M_log never reaches {y} on a finite range")));
            }
        }
        for _ in 0..2_000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (rl, rh) = ((self.eval(lo) - y).abs(), (self.eval(hi) - y).abs());
        Ok(if rl <= rh { lo } else { hi })
    }
}

pub fn m_log(growth: &GrowthBound, c: f64, a: f64) -> f64 {
    growth.m_log(c, a)
}

pub fn m_log_inverse(growth: &GrowthBound, c: f64, y: f64) -> Result<f64> {
    MLog::new(*growth, c)?.inverse(y)
}

/// A value of `R(t)`: finite, or the exact symbol `inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum CutoffValue {
    Finite(f64),
    Infinite,
}

impl CutoffValue {
    pub fn reciprocal(self) -> f64 {
        match self {
            CutoffValue::Finite(r) => 1.0 / r,
            CutoffValue::Infinite => 0.0,
        }
    }

    pub fn exceeds(self, r: f64) -> bool {
        match self {
            CutoffValue::Finite(v) => v > r,
            CutoffValue::Infinite => true,
        }
    }

    pub fn at_least(self, r: f64) -> bool {
        match self {
            CutoffValue::Finite(v) => v >= r,
            CutoffValue::Infinite => true,
        }
    }
}

impl fmt::Display for CutoffValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffValue::Finite(v) => write!(f, "{v}"),
            CutoffValue::Infinite => write!(f, "inf"),
        }
    }
}

/// The increasing cutoff `R: [0, inf) -> [1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutoffRule {
    /// `R(t) = e^t`
    Exponential,
    /// `R(t) = r` for a constant `r >= 1`
    Constant { r: f64 },
    /// `R(t) = inf`
    Infinite,
}

impl CutoffRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CutoffRule::Constant { r } if !(r >= 1.0 && r.is_finite()) => {
                Err(LabError::Invalid(format!("constant cutoff r = {r} must be finite and >= 1")))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, t: f64) -> CutoffValue {
        match *self {
            CutoffRule::Exponential => CutoffValue::Finite(t.max(0.0).exp()),
            CutoffRule::Constant { r } => CutoffValue::Finite(r),
            CutoffRule::Infinite => CutoffValue::Infinite,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn affine() -> GrowthBound {
        GrowthBound::new(GrowthKind::Affine { c: 1.0 }).unwrap()
    }

    #[test]
    fn m_log_examples() {
        let two = GrowthBound::constant(2.0).unwrap();
        let expected = 2.0 * (2f64.ln() - 0.5 * 5f64.ln());
        assert!((m_log(&two, 1.0, 1.0) - expected).abs() < 1e-15);
        assert!((m_log(&two, 1.0, 1.0) - (-0.223144)).abs() < 1e-6);

        let one = GrowthBound::constant(1.0).unwrap();
        assert_eq!(m_log(&one, 0.2, 1.0), 0.0);

        // 11 (ln 10 + ln 11 - ln 5 / 2), evaluated term by term
        let direct = 11.0 * (2.302585092994046 + 2.3978952727983707 - 0.8047189562170503);
        assert!((m_log(&affine(), 1.0, 10.0) - direct).abs() < 1e-12);
        assert!((m_log(&affine(), 1.0, 10.0) - 42.854).abs() < 1e-3);
    }

    #[test]
    fn inverse_closed_forms() {
        // M = 2, C = 1: M_log(a) = 2 ln a + 2 ln 2 - ln 5, so the inverse of
        // t / 4 is (sqrt 5 / 2) e^{t / 8}.
        let two = GrowthBound::constant(2.0).unwrap();
        let r = m_log_inverse(&two, 1.0, 2.0).unwrap();
        let expected = 5f64.sqrt() / 2.0 * 1f64.exp();
        assert!((r - expected).abs() < 1e-9);
        assert!((r - 3.039131).abs() < 1e-6);

        let one = GrowthBound::constant(1.0).unwrap();
        let r = m_log_inverse(&one, 0.2, 1.0).unwrap();
        assert!((r - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip_affine() {
        for a in [1.5, 10.0, 1e4] {
            let y = m_log(&affine(), 1.0, a);
            let back = m_log_inverse(&affine(), 1.0, y).unwrap();
            assert!((back - a).abs() <= 1e-9 * a, "a = {a}, back = {back}");
        }
    }

    #[test]
    fn below_branch_is_a_domain_error() {
        let two = GrowthBound::constant(2.0).unwrap();
        match m_log_inverse(&two, 1.0, -5.0) {
            Err(LabError::BelowBranch { minimum, .. }) => assert!((minimum - (-0.223144)).abs() < 1e-6),
            other => panic!("expected BelowBranch, got {other:?}"),
        }
    }

    #[test]
    fn non_monotone_branch_is_located() {
        // Steep M with large C: M_log dips before it climbs.
        let m = GrowthBound::new(GrowthKind::Exp { c: 1.0, kappa: 3.0 }).unwrap();
        let mlog = MLog::new(m, 1e6).unwrap();
        assert!(mlog.branch_start() > 1.0);
        let a = mlog.branch_start();
        assert!(mlog.eval(a * 1.01) > mlog.eval(a));
        let y = mlog.branch_minimum() + 1.0;
        let r = mlog.inverse(y).unwrap();
        assert!((mlog.eval(r) - y).abs() <= 1e-10 * y.abs().max(1.0));
    }

    #[test]
    fn growth_validation() {
        assert!(GrowthBound::constant(0.5).is_err());
        assert!(GrowthBound::new(GrowthKind::Power { c: 1.0, alpha: -1.0 }).is_err());
        assert!(GrowthBound::new(GrowthKind::Log { c: 1.0, beta: 2.0 }).is_ok());
    }

    #[test]
    fn cutoff_ordering() {
        assert!(CutoffValue::Infinite > CutoffValue::Finite(1e308));
        assert!(CutoffRule::Infinite.value(3.0).exceeds(f64::MAX));
        assert_eq!(CutoffRule::Exponential.value(0.0), CutoffValue::Finite(1.0));
        assert!(CutoffRule::Constant { r: 0.5 }.validate().is_err());
    }

    #[test]
    fn m_log_increasing_on_branch() {
        for kind in [
            GrowthKind::Constant { c: 2.0 },
            GrowthKind::Affine { c: 1.0 },
            GrowthKind::Power { c: 1.0, alpha: 2.0 },
            GrowthKind::Log { c: 1.0, beta: 1.0 },
            GrowthKind::Exp { c: 1.0, kappa: 0.5 },
        ] {
            let mlog = MLog::new(GrowthBound::new(kind).unwrap(), 1.0).unwrap();
            let span = (1e6 / mlog.branch_start()).ln();
            let grid: Vec<f64> = (0..=500)
                .map(|k| mlog.branch_start() * (span * k as f64 / 500.0).exp())
                .collect();
            for w in grid.windows(2) {
                let (m0, m1) = (mlog.eval(w[0]), mlog.eval(w[1]));
                if m0.is_finite() && m1.is_finite() {
                    assert!(m1 > m0, "{kind:?} at {}", w[0]);
                }
            }
        }
    }

    #[test]
    fn power_growth_gives_polynomial_rate() {
        let alpha = 2.0;
        let m = GrowthBound::new(GrowthKind::Power { c: 1.0, alpha }).unwrap();
        let mlog = MLog::new(m, 1.0).unwrap();
        let ratios: Vec<f64> = [1e2, 1e3, 1e4, 1e5, 1e6]
            .iter()
            .map(|&t: &f64| mlog.inverse(t / 4.0).unwrap() / t.powf(1.0 / alpha))
            .collect();
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 5.0, "ratios {ratios:?}");
    }

    proptest! {
        #[test]
        fn bisection_residual(y in 0.0f64..500.0, which in 0usize..5) {
            let kind = [
                GrowthKind::Constant { c: 2.0 },
                GrowthKind::Affine { c: 1.0 },
                GrowthKind::Power { c: 1.5, alpha: 0.5 },
                GrowthKind::Log { c: 1.0, beta: 2.0 },
                GrowthKind::Exp { c: 1.0, kappa: 0.1 },
            ][which];
            let mlog = MLog::new(GrowthBound::new(kind).unwrap(), 1.0).unwrap();
            let y = y.max(mlog.branch_minimum());
            let a = mlog.inverse(y).unwrap();
            prop_assert!((mlog.eval(a) - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
    }
}
