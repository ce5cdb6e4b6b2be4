//! The explicit decay bound: the three-term estimate `B(t, R)`, the radius
//! `R_opt` that balances its first and third terms, the threshold `T'`, and
//! the branch between an optimal radius inside the cutoff and a cutoff-limited
//! one.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::growth::{CutoffRule, CutoffValue, GrowthBound, MLog};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInputs {
    /// Tauberian constant `C`.
    pub c: f64,
    /// Threshold `T` of the Tauberian condition.
    pub t_threshold: f64,
    pub growth: GrowthBound,
    pub cutoff: CutoffRule,
}

impl RateInputs {
    pub fn new(c: f64, t_threshold: f64, growth: GrowthBound, cutoff: CutoffRule) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::Invalid(format!("C = {c} must be positive")));
        }
        if !(t_threshold >= 0.0 && t_threshold.is_finite()) {
            return Err(LabError::Invalid(format!("T = {t_threshold} must be >= 0")));
        }
        cutoff.validate()?;
        Ok(Self {
            c,
            t_threshold,
            growth,
            cutoff,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    OptInside,
    CutoffLimited,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::OptInside => "opt_inside",
            Branch::CutoffLimited => "cutoff_limited",
        }
    }
}

/// `T' = max{T, 4 M(1) (log M(1) - log(5C)/2)}`, with a negative second
/// argument clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdTime {
    pub value: f64,
    /// The unclamped `4 M(1) (log M(1) - log(5C)/2)`.
    pub log_term: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub t: f64,
    pub r_opt: f64,
    pub r_rule: CutoffValue,
    pub r_used: f64,
    /// `B(t, r_used)`.
    pub bound: f64,
    pub branch: Branch,
    pub t_prime: f64,
    /// `(log M(1) - log sqrt(5C))^{-1}`, absent when `M(1) <= sqrt(5C)`.
    pub k_prime: Option<f64>,
    /// `max{1 / R_opt, 1 / R(t)}`.
    pub rate_shape: f64,
}

/// `10C/R + M(R)/(t R^3) + 2R M(R)^2 e^{-t/(2M(R))}`, for `t > 0` and `R >= 1`.
pub fn bound_b(inputs: &RateInputs, t: f64, r: f64) -> f64 {
    let [a, b, c] = bound_terms(inputs, t, r);
    a + b + c
}

/// The three summands of [`bound_b`].
pub fn bound_terms(inputs: &RateInputs, t: f64, r: f64) -> [f64; 3] {
    let m = inputs.growth.eval(r);
    [
        10.0 * inputs.c / r,
        m / (t * r.powi(3)),
        2.0 * r * m * m * (-t / (2.0 * m)).exp(),
    ]
}

/// Relative gap between the first and third summands of `B(t, r)`.
pub fn balance_gap(inputs: &RateInputs, t: f64, r: f64) -> f64 {
    let [first, _, third] = bound_terms(inputs, t, r);
    (first - third).abs() / first
}

pub fn t_prime(inputs: &RateInputs) -> ThresholdTime {
    let m1 = inputs.growth.eval(1.0);
    let log_term = 4.0 * m1 * (m1.ln() - 0.5 * (5.0 * inputs.c).ln());
    ThresholdTime {
        value: inputs.t_threshold.max(log_term.max(0.0)),
        log_term,
        clamped: log_term < 0.0,
    }
}

pub fn k_prime(inputs: &RateInputs) -> Option<f64> {
    let m1 = inputs.growth.eval(1.0);
    let gap = m1.ln() - 0.5 * (5.0 * inputs.c).ln();
    (gap > 0.0).then(|| 1.0 / gap)
}

/// `M_log^{-1}(t / 4)`.
pub fn r_opt(inputs: &RateInputs, t: f64) -> Result<f64> {
    RateEngine::new(*inputs)?.r_opt(t)
}

pub fn decay_rate(inputs: &RateInputs, t: f64) -> Result<RateResult> {
    RateEngine::new(*inputs)?.decay_rate(t)
}

/// [`RateInputs`] with `M_log` and `T'` prepared once, for evaluating rate
/// tables over many `t`.
#[derive(Debug, Clone, Copy)]
pub struct RateEngine {
    inputs: RateInputs,
    mlog: MLog,
    t_prime: ThresholdTime,
    k_prime: Option<f64>,
}

impl RateEngine {
    pub fn new(inputs: RateInputs) -> Result<Self> {
        Ok(Self {
            mlog: MLog::new(inputs.growth, inputs.c)?,
            t_prime: t_prime(&inputs),
            k_prime: k_prime(&inputs),
            inputs,
        })
    }

    pub fn inputs(&self) -> &RateInputs {
        &self.inputs
    }

    pub fn t_prime(&self) -> ThresholdTime {
        self.t_prime
    }

    pub fn r_opt(&self, t: f64) -> Result<f64> {
        self.mlog.inverse(t / 4.0)
    }

    pub fn decay_rate(&self, t: f64) -> Result<RateResult> {
        let t_prime = self.t_prime.value;
        if !(t > t_prime) {
            return Err(LabError::BelowThreshold { t, t_prime });
        }
        let r_opt = self.r_opt(t)?;
        let r_rule = self.inputs.cutoff.value(t);
        let (branch, r_used) = match r_rule {
            CutoffValue::Finite(r) if r_opt > r => (Branch::CutoffLimited, r),
            _ => (Branch::OptInside, r_opt),
        };
        Ok(RateResult {
            t,
            r_opt,
            r_rule,
            r_used,
            bound: bound_b(&self.inputs, t, r_used),
            branch,
            t_prime,
            k_prime: self.k_prime,
            rate_shape: (1.0 / r_opt).max(r_rule.reciprocal()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthKind;

    fn inputs(c: f64, t: f64, m: GrowthKind, r: CutoffRule) -> RateInputs {
        RateInputs::new(c, t, GrowthBound::new(m).unwrap(), r).unwrap()
    }

    fn const_two() -> RateInputs {
        inputs(1.0, 0.0, GrowthKind::Constant { c: 2.0 }, CutoffRule::Infinite)
    }

    #[test]
    fn bound_b_examples() {
        let b = bound_b(&const_two(), 4.0, 1.0);
        let direct = 10.0 + 2.0 / 4.0 + 2.0 * 4.0 * (-1f64).exp();
        assert!((b - direct).abs() < 1e-14);
        assert!((b - 13.4430).abs() < 1e-4);
        assert!((bound_b(&const_two(), 1e6, 2.0) - 5.0).abs() < 1e-3);
    }

    #[test]
    fn r_opt_examples() {
        let r = r_opt(&const_two(), 8.0).unwrap();
        assert!((r - 5f64.sqrt() / 2.0 * std::f64::consts::E).abs() < 1e-9);
        let unit = inputs(0.2, 0.0, GrowthKind::Constant { c: 1.0 }, CutoffRule::Infinite);
        assert!((r_opt(&unit, 4.0).unwrap() - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn r_opt_satisfies_defining_equation_and_balance() {
        for kind in [
            GrowthKind::Constant { c: 2.0 },
            GrowthKind::Affine { c: 1.0 },
            GrowthKind::Power { c: 1.0, alpha: 1.5 },
            GrowthKind::Log { c: 2.0, beta: 1.0 },
            GrowthKind::Exp { c: 1.0, kappa: 0.3 },
        ] {
            let inp = inputs(1.0, 0.0, kind, CutoffRule::Infinite);
            for t in [10.0, 50.0, 200.0] {
                let r = r_opt(&inp, t).unwrap();
                let m = inp.growth.eval(r);
                let lhs = 4.0 * m * (r.ln() + m.ln() - 0.5 * 5f64.ln());
                assert!((lhs - t).abs() <= 1e-8 * t, "{kind:?} t={t}");
                assert!(balance_gap(&inp, t, r) <= 1e-8, "{kind:?} t={t}");
            }
        }
    }

    #[test]
    fn t_prime_examples() {
        let unit = inputs(0.2, 0.0, GrowthKind::Constant { c: 1.0 }, CutoffRule::Infinite);
        assert_eq!(t_prime(&unit).value, 0.0);

        let tp = t_prime(&inputs(1.0, 3.0, GrowthKind::Constant { c: 2.0 }, CutoffRule::Infinite));
        assert_eq!(tp.value, 3.0);
        assert!((tp.log_term - (-0.8926)).abs() < 1e-4);
        assert!(tp.clamped);

        let tp = t_prime(&inputs(1.0, 0.0, GrowthKind::Constant { c: 10.0 }, CutoffRule::Infinite));
        let direct = 40.0 * (10f64.ln() - 0.5 * 5f64.ln());
        assert!((tp.value - direct).abs() < 1e-12);
        assert!((tp.value - 59.915).abs() < 1e-3);
        assert!(!tp.clamped);
    }

    #[test]
    fn k_prime_only_when_defined() {
        assert!(k_prime(&const_two()).is_none());
        let k = k_prime(&inputs(1.0, 0.0, GrowthKind::Constant { c: 10.0 }, CutoffRule::Infinite)).unwrap();
        assert!((k - 1.0 / (10f64.ln() - 0.5 * 5f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn branches() {
        let r = decay_rate(&const_two(), 8.0).unwrap();
        assert_eq!(r.branch, Branch::OptInside);
        assert_eq!(r.rate_shape, 1.0 / r.r_opt);

        let expo = inputs(1.0, 0.0, GrowthKind::Constant { c: 2.0 }, CutoffRule::Exponential);
        let r = decay_rate(&expo, 8.0).unwrap();
        assert_eq!(r.branch, Branch::OptInside);
        assert!((r.r_opt - 3.039131).abs() < 1e-6);

        let fast = inputs(1.0, 0.0, GrowthKind::Exp { c: 1.0, kappa: 1.0 }, CutoffRule::Constant { r: 1.0 });
        let engine = RateEngine::new(fast).unwrap();
        let t = 4.0 * fast.growth.m_log(1.0, 1.0) + 10.0;
        let r = engine.decay_rate(t).unwrap();
        assert_eq!(r.branch, Branch::CutoffLimited);
        assert_eq!(r.r_used, 1.0);
        assert_eq!(r.bound, bound_b(&fast, t, 1.0));
    }

    #[test]
    fn below_threshold_is_refused() {
        let inp = inputs(1.0, 3.0, GrowthKind::Constant { c: 2.0 }, CutoffRule::Infinite);
        assert_eq!(
            decay_rate(&inp, 2.0).unwrap_err(),
            LabError::BelowThreshold { t: 2.0, t_prime: 3.0 }
        );
    }

    #[test]
    fn r_opt_is_near_optimal_on_a_grid() {
        for kind in [
            GrowthKind::Constant { c: 2.0 },
            GrowthKind::Affine { c: 1.0 },
            GrowthKind::Power { c: 1.0, alpha: 2.0 },
            GrowthKind::Log { c: 1.0, beta: 2.0 },
            GrowthKind::Exp { c: 1.0, kappa: 0.5 },
        ] {
            let inp = inputs(1.0, 0.0, kind, CutoffRule::Infinite);
            let engine = RateEngine::new(inp).unwrap();
            for t in [10.0, 50.0, 200.0] {
                let r = engine.r_opt(t).unwrap();
                let at_opt = bound_b(&inp, t, r);
                let span = (10.0 * r).ln();
                let grid_min = (0..200)
                    .map(|k| bound_b(&inp, t, (span * k as f64 / 199.0).exp()))
                    .fold(f64::INFINITY, f64::min);
                assert!(at_opt <= 3.0 * grid_min, "{kind:?} t={t}: {at_opt} vs {grid_min}");
            }
        }
    }

    #[test]
    fn bound_decreases_in_t_for_infinite_cutoff() {
        for kind in [GrowthKind::Constant { c: 2.0 }, GrowthKind::Affine { c: 1.0 }, GrowthKind::Exp { c: 1.0, kappa: 0.5 }] {
            let engine = RateEngine::new(inputs(1.0, 0.0, kind, CutoffRule::Infinite)).unwrap();
            let start = engine.t_prime().value + 1.0;
            let bounds: Vec<f64> = (0..100)
                .map(|k| engine.decay_rate(start + k as f64).unwrap().bound)
                .collect();
            for w in bounds.windows(2) {
                assert!(w[1] <= w[0], "{kind:?}");
            }
        }
    }

    #[test]
    fn branch_consistency() {
        let inp = inputs(1.0, 0.0, GrowthKind::Affine { c: 3.0 }, CutoffRule::Constant { r: 2.0 });
        let engine = RateEngine::new(inp).unwrap();
        let start = engine.t_prime().value;
        for k in 1..200 {
            let r = engine.decay_rate(start + 0.25 * k as f64).unwrap();
            assert_eq!(r.branch == Branch::CutoffLimited, r.r_opt > 2.0);
        }
    }
}
