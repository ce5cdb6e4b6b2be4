//! Finite and improper Laplace-Stieltjes transforms of a [`BVFunction`].

use num_complex::Complex64;

use crate::bv_model::{BVFunction, Integrand};
use crate::error::{LabError, Result};
use crate::growth::CutoffRule;
use crate::vector::VectorValue;

/// Default hard cap on the truncation time of [`f_improper`].
pub const DEFAULT_TRUNCATION_CAP: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformPoint {
    pub z: Complex64,
    pub value: VectorValue,
    /// Upper bound on the norm of the omitted tail; zero for finite transforms.
    pub truncation_bound: f64,
    /// Upper limit `t*` of the finite transform that was evaluated.
    pub truncation_time: f64,
}

/// The claim `sup_{t > T} sup_{x0 <= x <= R(t)} |x e^{-xt} int_0^t e^{xs} dA(s)| <= C`.
///
/// Holding one of these does not make the claim true; see
/// [`crate::verification::check_tauberian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauberianCertificate {
    pub c: f64,
    pub x0: f64,
    pub t: f64,
    pub cutoff: CutoffRule,
}

impl TauberianCertificate {
    pub fn new(c: f64, x0: f64, t: f64, cutoff: CutoffRule) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::Invalid(format!("certificate constant C = {c} must be positive")));
        }
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(LabError::Invalid(format!("certificate abscissa x0 = {x0} must be positive")));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(LabError::Invalid(format!("certificate threshold T = {t} must be >= 0")));
        }
        cutoff.validate()?;
        Ok(Self { c, x0, t, cutoff })
    }

    /// A bound on `sup_t |e^{-xt} int_0^t e^{xs} dA(s)|` implied by the
    /// certificate, for any `x > 0`.
    ///
    /// For `x <= x0` the rescaling `(C / x0)(x0 / x) = C / x` applies; for
    /// `x0 < x <= R(T)` the certificate gives `C / x` directly; beyond the
    /// cutoff only the integration-by-parts estimate `(2 - x0 / x) C / x0`
    /// survives.
    pub fn hypothesis_constant(&self, x: f64) -> f64 {
        if x <= self.x0 || self.cutoff.value(self.t).at_least(x) {
            self.c / x
        } else {
            (2.0 - self.x0 / x) * self.c / self.x0
        }
    }

    /// The tail constant `K(z)` with `|e^{xt} int_t^inf e^{-zs} dA(s)| <= K(z)`.
    pub fn tail_constant(&self, z: Complex64) -> f64 {
        self.hypothesis_constant(z.re) * (3.0 + z.im.abs() / z.re)
    }
}

/// `f_t(z) = int_0^t e^{-zs} dA(s)`.
pub fn f_t(a: &BVFunction, z: Complex64, t: f64, quad_tol: f64) -> Result<VectorValue> {
    a.stieltjes_integral(&Integrand::exp(-z), t, quad_tol)
}

/// `f(z)` for `Re z > 0`, truncated at the `t*` where the certified tail
/// bound `K(z) e^{-x t*}` drops to `target_err`.
pub fn f_improper(
    a: &BVFunction,
    z: Complex64,
    cert: &TauberianCertificate,
    target_err: f64,
    quad_tol: f64,
) -> Result<TransformPoint> {
    f_improper_capped(a, z, cert, target_err, quad_tol, DEFAULT_TRUNCATION_CAP)
}

pub fn f_improper_capped(
    a: &BVFunction,
    z: Complex64,
    cert: &TauberianCertificate,
    target_err: f64,
    quad_tol: f64,
    cap: f64,
) -> Result<TransformPoint> {
    let x = z.re;
    if !(x > 0.0) {
        return Err(LabError::Domain(format!("improper transform needs Re z > 0, got z = {z}")));
    }
    if !(target_err > 0.0) {
        return Err(LabError::Domain(format!("target error {target_err} must be positive")));
    }
    let k = cert.tail_constant(z);
    let t_star = ((k / target_err).ln() / x).max(0.0);
    if t_star > cap {
        return Err(LabError::TruncationCap {
            required: t_star,
            cap,
            achievable: k * (-x * cap).exp(),
        });
    }
    let value = f_t(a, z, t_star, quad_tol)?;
    Ok(TransformPoint {
        z,
        value,
        truncation_bound: k * (-x * t_star).exp(),
        truncation_time: t_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv_model::DensityPiece;
    use crate::vector::NormKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_density() -> BVFunction {
        BVFunction::builder(1, NormKind::Euclidean)
            .density(DensityPiece::exponential(0.0, None, 1.0, c(-1.0, 0.0), VectorValue::scalar(c(1.0, 0.0))))
            .build()
            .unwrap()
    }

    #[test]
    fn single_jump_transform() {
        let a = BVFunction::step(1.0, 1.0).unwrap();
        let v = f_t(&a, c(1.0, 0.0), 2.0, 1e-12).unwrap();
        assert!((v.as_scalar().unwrap() - c((-1f64).exp(), 0.0)).norm() < 1e-15);
        assert!((v.norm() - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn empty_interval() {
        let v = f_t(&exp_density(), c(0.3, 7.0), 0.0, 1e-12).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn exponential_density_limit() {
        let v = f_t(&exp_density(), c(1.0, 0.0), 40.0, 1e-14).unwrap();
        assert!((v.as_scalar().unwrap() - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn improper_within_target() {
        let cert = TauberianCertificate::new(1.0, 1.0, 0.0, CutoffRule::Infinite).unwrap();
        let p = f_improper(&exp_density(), c(1.0, 0.0), &cert, 1e-8, 1e-14).unwrap();
        assert!(p.truncation_bound <= 1e-8 * (1.0 + 1e-12));
        assert!((p.value.as_scalar().unwrap() - c(0.5, 0.0)).norm() <= 1e-8);
    }

    #[test]
    fn improper_of_zero() {
        let cert = TauberianCertificate::new(1.0, 1.0, 0.0, CutoffRule::Infinite).unwrap();
        let p = f_improper(&BVFunction::zero(1, NormKind::Euclidean), c(0.5, -3.0), &cert, 1e-6, 1e-12).unwrap();
        assert_eq!(p.value.norm(), 0.0);
        assert!(p.truncation_bound <= 1e-6 * (1.0 + 1e-12));
    }

    #[test]
    fn improper_rejects_left_half_plane_and_cap() {
        let cert = TauberianCertificate::new(1.0, 1.0, 0.0, CutoffRule::Infinite).unwrap();
        let a = exp_density();
        assert!(matches!(f_improper(&a, c(0.0, 1.0), &cert, 1e-6, 1e-12), Err(LabError::Domain(_))));
        match f_improper(&a, c(1e-4, 0.0), &cert, 1e-8, 1e-12) {
            Err(LabError::TruncationCap { required, achievable, .. }) => {
                assert!(required > DEFAULT_TRUNCATION_CAP);
                assert!(achievable > 1e-8);
            }
            other => panic!("expected cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn agreement_between_targets() {
        let cert = TauberianCertificate::new(1.0, 1.0, 0.0, CutoffRule::Infinite).unwrap();
        let a = exp_density();
        let z = c(0.7, 2.5);
        let eps = [1e-4, 1e-6, 1e-8];
        let vals: Vec<_> = eps
            .iter()
            .map(|&e| f_improper(&a, z, &cert, e, 1e-14).unwrap().value)
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                assert!((&vals[i] - &vals[j]).norm() <= eps[i] + eps[j]);
            }
        }
    }

    #[test]
    fn conjugate_symmetry_for_real_a() {
        let a = exp_density().sum(&BVFunction::step(0.5, 2.0).unwrap()).unwrap();
        for (z, t) in [(c(0.3, 2.0), 3.0), (c(-0.5, 7.0), 5.0), (c(2.0, -1.0), 1.2)] {
            let v = f_t(&a, z, t, 1e-13).unwrap();
            let w = f_t(&a, z.conj(), t, 1e-13).unwrap();
            assert!((&v.conj() - &w).norm() < 1e-12);
        }
    }

    #[test]
    fn hypothesis_constant_regimes() {
        let cert = TauberianCertificate::new(2.0, 1.0, 0.0, CutoffRule::Constant { r: 4.0 }).unwrap();
        assert_eq!(cert.hypothesis_constant(0.5), 4.0);
        assert_eq!(cert.hypothesis_constant(4.0), 0.5);
        assert_eq!(cert.hypothesis_constant(8.0), (2.0 - 1.0 / 8.0) * 2.0);
    }
}
