//! Numerical laboratory for quantified Tauberian theorems for
//! Laplace-Stieltjes transforms.
//!
//! Given `A` of locally bounded variation with `A(0) = 0`, a growth bound `M`
//! for the analytic extension of `f(z) = int_0^inf e^{-zs} dA(s)` into the
//! strip `Q = {0 >= Re z > -1/M(|Im z|)}`, and a Tauberian constant `C`, the
//! crate computes the explicit bound
//!
//! ```text
//! |A(t) - f(0)| <= 10C/R + M(R)/(t R^3) + 2R M(R)^2 e^{-t/(2M(R))}
//! ```
//!
//! at the radius `R_opt = M_log^{-1}(t/4)`, and checks every inequality that
//! leads to it against direct numerical evaluation.

pub mod bv_model;
pub mod cli;
pub mod contour_lab;
pub mod dirichlet_app;
pub mod error;
pub mod growth;
pub mod problem;
pub mod quadrature;
pub mod rate_engine;
pub mod series;
pub mod transform;
pub mod verification;
pub mod vector;

pub use error::{LabError, Result};
