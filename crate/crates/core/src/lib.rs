//! Multivariate polynomial regression with general lp-degree.
//!
//! Polynomial spaces `Π_A` are indexed by downward-closed sets
//! `A_{m,n,p} = {α : ‖α‖_p ≤ n}` ([`multiindex`]). Bases are built on the
//! non-tensorial unisolvent nodes `P_A` generated from Leja-ordered
//! Chebyshev–Lobatto points ([`nodes`]), in Newton and Lagrange form
//! ([`basis`]). Least-squares fits in that Lagrange basis ([`regression`]) come
//! with stability diagnostics ([`diagnostics`]), and [`adaptive`] provides an
//! oracle-driven domain decomposition whose piecewise fits merge back into a
//! single global polynomial.
//!
//! The numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod adaptive;
pub mod basis;
pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod linalg;
pub mod multiindex;
pub mod nodes;
pub mod regression;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use multiindex::{compare_lex, LpDegree, MultiIndexSet};
pub use scalar::Scalar;

pub type AxisBox = domain::AxisBox<f64>;
pub type GeneratingPoints = nodes::GeneratingPoints<f64>;
pub type UnisolventNodes = nodes::UnisolventNodes<f64>;
pub type PolynomialNewton = basis::PolynomialNewton<f64>;
pub type LagrangeCoeffMatrix = basis::LagrangeCoeffMatrix<f64>;
pub type PointSet = sampling::PointSet<f64>;
pub type TestFunction = sampling::TestFunction;
pub type RegressionFit = regression::RegressionFit<f64>;
pub type Model = regression::Model<f64>;
pub type StabilityReport = diagnostics::StabilityReport<f64>;
pub type DecompositionTree = adaptive::DecompositionTree<f64>;
pub type MergedPolynomial = adaptive::MergedPolynomial<f64>;

pub type PolynomialNewtonF32 = basis::PolynomialNewton<f32>;
pub type RegressionFitF32 = regression::RegressionFit<f32>;
