//! Least-squares regression in `Π_A` over scattered data.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{eval_chebyshev_basis, eval_lagrange_basis, lagrange_matrix, newton_coeffs, LagrangeCoeffMatrix, PolynomialNewton};
use crate::domain::AxisBox;
use crate::error::{Error, Result};
use crate::linalg::Factorization;
use crate::multiindex::MultiIndexSet;
use crate::nodes::{GeneratingPoints, UnisolventNodes};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// Lagrange polynomials of `P_A` in Newton form.
    LagrangeNewton,
    /// Tensorial Chebyshev polynomials `Π_k T_{α_k}`.
    Chebyshev,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::LagrangeNewton => "lagrange-newton",
            BasisKind::Chebyshev => "chebyshev",
        })
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lagrange-newton" | "lagrange" | "newton" => Ok(BasisKind::LagrangeNewton),
            "chebyshev" | "cheb" => Ok(BasisKind::Chebyshev),
            other => Err(Error::InvalidArgument(format!("unknown basis '{other}'"))),
        }
    }
}

/// A basis of `Π_A` ready for repeated evaluation on `[-1,1]^m`.
pub enum RegressionBasis<T: Scalar> {
    Lagrange(LagrangeCoeffMatrix<T>),
    Chebyshev(MultiIndexSet),
}

impl<T: Scalar> RegressionBasis<T> {
    pub fn new(set: &MultiIndexSet, gen: &GeneratingPoints<T>, kind: BasisKind) -> Result<Self> {
        Ok(match kind {
            BasisKind::LagrangeNewton => RegressionBasis::Lagrange(lagrange_matrix(set, gen)?),
            BasisKind::Chebyshev => RegressionBasis::Chebyshev(set.clone()),
        })
    }

    pub fn kind(&self) -> BasisKind {
        match self {
            RegressionBasis::Lagrange(_) => BasisKind::LagrangeNewton,
            RegressionBasis::Chebyshev(_) => BasisKind::Chebyshev,
        }
    }

    pub fn set(&self) -> &MultiIndexSet {
        match self {
            RegressionBasis::Lagrange(l) => &l.set,
            RegressionBasis::Chebyshev(s) => s,
        }
    }

    pub fn len(&self) -> usize {
        self.set().len()
    }

    pub fn is_empty(&self) -> bool {
        self.set().is_empty()
    }

    /// `|X| × |A|` matrix of basis values; columns follow the lexicographic order of `A`.
    pub fn matrix(&self, xs: &[Vec<T>]) -> Result<DMatrix<T>> {
        match self {
            RegressionBasis::Lagrange(l) => eval_lagrange_basis(l, xs),
            RegressionBasis::Chebyshev(s) => eval_chebyshev_basis(s, xs),
        }
    }
}

/// The regression matrix `R_{A,P}` for points in `[-1,1]^m`.
pub fn build_regression_matrix<T: Scalar>(
    set: &MultiIndexSet,
    gen: &GeneratingPoints<T>,
    points: &[Vec<T>],
    kind: BasisKind,
) -> Result<DMatrix<T>> {
    if points.len() < set.len() {
        return Err(Error::Underdetermined { points: points.len(), terms: set.len() });
    }
    RegressionBasis::new(set, gen, kind)?.matrix(points)
}

/// A fitted regressor `Q = Σ_α c_α B_α` on an axis-aligned box.
#[derive(Clone, Debug)]
pub struct RegressionFit<T: Scalar> {
    pub set: MultiIndexSet,
    pub gen: GeneratingPoints<T>,
    pub domain: AxisBox<T>,
    pub basis: BasisKind,
    /// Coefficients in `basis`, ordered like `set`.
    pub coeffs: Vec<T>,
    /// The same polynomial in Newton form on the reference cube.
    pub newton: PolynomialNewton<T>,
    /// `max_i |Q(p_i) − f(p_i)|` over the data.
    pub mu: T,
    pub rank: usize,
    pub cond: T,
    pub n_points: usize,
}

impl<T: Scalar> RegressionFit<T> {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank < self.set.len()
    }

    pub fn to_model(&self) -> Model<T> {
        Model {
            polynomial: self.newton.clone(),
            domain: (!self.domain.is_reference()).then(|| self.domain.clone()),
            diagnostics: Some(FitDiagnostics {
                basis: self.basis,
                mu: self.mu.to_f64_lossy(),
                rank: self.rank,
                cond: finite_or_none(self.cond),
                n_points: self.n_points,
                rank_deficient: self.rank_deficient(),
            }),
        }
    }
}

fn finite_or_none<T: Scalar>(v: T) -> Option<f64> {
    let v = v.to_f64_lossy();
    v.is_finite().then_some(v)
}

/// Fits on `[-1,1]^m`; see [`least_squares_fit_in`].
pub fn least_squares_fit<T: Scalar>(
    set: &MultiIndexSet,
    gen: &GeneratingPoints<T>,
    points: &[Vec<T>],
    values: &[T],
    kind: BasisKind,
) -> Result<RegressionFit<T>> {
    least_squares_fit_in(&AxisBox::reference(set.dim()), set, gen, points, values, kind)
}

/// Minimum-norm least-squares fit of `values` at `points ⊂ domain`.
///
/// Points are mapped affinely onto `[-1,1]^m` before the basis is evaluated.
/// Rank-deficient systems are returned with their minimum-norm solution and
/// `rank < |A|`.
pub fn least_squares_fit_in<T: Scalar>(
    domain: &AxisBox<T>,
    set: &MultiIndexSet,
    gen: &GeneratingPoints<T>,
    points: &[Vec<T>],
    values: &[T],
    kind: BasisKind,
) -> Result<RegressionFit<T>> {
    let m = set.dim();
    if domain.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: domain.dim() });
    }
    if points.is_empty() {
        return Err(Error::Empty("data set"));
    }
    if values.len() != points.len() {
        return Err(Error::LengthMismatch { expected: points.len(), got: values.len() });
    }
    if points.len() < set.len() {
        return Err(Error::Underdetermined { points: points.len(), terms: set.len() });
    }
    let mut local = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: p.len() });
        }
        local.push(domain.to_reference(p));
    }
    let basis = RegressionBasis::new(set, gen, kind)?;
    let r = basis.matrix(&local)?;
    let fac = Factorization::new(r.clone())?;
    let coeffs = fac.solve(values)?;

    let fitted = &r * DVector::from_column_slice(&coeffs);
    let mu = fitted.iter().zip(values).fold(T::zero(), |a, (&q, &f)| a.max((q - f).abs()));

    let newton = match &basis {
        RegressionBasis::Lagrange(l) => l.to_newton(&coeffs)?,
        RegressionBasis::Chebyshev(_) => {
            let nodes = UnisolventNodes::with_generating_points(set, gen.clone())?;
            let at_nodes = basis.matrix(nodes.points())? * DVector::from_column_slice(&coeffs);
            newton_coeffs(set, gen, at_nodes.as_slice())?
        }
    };

    Ok(RegressionFit {
        set: set.clone(),
        gen: gen.clone(),
        domain: domain.clone(),
        basis: kind,
        coeffs,
        newton,
        mu,
        rank: fac.rank(),
        cond: fac.cond(),
        n_points: points.len(),
    })
}

/// `Q(X_i)` for points given in the fit's domain coordinates.
pub fn evaluate_regressor<T: Scalar>(fit: &RegressionFit<T>, xs: &[Vec<T>]) -> Result<Vec<T>> {
    let m = fit.dim();
    let mut local = Vec::with_capacity(xs.len());
    for x in xs {
        if x.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: x.len() });
        }
        local.push(fit.domain.to_reference(x));
    }
    match fit.basis {
        BasisKind::LagrangeNewton => fit.newton.eval_many(&local),
        BasisKind::Chebyshev => {
            let b = eval_chebyshev_basis(&fit.set, &local)?;
            Ok((b * DVector::from_column_slice(&fit.coeffs)).iter().copied().collect())
        }
    }
}

/// `max_i |f(X_i) − Q(X_i)|`, zero for an empty `X`.
pub fn max_residual<T: Scalar>(fit: &RegressionFit<T>, xs: &[Vec<T>], f: impl Fn(&[T]) -> T) -> Result<T> {
    let q = evaluate_regressor(fit, xs)?;
    Ok(xs.iter().zip(q).fold(T::zero(), |a, (x, qx)| a.max((f(x) - qx).abs())))
}

/// Fit summary stored alongside a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub basis: BasisKind,
    pub mu: f64,
    pub rank: usize,
    /// `null` when the regression matrix is numerically rank deficient.
    pub cond: Option<f64>,
    pub n_points: usize,
    pub rank_deficient: bool,
}

/// On-disk model: a Newton-form polynomial on `[-1,1]^m`, an optional box it
/// is mapped onto, and optional fit diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Model<T> {
    #[serde(flatten)]
    pub polynomial: PolynomialNewton<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<AxisBox<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<FitDiagnostics>,
}

impl<T: Scalar> Model<T> {
    pub fn from_polynomial(polynomial: PolynomialNewton<T>) -> Self {
        Model { polynomial, domain: None, diagnostics: None }
    }

    pub fn dim(&self) -> usize {
        self.polynomial.dim()
    }

    pub fn eval_many(&self, xs: &[Vec<T>]) -> Result<Vec<T>> {
        match &self.domain {
            None => self.polynomial.eval_many(xs),
            Some(b) => {
                let m = self.dim();
                let mut local = Vec::with_capacity(xs.len());
                for x in xs {
                    if x.len() != m {
                        return Err(Error::DimensionMismatch { expected: m, got: x.len() });
                    }
                    local.push(b.to_reference(x));
                }
                self.polynomial.eval_many(&local)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Model<T> = serde_json::from_str(s)?;
        model.polynomial.gen.check_supports(&model.polynomial.set)?;
        if model.polynomial.coeffs.len() != model.polynomial.set.len() {
            return Err(Error::LengthMismatch { expected: model.polynomial.set.len(), got: model.polynomial.coeffs.len() });
        }
        if let Some(b) = &model.domain {
            if b.dim() != model.dim() {
                return Err(Error::DimensionMismatch { expected: model.dim(), got: b.dim() });
            }
        }
        Ok(model)
    }
}
