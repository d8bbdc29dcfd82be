//! Dense least squares through a thin singular-value decomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `M = U diag(s) Vᵀ` with `k = min(rows, cols)` columns in `U` and `V`
/// and `s` in descending order.
#[derive(Clone, Debug)]
pub struct ThinSvd<T: nalgebra::Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<T>,
    pub v: DMatrix<T>,
}

/// Thin SVD through faer; `None` if the iteration fails to converge.
pub(crate) fn faer_thin_svd<T>(m: &DMatrix<T>) -> Option<ThinSvd<T>>
where
    T: faer::traits::RealField + nalgebra::Scalar + Copy,
{
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let a = faer::Mat::<T>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = a.thin_svd().ok()?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    Some(ThinSvd {
        u: DMatrix::from_fn(rows, k, |i, j| *u.get(i, j)),
        s: (0..k).map(|i| *s.get(i)).collect(),
        v: DMatrix::from_fn(cols, k, |i, j| *v.get(i, j)),
    })
}

/// Rank-revealing factorization of a `rows × cols` matrix.
pub struct Factorization<T: Scalar> {
    rows: usize,
    cols: usize,
    svd: ThinSvd<T>,
    rank: usize,
    tol: T,
}

impl<T: Scalar> Factorization<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("matrix"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let svd = T::thin_svd(&matrix).ok_or_else(|| Error::InvalidArgument("SVD did not converge".into()))?;
        let smax = svd.s.iter().copied().fold(T::zero(), T::max);
        if smax == T::zero() {
            return Err(Error::ZeroMatrix);
        }
        let tol = smax * T::from_count(rows.max(cols)) * T::unit_roundoff();
        let rank = svd.s.iter().filter(|&&s| s > tol).count();
        Ok(Factorization { rows, cols, svd, rank, tol })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Numerical rank: singular values above `σ_max · max(rows, cols) · u`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.rows.min(self.cols)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<T> {
        let mut s = self.svd.s.clone();
        s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
        s
    }

    /// Spectral condition number, `+∞` when numerically rank deficient.
    pub fn cond(&self) -> T {
        if !self.is_full_rank() {
            return T::lit(f64::INFINITY);
        }
        let s = self.singular_values();
        s[0] / s[s.len() - 1]
    }

    /// Minimum-norm least-squares solution of `M x ≈ b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.rows {
            return Err(Error::LengthMismatch { expected: self.rows, got: b.len() });
        }
        let b = DVector::from_column_slice(b);
        let mut x = DVector::zeros(self.cols);
        for (i, &s) in self.svd.s.iter().enumerate() {
            if s > self.tol {
                let w = self.svd.u.column(i).dot(&b) / s;
                x.axpy(w, &self.svd.v.column(i), T::one());
            }
        }
        Ok(x.iter().copied().collect())
    }

    /// `‖S‖_∞` for the Moore–Penrose pseudo-inverse `S = V Σ⁻¹ Uᵀ`.
    pub fn pinv_inf_norm(&self) -> Result<T> {
        if !self.is_full_rank() {
            return Err(Error::RankDeficient { rank: self.rank, required: self.rows.min(self.cols) });
        }
        let mut v_scaled = self.svd.v.clone();
        for (mut col, &s) in v_scaled.column_iter_mut().zip(&self.svd.s) {
            col /= s;
        }
        let st = &self.svd.u * v_scaled.transpose();
        // rows of S are the columns of Sᵀ
        Ok(st.column_iter().map(|c| c.iter().fold(T::zero(), |a, v| a + v.abs())).fold(T::zero(), T::max))
    }
}
