//! Axis-aligned boxes and the affine maps between a box and `[-1, 1]^m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Non-degenerate axis-aligned box `[lo_1, hi_1] × … × [lo_m, hi_m]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AxisBox<T> {
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Scalar> AxisBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() {
            return Err(Error::ZeroDimension);
        }
        for (dim, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(Error::DegenerateBox { dim, lo: l.to_f64_lossy(), hi: h.to_f64_lossy() });
            }
        }
        Ok(AxisBox { lo, hi })
    }

    /// The reference hypercube `[-1, 1]^m`.
    pub fn reference(m: usize) -> Self {
        AxisBox { lo: vec![-T::one(); m], hi: vec![T::one(); m] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn is_reference(&self) -> bool {
        self.lo.iter().all(|&l| l == -T::one()) && self.hi.iter().all(|&h| h == T::one())
    }

    pub fn volume(&self) -> T {
        self.lo.iter().zip(&self.hi).fold(T::one(), |v, (&l, &h)| v * (h - l))
    }

    pub fn midpoint(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| (l + h) * half).collect()
    }

    /// The `2^m` boxes obtained by halving every side. Bit `i` of the child
    /// index selects the upper half in dimension `i`.
    pub fn halve(&self) -> Vec<AxisBox<T>> {
        let m = self.dim();
        let mid = self.midpoint();
        (0..1usize << m)
            .map(|code| {
                let mut lo = self.lo.clone();
                let mut hi = self.hi.clone();
                for i in 0..m {
                    if code >> i & 1 == 1 {
                        lo[i] = mid[i];
                    } else {
                        hi[i] = mid[i];
                    }
                }
                AxisBox { lo, hi }
            })
            .collect()
    }

    /// Maps `x ∈ [-1,1]^m` into the box.
    pub fn from_reference(&self, x: &[T]) -> Vec<T> {
        let half = T::lit(0.5);
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&t, (&l, &h))| l + (t + T::one()) * (h - l) * half)
            .collect()
    }

    /// Maps a point of the box into `[-1,1]^m`.
    pub fn to_reference(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        self.to_reference_into(x, &mut out);
        out
    }

    #[inline]
    pub fn to_reference_into(&self, x: &[T], out: &mut [T]) {
        let two = T::lit(2.0);
        for (o, (&t, (&l, &h))) in out.iter_mut().zip(x.iter().zip(self.lo.iter().zip(&self.hi))) {
            *o = two * (t - l) / (h - l) - T::one();
        }
    }

    pub fn contains_closed(&self, x: &[T]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&t, (&l, &h))| l <= t && t <= h)
    }

    /// Half-open ownership: closed below and open above, except on faces that
    /// lie on the boundary of `root`, which close outward.
    pub fn owns(&self, x: &[T], root: &AxisBox<T>) -> bool {
        for i in 0..self.dim() {
            let (l, h, t) = (self.lo[i], self.hi[i], x[i]);
            let lower_ok = t >= l;
            let upper_ok = t < h || (h == root.hi[i] && t <= h);
            if !lower_ok || !upper_ok {
                return false;
            }
        }
        true
    }
}
