//! Downward-closed multi-index sets `A_{m,n,p} = {α ∈ ℕ^m : ‖α‖_p ≤ n}`.
//!
//! Sets are kept in the lexicographic order that treats the *last* entry as
//! most significant, e.g. `(5,3,1) ≺ (1,0,3) ≺ (1,1,3)`. Generation walks an
//! odometer whose first digit spins fastest, which produces exactly this
//! order without sorting.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative slack for non-integral exponents, where membership falls back
/// to a floating-point test.
pub const FRACTIONAL_P_TOLERANCE: f64 = 1e-12;

/// Degree norm selector `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpDegree {
    /// `p = 1`
    Total,
    /// `p = 2`
    Euclidean,
    /// `p = ∞`
    Maximum,
    /// Any other positive exponent.
    Exponent(f64),
}

impl LpDegree {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(if p == 1.0 {
            LpDegree::Total
        } else if p == 2.0 {
            LpDegree::Euclidean
        } else if p.is_infinite() {
            LpDegree::Maximum
        } else {
            LpDegree::Exponent(p)
        })
    }

    pub fn exponent(self) -> f64 {
        match self {
            LpDegree::Total => 1.0,
            LpDegree::Euclidean => 2.0,
            LpDegree::Maximum => f64::INFINITY,
            LpDegree::Exponent(p) => p,
        }
    }

    /// Whether `‖alpha‖_p ≤ n`.
    pub fn admits(self, alpha: &[usize], n: usize) -> bool {
        match self {
            LpDegree::Total => alpha.iter().try_fold(0usize, |s, &a| s.checked_add(a)).is_some_and(|s| s <= n),
            LpDegree::Euclidean => {
                let n2 = (n as u128) * (n as u128);
                alpha.iter().map(|&a| (a as u128) * (a as u128)).sum::<u128>() <= n2
            }
            LpDegree::Maximum => alpha.iter().all(|&a| a <= n),
            LpDegree::Exponent(p) => admits_exponent(alpha, n, p),
        }
    }
}

fn admits_exponent(alpha: &[usize], n: usize, p: f64) -> bool {
    if p.fract() == 0.0 && p <= 64.0 {
        let k = p as u32;
        let exact = (|| {
            let bound = (n as u128).checked_pow(k)?;
            let mut sum = 0u128;
            for &a in alpha {
                sum = sum.checked_add((a as u128).checked_pow(k)?)?;
            }
            Some(sum <= bound)
        })();
        if let Some(ok) = exact {
            return ok;
        }
    }
    if n == 0 {
        return alpha.iter().all(|&a| a == 0);
    }
    let nf = n as f64;
    let s: f64 = alpha.iter().map(|&a| (a as f64 / nf).powf(p)).sum();
    s <= 1.0 + FRACTIONAL_P_TOLERANCE
}

impl fmt::Display for LpDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpDegree::Total => write!(f, "1"),
            LpDegree::Euclidean => write!(f, "2"),
            LpDegree::Maximum => write!(f, "inf"),
            LpDegree::Exponent(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for LpDegree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" | "max" => Ok(LpDegree::Maximum),
            "total" => Ok(LpDegree::Total),
            "euclidean" => Ok(LpDegree::Euclidean),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse lp exponent '{s}'")))?;
                LpDegree::new(p)
            }
        }
    }
}

impl Serialize for LpDegree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LpDegree::Maximum => s.serialize_str("inf"),
            other => s.serialize_f64(other.exponent()),
        }
    }
}

impl<'de> Deserialize<'de> for LpDegree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => LpDegree::new(p).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Compares two multi-indices with the last entry most significant.
pub fn compare_lex(a: &[usize], b: &[usize]) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    Ok(lex_unchecked(a, b))
}

#[inline]
pub(crate) fn lex_unchecked(a: &[usize], b: &[usize]) -> Ordering {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// A lexicographically ordered set of multi-indices.
///
/// Sets produced by [`MultiIndexSet::generate`] carry their `(n, p)`; sets
/// built from explicit indices have `lp() == None` and `degree()` equal to the
/// largest single exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiIndexSet {
    m: usize,
    n: usize,
    p: Option<LpDegree>,
    data: Vec<usize>,
}

impl MultiIndexSet {
    /// All `α ∈ ℕ^m` with `‖α‖_p ≤ n`, in lexicographic order.
    pub fn generate(m: usize, n: usize, p: LpDegree) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        LpDegree::new(p.exponent())?;
        let mut data = Vec::new();
        let mut alpha = vec![0usize; m];
        'outer: loop {
            data.extend_from_slice(&alpha);
            // odometer step: bump the lowest digit that stays inside the ball
            let mut i = 0;
            loop {
                alpha[i] += 1;
                if p.admits(&alpha, n) {
                    break;
                }
                alpha[i] = 0;
                i += 1;
                if i == m {
                    break 'outer;
                }
            }
        }
        Ok(MultiIndexSet { m, n, p: Some(p), data })
    }

    /// Builds a set from explicit indices; sorts and removes duplicates.
    pub fn from_indices(m: usize, indices: Vec<Vec<usize>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut indices = indices;
        for a in &indices {
            if a.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: a.len() });
            }
        }
        indices.sort_by(|a, b| lex_unchecked(a, b));
        indices.dedup();
        let n = indices.iter().flat_map(|a| a.iter().copied()).max().unwrap_or(0);
        let data = indices.into_iter().flatten().collect();
        Ok(MultiIndexSet { m, n, p: None, data })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn lp(&self) -> Option<LpDegree> {
        self.p
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[usize] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.data.chunks_exact(self.m)
    }

    /// Position of `alpha` in the ordering, if present.
    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.m {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match lex_unchecked(self.get(mid), alpha) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, alpha: &[usize]) -> bool {
        self.position(alpha).is_some()
    }

    /// True iff every componentwise-dominated index of every member is a member.
    pub fn is_downward_closed(&self) -> bool {
        self.first_missing_predecessor().is_none()
    }

    pub(crate) fn first_missing_predecessor(&self) -> Option<Vec<usize>> {
        let members: HashSet<&[usize]> = self.iter().collect();
        let mut pred = vec![0usize; self.m];
        for alpha in self.iter() {
            // closure under single decrements implies closure under domination
            for i in 0..self.m {
                if alpha[i] == 0 {
                    continue;
                }
                pred.copy_from_slice(alpha);
                pred[i] -= 1;
                if !members.contains(pred.as_slice()) {
                    return Some(alpha.to_vec());
                }
            }
        }
        None
    }

    /// Componentwise maximum `n_i = max_α α_i`.
    pub fn max_exponents(&self) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::Empty("multi-index set"));
        }
        let mut out = vec![0usize; self.m];
        for alpha in self.iter() {
            for (o, &a) in out.iter_mut().zip(alpha) {
                *o = (*o).max(a);
            }
        }
        Ok(out)
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.iter().map(<[usize]>::to_vec).collect()
    }

    /// Whether `self ⊆ other`.
    pub fn is_subset_of(&self, other: &MultiIndexSet) -> bool {
        self.m == other.m && self.iter().all(|a| other.contains(a))
    }
}

/// `|A_{m,n,p}|` without materializing the set. Saturates at `usize::MAX`.
pub fn cardinality(m: usize, n: usize, p: LpDegree) -> usize {
    if m == 0 {
        return 0;
    }
    match p {
        LpDegree::Total => binomial(m + n, n),
        LpDegree::Maximum => (n as u128 + 1).checked_pow(m as u32).map_or(usize::MAX, saturate),
        LpDegree::Euclidean => {
            let n2 = (n as u128) * (n as u128);
            saturate(count_euclidean(m, n2))
        }
        LpDegree::Exponent(_) => match MultiIndexSet::generate(m, n, p) {
            Ok(set) => set.len(),
            Err(_) => 0,
        },
    }
}

fn saturate(v: u128) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

fn count_euclidean(dims: usize, budget: u128) -> u128 {
    let r = isqrt(budget);
    if dims == 1 {
        return r + 1;
    }
    (0..=r).map(|a| count_euclidean(dims - 1, budget - a * a)).sum()
}

fn isqrt(v: u128) -> u128 {
    let mut r = (v as f64).sqrt() as u128;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Exact `binom(a, b)`, saturating.
pub fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        // acc * (a - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((a - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return usize::MAX,
        };
    }
    saturate(acc)
}

#[derive(Serialize, Deserialize)]
struct MultiIndexSetRepr {
    m: usize,
    n: usize,
    p: Option<LpDegree>,
    indices: Vec<Vec<usize>>,
}

impl Serialize for MultiIndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultiIndexSetRepr { m: self.m, n: self.n, p: self.p, indices: self.to_vecs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MultiIndexSetRepr::deserialize(d)?;
        let mut set = MultiIndexSet::from_indices(repr.m, repr.indices).map_err(serde::de::Error::custom)?;
        if let Some(p) = repr.p {
            if let Some(bad) = set.iter().find(|a| !p.admits(a, repr.n)) {
                return Err(serde::de::Error::custom(format!("index {bad:?} violates ‖α‖_{p} ≤ {}", repr.n)));
            }
        }
        set.n = repr.n;
        set.p = repr.p;
        Ok(set)
    }
}
