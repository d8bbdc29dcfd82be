//! Chebyshev–Lobatto generating points, Leja ordering, and the non-tensorial
//! unisolvent node set `P_A = {(p_{α₁,1}, …, p_{α_m,m}) : α ∈ A}`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::AxisBox;
use crate::error::{Error, Result};
use crate::multiindex::MultiIndexSet;
use crate::scalar::Scalar;

/// Two log-products closer than this count as tied in the greedy Leja step.
const LEJA_TIE_TOLERANCE: f64 = 1e-10;

/// `cos(kπ/n)` for `k = 0..=n`; `n = 0` yields `[1]`.
///
/// The sequence is built from its first half and mirrored so that `±` pairs
/// are exact negatives, the endpoints are exactly `±1`, and the midpoint of an
/// even `n` is exactly `0`.
pub fn cheb_lobatto<T: Scalar>(n: usize) -> Vec<T> {
    if n == 0 {
        return vec![T::one()];
    }
    let mut out = vec![T::zero(); n + 1];
    let nf = T::from_count(n);
    for k in 0..=n / 2 {
        let v = if k == 0 {
            T::one()
        } else if 2 * k == n {
            T::zero()
        } else {
            (T::pi() * T::from_count(k) / nf).cos()
        };
        out[k] = v;
        out[n - k] = -v;
    }
    out
}

/// Greedy Leja ordering: the first point has maximal modulus, every further
/// point maximizes the product of distances to the points already chosen.
/// Ties go to the numerically larger value.
pub fn leja_order<T: Scalar>(points: &[T]) -> Result<Vec<T>> {
    let mut remaining: Vec<T> = points.to_vec();
    {
        let mut sorted = remaining.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePoint(w[0].to_f64_lossy()));
        }
    }
    let mut out = Vec::with_capacity(points.len());
    if remaining.is_empty() {
        return Ok(out);
    }

    let first = pick(&remaining, |p| p.abs().to_f64_lossy(), 0.0);
    out.push(remaining.swap_remove(first));

    // log Π_{i<j} |p - p_i| per remaining candidate
    let mut scores: Vec<f64> = remaining.iter().map(|&p| (p - out[0]).abs().to_f64_lossy().ln()).collect();
    while !remaining.is_empty() {
        let j = pick_scored(&remaining, &scores);
        let chosen = remaining.swap_remove(j);
        scores.swap_remove(j);
        for (s, &p) in scores.iter_mut().zip(&remaining) {
            *s += (p - chosen).abs().to_f64_lossy().ln();
        }
        out.push(chosen);
    }
    Ok(out)
}

fn pick<T: Scalar>(cands: &[T], key: impl Fn(T) -> f64, tol: f64) -> usize {
    let scores: Vec<f64> = cands.iter().map(|&c| key(c)).collect();
    pick_scored_tol(cands, &scores, tol)
}

fn pick_scored<T: Scalar>(cands: &[T], scores: &[f64]) -> usize {
    pick_scored_tol(cands, scores, LEJA_TIE_TOLERANCE)
}

fn pick_scored_tol<T: Scalar>(cands: &[T], scores: &[f64], tol: f64) -> usize {
    let mut best = 0;
    for i in 1..cands.len() {
        let (s, b) = (scores[i], scores[best]);
        if s > b + tol || ((s - b).abs() <= tol && cands[i] > cands[best]) {
            best = i;
        }
    }
    best
}

/// Per-dimension generating sequences `P_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Scalar")]
pub struct GeneratingPoints<T> {
    per_dimension: Vec<Vec<T>>,
}

impl<T: Scalar> GeneratingPoints<T> {
    /// Leja-ordered `Cheb_{n_i}` in each dimension. Dimensions with equal
    /// `n_i` share the identical sequence.
    pub fn leja_chebyshev(max_exponents: &[usize]) -> Self {
        let mut cache: BTreeMap<usize, Vec<T>> = BTreeMap::new();
        let per_dimension = max_exponents
            .iter()
            .map(|&n| {
                cache
                    .entry(n)
                    .or_insert_with(|| leja_order(&cheb_lobatto::<T>(n)).expect("Chebyshev nodes are distinct"))
                    .clone()
            })
            .collect();
        GeneratingPoints { per_dimension }
    }

    /// Arbitrary distinct points per dimension.
    pub fn from_sequences(per_dimension: Vec<Vec<T>>) -> Result<Self> {
        if per_dimension.is_empty() {
            return Err(Error::ZeroDimension);
        }
        for seq in &per_dimension {
            if seq.is_empty() {
                return Err(Error::Empty("generating sequence"));
            }
            for (i, a) in seq.iter().enumerate() {
                if seq[i + 1..].contains(a) {
                    return Err(Error::DuplicatePoint(a.to_f64_lossy()));
                }
            }
        }
        Ok(GeneratingPoints { per_dimension })
    }

    pub fn dim(&self) -> usize {
        self.per_dimension.len()
    }

    pub fn sequence(&self, i: usize) -> &[T] {
        &self.per_dimension[i]
    }

    pub fn sequences(&self) -> &[Vec<T>] {
        &self.per_dimension
    }

    /// The node `p_α`.
    pub fn point(&self, alpha: &[usize]) -> Vec<T> {
        alpha.iter().zip(&self.per_dimension).map(|(&a, seq)| seq[a]).collect()
    }

    /// Checks that the sequences can host `set`.
    pub fn check_supports(&self, set: &MultiIndexSet) -> Result<()> {
        if set.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: set.dim(), got: self.dim() });
        }
        let needed = set.max_exponents()?;
        for (i, (&n, seq)) in needed.iter().zip(&self.per_dimension).enumerate() {
            if seq.len() <= n {
                return Err(Error::InvalidArgument(format!(
                    "dimension {i} needs {} generating points, has {}",
                    n + 1,
                    seq.len()
                )));
            }
        }
        Ok(())
    }

    fn mapped(&self, from: &AxisBox<T>, to: &AxisBox<T>) -> Self {
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let per_dimension = self
            .per_dimension
            .iter()
            .enumerate()
            .map(|(i, seq)| {
                seq.iter()
                    .map(|&p| {
                        let t = two * (p - from.lo()[i]) / (from.hi()[i] - from.lo()[i]) - T::one();
                        to.lo()[i] + (t + T::one()) * (to.hi()[i] - to.lo()[i]) * half
                    })
                    .collect()
            })
            .collect();
        GeneratingPoints { per_dimension }
    }
}

/// The node set `P_A` together with the data that generated it.
#[derive(Clone, Debug, PartialEq)]
pub struct UnisolventNodes<T> {
    set: MultiIndexSet,
    gen: GeneratingPoints<T>,
    domain: AxisBox<T>,
    points: Vec<Vec<T>>,
}

/// `P_A` on `[-1,1]^m` from Leja-ordered Chebyshev–Lobatto generating points.
pub fn unisolvent_nodes<T: Scalar>(set: &MultiIndexSet) -> Result<UnisolventNodes<T>> {
    if set.is_empty() {
        return Err(Error::Empty("multi-index set"));
    }
    let gen = GeneratingPoints::leja_chebyshev(&set.max_exponents()?);
    UnisolventNodes::with_generating_points(set, gen)
}

/// Affinely maps nodes (and their generating points) onto `target`.
pub fn rescale_to_box<T: Scalar>(nodes: &UnisolventNodes<T>, target: &AxisBox<T>) -> Result<UnisolventNodes<T>> {
    let target = AxisBox::new(target.lo().to_vec(), target.hi().to_vec())?;
    if target.dim() != nodes.set.dim() {
        return Err(Error::DimensionMismatch { expected: nodes.set.dim(), got: target.dim() });
    }
    let gen = nodes.gen.mapped(&nodes.domain, &target);
    let points = nodes.set.iter().map(|a| gen.point(a)).collect();
    Ok(UnisolventNodes { set: nodes.set.clone(), gen, domain: target, points })
}

impl<T: Scalar> UnisolventNodes<T> {
    /// `P_A` for explicit generating points (any distinct points per
    /// dimension). `set` must be downward closed.
    pub fn with_generating_points(set: &MultiIndexSet, gen: GeneratingPoints<T>) -> Result<Self> {
        if let Some(alpha) = set.first_missing_predecessor() {
            return Err(Error::NotDownwardClosed(alpha));
        }
        gen.check_supports(set)?;
        let points = set.iter().map(|a| gen.point(a)).collect();
        Ok(UnisolventNodes { set: set.clone(), domain: AxisBox::reference(set.dim()), gen, points })
    }

    pub fn set(&self) -> &MultiIndexSet {
        &self.set
    }

    pub fn generating_points(&self) -> &GeneratingPoints<T> {
        &self.gen
    }

    pub fn domain(&self) -> &AxisBox<T> {
        &self.domain
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV rows `a1..am, x1..xm`, one per multi-index.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let m = self.set.dim();
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> =
            (1..=m).map(|i| format!("a{i}")).chain((1..=m).map(|i| format!("x{i}"))).collect();
        wtr.write_record(&header).map_err(csv_err)?;
        for (alpha, x) in self.set.iter().zip(&self.points) {
            let row: Vec<String> =
                alpha.iter().map(|a| a.to_string()).chain(x.iter().map(|v| format!("{v:?}"))).collect();
            wtr.write_record(&row).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Csv { line, msg: e.to_string() }
}
