//! Newton and Lagrange bases of `Π_A` over unisolvent nodes, plus the tensorial
//! Chebyshev basis used as a regression baseline.
//!
//! With `N_α(x) = Π_i Π_{j<α_i} (x_i − p_{j,i})`, the evaluation matrix
//! `N(P_A)_{β,α} = N_α(p_β)` vanishes unless `α ≤ β` componentwise, so it is
//! lower triangular in lexicographic order. Interpolation is forward
//! substitution that only visits the box `[0, β]` below each row, and the
//! Lagrange coefficient matrix is the inverse of the same triangular matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndexSet;
use crate::nodes::GeneratingPoints;
use crate::scalar::Scalar;

/// Rows of the Newton evaluation matrix assembled per block in batch routines.
const EVAL_CHUNK: usize = 1024;

/// Upper bound on the dense index table before falling back to binary search.
const DENSE_LOOKUP_LIMIT: usize = 1 << 24;

/// A polynomial in `Π_A` stored by its Newton coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PolynomialNewton<T> {
    #[serde(rename = "A")]
    pub set: MultiIndexSet,
    #[serde(rename = "generating_points")]
    pub gen: GeneratingPoints<T>,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> PolynomialNewton<T> {
    pub fn new(set: MultiIndexSet, gen: GeneratingPoints<T>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != set.len() {
            return Err(Error::LengthMismatch { expected: set.len(), got: coeffs.len() });
        }
        gen.check_supports(&set)?;
        Ok(PolynomialNewton { set, gen, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        newton_eval(&self.set, &self.gen, &self.coeffs, x)
    }

    pub fn eval_many(&self, xs: &[Vec<T>]) -> Result<Vec<T>> {
        let mut ws = NewtonWorkspace::new(&self.set, &self.gen);
        xs.iter()
            .map(|x| {
                check_dim(self.dim(), x)?;
                Ok(ws.eval(&self.set, &self.gen, &self.coeffs, x))
            })
            .collect()
    }
}

fn check_dim<T>(m: usize, x: &[T]) -> Result<()> {
    if x.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: x.len() });
    }
    Ok(())
}

/// Scratch space for the per-dimension cumulative products at one point.
struct NewtonWorkspace<T> {
    offsets: Vec<usize>,
    prods: Vec<T>,
}

impl<T: Scalar> NewtonWorkspace<T> {
    fn new(set: &MultiIndexSet, gen: &GeneratingPoints<T>) -> Self {
        let degs = set.max_exponents().unwrap_or_else(|_| vec![0; gen.dim()]);
        let mut offsets = Vec::with_capacity(degs.len() + 1);
        let mut total = 0;
        for d in &degs {
            offsets.push(total);
            total += d + 1;
        }
        offsets.push(total);
        NewtonWorkspace { offsets, prods: vec![T::zero(); total] }
    }

    /// Fills `prods[i][k] = Π_{j<k} (x_i − p_{j,i})`; each factor is formed once.
    fn load(&mut self, gen: &GeneratingPoints<T>, x: &[T]) {
        for (i, &xi) in x.iter().enumerate() {
            let seq = gen.sequence(i);
            let (start, end) = (self.offsets[i], self.offsets[i + 1]);
            let mut acc = T::one();
            for (k, slot) in self.prods[start..end].iter_mut().enumerate() {
                *slot = acc;
                if k + 1 < end - start {
                    acc *= xi - seq[k];
                }
            }
        }
    }

    #[inline]
    fn basis_value(&self, alpha: &[usize]) -> T {
        alpha.iter().enumerate().fold(T::one(), |v, (i, &a)| v * self.prods[self.offsets[i] + a])
    }

    fn row(&mut self, set: &MultiIndexSet, gen: &GeneratingPoints<T>, x: &[T], out: &mut [T]) {
        self.load(gen, x);
        for (o, alpha) in out.iter_mut().zip(set.iter()) {
            *o = self.basis_value(alpha);
        }
    }

    fn eval(&mut self, set: &MultiIndexSet, gen: &GeneratingPoints<T>, coeffs: &[T], x: &[T]) -> T {
        self.load(gen, x);
        set.iter().zip(coeffs).fold(T::zero(), |s, (alpha, &c)| s + c * self.basis_value(alpha))
    }
}

/// `Σ_α coeffs_α N_α(x)`.
pub fn newton_eval<T: Scalar>(set: &MultiIndexSet, gen: &GeneratingPoints<T>, coeffs: &[T], x: &[T]) -> Result<T> {
    if coeffs.len() != set.len() {
        return Err(Error::LengthMismatch { expected: set.len(), got: coeffs.len() });
    }
    check_dim(set.dim(), x)?;
    check_dim(set.dim(), gen.sequences())?;
    Ok(NewtonWorkspace::new(set, gen).eval(set, gen, coeffs, x))
}

/// `|X| × |A|` matrix with entries `N_α(X_i)`.
pub fn newton_basis_matrix<T: Scalar>(set: &MultiIndexSet, gen: &GeneratingPoints<T>, xs: &[Vec<T>]) -> Result<DMatrix<T>> {
    let mut out = DMatrix::zeros(xs.len(), set.len());
    fill_newton_rows(set, gen, xs, &mut out)?;
    Ok(out)
}

fn fill_newton_rows<T: Scalar>(
    set: &MultiIndexSet,
    gen: &GeneratingPoints<T>,
    xs: &[Vec<T>],
    out: &mut DMatrix<T>,
) -> Result<()> {
    let mut ws = NewtonWorkspace::new(set, gen);
    let mut row = vec![T::zero(); set.len()];
    for (r, x) in xs.iter().enumerate() {
        check_dim(set.dim(), x)?;
        ws.row(set, gen, x, &mut row);
        for (c, &v) in row.iter().enumerate() {
            out[(r, c)] = v;
        }
    }
    Ok(())
}

/// Maps a multi-index to its position in the set.
enum IndexLookup {
    Dense { strides: Vec<usize>, table: Vec<usize> },
    Search,
}

impl IndexLookup {
    fn new(set: &MultiIndexSet, degs: &[usize]) -> Self {
        let mut strides = Vec::with_capacity(degs.len());
        let mut size = 1usize;
        for &d in degs {
            strides.push(size);
            size = match size.checked_mul(d + 1) {
                Some(s) if s <= DENSE_LOOKUP_LIMIT => s,
                _ => return IndexLookup::Search,
            };
        }
        let mut table = vec![usize::MAX; size];
        for (k, alpha) in set.iter().enumerate() {
            let key: usize = alpha.iter().zip(&strides).map(|(a, s)| a * s).sum();
            table[key] = k;
        }
        IndexLookup::Dense { strides, table }
    }

    #[inline]
    fn find(&self, set: &MultiIndexSet, alpha: &[usize]) -> usize {
        match self {
            IndexLookup::Dense { strides, table } => {
                table[alpha.iter().zip(strides).map(|(a, s)| a * s).sum::<usize>()]
            }
            IndexLookup::Search => set.position(alpha).unwrap_or(usize::MAX),
        }
    }
}

/// Triangular structure of `N(P_A)`: per-dimension tables
/// `w_i[a][b] = Π_{j<a} (p_{b,i} − p_{j,i})`, nonzero for `a ≤ b`.
struct NewtonTriangle<T> {
    degs: Vec<usize>,
    tables: Vec<Vec<T>>,
    lookup: IndexLookup,
}

impl<T: Scalar> NewtonTriangle<T> {
    fn new(set: &MultiIndexSet, gen: &GeneratingPoints<T>) -> Result<Self> {
        if let Some(alpha) = set.first_missing_predecessor() {
            return Err(Error::NotDownwardClosed(alpha));
        }
        gen.check_supports(set)?;
        let degs = set.max_exponents()?;
        let tables = degs
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let seq = gen.sequence(i);
                let w = d + 1;
                let mut t = vec![T::zero(); w * w];
                for b in 0..w {
                    let mut acc = T::one();
                    for a in 0..=b {
                        t[a * w + b] = acc;
                        acc *= seq[b] - seq[a];
                    }
                }
                t
            })
            .collect();
        let lookup = IndexLookup::new(set, &degs);
        Ok(NewtonTriangle { degs, tables, lookup })
    }

    #[inline]
    fn weight(&self, alpha: &[usize], beta: &[usize]) -> T {
        let mut v = T::one();
        for i in 0..alpha.len() {
            v *= self.tables[i][alpha[i] * (self.degs[i] + 1) + beta[i]];
        }
        v
    }

    /// Visits `(position(α), N_α(p_β))` for every `α ≤ β`, `α ≠ β`.
    fn for_each_below(&self, set: &MultiIndexSet, beta: &[usize], mut f: impl FnMut(usize, T)) {
        let m = beta.len();
        let mut alpha = vec![0usize; m];
        loop {
            if alpha.as_slice() == beta {
                return;
            }
            f(self.lookup.find(set, &alpha), self.weight(&alpha, beta));
            let mut i = 0;
            loop {
                if alpha[i] < beta[i] {
                    alpha[i] += 1;
                    break;
                }
                alpha[i] = 0;
                i += 1;
                if i == m {
                    return;
                }
            }
        }
    }
}

/// The unique interpolant in `Π_A` of `values` given at `P_A`.
pub fn newton_coeffs<T: Scalar>(set: &MultiIndexSet, gen: &GeneratingPoints<T>, values: &[T]) -> Result<PolynomialNewton<T>> {
    if values.len() != set.len() {
        return Err(Error::LengthMismatch { expected: set.len(), got: values.len() });
    }
    let tri = NewtonTriangle::new(set, gen)?;
    let mut coeffs = vec![T::zero(); set.len()];
    for (k, beta) in set.iter().enumerate() {
        let mut acc = values[k];
        tri.for_each_below(set, beta, |j, w| acc -= coeffs[j] * w);
        coeffs[k] = acc / tri.weight(beta, beta);
    }
    Ok(PolynomialNewton { set: set.clone(), gen: gen.clone(), coeffs })
}

/// Column `α` holds the Newton coefficients of the Lagrange polynomial `L_α`.
#[derive(Clone, Debug)]
pub struct LagrangeCoeffMatrix<T: Scalar> {
    pub set: MultiIndexSet,
    pub gen: GeneratingPoints<T>,
    pub matrix: DMatrix<T>,
}

/// Inverts the lower-triangular `N(P_A)` row by row; row `α` of the inverse
/// has support on columns `≤ α` only.
pub fn lagrange_matrix<T: Scalar>(set: &MultiIndexSet, gen: &GeneratingPoints<T>) -> Result<LagrangeCoeffMatrix<T>> {
    let tri = NewtonTriangle::new(set, gen)?;
    let n = set.len();
    let mut rows = vec![T::zero(); n * n];
    for (k, beta) in set.iter().enumerate() {
        let (done, rest) = rows.split_at_mut(k * n);
        let row = &mut rest[..n];
        row[k] = T::one();
        tri.for_each_below(set, beta, |j, w| {
            let src = &done[j * n..j * n + j + 1];
            for (dst, &s) in row[..=j].iter_mut().zip(src) {
                *dst -= w * s;
            }
        });
        let inv = T::one() / tri.weight(beta, beta);
        for v in row[..=k].iter_mut() {
            *v *= inv;
        }
    }
    Ok(LagrangeCoeffMatrix { set: set.clone(), gen: gen.clone(), matrix: DMatrix::from_row_slice(n, n, &rows) })
}

impl<T: Scalar> LagrangeCoeffMatrix<T> {
    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Position of `x` in `P_A` when it is exactly one of the nodes.
    pub fn node_index(&self, x: &[T]) -> Option<usize> {
        let alpha: Option<Vec<usize>> = x
            .iter()
            .zip(self.gen.sequences())
            .map(|(v, seq)| seq.iter().position(|g| g == v))
            .collect();
        self.set.position(&alpha?)
    }

    /// `L_α` in Newton form.
    pub fn lagrange_polynomial(&self, k: usize) -> PolynomialNewton<T> {
        PolynomialNewton {
            set: self.set.clone(),
            gen: self.gen.clone(),
            coeffs: self.matrix.column(k).iter().copied().collect(),
        }
    }

    /// Newton coefficients of `Σ_α c_α L_α`.
    pub fn to_newton(&self, lagrange_coeffs: &[T]) -> Result<PolynomialNewton<T>> {
        if lagrange_coeffs.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: lagrange_coeffs.len() });
        }
        let c = nalgebra::DVector::from_column_slice(lagrange_coeffs);
        let coeffs = (&self.matrix * c).iter().copied().collect();
        Ok(PolynomialNewton { set: self.set.clone(), gen: self.gen.clone(), coeffs })
    }

    /// Calls `f(first_row, block)` with consecutive blocks of `L_α(X_i)`.
    /// Rows of points that coincide exactly with a node are exact unit rows.
    pub fn for_each_block(&self, xs: &[Vec<T>], mut f: impl FnMut(usize, &DMatrix<T>)) -> Result<()> {
        let mut start = 0;
        for chunk in xs.chunks(EVAL_CHUNK) {
            let nx = newton_basis_matrix(&self.set, &self.gen, chunk)?;
            let mut block = nx * &self.matrix;
            for (i, x) in chunk.iter().enumerate() {
                if let Some(k) = self.node_index(x) {
                    block.row_mut(i).fill(T::zero());
                    block[(i, k)] = T::one();
                }
            }
            f(start, &block);
            start += chunk.len();
        }
        Ok(())
    }
}

/// `|X| × |A|` matrix of `L_α(X_i)`. Points outside `[-1,1]^m` are allowed.
pub fn eval_lagrange_basis<T: Scalar>(lagrange: &LagrangeCoeffMatrix<T>, xs: &[Vec<T>]) -> Result<DMatrix<T>> {
    let mut out = DMatrix::zeros(xs.len(), lagrange.len());
    lagrange.for_each_block(xs, |start, block| {
        out.rows_mut(start, block.nrows()).copy_from(block);
    })?;
    Ok(out)
}

/// `|X| × |A|` matrix of `Π_k T_{α_k}(x_k)` via the three-term recurrence.
pub fn eval_chebyshev_basis<T: Scalar>(set: &MultiIndexSet, xs: &[Vec<T>]) -> Result<DMatrix<T>> {
    let m = set.dim();
    let degs = set.max_exponents()?;
    let mut out = DMatrix::zeros(xs.len(), set.len());
    let mut tables: Vec<Vec<T>> = degs.iter().map(|&d| vec![T::zero(); d + 1]).collect();
    let two = T::lit(2.0);
    for (r, x) in xs.iter().enumerate() {
        check_dim(m, x)?;
        for (table, &xi) in tables.iter_mut().zip(x) {
            table[0] = T::one();
            if table.len() > 1 {
                table[1] = xi;
            }
            for k in 2..table.len() {
                table[k] = two * xi * table[k - 1] - table[k - 2];
            }
        }
        for (c, alpha) in set.iter().enumerate() {
            out[(r, c)] = alpha.iter().zip(&tables).fold(T::one(), |v, (&a, t)| v * t[a]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::LpDegree;
    use crate::nodes::unisolvent_nodes;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gen1(points: &[f64]) -> (MultiIndexSet, GeneratingPoints<f64>) {
        let set = MultiIndexSet::generate(1, points.len() - 1, LpDegree::Total).unwrap();
        let gen = GeneratingPoints::from_sequences(vec![points.to_vec()]).unwrap();
        (set, gen)
    }

    fn random_points(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
    }

    /// Dense `N(P_A)` straight from the product definition; test oracle.
    fn dense_newton_matrix(set: &MultiIndexSet, gen: &GeneratingPoints<f64>) -> DMatrix<f64> {
        let n = set.len();
        DMatrix::from_fn(n, n, |r, c| {
            let p = gen.point(set.get(r));
            let alpha = set.get(c);
            (0..set.dim())
                .map(|i| (0..alpha[i]).map(|j| p[i] - gen.sequence(i)[j]).product::<f64>())
                .product()
        })
    }

    fn forward_substitution(l: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        for i in 0..b.len() {
            let s: f64 = (0..i).map(|j| l[(i, j)] * x[j]).sum();
            x[i] = (b[i] - s) / l[(i, i)];
        }
        x
    }

    #[test]
    fn constant_basis_function() {
        let set = MultiIndexSet::generate(3, 3, LpDegree::Euclidean).unwrap();
        let nodes = unisolvent_nodes::<f64>(&set).unwrap();
        let mut c = vec![0.0; set.len()];
        c[0] = 1.0;
        for x in random_points(3, 10, 1) {
            assert_eq!(newton_eval(&set, nodes.generating_points(), &c, &x).unwrap(), 1.0);
        }
    }

    #[test]
    fn one_dimensional_newton_examples() {
        let (set, gen) = gen1(&[1.0, -1.0, 0.0]);
        assert_eq!(newton_eval(&set, &gen, &[0.0, 1.0, 0.0], &[0.0]).unwrap(), -1.0);
        // x² = 1 + 0·(x−1) + 1·(x−1)(x+1)
        assert_eq!(newton_eval(&set, &gen, &[1.0, 0.0, 1.0], &[0.5]).unwrap(), 0.25);
        assert!(newton_eval(&set, &gen, &[1.0, 0.0, 1.0], &[0.5, 0.1]).is_err());
    }

    #[test]
    fn divided_differences_of_a_square() {
        let (set, gen) = gen1(&[1.0, -1.0, 0.0]);
        let poly = newton_coeffs(&set, &gen, &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(poly.coeffs, vec![1.0, 0.0, 1.0]);
        assert!(newton_coeffs(&set, &gen, &[1.0]).is_err());
    }

    #[test]
    fn constants_and_basis_reproduction() {
        let set = MultiIndexSet::generate(2, 5, LpDegree::Euclidean).unwrap();
        let nodes = unisolvent_nodes::<f64>(&set).unwrap();
        let gen = nodes.generating_points();
        let poly = newton_coeffs(&set, gen, &vec![3.5; set.len()]).unwrap();
        assert!((poly.coeffs[0] - 3.5).abs() < 1e-14);
        assert!(poly.coeffs[1..].iter().all(|c| c.abs() < 1e-12));

        let nm = newton_basis_matrix(&set, gen, nodes.points()).unwrap();
        for g in 0..set.len() {
            let values: Vec<f64> = nm.column(g).iter().copied().collect();
            let c = newton_coeffs(&set, gen, &values).unwrap().coeffs;
            for (k, v) in c.iter().enumerate() {
                let want = if k == g { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10, "g={g} k={k} v={v}");
            }
        }
    }

    #[test]
    fn newton_matrix_is_lower_triangular_with_nonzero_diagonal() {
        for p in [LpDegree::Total, LpDegree::Euclidean, LpDegree::Maximum] {
            let set = MultiIndexSet::generate(3, 4, p).unwrap();
            let nodes = unisolvent_nodes::<f64>(&set).unwrap();
            let nm = newton_basis_matrix(&set, nodes.generating_points(), nodes.points()).unwrap();
            for r in 0..set.len() {
                assert!(nm[(r, r)].abs() > 1e-12);
                for c in r + 1..set.len() {
                    assert_eq!(nm[(r, c)], 0.0);
                }
            }
            assert_eq!(nm, dense_newton_matrix(&set, nodes.generating_points()));
        }
    }

    #[test]
    fn sparse_solver_matches_dense_forward_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n, p) in [(2, 9, LpDegree::Euclidean), (3, 5, LpDegree::Total), (2, 6, LpDegree::Maximum)] {
            let set = MultiIndexSet::generate(m, n, p).unwrap();
            let nodes = unisolvent_nodes::<f64>(&set).unwrap();
            let values: Vec<f64> = (0..set.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dense = forward_substitution(&dense_newton_matrix(&set, nodes.generating_points()), &values);
            let sparse = newton_coeffs(&set, nodes.generating_points(), &values).unwrap().coeffs;
            for (a, b) in dense.iter().zip(&sparse) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn linear_lagrange_basis() {
        let (set, gen) = gen1(&[1.0, -1.0]);
        let lag = lagrange_matrix(&set, &gen).unwrap();
        // inverse of [[1, 0], [1, -2]]; L_0 = (1 + x)/2 = 1 + (x - 1)/2
        let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, -0.5]);
        assert!((lag.matrix.clone() - want).abs().max() < 1e-15);
        let row = eval_lagrange_basis(&lag, &[vec![0.0]]).unwrap();
        assert!((row[(0, 0)] - 0.5).abs() < 1e-15 && (row[(0, 1)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lagrange_basis_is_cardinal_and_sums_to_one() {
        for (m, n, p) in [(2, 8, LpDegree::Euclidean), (3, 4, LpDegree::Total), (2, 5, LpDegree::Maximum)] {
            let set = MultiIndexSet::generate(m, n, p).unwrap();
            let nodes = unisolvent_nodes::<f64>(&set).unwrap();
            let lag = lagrange_matrix(&set, nodes.generating_points()).unwrap();
            let at_nodes = eval_lagrange_basis(&lag, nodes.points()).unwrap();
            assert_eq!(at_nodes, DMatrix::<f64>::identity(set.len(), set.len()));
            let nudged: Vec<Vec<f64>> = nodes.points().iter().map(|x| x.iter().map(|v| v + 1e-9).collect()).collect();
            let near = eval_lagrange_basis(&lag, &nudged).unwrap();
            assert!((near - DMatrix::<f64>::identity(set.len(), set.len())).abs().max() < 1e-6);

            let col_sum: Vec<f64> = (0..set.len()).map(|r| lag.matrix.row(r).sum()).collect();
            assert!((col_sum[0] - 1.0).abs() < 1e-12);
            assert!(col_sum[1..].iter().all(|v| v.abs() < 1e-12));

            let vals = eval_lagrange_basis(&lag, &random_points(m, 100, 3)).unwrap();
            for r in 0..vals.nrows() {
                assert!((vals.row(r).sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chebyshev_basis_examples() {
        let set = MultiIndexSet::generate(1, 2, LpDegree::Total).unwrap();
        let t = eval_chebyshev_basis(&set, &[vec![0.0], vec![0.3]]).unwrap();
        assert_eq!(t[(0, 0)], 1.0);
        assert_eq!(t[(1, 0)], 1.0);
        assert_eq!(t[(0, 2)], -1.0);
        let set2 = MultiIndexSet::generate(2, 1, LpDegree::Maximum).unwrap();
        let t2 = eval_chebyshev_basis(&set2, &[vec![0.5, 0.5]]).unwrap();
        let k = set2.position(&[1, 1]).unwrap();
        assert_eq!(t2[(0, k)], 0.25);
    }

    #[test]
    fn works_in_single_precision() {
        let set = MultiIndexSet::generate(2, 4, LpDegree::Euclidean).unwrap();
        let nodes = unisolvent_nodes::<f32>(&set).unwrap();
        let values: Vec<f32> = nodes.points().iter().map(|p| p[0] * p[1] + 1.0).collect();
        let poly = newton_coeffs(&set, nodes.generating_points(), &values).unwrap();
        let v = poly.eval(&[0.25, -0.5]).unwrap();
        assert!((v - 0.875).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn interpolation_reproduces_node_values(m in 1usize..4, n in 0usize..16, which in 0usize..3, seed in any::<u64>()) {
            let p = [LpDegree::Total, LpDegree::Euclidean, LpDegree::Maximum][which];
            let set = MultiIndexSet::generate(m, n, p).unwrap();
            let nodes = unisolvent_nodes::<f64>(&set).unwrap();
            let gen = nodes.generating_points();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<f64> = (0..set.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let poly = PolynomialNewton::new(set.clone(), gen.clone(), coeffs).unwrap();
            let values = poly.eval_many(nodes.points()).unwrap();
            let back = newton_coeffs(&set, gen, &values).unwrap().eval_many(nodes.points()).unwrap();
            let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for (a, b) in values.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * scale, "{} vs {}", a, b);
            }
        }
    }
}
