//! Stability metrics: sampled Lebesgue constants, condition numbers,
//! pseudo-inverse norms and the approximation factor `Λ(P_A)·‖S_{A,P}‖_∞`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{eval_lagrange_basis, lagrange_matrix, LagrangeCoeffMatrix};
use crate::error::{Error, Result};
use crate::linalg::Factorization;
use crate::multiindex::MultiIndexSet;
use crate::nodes::GeneratingPoints;
use crate::sampling::{PointSet, Provenance};
use crate::scalar::Scalar;

/// `max_x Σ_α |L_α(x)|` over `samples`: a lower bound for `Λ(P_A)`.
pub fn lebesgue_estimate<T: Scalar>(lagrange: &LagrangeCoeffMatrix<T>, samples: &[Vec<T>]) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let mut best = T::zero();
    lagrange.for_each_block(samples, |_, block| {
        for row in block.row_iter() {
            best = best.max(row.iter().fold(T::zero(), |a, v| a + v.abs()));
        }
    })?;
    Ok(best)
}

/// [`lebesgue_estimate`] for the Lagrange basis of `P_A` built from `gen`.
pub fn lebesgue_estimate_for<T: Scalar>(set: &MultiIndexSet, gen: &GeneratingPoints<T>, samples: &[Vec<T>]) -> Result<T> {
    lebesgue_estimate(&lagrange_matrix(set, gen)?, samples)
}

/// `σ_max / σ_min`, or `+∞` below full numerical rank.
pub fn condition_number<T: Scalar>(r: &DMatrix<T>) -> Result<T> {
    Ok(Factorization::new(r.clone())?.cond())
}

/// Maximum absolute row sum of the Moore–Penrose pseudo-inverse of `r`.
pub fn pseudo_inverse_inf_norm<T: Scalar>(r: &DMatrix<T>) -> Result<T> {
    Factorization::new(r.clone())?.pinv_inf_norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StabilityReport<T> {
    pub lebesgue: T,
    /// Spectral condition number of `R_{A,P}`.
    pub cond: T,
    pub s_inf_norm: T,
    pub approx_factor: T,
    /// Size of the Λ sample set.
    pub sample_count: usize,
    pub seed: Option<u64>,
    /// Bytes held by the explicit pseudo-inverse.
    pub s_matrix_bytes: usize,
}

/// Assembles Λ, cond and `‖S‖_∞` for data points `points` (in `[-1,1]^m`).
pub fn approximation_factor<T: Scalar>(
    set: &MultiIndexSet,
    gen: &GeneratingPoints<T>,
    points: &[Vec<T>],
    samples: &PointSet<T>,
) -> Result<StabilityReport<T>> {
    if points.len() < set.len() {
        return Err(Error::Underdetermined { points: points.len(), terms: set.len() });
    }
    let lagrange = lagrange_matrix(set, gen)?;
    let lebesgue = lebesgue_estimate(&lagrange, &samples.points)?;
    let fac = Factorization::new(eval_lagrange_basis(&lagrange, points)?)?;
    let s_inf_norm = fac.pinv_inf_norm()?;
    Ok(StabilityReport {
        lebesgue,
        cond: fac.cond(),
        s_inf_norm,
        approx_factor: lebesgue * s_inf_norm,
        sample_count: samples.len(),
        seed: match samples.provenance {
            Provenance::Random { seed } => Some(seed),
            _ => None,
        },
        s_matrix_bytes: set.len() * points.len() * std::mem::size_of::<T>(),
    })
}

/// One line of the stability CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub m: usize,
    pub n: usize,
    pub p: String,
    pub distribution: String,
    pub points: usize,
    pub lebesgue: f64,
    pub cond: f64,
    pub s_inf_norm: f64,
    pub approx_factor: f64,
    pub seed: Option<u64>,
}

impl StabilityRow {
    pub fn new<T: Scalar>(set: &MultiIndexSet, distribution: &str, points: usize, report: &StabilityReport<T>) -> Self {
        StabilityRow {
            m: set.dim(),
            n: set.degree(),
            p: set.lp().map_or_else(|| "custom".into(), |p| p.to_string()),
            distribution: distribution.into(),
            points,
            lebesgue: report.lebesgue.to_f64_lossy(),
            cond: report.cond.to_f64_lossy(),
            s_inf_norm: report.s_inf_norm.to_f64_lossy(),
            approx_factor: report.approx_factor.to_f64_lossy(),
            seed: report.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::LpDegree;
    use crate::nodes::unisolvent_nodes;
    use crate::sampling::{equispaced_grid, random_uniform};

    #[test]
    fn lebesgue_on_nodes_is_one() {
        let set = MultiIndexSet::generate(2, 6, LpDegree::Euclidean).unwrap();
        let nodes = unisolvent_nodes::<f64>(&set).unwrap();
        let lam = lebesgue_estimate_for(&set, nodes.generating_points(), nodes.points()).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
        assert!(lebesgue_estimate_for(&set, nodes.generating_points(), &[]).is_err());
    }

    /// Lebesgue function of the Chebyshev extrema, maximised on a dense grid.
    fn dense_chebyshev_lebesgue(n: usize) -> f64 {
        let x: Vec<f64> = (0..=n).map(|j| (j as f64 * std::f64::consts::PI / n as f64).cos()).collect();
        (0..=100_000)
            .map(|i| {
                let t = -1.0 + 2.0 * i as f64 / 100_000.0;
                (0..=n)
                    .map(|j| (0..=n).filter(|&k| k != j).map(|k| (t - x[k]) / (x[j] - x[k])).product::<f64>().abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn one_dimensional_estimate_matches_dense_maximum() {
        let samples = random_uniform::<f64>(1, 10_000, 1).unwrap();
        for n in [4, 10, 17] {
            let set = MultiIndexSet::generate(1, n, LpDegree::Total).unwrap();
            let gen = GeneratingPoints::leja_chebyshev(&[n]);
            let lam = lebesgue_estimate_for(&set, &gen, &samples.points).unwrap();
            let dense = dense_chebyshev_lebesgue(n);
            assert!(lam <= dense * (1.0 + 1e-12) && lam > dense * 0.999, "n={n}: {lam} vs {dense}");
        }
    }

    #[test]
    fn report_on_unisolvent_nodes() {
        let set = MultiIndexSet::generate(2, 4, LpDegree::Maximum).unwrap();
        let nodes = unisolvent_nodes::<f64>(&set).unwrap();
        let samples = random_uniform::<f64>(2, 2000, 11).unwrap();
        let rep = approximation_factor(&set, nodes.generating_points(), nodes.points(), &samples).unwrap();
        assert!((rep.s_inf_norm - 1.0).abs() < 1e-12);
        assert!((rep.cond - 1.0).abs() < 1e-12);
        assert_eq!(rep.approx_factor, rep.lebesgue * rep.s_inf_norm);
        assert_eq!(rep.seed, Some(11));
        assert!(rep.lebesgue <= 6.2);
    }

    #[test]
    fn cond_and_norm_invariant_under_row_permutation() {
        let set = MultiIndexSet::generate(2, 5, LpDegree::Euclidean).unwrap();
        let gen = GeneratingPoints::leja_chebyshev(&[5, 5]);
        let pts = equispaced_grid::<f64>(2, 9).unwrap().points;
        let lag = lagrange_matrix(&set, &gen).unwrap();
        let r = eval_lagrange_basis(&lag, &pts).unwrap();
        let rev: Vec<Vec<f64>> = pts.iter().rev().cloned().collect();
        let r2 = eval_lagrange_basis(&lag, &rev).unwrap();
        let (c1, c2) = (condition_number(&r).unwrap(), condition_number(&r2).unwrap());
        assert!((c1 - c2).abs() < 1e-10 * c1);
        let (s1, s2) = (pseudo_inverse_inf_norm(&r).unwrap(), pseudo_inverse_inf_norm(&r2).unwrap());
        assert!((s1 - s2).abs() < 1e-10 * s1);
    }
}
