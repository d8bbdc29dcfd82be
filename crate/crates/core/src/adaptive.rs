//! Oracle-driven adaptive domain decomposition and global merging.
//!
//! Each subdomain probes a few regression degrees, fits `μ_k ≈ c ρ^{-k}` to the
//! residuals and predicts the smallest degree reaching the tolerance. A node is
//! halved when its children's predicted coefficient total undercuts its own,
//! or when its own fit misses the tolerance.

use serde::{Deserialize, Serialize};

use crate::basis::newton_coeffs;
use crate::domain::AxisBox;
use crate::error::{Error, Result};
use crate::multiindex::{cardinality, LpDegree, MultiIndexSet};
use crate::nodes::{GeneratingPoints, UnisolventNodes};
use crate::regression::{evaluate_regressor, least_squares_fit_in, BasisKind, Model, RegressionFit};
use crate::scalar::Scalar;

/// Residuals are clamped to this floor before taking logarithms.
pub const RESIDUAL_FLOOR: f64 = 1e-16;

/// Growth ratios at or below `1 + NO_DECAY_MARGIN` count as no decay.
pub const NO_DECAY_MARGIN: f64 = 1e-6;

/// `μ(k) ≈ c ρ^{-k}` fitted to probe residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub rho: f64,
    pub probes: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decay {
    Fit(DecayFit),
    NoDecay { probes: Vec<(usize, f64)> },
}

/// Least-squares line through `(k, ln μ_k)`.
pub fn fit_decay(probes: &[(usize, f64)]) -> Result<Decay> {
    let usable: Vec<(usize, f64)> = probes.iter().copied().filter(|(_, mu)| mu.is_finite() && *mu >= 0.0).collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientProbes(usable.len()));
    }
    let n = usable.len() as f64;
    let pts: Vec<(f64, f64)> = usable.iter().map(|&(k, mu)| (k as f64, mu.max(RESIDUAL_FLOOR).ln())).collect();
    let kx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ly = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - kx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientProbes(1));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - kx) * (p.1 - ly)).sum();
    let slope = sxy / sxx;
    let rho = (-slope).exp();
    if rho <= 1.0 + NO_DECAY_MARGIN {
        return Ok(Decay::NoDecay { probes: usable });
    }
    let c = (ly - slope * kx).exp();
    Ok(Decay::Fit(DecayFit { c, rho, probes: usable }))
}

/// Smallest `k ≥ 1` with `c ρ^{-k} < ε`; `None` for a no-decay signal.
///
/// The inequality is decided on the log scale, and a tie within roundoff
/// counts as not below `ε`.
pub fn predict_degree(decay: &Decay, eps: f64) -> Result<Option<usize>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {eps}")));
    }
    let fit = match decay {
        Decay::NoDecay { .. } => return Ok(None),
        Decay::Fit(fit) => fit,
    };
    let target = (fit.c / eps).ln();
    let lr = fit.rho.ln();
    let slack = 1e-12 * target.abs().max(1.0);
    let below = |k: usize| k as f64 * lr - target > slack;
    let guess = (target / lr).floor();
    if !guess.is_finite() || guess > 1e9 {
        return Ok(None);
    }
    let mut k = (guess.max(0.0) as usize).max(1);
    while k > 1 && below(k - 1) {
        k -= 1;
    }
    while !below(k) {
        k += 1;
    }
    Ok(Some(k))
}

/// `true` (subdivide) iff `|A_{m,n₀,p}| > Σ_j |A_{m,n_j,p}|`.
///
/// `None` marks an unreachable degree: an unreachable parent always
/// subdivides, an unreachable child under a reachable parent never does.
pub fn oracle_decide(parent: Option<usize>, children: &[Option<usize>], m: usize, p: LpDegree) -> bool {
    let Some(n0) = parent else { return true };
    let mut total = 0usize;
    for c in children {
        match c {
            Some(n) => total = total.saturating_add(cardinality(m, *n, p)),
            None => return false,
        }
    }
    cardinality(m, n0, p) > total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub p: LpDegree,
    /// Target max-norm residual `ε` per subdomain.
    pub tolerance: f64,
    pub max_depth: usize,
    /// Degrees probed for the decay fit, ascending.
    pub probe_degrees: Vec<usize>,
    /// Degrees above this are treated as unreachable.
    pub max_degree: usize,
}

impl AdaptiveConfig {
    pub fn new(p: LpDegree, tolerance: f64, max_depth: usize) -> Self {
        AdaptiveConfig { p, tolerance, max_depth, probe_degrees: vec![2, 4, 6, 8], max_degree: 30 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.probe_degrees.is_empty() {
            return Err(Error::InvalidArgument("probe schedule is empty".into()));
        }
        if self.probe_degrees.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("probe degrees must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Leaf,
    Subdivided,
    /// Too few points for the smallest probe degree; carries no fit.
    DataStarved,
}

#[derive(Clone, Debug)]
pub struct DecompositionNode<T: Scalar> {
    pub domain: AxisBox<T>,
    pub depth: usize,
    pub status: NodeStatus,
    /// `None` when no admissible degree is predicted to reach the tolerance.
    pub predicted_degree: Option<usize>,
    pub probes: Vec<(usize, f64)>,
    pub n_points: usize,
    pub fit: Option<RegressionFit<T>>,
    pub tolerance_violated: bool,
    pub children: Vec<usize>,
    point_ids: Vec<usize>,
}

impl<T: Scalar> DecompositionNode<T> {
    pub fn fitted_degree(&self) -> Option<usize> {
        self.fit.as_ref().map(|f| f.set.degree())
    }
}

/// Arena of nodes; index 0 is the root.
#[derive(Clone, Debug)]
pub struct DecompositionTree<T: Scalar> {
    pub config: AdaptiveConfig,
    pub nodes: Vec<DecompositionNode<T>>,
    pub data_points: usize,
}

/// Result of probing one subdomain.
struct Probe {
    probes: Vec<(usize, f64)>,
    degree: Option<usize>,
    starved: bool,
}

struct Builder<'a, T: Scalar> {
    cfg: &'a AdaptiveConfig,
    m: usize,
    points: &'a [Vec<T>],
    values: &'a [T],
    root: AxisBox<T>,
}

impl<T: Scalar> Builder<'_, T> {
    /// Largest degree within the cap whose space the point count supports.
    fn max_supported(&self, count: usize) -> Option<usize> {
        (0..=self.cfg.max_degree).take_while(|&n| cardinality(self.m, n, self.cfg.p) <= count).last()
    }

    fn fit(&self, domain: &AxisBox<T>, ids: &[usize], n: usize) -> Result<RegressionFit<T>> {
        let set = MultiIndexSet::generate(self.m, n, self.cfg.p)?;
        let gen = GeneratingPoints::leja_chebyshev(&set.max_exponents()?);
        let pts: Vec<Vec<T>> = ids.iter().map(|&i| self.points[i].clone()).collect();
        let vals: Vec<T> = ids.iter().map(|&i| self.values[i]).collect();
        least_squares_fit_in(domain, &set, &gen, &pts, &vals, BasisKind::LagrangeNewton)
    }

    fn probe(&self, domain: &AxisBox<T>, ids: &[usize]) -> Result<Probe> {
        let smallest = self.cfg.probe_degrees[0];
        let n_max = match self.max_supported(ids.len()) {
            Some(n) if cardinality(self.m, smallest, self.cfg.p) <= ids.len() => n,
            _ => return Ok(Probe { probes: Vec::new(), degree: None, starved: true }),
        };
        let mut probes = Vec::new();
        for &k in self.cfg.probe_degrees.iter().filter(|&&k| k <= n_max) {
            let mu = self.fit(domain, ids, k)?.mu.to_f64_lossy();
            probes.push((k, mu));
            if mu <= RESIDUAL_FLOOR {
                return Ok(Probe { probes, degree: Some(k), starved: false });
            }
        }
        let degree = if probes.len() < 2 {
            probes.first().filter(|(_, mu)| *mu < self.cfg.tolerance).map(|&(k, _)| k)
        } else {
            predict_degree(&fit_decay(&probes)?, self.cfg.tolerance)?.filter(|&n| n <= n_max)
        };
        Ok(Probe { probes, degree, starved: false })
    }

    fn node(&self, domain: AxisBox<T>, depth: usize, point_ids: Vec<usize>) -> Result<DecompositionNode<T>> {
        let pr = self.probe(&domain, &point_ids)?;
        Ok(DecompositionNode {
            domain,
            depth,
            status: if pr.starved { NodeStatus::DataStarved } else { NodeStatus::Leaf },
            predicted_degree: pr.degree,
            probes: pr.probes,
            n_points: point_ids.len(),
            fit: None,
            tolerance_violated: false,
            children: Vec::new(),
            point_ids,
        })
    }
}

/// Runs the breadth-first decomposition of `root` for data `(points, values)`.
///
/// Points outside `root` are ignored. Every node at depth `< max_depth`
/// probes its `2^m` halves and subdivides when [`oracle_decide`] says so or
/// when its own fit at the predicted degree exceeds the tolerance. Leaves at
/// `max_depth` without a reachable degree are fitted at the largest degree
/// their data supports and flagged if they miss the tolerance.
pub fn adaptive_regression<T: Scalar>(
    root: &AxisBox<T>,
    points: &[Vec<T>],
    values: &[T],
    cfg: &AdaptiveConfig,
) -> Result<DecompositionTree<T>> {
    cfg.validate()?;
    let m = root.dim();
    if values.len() != points.len() {
        return Err(Error::LengthMismatch { expected: points.len(), got: values.len() });
    }
    if let Some(bad) = points.iter().find(|p| p.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: bad.len() });
    }
    let ids: Vec<usize> = (0..points.len()).filter(|&i| root.owns(&points[i], root)).collect();
    if ids.is_empty() {
        return Err(Error::Empty("data set inside the root box"));
    }
    let b = Builder { cfg, m, points, values, root: root.clone() };
    let data_points = ids.len();
    let mut nodes = vec![b.node(root.clone(), 0, ids)?];
    let mut frontier = vec![0usize];

    while !frontier.is_empty() {
        let mut next = Vec::new();
        for id in frontier {
            if nodes[id].status == NodeStatus::DataStarved {
                continue;
            }
            let depth = nodes[id].depth;
            if depth >= cfg.max_depth {
                let node = &nodes[id];
                let n = node.predicted_degree.or_else(|| b.max_supported(node.n_points)).unwrap_or(0);
                let fit = b.fit(&node.domain, &node.point_ids, n)?;
                let node = &mut nodes[id];
                node.tolerance_violated = fit.mu.to_f64_lossy() > cfg.tolerance;
                node.fit = Some(fit);
                continue;
            }

            let mut kids = Vec::with_capacity(1 << m);
            for child_box in nodes[id].domain.halve() {
                let owned: Vec<usize> =
                    nodes[id].point_ids.iter().copied().filter(|&i| child_box.owns(&points[i], &b.root)).collect();
                kids.push(b.node(child_box, depth + 1, owned)?);
            }
            let child_degrees: Vec<Option<usize>> =
                kids.iter().map(|k| if k.status == NodeStatus::DataStarved { None } else { k.predicted_degree }).collect();
            let mut split = oracle_decide(nodes[id].predicted_degree, &child_degrees, m, cfg.p);
            if !split {
                let node = &nodes[id];
                let n = node.predicted_degree.expect("reachable parent when the oracle keeps it");
                let fit = b.fit(&node.domain, &node.point_ids, n)?;
                if fit.mu.to_f64_lossy() <= cfg.tolerance {
                    nodes[id].fit = Some(fit);
                } else {
                    split = true;
                }
            }
            if split {
                let first = nodes.len();
                nodes.extend(kids);
                let node = &mut nodes[id];
                node.status = NodeStatus::Subdivided;
                node.children = (first..first + (1 << m)).collect();
                node.point_ids = Vec::new();
                next.extend(first..first + (1 << m));
            }
        }
        frontier = next;
    }
    Ok(DecompositionTree { config: cfg.clone(), nodes, data_points })
}

/// Per-node JSON view.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct NodeRecord<T: Scalar> {
    pub id: usize,
    pub depth: usize,
    pub domain: AxisBox<T>,
    pub status: NodeStatus,
    pub predicted_degree: Option<usize>,
    pub fitted_degree: Option<usize>,
    pub n_points: usize,
    pub probes: Vec<(usize, f64)>,
    pub tolerance_violated: bool,
    pub children: Vec<usize>,
    pub model: Option<Model<T>>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
struct TreeRecord<'a, T: Scalar> {
    config: &'a AdaptiveConfig,
    data_points: usize,
    summary: AdaptiveSummary,
    nodes: Vec<NodeRecord<T>>,
}

/// Counts reported per decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveSummary {
    pub p: String,
    pub tolerance: f64,
    /// Fitted leaves, i.e. individual regressors.
    pub regressors: usize,
    /// `|C|`, the total coefficient count over all regressors.
    pub coefficients: usize,
    /// `|dataset| / |C|`.
    pub cf: f64,
    pub data_points: usize,
    pub depth: usize,
    pub tolerance_violated: usize,
    pub data_starved: usize,
}

impl<T: Scalar> DecompositionTree<T> {
    pub fn root(&self) -> &DecompositionNode<T> {
        &self.nodes[0]
    }

    pub fn dim(&self) -> usize {
        self.root().domain.dim()
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &DecompositionNode<T>)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.status != NodeStatus::Subdivided)
    }

    pub fn fitted_leaves(&self) -> impl Iterator<Item = &DecompositionNode<T>> {
        self.nodes.iter().filter(|n| n.fit.is_some())
    }

    pub fn summary(&self) -> AdaptiveSummary {
        let coefficients: usize = self.fitted_leaves().map(|n| n.fit.as_ref().map_or(0, |f| f.set.len())).sum();
        AdaptiveSummary {
            p: self.config.p.to_string(),
            tolerance: self.config.tolerance,
            regressors: self.fitted_leaves().count(),
            coefficients,
            cf: if coefficients == 0 { 0.0 } else { self.data_points as f64 / coefficients as f64 },
            data_points: self.data_points,
            depth: self.nodes.iter().map(|n| n.depth).max().unwrap_or(0),
            tolerance_violated: self.nodes.iter().filter(|n| n.tolerance_violated).count(),
            data_starved: self.nodes.iter().filter(|n| n.status == NodeStatus::DataStarved).count(),
        }
    }

    /// Index of the leaf that owns `x` under the half-open rule.
    pub fn owner(&self, x: &[T]) -> Option<usize> {
        let root = &self.root().domain;
        if !root.owns(x, root) {
            return None;
        }
        let mut id = 0;
        while !self.nodes[id].children.is_empty() {
            id = *self.nodes[id].children.iter().find(|&&c| self.nodes[c].domain.owns(x, root))?;
        }
        Some(id)
    }

    /// Evaluates the piecewise regressor.
    pub fn eval_many(&self, xs: &[Vec<T>]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); xs.len()];
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for (i, x) in xs.iter().enumerate() {
            if x.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
            }
            let leaf = self.owner(x).ok_or_else(|| Error::InvalidArgument("point outside the root box".into()))?;
            groups[leaf].push(i);
        }
        for (leaf, ids) in groups.iter().enumerate().filter(|(_, g)| !g.is_empty()) {
            let fit = self.nodes[leaf]
                .fit
                .as_ref()
                .ok_or_else(|| Error::UnfittedLeaf { node: xs[ids[0]].iter().map(|v| v.to_f64_lossy()).collect() })?;
            let pts: Vec<Vec<T>> = ids.iter().map(|&i| xs[i].clone()).collect();
            for (&i, q) in ids.iter().zip(evaluate_regressor(fit, &pts)?) {
                out[i] = q;
            }
        }
        Ok(out)
    }

    pub fn records(&self) -> Vec<NodeRecord<T>> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(id, n)| NodeRecord {
                id,
                depth: n.depth,
                domain: n.domain.clone(),
                status: n.status,
                predicted_degree: n.predicted_degree,
                fitted_degree: n.fitted_degree(),
                n_points: n.n_points,
                probes: n.probes.clone(),
                tolerance_violated: n.tolerance_violated,
                children: n.children.clone(),
                model: n.fit.as_ref().map(RegressionFit::to_model),
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let rec = TreeRecord { config: &self.config, data_points: self.data_points, summary: self.summary(), nodes: self.records() };
        Ok(serde_json::to_string_pretty(&rec)?)
    }
}

/// One global polynomial interpolating the piecewise regressors at `P_{A_global}`.
#[derive(Clone, Debug)]
pub struct MergedPolynomial<T: Scalar> {
    /// Newton form on `[-1,1]^m`, mapped onto the root box.
    pub model: Model<T>,
    /// Owning leaf of each global node, in the order of `A_global`.
    pub owners: Vec<usize>,
}

impl<T: Scalar> MergedPolynomial<T> {
    pub fn eval_many(&self, xs: &[Vec<T>]) -> Result<Vec<T>> {
        self.model.eval_many(xs)
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }
}

/// Interpolates the tree's regressors on the unisolvent nodes of `global`
/// placed in the root box.
pub fn merge_global<T: Scalar>(tree: &DecompositionTree<T>, global: &MultiIndexSet) -> Result<MergedPolynomial<T>> {
    let m = tree.dim();
    if global.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: global.dim() });
    }
    let root = tree.root().domain.clone();
    let gen = GeneratingPoints::<T>::leja_chebyshev(&global.max_exponents()?);
    let nodes = UnisolventNodes::with_generating_points(global, gen.clone())?;
    let placed: Vec<Vec<T>> = nodes.points().iter().map(|p| root.from_reference(p)).collect();
    let owners: Vec<usize> = placed
        .iter()
        .map(|x| tree.owner(x).ok_or_else(|| Error::InvalidArgument("global node outside the root box".into())))
        .collect::<Result<_>>()?;
    let values = tree.eval_many(&placed)?;
    let polynomial = newton_coeffs(global, &gen, &values)?;
    let model = Model { polynomial, domain: (!root.is_reference()).then_some(root), diagnostics: None };
    Ok(MergedPolynomial { model, owners })
}
