//! Data-point distributions on `[-1,1]^m` and the benchmark test functions.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodes::csv_err;
use crate::scalar::Scalar;

/// Where a point set came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum Provenance {
    Equispaced { per_dim: usize },
    Legendre { per_dim: usize },
    Random { seed: u64 },
    Halton,
    Sobol,
    Csv,
    Custom,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Equispaced { .. } => write!(f, "equispaced"),
            Provenance::Legendre { .. } => write!(f, "legendre"),
            Provenance::Random { .. } => write!(f, "random"),
            Provenance::Halton => write!(f, "halton"),
            Provenance::Sobol => write!(f, "sobol"),
            Provenance::Csv => write!(f, "csv"),
            Provenance::Custom => write!(f, "custom"),
        }
    }
}

/// A finite set of points in `R^m`, optionally carrying function values.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet<T> {
    pub m: usize,
    pub points: Vec<Vec<T>>,
    pub values: Option<Vec<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> PointSet<T> {
    pub fn new(m: usize, points: Vec<Vec<T>>, provenance: Provenance) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(bad) = points.iter().find(|p| p.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: bad.len() });
        }
        Ok(PointSet { m, points, values: None, provenance })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_values(mut self, values: Vec<T>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::LengthMismatch { expected: self.points.len(), got: values.len() });
        }
        self.values = Some(values);
        Ok(self)
    }

    /// Attaches `f(p)` for every point.
    pub fn sample(self, f: &TestFunction) -> Result<Self> {
        if f.dim() != self.m {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: self.m });
        }
        let values = self.points.iter().map(|p| f.eval(p)).collect();
        self.with_values(values)
    }

    pub fn within_reference_cube(&self) -> bool {
        self.points.iter().flatten().all(|&v| v >= -T::one() && v <= T::one())
    }

    /// Reads `x1..xm[,f]` CSV. With `require_values`, a missing `f` column is an error.
    pub fn read_csv<R: Read>(r: R, require_values: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(r);
        let header = rdr.headers().map_err(csv_err)?.clone();
        let mut m = 0;
        for (i, name) in header.iter().enumerate() {
            if name == format!("x{}", i + 1) {
                m = i + 1;
            } else {
                break;
            }
        }
        if m == 0 {
            return Err(Error::Csv { line: 1, msg: "header must start with coordinate columns x1..xm".into() });
        }
        let value_col = match header.get(m) {
            Some("f") => Some(m),
            Some(other) => {
                return Err(Error::Csv { line: 1, msg: format!("unexpected column '{other}', expected value column 'f'") })
            }
            None if require_values => {
                return Err(Error::Csv { line: 1, msg: "missing value column 'f'".into() });
            }
            None => None,
        };
        let width = m + value_col.is_some() as usize;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != width {
                return Err(Error::Csv { line, msg: format!("expected {width} fields, found {}", rec.len()) });
            }
            let parse = |s: &str, col: usize| -> Result<T> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(T::lit)
                    .ok_or_else(|| Error::Csv { line, msg: format!("column {}: cannot parse '{s}'", &header[col]) })
            };
            let p = (0..m).map(|c| parse(&rec[c], c)).collect::<Result<Vec<T>>>()?;
            points.push(p);
            if let Some(c) = value_col {
                values.push(parse(&rec[c], c)?);
            }
        }
        let mut set = PointSet::new(m, points, Provenance::Csv)?;
        if value_col.is_some() {
            set = set.with_values(values)?;
        }
        Ok(set)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.m).map(|i| format!("x{i}")).collect();
        if self.values.is_some() {
            header.push("f".into());
        }
        wtr.write_record(&header).map_err(csv_err)?;
        for (k, p) in self.points.iter().enumerate() {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            if let Some(vals) = &self.values {
                row.push(format!("{:?}", vals[k]));
            }
            wtr.write_record(&row).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Full tensor product of `axis` in `m` dimensions; the first coordinate varies fastest.
fn tensor_grid<T: Scalar>(m: usize, axis: &[T]) -> Vec<Vec<T>> {
    let k = axis.len();
    let total = k.pow(m as u32);
    (0..total)
        .map(|mut code| {
            (0..m)
                .map(|_| {
                    let v = axis[code % k];
                    code /= k;
                    v
                })
                .collect()
        })
        .collect()
}

/// `k` equidistant values per axis, endpoints `±1` included.
pub fn equispaced_grid<T: Scalar>(m: usize, k_per_dim: usize) -> Result<PointSet<T>> {
    if k_per_dim < 2 {
        return Err(Error::InvalidArgument(format!("equispaced grid needs at least 2 points per axis, got {k_per_dim}")));
    }
    let step = T::lit(2.0) / T::from_count(k_per_dim - 1);
    let mut axis: Vec<T> = (0..k_per_dim).map(|i| -T::one() + step * T::from_count(i)).collect();
    axis[k_per_dim - 1] = T::one();
    if k_per_dim % 2 == 1 {
        axis[k_per_dim / 2] = T::zero();
    }
    PointSet::new(m, tensor_grid(m, &axis), Provenance::Equispaced { per_dim: k_per_dim })
}

/// `(P_k(x), P_k'(x))` by the three-term recurrence.
pub fn legendre_eval<T: Scalar>(k: usize, x: T) -> (T, T) {
    let (mut p0, mut p1) = (T::one(), x);
    if k == 0 {
        return (T::one(), T::zero());
    }
    for j in 2..=k {
        let jf = T::from_count(j);
        let p2 = ((T::lit(2.0) * jf - T::one()) * x * p1 - (jf - T::one()) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let kf = T::from_count(k);
    let dp = kf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Roots of `P_k` in increasing order, by Newton iteration.
pub fn legendre_nodes<T: Scalar>(k: usize) -> Vec<T> {
    let mut out = vec![T::zero(); k];
    let tol = T::lit(1e-15).max(T::default_epsilon() * T::lit(4.0));
    for i in 0..k / 2 {
        let guess = (T::pi() * (T::from_count(i) + T::lit(0.75)) / (T::from_count(k) + T::lit(0.5))).cos();
        let mut x = guess;
        for _ in 0..100 {
            let (p, dp) = legendre_eval(k, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < tol {
                break;
            }
        }
        out[k - 1 - i] = x;
        out[i] = -x;
    }
    out
}

/// Tensor grid of Gauss–Legendre nodes.
pub fn legendre_grid<T: Scalar>(m: usize, k_per_dim: usize) -> Result<PointSet<T>> {
    if k_per_dim == 0 {
        return Err(Error::InvalidArgument("Legendre grid needs at least one node per axis".into()));
    }
    PointSet::new(m, tensor_grid(m, &legendre_nodes::<T>(k_per_dim)), Provenance::Legendre { per_dim: k_per_dim })
}

/// I.i.d. uniform points on `[-1,1]^m` from a seeded ChaCha8 stream.
pub fn random_uniform<T: Scalar>(m: usize, count: usize, seed: u64) -> Result<PointSet<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count).map(|_| (0..m).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect()).collect();
    PointSet::new(m, points, Provenance::Random { seed })
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut value, mut scale) = (0.0, inv);
    while i > 0 {
        value += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    value
}

/// Halton sequence (indices `1..=count`, bases = first `m` primes) mapped to `[-1,1]^m`.
pub fn halton<T: Scalar>(m: usize, count: usize) -> Result<PointSet<T>> {
    let bases = first_primes(m);
    let points = (1..=count as u64)
        .map(|i| bases.iter().map(|&b| T::lit(2.0 * radical_inverse(i, b) - 1.0)).collect())
        .collect();
    PointSet::new(m, points, Provenance::Halton)
}

/// Primitive-polynomial data `(degree s, coefficient bits a, initial m_k)` for
/// Sobol dimensions 2..=8, from the Joe–Kuo `new-joe-kuo-6.21201` table.
const SOBOL_TABLE: [(u32, u32, &[u32]); 7] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
];

pub const SOBOL_MAX_DIM: usize = SOBOL_TABLE.len() + 1;
const SOBOL_BITS: u32 = 32;

fn sobol_directions(dim: usize) -> Vec<u32> {
    let mut v = vec![0u32; SOBOL_BITS as usize];
    if dim == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (SOBOL_BITS - 1 - k as u32);
        }
        return v;
    }
    let (s, a, init) = SOBOL_TABLE[dim - 1];
    let s = s as usize;
    for k in 0..s.min(v.len()) {
        v[k] = init[k] << (SOBOL_BITS - 1 - k as u32);
    }
    for k in s..v.len() {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// Sobol sequence (Gray-code order, starting after the origin) mapped to `[-1,1]^m`.
pub fn sobol<T: Scalar>(m: usize, count: usize) -> Result<PointSet<T>> {
    if m > SOBOL_MAX_DIM {
        return Err(Error::UnsupportedDimension { requested: m, max: SOBOL_MAX_DIM });
    }
    if count >= 1usize << SOBOL_BITS.min(usize::BITS - 1) {
        return Err(Error::InvalidArgument(format!("Sobol sequence supports fewer than 2^{SOBOL_BITS} points")));
    }
    let dirs: Vec<Vec<u32>> = (0..m).map(sobol_directions).collect();
    let mut state = vec![0u32; m];
    let scale = 1.0 / (1u64 << SOBOL_BITS) as f64;
    let mut points = Vec::with_capacity(count);
    for i in 0..count as u64 {
        // bit flipped between index i and i+1 in Gray code
        let c = (!i).trailing_zeros() as usize;
        for (s, d) in state.iter_mut().zip(&dirs) {
            *s ^= d[c];
        }
        points.push(state.iter().map(|&s| T::lit(2.0 * s as f64 * scale - 1.0)).collect());
    }
    PointSet::new(m, points, Provenance::Sobol)
}

/// Benchmark functions.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `1 / (1 + r‖x‖²)`
    Runge { r: f64, m: usize },
    /// `1/(1 + 50‖x−x₁‖²) − 1/(1 + 5‖x−x₂‖²)`, `x₁ = −(0.65, 0.5)`, `x₂ = (0.5, 0.65)`
    CombinedRunge,
    /// `exp(−‖x−x₀‖²)(cos(πk η·x) + sin(πk η·x))`, `x₀ = (−0.45, 0.65)`, `η = (0.1, 0.7)`, `k = 25`
    GaussianSine,
    /// `x₁x₂²x₃³` on the closed positive octant, `0` elsewhere.
    PiecewisePoly,
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Runge { m, .. } => *m,
            TestFunction::CombinedRunge | TestFunction::GaussianSine => 2,
            TestFunction::PiecewisePoly => 3,
        }
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let sq = |x: &[T], c: &[f64]| x.iter().zip(c).fold(T::zero(), |s, (&a, &b)| s + (a - T::lit(b)).powi(2));
        match self {
            TestFunction::Runge { r, .. } => {
                let n2 = x.iter().fold(T::zero(), |s, &a| s + a * a);
                T::one() / (T::one() + T::lit(*r) * n2)
            }
            TestFunction::CombinedRunge => {
                T::one() / (T::one() + T::lit(50.0) * sq(x, &[-0.65, -0.5]))
                    - T::one() / (T::one() + T::lit(5.0) * sq(x, &[0.5, 0.65]))
            }
            TestFunction::GaussianSine => {
                let dot = T::lit(0.10) * x[0] + T::lit(0.70) * x[1];
                let arg = T::pi() * T::lit(25.0) * dot;
                (-sq(x, &[-0.45, 0.65])).exp() * (arg.cos() + arg.sin())
            }
            TestFunction::PiecewisePoly => {
                if x.iter().all(|&v| v >= T::zero()) {
                    x[0] * x[1] * x[1] * x[2] * x[2] * x[2]
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            TestFunction::Runge { r, m } => format!("runge(r={r},m={m})"),
            TestFunction::CombinedRunge => "f1".into(),
            TestFunction::GaussianSine => "f2".into(),
            TestFunction::PiecewisePoly => "f3".into(),
        }
    }

    /// Parses `runge`, `runge:<r>`, `runge:<r>:<m>`, `f1`/`combined_runge`,
    /// `f2`/`gaussian_sine`, `f3`/`piecewise_poly`. `m` is the default dimension for Runge.
    pub fn parse(tag: &str, m: usize) -> Result<Self> {
        let lower = tag.trim().to_ascii_lowercase();
        let mut parts = lower.split(':');
        let head = parts.next().unwrap_or_default();
        let f = match head {
            "runge" => {
                let r = match parts.next() {
                    Some(s) => s.parse().map_err(|_| Error::UnknownFunction(tag.into()))?,
                    None => 1.0,
                };
                let m = match parts.next() {
                    Some(s) => s.parse().map_err(|_| Error::UnknownFunction(tag.into()))?,
                    None => m,
                };
                if m == 0 {
                    return Err(Error::ZeroDimension);
                }
                TestFunction::Runge { r, m }
            }
            "f1" | "combined_runge" => TestFunction::CombinedRunge,
            "f2" | "gaussian_sine" => TestFunction::GaussianSine,
            "f3" | "piecewise_poly" => TestFunction::PiecewisePoly,
            _ => return Err(Error::UnknownFunction(tag.into())),
        };
        if head != "runge" && parts.next().is_some() {
            return Err(Error::UnknownFunction(tag.into()));
        }
        Ok(f)
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestFunction::parse(s, 1)
    }
}
