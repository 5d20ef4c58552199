//! Quasi-pseudometric spaces.
//!
//! A space is a carrier plus an asymmetric distance `d` with `d(x, x) = 0` and
//! the triangle inequality. Two carriers are supported: closed real intervals
//! with one of three formula distances, and finite sets given by a dense
//! row-major distance matrix. Both are closed under taking the conjugate
//! `d⁻¹(x, y) = d(y, x)` and the symmetrization `dˢ = max(d, d⁻¹)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default slack for axiom comparisons.
pub const AXIOM_SLACK: f64 = 1e-12;

/// Default number of grid points per interval axis for axiom checks.
pub const DEFAULT_GRID: usize = 21;

/// An element of a carrier.
///
/// Interval spaces hold reals, finite spaces hold indices. Code above this
/// module treats points as opaque and lets the space interpret them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Real(f64),
    Index(usize),
}

impl Point {
    pub fn as_real(self) -> Option<f64> {
        match self {
            Point::Real(v) => Some(v),
            Point::Index(_) => None,
        }
    }

    pub fn as_index(self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(i),
            Point::Real(_) => None,
        }
    }

    /// Numeric value used in traces and reports.
    pub fn value(self) -> f64 {
        match self {
            Point::Real(v) => v,
            Point::Index(i) => i as f64,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(v) => write!(f, "{v}"),
            Point::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Point::Real(v) => s.serialize_f64(v),
            Point::Index(i) => s.serialize_u64(i as u64),
        }
    }
}

/// Formula distances available on a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalDist {
    /// `d(x, y) = max(x − y, 0)`
    Upper,
    /// `d(x, y) = max(y − x, 0)`, the conjugate of `Upper`.
    Lower,
    /// `d(x, y) = |x − y|`
    Abs,
}

impl IntervalDist {
    fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            IntervalDist::Upper => (x - y).max(0.0),
            IntervalDist::Lower => (y - x).max(0.0),
            IntervalDist::Abs => (x - y).abs(),
        }
    }

    fn conjugate(self) -> Self {
        match self {
            IntervalDist::Upper => IntervalDist::Lower,
            IntervalDist::Lower => IntervalDist::Upper,
            IntervalDist::Abs => IntervalDist::Abs,
        }
    }
}

#[derive(Debug, Clone)]
enum Carrier {
    Interval { lo: f64, hi: f64, dist: IntervalDist },
    Finite { n: usize, matrix: Arc<[f64]> },
}

/// A carrier together with an evaluable quasi-pseudometric.
///
/// Construction validates the carrier (finite endpoints, square nonnegative
/// matrix) but not the axioms; use [`check_axioms`] for those.
#[derive(Debug, Clone)]
pub struct QPSpace {
    carrier: Carrier,
}

/// JSON file form of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceFile {
    Finite { n: usize, matrix: Vec<Vec<f64>> },
    Interval { lo: f64, hi: f64, dist: IntervalDist },
}

impl QPSpace {
    pub fn interval(lo: f64, hi: f64, dist: IntervalDist) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::Argument(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(QPSpace { carrier: Carrier::Interval { lo, hi, dist } })
    }

    /// `[lo, hi]` with `d(x, y) = max(x − y, 0)`.
    pub fn upper_interval(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, IntervalDist::Upper)
    }

    /// Finite space from a square matrix of nonnegative finite reals.
    ///
    /// The diagonal is not forced to zero so that planted axiom violations
    /// can be represented and reported.
    pub fn finite(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::Argument("finite space needs at least one point".into()));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Argument(format!("matrix row {i} has {} entries, expected {n}", row.len())));
            }
            flat.extend_from_slice(row);
        }
        Self::finite_flat(n, flat)
    }

    /// Finite space from a row-major `n × n` buffer.
    pub fn finite_flat(n: usize, flat: Vec<f64>) -> Result<Self> {
        if n == 0 || flat.len() != n * n {
            return Err(Error::Argument(format!("expected {} matrix entries for n = {n}, got {}", n * n, flat.len())));
        }
        if let Some(pos) = flat.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Argument(format!(
                "matrix entry ({}, {}) = {} is not a nonnegative finite real",
                pos / n,
                pos % n,
                flat[pos]
            )));
        }
        Ok(QPSpace { carrier: Carrier::Finite { n, matrix: flat.into() } })
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        match file {
            SpaceFile::Finite { n, matrix } => {
                if matrix.len() != n {
                    return Err(Error::Argument(format!("declared n = {n} but matrix has {} rows", matrix.len())));
                }
                Self::finite(matrix)
            }
            SpaceFile::Interval { lo, hi, dist } => Self::interval(lo, hi, dist),
        }
    }

    pub fn to_file(&self) -> SpaceFile {
        match &self.carrier {
            Carrier::Interval { lo, hi, dist } => SpaceFile::Interval { lo: *lo, hi: *hi, dist: *dist },
            Carrier::Finite { n, .. } => SpaceFile::Finite { n: *n, matrix: self.matrix().unwrap_or_default() },
        }
    }

    /// Number of points for finite carriers.
    pub fn size(&self) -> Option<usize> {
        match &self.carrier {
            Carrier::Finite { n, .. } => Some(*n),
            Carrier::Interval { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.size().is_some()
    }

    /// Interval endpoints, if this is an interval space.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match &self.carrier {
            Carrier::Interval { lo, hi, .. } => Some((*lo, *hi)),
            Carrier::Finite { .. } => None,
        }
    }

    pub fn interval_dist(&self) -> Option<IntervalDist> {
        match &self.carrier {
            Carrier::Interval { dist, .. } => Some(*dist),
            Carrier::Finite { .. } => None,
        }
    }

    /// Distance matrix of a finite space, as nested rows.
    pub fn matrix(&self) -> Option<Vec<Vec<f64>>> {
        match &self.carrier {
            Carrier::Finite { n, matrix } => Some(matrix.chunks(*n).map(<[f64]>::to_vec).collect()),
            Carrier::Interval { .. } => None,
        }
    }

    /// All points of a finite carrier in index order.
    pub fn points(&self) -> Option<Vec<Point>> {
        self.size().map(|n| (0..n).map(Point::Index).collect())
    }

    /// `k` evenly spaced points for intervals; every point for finite carriers.
    pub fn grid(&self, k: usize) -> Vec<Point> {
        match &self.carrier {
            Carrier::Finite { n, .. } => (0..*n).map(Point::Index).collect(),
            Carrier::Interval { lo, hi, .. } => match k {
                0 => Vec::new(),
                1 => vec![Point::Real(*lo)],
                _ => (0..k)
                    .map(|i| {
                        if i == k - 1 {
                            Point::Real(*hi)
                        } else {
                            Point::Real(lo + (hi - lo) * (i as f64) / ((k - 1) as f64))
                        }
                    })
                    .collect(),
            },
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match (&self.carrier, p) {
            (Carrier::Interval { lo, hi, .. }, Point::Real(v)) => v.is_finite() && *lo <= v && v <= *hi,
            (Carrier::Finite { n, .. }, Point::Index(i)) => i < *n,
            _ => false,
        }
    }

    pub fn check(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain { point: p.to_string(), carrier: self.describe() })
        }
    }

    /// Interpret a raw number from a config or sequence file as a point.
    ///
    /// Finite carriers accept only integral values in `0..n`.
    pub fn point(&self, value: f64) -> Result<Point> {
        let p = match &self.carrier {
            Carrier::Interval { .. } => Point::Real(value),
            Carrier::Finite { .. } => {
                if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
                    return Err(Error::Domain { point: value.to_string(), carrier: self.describe() });
                }
                Point::Index(value as usize)
            }
        };
        self.check(p)?;
        Ok(p)
    }

    pub fn describe(&self) -> String {
        match &self.carrier {
            Carrier::Interval { lo, hi, dist } => format!("[{lo}, {hi}] ({dist:?})"),
            Carrier::Finite { n, .. } => format!("finite set of {n} points"),
        }
    }

    /// `d(x, y)`, checking both points against the carrier.
    pub fn dist(&self, x: Point, y: Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.d(x, y))
    }

    /// `d(x, y)` for points already known to lie in the carrier.
    pub(crate) fn d(&self, x: Point, y: Point) -> f64 {
        match (&self.carrier, x, y) {
            (Carrier::Interval { dist, .. }, Point::Real(a), Point::Real(b)) => dist.eval(a, b),
            (Carrier::Finite { n, matrix }, Point::Index(i), Point::Index(j)) => matrix[i * n + j],
            _ => f64::NAN,
        }
    }

    /// `dˢ(x, y) = max(d(x, y), d(y, x))` for carrier points.
    pub(crate) fn ds(&self, x: Point, y: Point) -> f64 {
        self.d(x, y).max(self.d(y, x))
    }

    pub fn sym_dist(&self, x: Point, y: Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.ds(x, y))
    }

    /// The conjugate space, `d⁻¹(x, y) = d(y, x)`. Finite matrices are transposed.
    pub fn conjugate(&self) -> QPSpace {
        let carrier = match &self.carrier {
            Carrier::Interval { lo, hi, dist } => Carrier::Interval { lo: *lo, hi: *hi, dist: dist.conjugate() },
            Carrier::Finite { n, matrix } => {
                let n = *n;
                let t: Vec<f64> = (0..n * n).map(|k| matrix[(k % n) * n + k / n]).collect();
                Carrier::Finite { n, matrix: t.into() }
            }
        };
        QPSpace { carrier }
    }

    /// The symmetrized space with `dˢ = max(d, d⁻¹)`.
    pub fn sup_metric(&self) -> QPSpace {
        let carrier = match &self.carrier {
            Carrier::Interval { lo, hi, .. } => Carrier::Interval { lo: *lo, hi: *hi, dist: IntervalDist::Abs },
            Carrier::Finite { n, matrix } => {
                let n = *n;
                let s: Vec<f64> = (0..n * n).map(|k| matrix[k].max(matrix[(k % n) * n + k / n])).collect();
                Carrier::Finite { n, matrix: s.into() }
            }
        };
        QPSpace { carrier }
    }

    /// Two points count as equal at tolerance `tol`: exact equality when
    /// `tol == 0`, otherwise `dˢ ≤ tol`.
    pub(crate) fn coincide(&self, a: Point, b: Point, tol: f64) -> bool {
        if tol == 0.0 {
            a == b
        } else {
            a == b || self.ds(a, b) <= tol
        }
    }

    pub fn in_ball(&self, q: &BallQuery, y: Point) -> Result<bool> {
        let d = self.dist(q.center, y)?;
        Ok(match q.kind {
            BallKind::Open => d < q.radius,
            BallKind::Closed => d <= q.radius,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    Open,
    Closed,
}

/// An open ball `{y : d(x, y) < r}` or closed ball `{y : d(x, y) ≤ r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallQuery {
    center: Point,
    radius: f64,
    kind: BallKind,
}

impl BallQuery {
    pub fn new(center: Point, radius: f64, kind: BallKind) -> Result<Self> {
        let ok = match kind {
            BallKind::Open => radius > 0.0,
            BallKind::Closed => radius >= 0.0,
        };
        if !ok || !radius.is_finite() {
            return Err(Error::Argument(format!("invalid {kind:?} ball radius {radius}")));
        }
        Ok(BallQuery { center, radius, kind })
    }

    pub fn open(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, BallKind::Open)
    }

    pub fn closed(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, BallKind::Closed)
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kind(&self) -> BallKind {
        self.kind
    }
}

/// Which points a checker visits.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    /// Explicit points; each must lie in the carrier.
    Points(Vec<Point>),
    /// `k` grid points per interval axis; all points on finite carriers.
    Grid(usize),
    /// Every point of a finite carrier. Unsupported on intervals.
    Exhaustive,
}

impl Default for Sample {
    fn default() -> Self {
        Sample::Grid(DEFAULT_GRID)
    }
}

impl Sample {
    pub fn resolve(&self, space: &QPSpace) -> Result<Vec<Point>> {
        match self {
            Sample::Points(ps) => {
                for p in ps {
                    space.check(*p)?;
                }
                Ok(ps.clone())
            }
            Sample::Grid(k) => Ok(space.grid(*k)),
            Sample::Exhaustive => space.points().ok_or_else(|| {
                Error::Unsupported(format!("exhaustive sample on infinite carrier {}", space.describe()))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityViolation {
    pub x: Point,
    pub d_xx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleViolation {
    pub x: Point,
    pub y: Point,
    pub z: Point,
    pub d_xz: f64,
    pub d_xy: f64,
    pub d_yz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub points_checked: usize,
    pub triples_checked: usize,
    pub slack: f64,
    pub identity_violations: Vec<IdentityViolation>,
    pub triangle_violations: Vec<TriangleViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.identity_violations.is_empty() && self.triangle_violations.is_empty()
    }
}

pub fn check_axioms(space: &QPSpace, sample: &Sample) -> Result<AxiomReport> {
    check_axioms_with_slack(space, sample, AXIOM_SLACK)
}

/// Check `d(x, x) = 0` and `d(x, z) ≤ d(x, y) + d(y, z)` on every sampled
/// point and triple, each within `slack`.
pub fn check_axioms_with_slack(space: &QPSpace, sample: &Sample, slack: f64) -> Result<AxiomReport> {
    let pts = sample.resolve(space)?;
    let identity_violations = pts
        .iter()
        .filter_map(|&x| {
            let d_xx = space.d(x, x);
            (d_xx.abs() > slack).then_some(IdentityViolation { x, d_xx })
        })
        .collect();
    let mut triangle_violations = Vec::new();
    for &x in &pts {
        for &y in &pts {
            let d_xy = space.d(x, y);
            for &z in &pts {
                let d_xz = space.d(x, z);
                let d_yz = space.d(y, z);
                if d_xz > d_xy + d_yz + slack {
                    triangle_violations.push(TriangleViolation { x, y, z, d_xz, d_xy, d_yz });
                }
            }
        }
    }
    Ok(AxiomReport {
        points_checked: pts.len(),
        triples_checked: pts.len().pow(3),
        slack,
        identity_violations,
        triangle_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T0Report {
    pub slack: f64,
    /// Distinct pairs with `d(x, y) = 0 = d(y, x)`; each unordered pair once.
    pub indistinguishable: Vec<(Point, Point)>,
}

impl T0Report {
    pub fn passed(&self) -> bool {
        self.indistinguishable.is_empty()
    }
}

pub fn check_t0(space: &QPSpace, sample: &Sample) -> Result<T0Report> {
    check_t0_with_slack(space, sample, AXIOM_SLACK)
}

pub fn check_t0_with_slack(space: &QPSpace, sample: &Sample, slack: f64) -> Result<T0Report> {
    let pts = sample.resolve(space)?;
    let mut indistinguishable = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            if x != y && space.d(x, y) <= slack && space.d(y, x) <= slack {
                indistinguishable.push((x, y));
            }
        }
    }
    Ok(T0Report { slack, indistinguishable })
}

/// Pairs where `d(x, y) ≠ d(y, x)` beyond `slack`.
pub fn asymmetric_pairs(space: &QPSpace, sample: &Sample, slack: f64) -> Result<Vec<(Point, Point)>> {
    let pts = sample.resolve(space)?;
    let mut out = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            if (space.d(x, y) - space.d(y, x)).abs() > slack {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}
