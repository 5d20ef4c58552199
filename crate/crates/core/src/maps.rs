//! Evaluators for `φ`, coupled maps `F: X × X → X` and self maps `g: X → X`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Point;

/// Which side the declared bound of `φ` is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundDirection {
    Above,
    Below,
}

type PhiEval = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type CoupledEval = Arc<dyn Fn(Point, Point) -> Point + Send + Sync>;
type SelfEval = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// A real function on the carrier used to induce the preorder.
#[derive(Clone)]
pub struct PhiFn {
    name: String,
    eval: PhiEval,
    pub bound_direction: BoundDirection,
    /// Documentation value; checked on samples by `check_phi_bound`.
    pub declared_bound: f64,
}

impl PhiFn {
    pub fn new(
        name: impl Into<String>,
        bound_direction: BoundDirection,
        declared_bound: f64,
        eval: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PhiFn { name: name.into(), eval: Arc::new(eval), bound_direction, declared_bound }
    }

    /// `φ(x) = x` on reals, `φ(i) = i` on indices.
    pub fn identity(bound_direction: BoundDirection, declared_bound: f64) -> Self {
        Self::new("identity", bound_direction, declared_bound, Point::value)
    }

    /// `φ(x) = arctan x`, bounded above by π/2.
    pub fn arctan() -> Self {
        Self::new("arctan", BoundDirection::Above, std::f64::consts::FRAC_PI_2, |p| p.value().atan())
    }

    /// `φ(x) = −e^{−x}`, bounded above by 0 on intervals with `lo ≥ 0`.
    pub fn neg_exp() -> Self {
        Self::new("neg_exp", BoundDirection::Above, 0.0, |p| -(-p.value()).exp())
    }

    /// Explicit values for a finite carrier; `φ(i) = values[i]`.
    pub fn table(values: Vec<f64>, bound_direction: BoundDirection) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("phi table must be nonempty and finite".into()));
        }
        let declared_bound = match bound_direction {
            BoundDirection::Above => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            BoundDirection::Below => values.iter().copied().fold(f64::INFINITY, f64::min),
        };
        let values: Arc<[f64]> = values.into();
        Ok(Self::new("table", bound_direction, declared_bound, move |p| match p {
            Point::Index(i) => values.get(i).copied().unwrap_or(f64::NAN),
            Point::Real(_) => f64::NAN,
        }))
    }

    pub fn with_bound(mut self, bound_direction: BoundDirection, declared_bound: f64) -> Self {
        self.bound_direction = bound_direction;
        self.declared_bound = declared_bound;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.eval)(p)
    }
}

impl fmt::Debug for PhiFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFn")
            .field("name", &self.name)
            .field("bound_direction", &self.bound_direction)
            .field("declared_bound", &self.declared_bound)
            .finish()
    }
}

/// `F: X × X → X`.
#[derive(Clone)]
pub struct CoupledMap {
    name: String,
    eval: CoupledEval,
}

impl CoupledMap {
    pub fn new(name: impl Into<String>, eval: impl Fn(Point, Point) -> Point + Send + Sync + 'static) -> Self {
        CoupledMap { name: name.into(), eval: Arc::new(eval) }
    }

    /// Lift a real formula. Index arguments evaluate to NaN, which every
    /// carrier rejects.
    pub fn real(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |x, y| match (x, y) {
            (Point::Real(a), Point::Real(b)) => Point::Real(f(a, b)),
            _ => Point::Real(f64::NAN),
        })
    }

    /// Table map on `{0, …, n−1}`: `F(i, j) = table[i][j]`.
    pub fn table(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|row| row.len() != n) {
            return Err(Error::Argument("coupled table must be square and nonempty".into()));
        }
        if table.iter().flatten().any(|&v| v >= n) {
            return Err(Error::Argument(format!("coupled table values must lie in 0..{n}")));
        }
        let flat: Arc<[usize]> = table.concat().into();
        Ok(Self::new(name, move |x, y| match (x, y) {
            (Point::Index(i), Point::Index(j)) if i < n && j < n => Point::Index(flat[i * n + j]),
            _ => Point::Real(f64::NAN),
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, x: Point, y: Point) -> Point {
        (self.eval)(x, y)
    }
}

impl fmt::Debug for CoupledMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoupledMap").field("name", &self.name).finish()
    }
}

/// `g: X → X`.
#[derive(Clone)]
pub struct SelfMap {
    name: String,
    eval: SelfEval,
}

impl SelfMap {
    pub fn new(name: impl Into<String>, eval: impl Fn(Point) -> Point + Send + Sync + 'static) -> Self {
        SelfMap { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn real(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |x| match x {
            Point::Real(a) => Point::Real(f(a)),
            Point::Index(_) => Point::Real(f64::NAN),
        })
    }

    pub fn identity() -> Self {
        Self::new("identity", |x| x)
    }

    /// Table map on `{0, …, n−1}`: `g(i) = values[i]`.
    pub fn table(name: impl Into<String>, values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        if n == 0 || values.iter().any(|&v| v >= n) {
            return Err(Error::Argument(format!("self-map table values must lie in 0..{n}")));
        }
        let values: Arc<[usize]> = values.into();
        Ok(Self::new(name, move |x| match x {
            Point::Index(i) if i < n => Point::Index(values[i]),
            _ => Point::Real(f64::NAN),
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, x: Point) -> Point {
        (self.eval)(x)
    }
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfMap").field("name", &self.name).finish()
    }
}
