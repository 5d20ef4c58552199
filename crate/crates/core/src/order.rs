//! The preorder induced by a function `φ`, and order-theoretic checks.
//!
//! `x ⪯ y  ⇔  d(x, y) ≤ φ(y) − φ(x)`. This is reflexive and transitive for
//! every `φ` (the triangle inequality telescopes). Replacing `d` by `dˢ`
//! gives a partial order on T₀ spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{BoundDirection, CoupledMap, PhiFn};
use crate::space::{Point, QPSpace, Sample};

/// Default right-hand-side slack for order comparisons.
pub const ORDER_SLACK: f64 = 1e-12;

/// Default grid size per axis for isotonicity and relatedness scans.
pub const RELATION_GRID: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricMode {
    #[default]
    Plain,
    Symmetrized,
}

/// Orientation of seed and chain inequalities: forward uses `x ⪯ F(x, y)`,
/// reverse uses `F(x, y) ⪯ x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone)]
pub struct PreorderCtx {
    pub space: QPSpace,
    pub phi: PhiFn,
    pub metric_mode: MetricMode,
    /// Added to the right-hand side `φ(y) − φ(x)`. Must be nonnegative for a
    /// well-formed context; tests may plant other values directly.
    pub slack: f64,
}

impl PreorderCtx {
    pub fn new(space: QPSpace, phi: PhiFn) -> Self {
        PreorderCtx { space, phi, metric_mode: MetricMode::Plain, slack: ORDER_SLACK }
    }

    /// Context with slack 0, for exact work on finite or dyadic instances.
    pub fn exact(space: QPSpace, phi: PhiFn) -> Self {
        PreorderCtx { slack: 0.0, ..Self::new(space, phi) }
    }

    pub fn with_mode(mut self, mode: MetricMode) -> Self {
        self.metric_mode = mode;
        self
    }

    pub fn with_slack(mut self, slack: f64) -> Result<Self> {
        if !(slack >= 0.0) {
            return Err(Error::Argument(format!("order slack must be nonnegative, got {slack}")));
        }
        self.slack = slack;
        Ok(self)
    }

    /// The distance the relation compares against: `d` or `dˢ`.
    pub(crate) fn order_dist(&self, x: Point, y: Point) -> f64 {
        match self.metric_mode {
            MetricMode::Plain => self.space.d(x, y),
            MetricMode::Symmetrized => self.space.ds(x, y),
        }
    }

    /// `(lhs, rhs)` of the order inequality `lhs ≤ rhs + slack`.
    pub(crate) fn sides(&self, x: Point, y: Point) -> (f64, f64) {
        (self.order_dist(x, y), self.phi.eval(y) - self.phi.eval(x))
    }

    /// Unchecked `x ⪯ y` for carrier points.
    pub(crate) fn leq(&self, x: Point, y: Point) -> bool {
        let (lhs, rhs) = self.sides(x, y);
        lhs <= rhs + self.slack
    }

    /// `a ⪯ b` for forward, `b ⪯ a` for reverse.
    pub(crate) fn oriented(&self, a: Point, b: Point, direction: Direction) -> bool {
        match direction {
            Direction::Forward => self.leq(a, b),
            Direction::Reverse => self.leq(b, a),
        }
    }

    pub fn induced_leq(&self, x: Point, y: Point) -> Result<bool> {
        self.space.check(x)?;
        self.space.check(y)?;
        Ok(self.leq(x, y))
    }

    pub(crate) fn image(&self, p: Point) -> Result<Point> {
        self.space.check(p)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub points_checked: usize,
    pub related_pairs: usize,
    pub reflexivity_failures: Vec<Point>,
    /// `(x, y, z)` with `x ⪯ y`, `y ⪯ z` but not `x ⪯ z`.
    pub transitivity_failures: Vec<(Point, Point, Point)>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.reflexivity_failures.is_empty() && self.transitivity_failures.is_empty()
    }
}

fn relation_matrix(ctx: &PreorderCtx, pts: &[Point]) -> Vec<bool> {
    let n = pts.len();
    let mut rel = vec![false; n * n];
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate() {
            rel[i * n + j] = ctx.leq(x, y);
        }
    }
    rel
}

/// Reflexivity on every sampled point, transitivity on every sampled triple.
pub fn check_preorder_laws(ctx: &PreorderCtx, sample: &Sample) -> Result<LawReport> {
    let pts = sample.resolve(&ctx.space)?;
    let n = pts.len();
    let rel = relation_matrix(ctx, &pts);
    let reflexivity_failures = (0..n).filter(|&i| !rel[i * n + i]).map(|i| pts[i]).collect();
    let mut transitivity_failures = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !rel[i * n + j] {
                continue;
            }
            for k in 0..n {
                if rel[j * n + k] && !rel[i * n + k] {
                    transitivity_failures.push((pts[i], pts[j], pts[k]));
                }
            }
        }
    }
    Ok(LawReport {
        points_checked: n,
        related_pairs: rel.iter().filter(|&&b| b).count(),
        reflexivity_failures,
        transitivity_failures,
    })
}

/// Antisymmetry witnesses: distinct `x, y` with `x ⪯ y` and `y ⪯ x`.
pub fn antisymmetry_failures(ctx: &PreorderCtx, sample: &Sample) -> Result<Vec<(Point, Point)>> {
    let pts = sample.resolve(&ctx.space)?;
    let mut out = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            if x != y && ctx.leq(x, y) && ctx.leq(y, x) {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotoneCounterexample {
    pub x: Point,
    pub z: Point,
    pub y: Point,
    pub w: Point,
    pub f_xy: Point,
    pub f_zw: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotoneReport {
    pub tuples_checked: usize,
    /// Tuples where `x ⪯ z` and `y ⪯ w` held.
    pub antecedents_held: usize,
    pub counterexamples: Vec<IsotoneCounterexample>,
}

impl IsotoneReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Check `x ⪯ z ∧ y ⪯ w ⇒ F(x, y) ⪯ F(z, w)` on every 4-tuple of sample points.
pub fn check_isotone(ctx: &PreorderCtx, f: &CoupledMap, sample: &Sample) -> Result<IsotoneReport> {
    let pts = sample.resolve(&ctx.space)?;
    let n = pts.len();
    let rel = relation_matrix(ctx, &pts);
    let mut image = Vec::with_capacity(n * n);
    for &x in &pts {
        for &y in &pts {
            image.push(ctx.image(f.apply(x, y))?);
        }
    }
    let mut report = IsotoneReport { tuples_checked: n.pow(4), antecedents_held: 0, counterexamples: Vec::new() };
    for xi in 0..n {
        for zi in 0..n {
            if !rel[xi * n + zi] {
                continue;
            }
            for yi in 0..n {
                for wi in 0..n {
                    if !rel[yi * n + wi] {
                        continue;
                    }
                    report.antecedents_held += 1;
                    let (f_xy, f_zw) = (image[xi * n + yi], image[zi * n + wi]);
                    if !ctx.leq(f_xy, f_zw) {
                        report.counterexamples.push(IsotoneCounterexample {
                            x: pts[xi],
                            z: pts[zi],
                            y: pts[yi],
                            w: pts[wi],
                            f_xy,
                            f_zw,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Isotonicity on explicit `(x, z, y, w)` tuples.
pub fn check_isotone_tuples(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    tuples: &[(Point, Point, Point, Point)],
) -> Result<IsotoneReport> {
    let mut report = IsotoneReport { tuples_checked: tuples.len(), antecedents_held: 0, counterexamples: Vec::new() };
    for &(x, z, y, w) in tuples {
        for p in [x, z, y, w] {
            ctx.space.check(p)?;
        }
        if !(ctx.leq(x, z) && ctx.leq(y, w)) {
            continue;
        }
        report.antecedents_held += 1;
        let f_xy = ctx.image(f.apply(x, y))?;
        let f_zw = ctx.image(f.apply(z, w))?;
        if !ctx.leq(f_xy, f_zw) {
            report.counterexamples.push(IsotoneCounterexample { x, z, y, w, f_xy, f_zw });
        }
    }
    Ok(report)
}

/// Whether `(x, y)` satisfies both seed inequalities in `direction`:
/// `x ⪯ F(x, y)` and `y ⪯ F(y, x)` (forward) or their reverses.
pub fn is_seed(ctx: &PreorderCtx, f: &CoupledMap, x: Point, y: Point, direction: Direction) -> Result<bool> {
    ctx.space.check(x)?;
    ctx.space.check(y)?;
    let fxy = ctx.image(f.apply(x, y))?;
    let fyx = ctx.image(f.apply(y, x))?;
    Ok(ctx.oriented(x, fxy, direction) && ctx.oriented(y, fyx, direction))
}

/// First candidate pair, in the given order, satisfying the seed inequalities.
pub fn seed_search(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    candidates: &[(Point, Point)],
    direction: Direction,
) -> Result<Option<(Point, Point)>> {
    if candidates.is_empty() {
        return Err(Error::Argument("seed_search needs at least one candidate".into()));
    }
    for &(x, y) in candidates {
        if is_seed(ctx, f, x, y, direction)? {
            return Ok(Some((x, y)));
        }
    }
    Ok(None)
}

/// Row-major pairs over a point list: `(p0,p0), (p0,p1), …, (p1,p0), …`.
pub fn grid_pairs(points: &[Point]) -> Vec<(Point, Point)> {
    points.iter().flat_map(|&x| points.iter().map(move |&y| (x, y))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub direction: BoundDirection,
    pub declared_bound: f64,
    pub max: f64,
    pub min: f64,
    pub violations: Vec<(Point, f64)>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_phi_bound(phi: &PhiFn, sample: &[Point]) -> BoundReport {
    let mut report = BoundReport {
        direction: phi.bound_direction,
        declared_bound: phi.declared_bound,
        max: f64::NEG_INFINITY,
        min: f64::INFINITY,
        violations: Vec::new(),
    };
    for &p in sample {
        let v = phi.eval(p);
        report.max = report.max.max(v);
        report.min = report.min.min(v);
        let ok = match phi.bound_direction {
            BoundDirection::Above => v <= phi.declared_bound,
            BoundDirection::Below => v >= phi.declared_bound,
        };
        if !ok {
            report.violations.push((p, v));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> Point {
        Point::Real(v)
    }

    fn unit_ctx() -> PreorderCtx {
        PreorderCtx::new(QPSpace::upper_interval(0.0, 1.0).unwrap(), PhiFn::identity(BoundDirection::Above, 1.0))
    }

    #[test]
    fn induced_leq_examples() {
        let ctx = unit_ctx();
        assert!(ctx.induced_leq(r(0.2), r(0.7)).unwrap());
        assert!(!ctx.induced_leq(r(0.7), r(0.2)).unwrap());
        for p in ctx.space.grid(11) {
            assert!(ctx.induced_leq(p, p).unwrap());
        }
        assert!(ctx.induced_leq(r(-0.1), r(0.5)).is_err());
    }

    #[test]
    fn identity_phi_on_upper_interval_is_usual_order() {
        let ctx = unit_ctx();
        let g = ctx.space.grid(11);
        for &a in &g {
            for &b in &g {
                assert_eq!(ctx.induced_leq(a, b).unwrap(), a.value() <= b.value(), "{a} {b}");
            }
        }
    }

    #[test]
    fn laws_on_grid() {
        assert!(check_preorder_laws(&unit_ctx(), &Sample::Grid(21)).unwrap().passed());
    }

    #[test]
    fn negative_slack_breaks_reflexivity() {
        let mut ctx = unit_ctx();
        ctx.slack = -0.1;
        let rep = check_preorder_laws(&ctx, &Sample::Grid(21)).unwrap();
        assert_eq!(rep.reflexivity_failures.len(), 21);
        // d(x,z) ≤ d(x,y) + d(y,z) ≤ φ(z) − φ(x) − 0.2, so transitivity survives.
        assert!(rep.transitivity_failures.is_empty());
        assert!(ctx.clone().with_slack(-0.1).is_err());
    }

    #[test]
    fn large_positive_slack_breaks_transitivity() {
        // Slack accumulates along chains: x ⪯ y ⪯ z only gives d(x,z) ≤ φ(z) − φ(x) + 2s.
        let mut ctx = unit_ctx();
        ctx.slack = 0.1;
        let rep = check_preorder_laws(&ctx, &Sample::Grid(21)).unwrap();
        assert!(rep.reflexivity_failures.is_empty());
        assert!(!rep.transitivity_failures.is_empty());
        for &(x, y, z) in &rep.transitivity_failures {
            assert!(ctx.leq(x, y) && ctx.leq(y, z) && !ctx.leq(x, z));
        }
        assert!(ctx.leq(r(0.5), r(0.46)) && ctx.leq(r(0.46), r(0.42)) && !ctx.leq(r(0.5), r(0.42)));
    }

    #[test]
    fn isotone_examples() {
        let ctx = unit_ctx();
        let max = CoupledMap::real("max", f64::max);
        assert!(check_isotone(&ctx, &max, &Sample::Grid(11)).unwrap().passed());
        let affine = CoupledMap::real("affine", |x, y| (x + y + 2.0) / 4.0);
        assert!(check_isotone(&ctx, &affine, &Sample::Grid(11)).unwrap().passed());
        let reflect = CoupledMap::real("reflect", |x, _| 1.0 - x);
        let rep = check_isotone_tuples(&ctx, &reflect, &[(r(0.0), r(1.0), r(0.3), r(0.3))]).unwrap();
        assert_eq!(rep.counterexamples.len(), 1);
        assert_eq!(rep.counterexamples[0].f_xy, r(1.0));
        assert_eq!(rep.counterexamples[0].f_zw, r(0.0));
        assert!(!check_isotone(&ctx, &reflect, &Sample::Grid(11)).unwrap().passed());
    }

    #[test]
    fn isotone_rejects_images_outside_carrier() {
        let ctx = unit_ctx();
        let out = CoupledMap::real("out", |x, y| x + y + 1.0);
        assert!(matches!(check_isotone(&ctx, &out, &Sample::Grid(3)), Err(Error::Domain { .. })));
    }

    #[test]
    fn seed_search_examples() {
        let ctx = unit_ctx();
        let grid = grid_pairs(&[r(0.0), r(0.5), r(1.0)]);
        let max = CoupledMap::real("max", f64::max);
        assert_eq!(seed_search(&ctx, &max, &grid, Direction::Forward).unwrap(), Some((r(0.0), r(0.0))));
        let prod = CoupledMap::real("prod", |x, y| x * y);
        assert_eq!(seed_search(&ctx, &prod, &grid, Direction::Forward).unwrap(), Some((r(0.0), r(0.0))));
        let half = CoupledMap::real("half", |x, _| x / 2.0);
        let grid2 = grid_pairs(&[r(0.5), r(1.0)]);
        assert_eq!(seed_search(&ctx, &half, &grid2, Direction::Forward).unwrap(), None);
        assert_eq!(seed_search(&ctx, &half, &grid2, Direction::Reverse).unwrap(), Some((r(0.5), r(0.5))));
        assert!(seed_search(&ctx, &half, &[], Direction::Forward).is_err());
    }

    #[test]
    fn phi_bound_examples() {
        let g = QPSpace::upper_interval(0.0, 1.0).unwrap().grid(21);
        let rep = check_phi_bound(&PhiFn::identity(BoundDirection::Above, 1.0), &g);
        assert!(rep.passed());
        assert_eq!(rep.max, 1.0);
        let wide: Vec<Point> = (-50..=50).map(|i| r(i as f64 * 10.0)).collect();
        assert!(check_phi_bound(&PhiFn::arctan(), &wide).passed());
        let rep = check_phi_bound(&PhiFn::identity(BoundDirection::Above, 0.5), &g);
        assert_eq!(rep.violations.len(), 10);
        assert!(rep.violations.iter().all(|(p, _)| p.value() > 0.5));
    }

    #[test]
    fn antisymmetry_needs_t0() {
        let t0 = QPSpace::finite(vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let phi = PhiFn::table(vec![0.0, 0.5, 0.25], BoundDirection::Above).unwrap();
        let sym = PreorderCtx::exact(t0, phi.clone()).with_mode(MetricMode::Symmetrized);
        assert!(antisymmetry_failures(&sym, &Sample::Exhaustive).unwrap().is_empty());

        let flat = QPSpace::finite(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let phi = PhiFn::table(vec![0.0, 0.0, 0.0], BoundDirection::Above).unwrap();
        let sym = PreorderCtx::exact(flat, phi).with_mode(MetricMode::Symmetrized);
        assert_eq!(antisymmetry_failures(&sym, &Sample::Exhaustive).unwrap(), vec![(Point::Index(0), Point::Index(1))]);
    }
}
