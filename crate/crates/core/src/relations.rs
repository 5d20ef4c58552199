//! Weak left/right relatedness of a pair `{F, g}` and empirical sequential
//! continuity.
//!
//! Weakly left-related:
//! - C1: `F(x, y) ⪯ gF(x, y)` and `gx ⪯ F(gx, gy)`
//! - C2: the same with `x` and `y` swapped.
//!
//! Weakly right-related reverses every inequality (D1, D2).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{CoupledMap, SelfMap};
use crate::order::PreorderCtx;
use crate::sequence::{detect_limit, LimitMode, SequenceWindow};
use crate::space::{Point, QPSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    C1,
    C2,
    D1,
    D2,
}

/// Which of the two inequalities inside a condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    /// `F(x, y)` against `gF(x, y)`
    First,
    /// `gx` against `F(gx, gy)`
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelViolation {
    pub condition: Condition,
    pub part: Part,
    pub pair: (Point, Point),
    /// The failing inequality is `a ⪯ b`.
    pub a: Point,
    pub b: Point,
    /// `d(a, b)` (or `dˢ` in symmetrized mode).
    pub lhs: f64,
    /// `φ(b) − φ(a)`.
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelReport {
    pub pairs_checked: usize,
    pub violations: Vec<RelViolation>,
}

impl RelReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All violations of the left or right conditions at a single pair.
pub(crate) fn violations_at(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    g: &SelfMap,
    x: Point,
    y: Point,
    side: Side,
) -> Result<Vec<RelViolation>> {
    ctx.space.check(x)?;
    ctx.space.check(y)?;
    let (c_xy, c_yx) = match side {
        Side::Left => (Condition::C1, Condition::C2),
        Side::Right => (Condition::D1, Condition::D2),
    };
    let mut out = Vec::new();
    for (condition, (u, v)) in [(c_xy, (x, y)), (c_yx, (y, x))] {
        let fuv = ctx.image(f.apply(u, v))?;
        let gfuv = ctx.image(g.apply(fuv))?;
        let gu = ctx.image(g.apply(u))?;
        let gv = ctx.image(g.apply(v))?;
        let fg = ctx.image(f.apply(gu, gv))?;
        let inequalities = match side {
            Side::Left => [(Part::First, fuv, gfuv), (Part::Second, gu, fg)],
            Side::Right => [(Part::First, gfuv, fuv), (Part::Second, fg, gu)],
        };
        for (part, a, b) in inequalities {
            if !ctx.leq(a, b) {
                let (lhs, rhs) = ctx.sides(a, b);
                out.push(RelViolation { condition, part, pair: (x, y), a, b, lhs, rhs, slack: ctx.slack });
            }
        }
    }
    Ok(out)
}

fn check_related(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    g: &SelfMap,
    pairs: &[(Point, Point)],
    side: Side,
) -> Result<RelReport> {
    let mut violations = Vec::new();
    for &(x, y) in pairs {
        violations.extend(violations_at(ctx, f, g, x, y, side)?);
    }
    Ok(RelReport { pairs_checked: pairs.len(), violations })
}

/// Check C1 and C2 on every sampled pair.
pub fn check_weakly_left_related(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    g: &SelfMap,
    pairs: &[(Point, Point)],
) -> Result<RelReport> {
    check_related(ctx, f, g, pairs, Side::Left)
}

/// Check D1 and D2 on every sampled pair.
pub fn check_weakly_right_related(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    g: &SelfMap,
    pairs: &[(Point, Point)],
) -> Result<RelReport> {
    check_related(ctx, f, g, pairs, Side::Right)
}

#[derive(Clone, Copy, Debug)]
pub enum MapRef<'a> {
    Coupled(&'a CoupledMap),
    Single(&'a SelfMap),
}

/// A convergent probe sequence with its detected limit. Coupled maps need
/// the `y` components as well.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub xs: Vec<Point>,
    pub x_limit: Option<Point>,
    pub ys: Option<Vec<Point>>,
    pub y_limit: Option<Point>,
}

impl Probe {
    pub fn single(xs: Vec<Point>, x_limit: Option<Point>) -> Self {
        Probe { xs, x_limit, ys: None, y_limit: None }
    }

    pub fn coupled(xs: Vec<Point>, x_limit: Option<Point>, ys: Vec<Point>, y_limit: Option<Point>) -> Self {
        Probe { xs, x_limit, ys: Some(ys), y_limit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityFailure {
    pub probe: usize,
    /// Image of the limit, which the image sequence failed to converge to.
    pub target: Point,
    /// Largest mode distance from `target` over the admissible tail.
    pub tail_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub mode: LimitMode,
    pub tol: f64,
    pub probes_checked: usize,
    /// Probes without a detected limit.
    pub skipped: Vec<usize>,
    pub failures: Vec<ContinuityFailure>,
}

impl ContinuityReport {
    /// No counterexample among the probes. Evidence only, never a proof.
    pub fn no_counterexample(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For each probe `xₙ → x` (and `yₙ → y`), test whether the image sequence
/// converges to the image of the limit in the same mode.
pub fn check_sequential_continuity(
    space: &QPSpace,
    map: MapRef<'_>,
    probes: &[Probe],
    mode: LimitMode,
    tol: f64,
) -> Result<ContinuityReport> {
    let mut report = ContinuityReport { mode, tol, probes_checked: 0, skipped: Vec::new(), failures: Vec::new() };
    for (i, probe) in probes.iter().enumerate() {
        let (images, target) = match map {
            MapRef::Single(g) => {
                let Some(x) = probe.x_limit else {
                    report.skipped.push(i);
                    continue;
                };
                let images = probe.xs.iter().map(|&p| g.apply(p)).collect::<Vec<_>>();
                (images, g.apply(x))
            }
            MapRef::Coupled(f) => {
                let (Some(x), Some(ys), Some(y)) = (probe.x_limit, probe.ys.as_ref(), probe.y_limit) else {
                    report.skipped.push(i);
                    continue;
                };
                if ys.len() != probe.xs.len() {
                    return Err(Error::Argument(format!(
                        "probe {i}: x and y sequences differ in length ({} vs {})",
                        probe.xs.len(),
                        ys.len()
                    )));
                }
                let images = probe.xs.iter().zip(ys).map(|(&a, &b)| f.apply(a, b)).collect::<Vec<_>>();
                (images, f.apply(x, y))
            }
        };
        space.check(target)?;
        let window = SequenceWindow::new(space.clone(), images)?;
        report.probes_checked += 1;
        if detect_limit(&window, &[target], mode, tol)?.is_none() {
            let cap = (window.horizon() / 2).max(1);
            let tail_distance =
                window.points()[cap - 1..].iter().map(|&p| mode.dist(space, target, p)).fold(0.0, f64::max);
            report.failures.push(ContinuityFailure { probe: i, target, tail_distance });
        }
    }
    Ok(report)
}
