//! Successive-approximation solvers for coupled and common coupled fixed points.
//!
//! Every scheme is a fixed cycle of phases applied to the pair `(xₙ, yₙ)`:
//!
//! | scheme | cycle |
//! |--------|-------|
//! | single | `F` |
//! | pair   | `F`, `G` |
//! | triple | `H`, `F`, `G` |
//! | kmap   | `G_K`, …, `G_2`, `F`, `G_1` (experimental) |
//!
//! An `F` phase maps `(x, y) ↦ (F(x, y), F(y, x))`; a self-map phase maps
//! `(x, y) ↦ (gx, gy)`. Each phase produces one trace index.
//!
//! A cycle whose every step is exactly stationary ends the run at once. A
//! run also stops once the summed `dˢ` displacement of a whole cycle stays
//! below `tol` for `stall_window` consecutive cycles and the candidate's
//! residuals are within `tol`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{BoundDirection, CoupledMap, SelfMap};
use crate::order::{check_isotone_tuples, Direction, MetricMode, PreorderCtx};
use crate::relations::{violations_at, Part, Side};
use crate::space::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Single,
    Pair,
    Triple,
    Kmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    /// Maximum trace index.
    pub max_iter: usize,
    /// Consecutive small-displacement cycles required to stop.
    pub stall_window: usize,
    pub direction: Direction,
    /// Overrides the context's metric mode for the run.
    pub metric_mode: MetricMode,
    pub verify_hypotheses: bool,
    /// Triple and K-map schemes: also require `x₀ ⪯ H x₀` (first phase) at the seed.
    pub strict_seed: bool,
    /// Test hook: run the pair scheme as `G` then `F`.
    #[doc(hidden)]
    #[serde(skip)]
    pub swap_pair_phases: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-9,
            max_iter: 10_000,
            stall_window: 3,
            direction: Direction::Forward,
            metric_mode: MetricMode::Plain,
            verify_hypotheses: false,
            strict_seed: false,
            swap_pair_phases: false,
        }
    }
}

impl SolverConfig {
    pub fn verified() -> Self {
        SolverConfig { verify_hypotheses: true, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Argument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Argument("max_iter must be at least 1".into()));
        }
        if self.stall_window == 0 {
            return Err(Error::Argument("stall_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub x: Point,
    pub y: Point,
    pub phi_x: f64,
    pub phi_y: f64,
    /// `d(xₙ, xₙ₊₁)`; absent on the last row.
    pub step_x: Option<f64>,
    pub step_y: Option<f64>,
    /// Phase that produced this row; `seed` for row 0.
    pub phase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub scheme: Scheme,
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    pub fn xs(&self) -> Vec<Point> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn ys(&self) -> Vec<Point> {
        self.rows.iter().map(|r| r.y).collect()
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace always holds the seed row")
    }

    /// CSV with columns `n,x,y,phi_x,phi_y,step_x,step_y,scheme_phase`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "x", "y", "phi_x", "phi_y", "step_x", "step_y", "scheme_phase"])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                r.x.value().to_string(),
                r.y.value().to_string(),
                r.phi_x.to_string(),
                r.phi_y.to_string(),
                opt(r.step_x),
                opt(r.step_y),
                r.phase.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// A failed hypothesis observed on the trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisViolation {
    /// `seed`, `isotone`, `chain`, `phi_monotone`, `phi_bound`, or a
    /// relatedness condition `C1`/`C2`/`D1`/`D2`.
    pub condition: String,
    pub index: usize,
    pub pair: (Point, Point),
    pub detail: String,
}

/// Residuals of one equation family at a candidate.
///
/// For `F` the equations are `F(x, y) = x`, `F(y, x) = y`; for a self map
/// `T` they are `Tx = x`, `Ty = y`. Each distance is the max over both.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub map: String,
    /// `d(x, image)`
    pub d: f64,
    /// `d(image, x)`
    pub dinv: f64,
    pub ds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "label")]
pub enum PointLabel {
    /// Coupled fixed point of `F`.
    E1,
    /// Coupled coincidence point: `F(x, y) = Tx`, `F(y, x) = Ty`.
    E2 { map: usize },
    /// Common coupled fixed point of `F` and `T`.
    E3 { map: usize },
    /// Common coupled coincidence point of `F`, `T`, `R`.
    D1 { maps: (usize, usize) },
    /// Common coupled fixed point of `F`, `T`, `R`.
    D2 { maps: (usize, usize) },
    /// Common coupled fixed point of `F` and every map (three or more maps).
    #[serde(rename = "common_fixed_all")]
    CommonFixedAll,
}

impl PointLabel {
    fn rank(&self) -> u8 {
        match self {
            PointLabel::E1 => 0,
            PointLabel::E2 { .. } => 1,
            PointLabel::D1 { .. } => 2,
            PointLabel::E3 { .. } => 3,
            PointLabel::D2 { .. } => 4,
            PointLabel::CommonFixedAll => 5,
        }
    }

    /// The label a converged run of a scheme over `k` self maps must earn.
    pub fn target(k: usize) -> PointLabel {
        match k {
            0 => PointLabel::E1,
            1 => PointLabel::E3 { map: 0 },
            2 => PointLabel::D2 { maps: (0, 1) },
            _ => PointLabel::CommonFixedAll,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tol: f64,
    pub labels: Vec<PointLabel>,
    pub strongest: Option<PointLabel>,
    pub residuals: Vec<Residual>,
    /// `max dˢ(F(x, y), Tx), dˢ(F(y, x), Ty)` per map, for coincidence labels.
    pub coincidence: Vec<Residual>,
}

impl VerifyReport {
    pub fn has(&self, label: &PointLabel) -> bool {
        self.labels.contains(label)
    }
}

fn residual(ctx: &PreorderCtx, name: &str, x: Point, y: Point, ix: Point, iy: Point) -> Residual {
    let s = &ctx.space;
    Residual {
        map: name.to_string(),
        d: s.d(x, ix).max(s.d(y, iy)),
        dinv: s.d(ix, x).max(s.d(iy, y)),
        ds: s.ds(x, ix).max(s.ds(y, iy)),
    }
}

/// Classify `(x, y)` against the coupled fixed/coincidence point notions for
/// `F` and `maps`. Equalities are exact at `tol == 0` and `dˢ ≤ tol` otherwise.
///
/// The coincidence notion reads `F(x, y) = Tx` and `F(y, x) = Ty`.
pub fn verify_point(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    maps: &[SelfMap],
    x: Point,
    y: Point,
    tol: f64,
) -> Result<VerifyReport> {
    if !(tol >= 0.0) {
        return Err(Error::Argument(format!("tolerance must be nonnegative, got {tol}")));
    }
    let s = &ctx.space;
    s.check(x)?;
    s.check(y)?;
    let fxy = ctx.image(f.apply(x, y))?;
    let fyx = ctx.image(f.apply(y, x))?;
    let tx = maps.iter().map(|m| ctx.image(m.apply(x))).collect::<Result<Vec<_>>>()?;
    let ty = maps.iter().map(|m| ctx.image(m.apply(y))).collect::<Result<Vec<_>>>()?;

    let eq = |a: Point, b: Point| s.coincide(a, b, tol);
    let e1 = eq(fxy, x) && eq(fyx, y);
    let fixed: Vec<bool> = (0..maps.len()).map(|i| eq(tx[i], x) && eq(ty[i], y)).collect();
    let coinc: Vec<bool> = (0..maps.len()).map(|i| eq(fxy, tx[i]) && eq(fyx, ty[i])).collect();

    let mut labels = Vec::new();
    if e1 {
        labels.push(PointLabel::E1);
    }
    for i in 0..maps.len() {
        if coinc[i] {
            labels.push(PointLabel::E2 { map: i });
        }
        if e1 && fixed[i] {
            labels.push(PointLabel::E3 { map: i });
        }
    }
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            if coinc[i] && coinc[j] {
                labels.push(PointLabel::D1 { maps: (i, j) });
            }
            if e1 && fixed[i] && fixed[j] {
                labels.push(PointLabel::D2 { maps: (i, j) });
            }
        }
    }
    if maps.len() >= 3 && e1 && fixed.iter().all(|&b| b) {
        labels.push(PointLabel::CommonFixedAll);
    }
    let strongest = labels.iter().fold(None::<&PointLabel>, |best, l| match best {
        Some(b) if b.rank() >= l.rank() => Some(b),
        _ => Some(l),
    });

    let mut residuals = vec![residual(ctx, f.name(), x, y, fxy, fyx)];
    let mut coincidence = Vec::new();
    for (i, m) in maps.iter().enumerate() {
        residuals.push(residual(ctx, m.name(), x, y, tx[i], ty[i]));
        coincidence.push(residual(ctx, &format!("{}~{}", f.name(), m.name()), fxy, fyx, tx[i], ty[i]));
    }
    Ok(VerifyReport { tol, strongest: strongest.cloned(), labels, residuals, coincidence })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub scheme: Scheme,
    /// Set for the K-map scheme, whose convergence is not backed by a theorem.
    pub experimental: bool,
    pub status: Status,
    pub candidate: Option<(Point, Point)>,
    /// Trace index of the candidate.
    pub iterations: usize,
    pub residuals: Vec<Residual>,
    pub label: Option<PointLabel>,
    pub violation: Option<HypothesisViolation>,
}

impl SolverReport {
    pub fn max_residual_ds(&self) -> f64 {
        self.residuals.iter().map(|r| r.ds).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverRun {
    pub report: SolverReport,
    pub trace: IterationTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    F,
    Map(usize),
}

/// Which hypotheses the scheme checks, beyond relatedness of every map.
#[derive(Debug, Clone, Copy)]
struct Plan {
    scheme: Scheme,
    /// Check seed inequalities at index 0.
    seed_inequalities: bool,
    /// Check isotonicity of `F` along the trace.
    isotone: bool,
    /// First index `n` whose transition `n → n+1` must be ordered.
    chain_start: usize,
}

struct Engine<'a> {
    ctx: PreorderCtx,
    f: &'a CoupledMap,
    maps: &'a [SelfMap],
    phases: Vec<(Phase, String)>,
    plan: Plan,
    cfg: &'a SolverConfig,
}

impl Engine<'_> {
    fn violation(&self, condition: &str, index: usize, pair: (Point, Point), detail: String) -> HypothesisViolation {
        HypothesisViolation { condition: condition.to_string(), index, pair, detail }
    }

    fn side(&self) -> Side {
        match self.cfg.direction {
            Direction::Forward => Side::Left,
            Direction::Reverse => Side::Right,
        }
    }

    fn apply(&self, phase: Phase, x: Point, y: Point) -> Result<(Point, Point)> {
        let (nx, ny) = match phase {
            Phase::F => (self.f.apply(x, y), self.f.apply(y, x)),
            Phase::Map(i) => (self.maps[i].apply(x), self.maps[i].apply(y)),
        };
        Ok((self.ctx.image(nx)?, self.ctx.image(ny)?))
    }

    fn check_point(&self, n: usize, x: Point, y: Point) -> Result<Option<HypothesisViolation>> {
        let phi = &self.ctx.phi;
        for p in [x, y] {
            let v = phi.eval(p);
            let ok = match phi.bound_direction {
                BoundDirection::Above => v <= phi.declared_bound,
                BoundDirection::Below => v >= phi.declared_bound,
            };
            if !ok {
                return Ok(Some(self.violation(
                    "phi_bound",
                    n,
                    (x, y),
                    format!("φ({p}) = {v} breaks declared bound {}", phi.declared_bound),
                )));
            }
        }
        for g in self.maps {
            if let Some(v) = violations_at(&self.ctx, self.f, g, x, y, self.side())?.into_iter().next() {
                let part = match v.part {
                    Part::First => "first",
                    Part::Second => "second",
                };
                let detail = format!(
                    "{{{}, {}}}: {part} inequality {} ⪯ {} fails (lhs {} > rhs {} + slack {})",
                    self.f.name(),
                    g.name(),
                    v.a,
                    v.b,
                    v.lhs,
                    v.rhs,
                    v.slack
                );
                return Ok(Some(self.violation(&format!("{:?}", v.condition), n, v.pair, detail)));
            }
        }
        Ok(None)
    }

    fn check_seed(&self, x: Point, y: Point) -> Result<Option<HypothesisViolation>> {
        let dir = self.cfg.direction;
        if self.plan.seed_inequalities {
            let fxy = self.ctx.image(self.f.apply(x, y))?;
            let fyx = self.ctx.image(self.f.apply(y, x))?;
            if !(self.ctx.oriented(x, fxy, dir) && self.ctx.oriented(y, fyx, dir)) {
                return Ok(Some(self.violation(
                    "seed",
                    0,
                    (x, y),
                    format!("seed inequalities fail ({dir:?}): F(x₀, y₀) = {fxy}, F(y₀, x₀) = {fyx}"),
                )));
            }
        }
        if self.cfg.strict_seed && matches!(self.plan.scheme, Scheme::Triple | Scheme::Kmap) {
            let (phase, name) = &self.phases[0];
            let (hx, hy) = self.apply(*phase, x, y)?;
            if !(self.ctx.oriented(x, hx, dir) && self.ctx.oriented(y, hy, dir)) {
                return Ok(Some(self.violation(
                    "seed",
                    0,
                    (x, y),
                    format!("strict seed: x₀ ⪯ {name}x₀ or y₀ ⪯ {name}y₀ fails"),
                )));
            }
        }
        Ok(None)
    }

    fn check_step(&self, n: usize, from: (Point, Point), to: (Point, Point)) -> Result<Option<HypothesisViolation>> {
        let dir = self.cfg.direction;
        let ((x, y), (nx, ny)) = (from, to);
        if self.plan.isotone {
            let tuples = [(x, nx, y, ny), (nx, x, ny, y), (y, ny, x, nx), (ny, y, nx, x)];
            let rep = check_isotone_tuples(&self.ctx, self.f, &tuples)?;
            if let Some(c) = rep.counterexamples.first() {
                return Ok(Some(self.violation(
                    "isotone",
                    n,
                    (x, y),
                    format!("{} ⪯ {}, {} ⪯ {} but F gives {} ⋠ {}", c.x, c.z, c.y, c.w, c.f_xy, c.f_zw),
                )));
            }
        }
        if n < self.plan.chain_start {
            return Ok(None);
        }
        let slack = self.ctx.slack;
        for (a, b, which) in [(x, nx, "x"), (y, ny, "y")] {
            let (pa, pb) = (self.ctx.phi.eval(a), self.ctx.phi.eval(b));
            let monotone = match dir {
                Direction::Forward => pb >= pa - slack,
                Direction::Reverse => pb <= pa + slack,
            };
            if !monotone {
                return Ok(Some(self.violation(
                    "phi_monotone",
                    n,
                    (x, y),
                    format!("φ({which}_{n}) = {pa} → φ({which}_{}) = {pb}", n + 1),
                )));
            }
            if !self.ctx.oriented(a, b, dir) {
                return Ok(Some(self.violation(
                    "chain",
                    n,
                    (x, y),
                    format!("{which}_{n} = {a} and {which}_{} = {b} are not ordered ({dir:?})", n + 1),
                )));
            }
        }
        Ok(None)
    }

    fn row(&self, n: usize, x: Point, y: Point, phase: &str) -> TraceRow {
        TraceRow {
            n,
            x,
            y,
            phi_x: self.ctx.phi.eval(x),
            phi_y: self.ctx.phi.eval(y),
            step_x: None,
            step_y: None,
            phase: phase.to_string(),
        }
    }

    fn finish(&self, status: Status, rows: Vec<TraceRow>, violation: Option<HypothesisViolation>) -> Result<SolverRun> {
        let last = rows.last().expect("seed row");
        let (x, y, iterations) = (last.x, last.y, last.n);
        let candidate = (status != Status::HypothesisViolated).then_some((x, y));
        let (residuals, label) = match candidate {
            Some((x, y)) => {
                let v = verify_point(&self.ctx, self.f, self.maps, x, y, self.cfg.tol)?;
                (v.residuals, v.strongest)
            }
            None => (Vec::new(), None),
        };
        let report = SolverReport {
            scheme: self.plan.scheme,
            experimental: self.plan.scheme == Scheme::Kmap,
            status,
            candidate,
            iterations,
            residuals,
            label,
            violation,
        };
        Ok(SolverRun { report, trace: IterationTrace { scheme: self.plan.scheme, rows } })
    }

    fn residuals_within_tol(&self, x: Point, y: Point) -> Result<bool> {
        let v = verify_point(&self.ctx, self.f, self.maps, x, y, self.cfg.tol)?;
        Ok(v.residuals.iter().all(|r| r.ds <= self.cfg.tol))
    }

    fn run(&self, seed: (Point, Point)) -> Result<SolverRun> {
        self.cfg.validate()?;
        let (mut x, mut y) = seed;
        self.ctx.space.check(x)?;
        self.ctx.space.check(y)?;
        let verify = self.cfg.verify_hypotheses;
        let mut rows = vec![self.row(0, x, y, "seed")];

        if verify {
            if let Some(v) = self.check_seed(x, y)? {
                return self.finish(Status::HypothesisViolated, rows, Some(v));
            }
        }

        let mut stall = 0usize;
        loop {
            let n = rows.last().expect("seed row").n;
            if n >= self.cfg.max_iter {
                return self.finish(Status::MaxIter, rows, None);
            }
            let mut pending = Vec::with_capacity(self.phases.len());
            let mut displacement = 0.0;
            let (mut cx, mut cy) = (x, y);
            for (k, (phase, name)) in self.phases.iter().enumerate() {
                let idx = n + k;
                if verify {
                    if let Some(v) = self.check_point(idx, cx, cy)? {
                        rows.extend(pending);
                        return self.finish(Status::HypothesisViolated, rows, Some(v));
                    }
                }
                let (nx, ny) = self.apply(*phase, cx, cy)?;
                if verify {
                    if let Some(v) = self.check_step(idx, (cx, cy), (nx, ny))? {
                        rows.extend(pending);
                        return self.finish(Status::HypothesisViolated, rows, Some(v));
                    }
                }
                displacement += self.ctx.space.ds(cx, nx) + self.ctx.space.ds(cy, ny);
                pending.push(self.row(idx + 1, nx, ny, name));
                (cx, cy) = (nx, ny);
            }

            if displacement == 0.0 {
                return self.finish(Status::Converged, rows, None);
            }
            for next in pending {
                let prev = rows.last_mut().expect("seed row");
                prev.step_x = Some(self.ctx.space.d(prev.x, next.x));
                prev.step_y = Some(self.ctx.space.d(prev.y, next.y));
                rows.push(next);
            }
            (x, y) = (cx, cy);

            stall = if displacement < self.cfg.tol { stall + 1 } else { 0 };
            if stall >= self.cfg.stall_window && self.residuals_within_tol(x, y)? {
                return self.finish(Status::Converged, rows, None);
            }
        }
    }
}

fn engine<'a>(
    ctx: &PreorderCtx,
    f: &'a CoupledMap,
    maps: &'a [SelfMap],
    phases: Vec<(Phase, String)>,
    plan: Plan,
    cfg: &'a SolverConfig,
) -> Engine<'a> {
    Engine { ctx: ctx.clone().with_mode(cfg.metric_mode), f, maps, phases, plan, cfg }
}

/// `xₙ₊₁ = F(xₙ, yₙ)`, `yₙ₊₁ = F(yₙ, xₙ)`.
///
/// With `verify_hypotheses`, checks the seed inequalities, isotonicity of `F`
/// on consecutive trace points, the order chain and `φ` along the trace.
pub fn couple_iterate(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    seed: (Point, Point),
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    let plan = Plan { scheme: Scheme::Single, seed_inequalities: true, isotone: true, chain_start: 0 };
    engine(ctx, f, &[], vec![(Phase::F, "F".into())], plan, cfg).run(seed)
}

/// `x₂ₙ₊₁ = F(x₂ₙ, y₂ₙ)`, `x₂ₙ₊₂ = G x₂ₙ₊₁`, and likewise for `y`.
///
/// With `verify_hypotheses`, checks the seed inequalities and that `{F, G}`
/// is weakly left-related (right-related in reverse direction) at every
/// visited pair.
pub fn pair_iterate(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    g: &SelfMap,
    seed: (Point, Point),
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    let maps = std::slice::from_ref(g);
    let mut phases = vec![(Phase::F, "F".to_string()), (Phase::Map(0), "G".to_string())];
    if cfg.swap_pair_phases {
        phases.reverse();
    }
    let plan = Plan { scheme: Scheme::Pair, seed_inequalities: true, isotone: false, chain_start: 0 };
    engine(ctx, f, maps, phases, plan, cfg).run(seed)
}

/// `x₃ₙ₋₂ = H x₃ₙ₋₃`, `x₃ₙ₋₁ = F(x₃ₙ₋₂, y₃ₙ₋₂)`, `x₃ₙ = G x₃ₙ₋₁`, and likewise for `y`.
///
/// There is no seed inequality; the order chain is checked from index 1
/// unless `strict_seed` also demands `x₀ ⪯ H x₀`.
pub fn triple_iterate(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    g: &SelfMap,
    h: &SelfMap,
    seed: (Point, Point),
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    let maps = [g.clone(), h.clone()];
    let phases = vec![(Phase::Map(1), "H".to_string()), (Phase::F, "F".to_string()), (Phase::Map(0), "G".to_string())];
    let chain_start = if cfg.strict_seed { 0 } else { 1 };
    let plan = Plan { scheme: Scheme::Triple, seed_inequalities: false, isotone: false, chain_start };
    engine(ctx, f, &maps, phases, plan, cfg).run(seed)
}

/// Experimental round-robin over `K` self maps: each cycle applies
/// `G_K, …, G_2`, then `F`, then `G_1`.
///
/// `K = 0` behaves as [`couple_iterate`] and `K = 1` as [`pair_iterate`],
/// including their seed checks; for `K ≥ 2` the checks follow
/// [`triple_iterate`].
pub fn kmap_round_robin(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    gs: &[SelfMap],
    seed: (Point, Point),
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    let k = gs.len();
    let mut phases: Vec<(Phase, String)> = (1..k).rev().map(|i| (Phase::Map(i), format!("G_{}", i + 1))).collect();
    phases.push((Phase::F, "F".into()));
    if k >= 1 {
        phases.push((Phase::Map(0), "G_1".into()));
    }
    let plan = match k {
        0 | 1 => Plan { scheme: Scheme::Kmap, seed_inequalities: true, isotone: k == 0, chain_start: 0 },
        _ => Plan {
            scheme: Scheme::Kmap,
            seed_inequalities: false,
            isotone: false,
            chain_start: if cfg.strict_seed { 0 } else { 1 },
        },
    };
    engine(ctx, f, gs, phases, plan, cfg).run(seed)
}

/// Dispatch on the number of self maps: 0 → single, 1 → pair, 2 → triple
/// (`maps = [G, H]`), more → K-map.
pub fn solve(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    maps: &[SelfMap],
    seed: (Point, Point),
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    match maps {
        [] => couple_iterate(ctx, f, seed, cfg),
        [g] => pair_iterate(ctx, f, g, seed, cfg),
        [g, h] => triple_iterate(ctx, f, g, h, seed, cfg),
        _ => kmap_round_robin(ctx, f, maps, seed, cfg),
    }
}

/// The scheme [`solve`] uses for a given number of self maps.
pub fn scheme_for(maps: usize) -> Scheme {
    match maps {
        0 => Scheme::Single,
        1 => Scheme::Pair,
        2 => Scheme::Triple,
        _ => Scheme::Kmap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::PhiFn;
    use crate::space::QPSpace;

    fn r(v: f64) -> Point {
        Point::Real(v)
    }

    fn unit_ctx() -> PreorderCtx {
        PreorderCtx::new(QPSpace::upper_interval(0.0, 1.0).unwrap(), PhiFn::identity(BoundDirection::Above, 1.0))
    }

    fn max() -> CoupledMap {
        CoupledMap::real("max", f64::max)
    }

    fn affine() -> CoupledMap {
        CoupledMap::real("affine", |x, y| (x + y + 2.0) / 4.0)
    }

    fn pull() -> SelfMap {
        SelfMap::real("pull", |x| (1.0 + x) / 2.0)
    }

    #[test]
    fn single_max_stops_after_one_step() {
        let run = couple_iterate(&unit_ctx(), &max(), (r(0.2), r(0.7)), &SolverConfig::verified()).unwrap();
        assert_eq!(run.report.status, Status::Converged);
        assert_eq!(run.report.candidate, Some((r(0.7), r(0.7))));
        assert_eq!(run.report.iterations, 1);
        assert_eq!(run.trace.rows.len(), 2);
        assert_eq!(run.report.max_residual_ds(), 0.0);
        assert_eq!(run.report.label, Some(PointLabel::E1));
    }

    #[test]
    fn single_affine_matches_closed_form() {
        let run = couple_iterate(&unit_ctx(), &affine(), (r(0.0), r(0.0)), &SolverConfig::verified()).unwrap();
        assert_eq!(run.report.status, Status::Converged);
        assert!(run.report.iterations <= 40);
        for row in &run.trace.rows {
            // xₙ = 1 − 2⁻ⁿ
            assert_eq!(row.x.value(), 1.0 - 0.5f64.powi(row.n as i32));
            assert_eq!(row.x, row.y);
        }
        assert!(run.report.max_residual_ds() <= 1e-9);
    }

    #[test]
    fn stationary_seed_converges_immediately() {
        for f in [max(), affine()] {
            let run = couple_iterate(&unit_ctx(), &f, (r(1.0), r(1.0)), &SolverConfig::verified()).unwrap();
            assert_eq!(run.report.status, Status::Converged);
            assert_eq!(run.report.iterations, 0);
            assert_eq!(run.trace.rows.len(), 1);
        }
        let run = pair_iterate(&unit_ctx(), &max(), &pull(), (r(1.0), r(1.0)), &SolverConfig::verified()).unwrap();
        assert_eq!((run.report.status, run.trace.rows.len()), (Status::Converged, 1));
    }

    #[test]
    fn pair_scheme_interleaves_f_then_g() {
        let run = pair_iterate(&unit_ctx(), &max(), &pull(), (r(0.0), r(0.0)), &SolverConfig::verified()).unwrap();
        let phases: Vec<&str> = run.trace.rows.iter().take(5).map(|r| r.phase.as_str()).collect();
        assert_eq!(phases, ["seed", "F", "G", "F", "G"]);
        assert_eq!(run.trace.rows[2].x, r(0.5));
        assert_eq!(run.trace.rows[4].x, r(0.75));
        assert_eq!(run.report.status, Status::Converged);
        assert!(run.report.iterations <= 80);
        assert_eq!(run.report.label, Some(PointLabel::E3 { map: 0 }));
    }

    #[test]
    fn pair_with_contracting_g_violates_c1() {
        let half = SelfMap::real("half", |x| x / 2.0);
        let run = pair_iterate(&unit_ctx(), &max(), &half, (r(0.5), r(0.5)), &SolverConfig::verified()).unwrap();
        assert_eq!(run.report.status, Status::HypothesisViolated);
        let v = run.report.violation.unwrap();
        assert_eq!(v.condition, "C1");
        assert_eq!(v.pair, (r(0.5), r(0.5)));
        assert!(run.report.candidate.is_none());
    }

    #[test]
    fn seed_violation_is_reported() {
        let half = CoupledMap::real("half", |x, _| x / 2.0);
        let run = couple_iterate(&unit_ctx(), &half, (r(0.5), r(1.0)), &SolverConfig::verified()).unwrap();
        assert_eq!(run.report.status, Status::HypothesisViolated);
        assert_eq!(run.report.violation.unwrap().condition, "seed");
        // Reverse direction accepts the same seed and descends to 0.
        let cfg = SolverConfig { direction: Direction::Reverse, ..SolverConfig::verified() };
        let run = couple_iterate(&unit_ctx(), &half, (r(0.5), r(1.0)), &cfg).unwrap();
        assert_eq!(run.report.status, Status::Converged);
        assert!(run.report.candidate.unwrap().0.value() < 1e-9);
    }

    #[test]
    fn triple_scheme_follows_h_f_g_cycle() {
        let sqrt = SelfMap::real("sqrt", f64::sqrt);
        let run =
            triple_iterate(&unit_ctx(), &max(), &pull(), &sqrt, (r(0.25), r(0.25)), &SolverConfig::verified()).unwrap();
        let xs: Vec<f64> = run.trace.rows.iter().take(5).map(|r| r.x.value()).collect();
        assert_eq!(&xs[..4], &[0.25, 0.5, 0.5, 0.75]);
        assert!((xs[4] - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(run.report.status, Status::Converged);
        assert_eq!(run.report.label, Some(PointLabel::D2 { maps: (0, 1) }));
    }

    #[test]
    fn triple_with_square_h_is_rejected() {
        let sq = SelfMap::real("square", |x| x * x);
        let run =
            triple_iterate(&unit_ctx(), &max(), &pull(), &sq, (r(0.25), r(0.25)), &SolverConfig::verified()).unwrap();
        assert_eq!(run.report.status, Status::HypothesisViolated);
        assert_eq!(run.report.violation.unwrap().condition, "C1");
    }

    #[test]
    fn kmap_degenerate_cases() {
        let ctx = unit_ctx();
        let cfg = SolverConfig::verified();
        let single = couple_iterate(&ctx, &affine(), (r(0.0), r(0.0)), &cfg).unwrap();
        let k0 = kmap_round_robin(&ctx, &affine(), &[], (r(0.0), r(0.0)), &cfg).unwrap();
        assert_eq!(k0.trace.rows, single.trace.rows);
        assert_eq!(
            (k0.report.status, k0.report.candidate, k0.report.iterations, &k0.report.residuals),
            (single.report.status, single.report.candidate, single.report.iterations, &single.report.residuals)
        );
        assert!(k0.report.experimental);

        let pair = pair_iterate(&ctx, &max(), &SelfMap::identity(), (r(0.3), r(0.6)), &cfg).unwrap();
        let k1 = kmap_round_robin(&ctx, &max(), &[SelfMap::identity()], (r(0.3), r(0.6)), &cfg).unwrap();
        assert_eq!(k1.report.candidate, pair.report.candidate);
    }

    #[test]
    fn kmap_three_maps_reaches_one() {
        let gs = [pull(), SelfMap::real("sqrt", f64::sqrt), SelfMap::real("cbrt", f64::cbrt)];
        let run = kmap_round_robin(&unit_ctx(), &max(), &gs, (r(0.1), r(0.1)), &SolverConfig::verified()).unwrap();
        assert_eq!(run.report.status, Status::Converged);
        let (x, y) = run.report.candidate.unwrap();
        assert!((1.0 - x.value()) <= 1e-9 && (1.0 - y.value()) <= 1e-9);
        assert_eq!(run.report.label, Some(PointLabel::CommonFixedAll));
        let phases: Vec<&str> = run.trace.rows.iter().skip(1).take(4).map(|r| r.phase.as_str()).collect();
        assert_eq!(phases, ["G_3", "G_2", "F", "G_1"]);
    }

    #[test]
    fn max_iter_is_honoured() {
        let cfg = SolverConfig { max_iter: 5, ..SolverConfig::default() };
        let run = couple_iterate(&unit_ctx(), &affine(), (r(0.0), r(0.0)), &cfg).unwrap();
        assert_eq!(run.report.status, Status::MaxIter);
        assert_eq!(run.report.iterations, 5);
        assert!(run.report.candidate.is_some());
    }

    #[test]
    fn config_validation() {
        let ctx = unit_ctx();
        for cfg in [
            SolverConfig { tol: 0.0, ..Default::default() },
            SolverConfig { max_iter: 0, ..Default::default() },
            SolverConfig { stall_window: 0, ..Default::default() },
        ] {
            assert!(couple_iterate(&ctx, &max(), (r(0.0), r(0.0)), &cfg).is_err());
        }
        assert!(couple_iterate(&ctx, &max(), (r(2.0), r(0.0)), &SolverConfig::default()).is_err());
        let escape = CoupledMap::real("escape", |x, _| x + 2.0);
        assert!(matches!(
            couple_iterate(&ctx, &escape, (r(0.0), r(0.0)), &SolverConfig::default()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn verify_point_labels() {
        let ctx = unit_ctx();
        let v = verify_point(&ctx, &affine(), &[], r(1.0), r(1.0), 1e-9).unwrap();
        assert_eq!(v.strongest, Some(PointLabel::E1));
        assert_eq!(v.residuals[0].ds, 0.0);

        let maps = [pull(), SelfMap::real("sqrt", f64::sqrt)];
        let v = verify_point(&ctx, &max(), &maps, r(1.0), r(1.0), 1e-9).unwrap();
        assert_eq!(v.strongest, Some(PointLabel::D2 { maps: (0, 1) }));
        assert!(v.has(&PointLabel::E3 { map: 0 }) && v.has(&PointLabel::D1 { maps: (0, 1) }));

        let v = verify_point(&ctx, &affine(), &[], r(0.5), r(0.5), 1e-9).unwrap();
        assert_eq!(v.strongest, None);
        // F(0.5, 0.5) = 0.75
        assert_eq!(v.residuals[0].ds, 0.25);
        assert_eq!(v.residuals[0].d, 0.0);
        assert_eq!(v.residuals[0].dinv, 0.25);
    }

    #[test]
    fn coincidence_without_fixed_point() {
        // F ≡ 0.5 and T ≡ 0.5: F(x, y) = Tx everywhere, fixed only at 0.5.
        let ctx = unit_ctx();
        let f = CoupledMap::real("c", |_, _| 0.5);
        let t = SelfMap::real("t", |_| 0.5);
        let v = verify_point(&ctx, &f, std::slice::from_ref(&t), r(0.2), r(0.9), 0.0).unwrap();
        assert_eq!(v.labels, vec![PointLabel::E2 { map: 0 }]);
        let v = verify_point(&ctx, &f, &[t.clone(), t], r(0.2), r(0.9), 0.0).unwrap();
        assert_eq!(v.strongest, Some(PointLabel::D1 { maps: (0, 1) }));
    }

    #[test]
    fn csv_layout() {
        let run = couple_iterate(&unit_ctx(), &max(), (r(0.2), r(0.7)), &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        run.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,x,y,phi_x,phi_y,step_x,step_y,scheme_phase\n0,0.2,0.7,0.2,0.7,0,0,seed\n1,0.7,0.7,0.7,0.7,,,F\n"
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let sqrt = SelfMap::real("sqrt", f64::sqrt);
        let a =
            triple_iterate(&unit_ctx(), &max(), &pull(), &sqrt, (r(0.25), r(0.1)), &SolverConfig::verified()).unwrap();
        let b =
            triple_iterate(&unit_ctx(), &max(), &pull(), &sqrt, (r(0.25), r(0.1)), &SolverConfig::verified()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
