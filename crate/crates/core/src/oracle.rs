//! Exhaustive enumeration of fixed and coincidence points on finite spaces,
//! and agreement checks of the solvers against it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{CoupledMap, SelfMap};
use crate::order::{check_isotone, check_phi_bound, grid_pairs, is_seed, Direction, PreorderCtx};
use crate::random::{random_instance, rng};
use crate::relations::{check_weakly_left_related, check_weakly_right_related};
use crate::solver::{scheme_for, solve, PointLabel, Scheme, SolverConfig, Status};
use crate::space::{Point, QPSpace, Sample};

pub const ORACLE_CAP: usize = 64;

type Pairs = Vec<(Point, Point)>;

/// Complete sets of each point notion. Per-map sets are keyed by map name,
/// per-pair sets by `"T,R"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    #[serde(rename = "E1")]
    pub e1: Pairs,
    #[serde(rename = "E2")]
    pub e2: BTreeMap<String, Pairs>,
    #[serde(rename = "E3")]
    pub e3: BTreeMap<String, Pairs>,
    #[serde(rename = "D1")]
    pub d1: BTreeMap<String, Pairs>,
    #[serde(rename = "D2")]
    pub d2: BTreeMap<String, Pairs>,
    /// Common coupled fixed points of `F` and every map; present with three or more maps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub common_fixed_all: Option<Pairs>,
    #[serde(skip)]
    map_names: Vec<String>,
}

fn pair_key(a: &str, b: &str) -> String {
    format!("{a},{b}")
}

impl OracleReport {
    /// The set a converged run over these maps must land in.
    pub fn target(&self) -> &[(Point, Point)] {
        let names = &self.map_names;
        match names.len() {
            0 => &self.e1,
            1 => &self.e3[&names[0]],
            2 => &self.d2[&pair_key(&names[0], &names[1])],
            _ => self.common_fixed_all.as_deref().unwrap_or(&[]),
        }
    }

    /// Labels of one pair, in the vocabulary of `verify_point`.
    pub fn labels_at(&self, x: Point, y: Point) -> Vec<PointLabel> {
        let has = |set: &Pairs| set.contains(&(x, y));
        let names = &self.map_names;
        let mut out = Vec::new();
        if has(&self.e1) {
            out.push(PointLabel::E1);
        }
        for (i, name) in names.iter().enumerate() {
            if has(&self.e2[name]) {
                out.push(PointLabel::E2 { map: i });
            }
            if has(&self.e3[name]) {
                out.push(PointLabel::E3 { map: i });
            }
        }
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let key = pair_key(&names[i], &names[j]);
                if has(&self.d1[&key]) {
                    out.push(PointLabel::D1 { maps: (i, j) });
                }
                if has(&self.d2[&key]) {
                    out.push(PointLabel::D2 { maps: (i, j) });
                }
            }
        }
        if self.common_fixed_all.as_ref().is_some_and(has) {
            out.push(PointLabel::CommonFixedAll);
        }
        out
    }
}

pub fn enumerate_points(space: &QPSpace, f: &CoupledMap, maps: &[SelfMap], tol: f64) -> Result<OracleReport> {
    enumerate_points_capped(space, f, maps, tol, ORACLE_CAP)
}

/// Scan all `n²` pairs. Equality is exact at `tol == 0`, `dˢ ≤ tol` otherwise.
pub fn enumerate_points_capped(
    space: &QPSpace,
    f: &CoupledMap,
    maps: &[SelfMap],
    tol: f64,
    cap: usize,
) -> Result<OracleReport> {
    let points = space
        .points()
        .ok_or_else(|| Error::Unsupported(format!("oracle needs a finite carrier, got {}", space.describe())))?;
    if points.len() > cap {
        return Err(Error::Unsupported(format!("oracle cap is {cap} points, space has {}", points.len())));
    }
    if !(tol >= 0.0) {
        return Err(Error::Argument(format!("tolerance must be nonnegative, got {tol}")));
    }
    let names: Vec<String> = maps.iter().map(|m| m.name().to_string()).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Argument(format!("duplicate map name {n:?}")));
        }
    }

    let image = |p: Point| -> Result<Point> {
        space.check(p)?;
        Ok(p)
    };
    let eq = |a: Point, b: Point| space.coincide(a, b, tol);
    let n = points.len();
    let mut fv = vec![points[0]; n * n];
    for (i, &x) in points.iter().enumerate() {
        for (j, &y) in points.iter().enumerate() {
            fv[i * n + j] = image(f.apply(x, y))?;
        }
    }
    let tv = maps
        .iter()
        .map(|m| points.iter().map(|&x| image(m.apply(x))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let mut report = OracleReport {
        e1: Vec::new(),
        e2: names.iter().map(|k| (k.clone(), Vec::new())).collect(),
        e3: names.iter().map(|k| (k.clone(), Vec::new())).collect(),
        d1: BTreeMap::new(),
        d2: BTreeMap::new(),
        common_fixed_all: (maps.len() >= 3).then(Vec::new),
        map_names: names.clone(),
    };
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            report.d1.insert(pair_key(&names[i], &names[j]), Vec::new());
            report.d2.insert(pair_key(&names[i], &names[j]), Vec::new());
        }
    }

    for i in 0..n {
        for j in 0..n {
            let (x, y) = (points[i], points[j]);
            let (fxy, fyx) = (fv[i * n + j], fv[j * n + i]);
            let e1 = eq(fxy, x) && eq(fyx, y);
            let fixed: Vec<bool> = tv.iter().map(|t| eq(t[i], x) && eq(t[j], y)).collect();
            let coinc: Vec<bool> = tv.iter().map(|t| eq(fxy, t[i]) && eq(fyx, t[j])).collect();
            if e1 {
                report.e1.push((x, y));
            }
            for (a, name) in names.iter().enumerate() {
                if coinc[a] {
                    report.e2.get_mut(name).expect("key").push((x, y));
                }
                if e1 && fixed[a] {
                    report.e3.get_mut(name).expect("key").push((x, y));
                }
                for (b, other) in names.iter().enumerate().skip(a + 1) {
                    let key = pair_key(name, other);
                    if coinc[a] && coinc[b] {
                        report.d1.get_mut(&key).expect("key").push((x, y));
                    }
                    if e1 && fixed[a] && fixed[b] {
                        report.d2.get_mut(&key).expect("key").push((x, y));
                    }
                }
            }
            if let Some(all) = report.common_fixed_all.as_mut() {
                if e1 && fixed.iter().all(|&b| b) {
                    all.push((x, y));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DisagreementKind {
    /// The solver converged to a pair outside the oracle's set.
    CandidateNotInOracle,
    /// Hypotheses hold on the whole instance and the seed is admissible,
    /// yet the solver did not converge.
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub kind: DisagreementKind,
    pub seed: (Point, Point),
    pub status: Status,
    pub candidate: Option<(Point, Point)>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub scheme: Scheme,
    pub points: usize,
    pub seeds_tried: usize,
    /// No admissible seed: the comparison passed vacuously.
    pub no_seeds: bool,
    pub converged: usize,
    pub hypothesis_violated: usize,
    pub max_iter: usize,
    /// Whether the scheme's hypotheses hold on every pair; not assessed for
    /// triple and K-map schemes, whose proofs leave the first step unjustified.
    pub hypotheses_hold: Option<bool>,
    pub oracle_target_size: usize,
    pub disagreements: Vec<Disagreement>,
}

impl AgreementReport {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn hypotheses_hold(ctx: &PreorderCtx, f: &CoupledMap, maps: &[SelfMap], cfg: &SolverConfig) -> Result<Option<bool>> {
    let points = ctx.space.points().expect("finite");
    let bound = check_phi_bound(&ctx.phi, &points).passed();
    let pairs = grid_pairs(&points);
    Ok(match maps {
        [] => Some(bound && check_isotone(ctx, f, &Sample::Exhaustive)?.passed()),
        [g] => {
            let rel = match cfg.direction {
                Direction::Forward => check_weakly_left_related(ctx, f, g, &pairs)?,
                Direction::Reverse => check_weakly_right_related(ctx, f, g, &pairs)?,
            };
            Some(bound && rel.passed())
        }
        _ => None,
    })
}

/// Run the solver matching `maps.len()` from every admissible seed and check
/// each outcome against [`enumerate_points`].
///
/// Single and pair schemes start from every seed pair. Triple and K-map
/// schemes have no seed condition and start from every pair, or with
/// `strict_seed` from pairs with `x₀ ⪯ Hx₀`, `y₀ ⪯ Hy₀` for the first phase map.
pub fn oracle_vs_solver(
    ctx: &PreorderCtx,
    f: &CoupledMap,
    maps: &[SelfMap],
    cfg: &SolverConfig,
) -> Result<AgreementReport> {
    let ctx = ctx.clone().with_mode(cfg.metric_mode);
    let oracle = enumerate_points(&ctx.space, f, maps, 0.0)?;
    let points = ctx.space.points().expect("oracle checked finiteness");
    let target = oracle.target();

    let mut seeds = Vec::new();
    for (x, y) in grid_pairs(&points) {
        let admissible = match maps.len() {
            0 | 1 => is_seed(&ctx, f, x, y, cfg.direction)?,
            _ if cfg.strict_seed => {
                let h = maps.last().expect("nonempty");
                let (hx, hy) = (h.apply(x), h.apply(y));
                ctx.space.check(hx)?;
                ctx.space.check(hy)?;
                ctx.oriented(x, hx, cfg.direction) && ctx.oriented(y, hy, cfg.direction)
            }
            _ => true,
        };
        if admissible {
            seeds.push((x, y));
        }
    }
    let hold = hypotheses_hold(&ctx, f, maps, cfg)?;

    let mut report = AgreementReport {
        scheme: scheme_for(maps.len()),
        points: points.len(),
        seeds_tried: seeds.len(),
        no_seeds: seeds.is_empty(),
        converged: 0,
        hypothesis_violated: 0,
        max_iter: 0,
        hypotheses_hold: hold,
        oracle_target_size: target.len(),
        disagreements: Vec::new(),
    };
    for seed in seeds {
        let run = solve(&ctx, f, maps, seed, cfg)?.report;
        match run.status {
            Status::Converged => report.converged += 1,
            Status::HypothesisViolated => report.hypothesis_violated += 1,
            Status::MaxIter => report.max_iter += 1,
        }
        if run.status == Status::Converged {
            let c = run.candidate.expect("converged runs carry a candidate");
            if !target.contains(&c) {
                report.disagreements.push(Disagreement {
                    kind: DisagreementKind::CandidateNotInOracle,
                    seed,
                    status: run.status,
                    candidate: run.candidate,
                    detail: format!("({}, {}) not among {} oracle pairs", c.0, c.1, target.len()),
                });
            }
        } else if hold == Some(true) {
            let detail = match &run.violation {
                Some(v) => format!("{} at index {}: {}", v.condition, v.index, v.detail),
                None => format!("stopped after {} iterations", run.iterations),
            };
            report.disagreements.push(Disagreement {
                kind: DisagreementKind::NotConverged,
                seed,
                status: run.status,
                candidate: run.candidate,
                detail,
            });
        }
    }
    Ok(report)
}

/// Shape of a random oracle-vs-solver campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzConfig {
    pub instances: usize,
    pub min_points: usize,
    pub max_points: usize,
    /// Self-map counts, cycled over instances.
    pub map_counts: Vec<usize>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { instances: 100, min_points: 4, max_points: 4, map_counts: vec![0, 1, 2, 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub instance: usize,
    pub points: usize,
    pub report: AgreementReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub instances: usize,
    pub seeds_tried: usize,
    pub converged: usize,
    pub no_seed_instances: usize,
    pub disagreements: usize,
    /// Instances with at least one disagreement.
    pub failing: Vec<InstanceOutcome>,
}

impl CampaignReport {
    pub fn agrees(&self) -> bool {
        self.disagreements == 0
    }
}

/// Generate `instances` random instances from `seed` and compare each.
pub fn fuzz_campaign(seed: u64, fuzz: &FuzzConfig, cfg: &SolverConfig) -> Result<CampaignReport> {
    if fuzz.min_points == 0 || fuzz.min_points > fuzz.max_points || fuzz.max_points > ORACLE_CAP {
        return Err(Error::Config(format!(
            "point range {}..={} must be nonempty and within 1..={ORACLE_CAP}",
            fuzz.min_points, fuzz.max_points
        )));
    }
    if fuzz.map_counts.is_empty() {
        return Err(Error::Config("map_counts must not be empty".into()));
    }
    let mut rng = rng(seed);
    let mut out = CampaignReport {
        seed,
        instances: fuzz.instances,
        seeds_tried: 0,
        converged: 0,
        no_seed_instances: 0,
        disagreements: 0,
        failing: Vec::new(),
    };
    for i in 0..fuzz.instances {
        let n = rand::Rng::random_range(&mut rng, fuzz.min_points..=fuzz.max_points);
        let k = fuzz.map_counts[i % fuzz.map_counts.len()];
        let inst = random_instance(&mut rng, n, k)?;
        let report = oracle_vs_solver(&inst.ctx, &inst.f, &inst.maps, cfg)?;
        out.seeds_tried += report.seeds_tried;
        out.converged += report.converged;
        out.no_seed_instances += usize::from(report.no_seeds);
        out.disagreements += report.disagreements.len();
        if !report.agrees() {
            out.failing.push(InstanceOutcome { instance: i, points: n, report });
        }
    }
    Ok(out)
}
