//! Finite-horizon Cauchy and convergence classification.
//!
//! Sequences are indexed from 1. Every "there exists n₀" is searched only
//! over `1 ≤ n₀ ≤ ⌊N/2⌋` for a window of length `N`, so a short tail never
//! passes vacuously. Right notions are the left notions of the conjugate
//! distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Point, QPSpace, DEFAULT_GRID};

/// Epsilon scales used by reports that show classification stability.
pub const EPSILON_LADDER: [f64; 3] = [0.1, 0.01, 0.001];

#[derive(Debug, Clone)]
pub struct SequenceWindow {
    space: QPSpace,
    points: Vec<Point>,
}

impl SequenceWindow {
    pub fn new(space: QPSpace, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("sequence window must be nonempty".into()));
        }
        for p in &points {
            space.check(*p)?;
        }
        Ok(SequenceWindow { space, points })
    }

    /// Build from raw numbers, interpreted by the space (reals or indices).
    pub fn from_values(space: QPSpace, values: &[f64]) -> Result<Self> {
        let points = values.iter().map(|&v| space.point(v)).collect::<Result<Vec<_>>>()?;
        Self::new(space, points)
    }

    pub fn space(&self) -> &QPSpace {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn horizon(&self) -> usize {
        self.points.len()
    }

    /// The same points viewed in the conjugate space.
    pub fn conjugate(&self) -> SequenceWindow {
        SequenceWindow { space: self.space.conjugate(), points: self.points.clone() }
    }

    /// Largest admissible `n₀`.
    fn cap(&self) -> usize {
        (self.horizon() / 2).max(1)
    }
}

/// Outcome of one Cauchy notion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub holds: bool,
    /// Smallest admissible `n₀` when the notion holds.
    pub n0: Option<usize>,
    /// 1-based `(k, n)` with `k ≥ ⌊N/2⌋` whose distance is `≥ ε` when it fails.
    pub witness: Option<(usize, usize)>,
}

impl Flag {
    fn holding(n0: usize) -> Self {
        Flag { holds: true, n0: Some(n0), witness: None }
    }

    fn failing(k: usize, n: usize) -> Self {
        Flag { holds: false, n0: None, witness: Some((k, n)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyVerdict {
    pub left_d: Flag,
    pub left_k: Flag,
    pub right_d: Flag,
    pub right_k: Flag,
    pub d_s: Flag,
    pub epsilon: f64,
    pub horizon: usize,
    /// `n₀` of the left K-Cauchy flag.
    pub n0: Option<usize>,
}

/// Row-major `N × N` buffer of `f(x_i, x_j)`, 0-based.
fn pair_matrix(points: &[Point], f: impl Fn(Point, Point) -> f64) -> Vec<f64> {
    let n = points.len();
    let mut m = Vec::with_capacity(n * n);
    for &a in points {
        for &b in points {
            m.push(f(a, b));
        }
    }
    m
}

/// `∃ n₀ ≤ cap ∀ n₀ ≤ k ≤ n: m[k][n] < ε` over a 0-based matrix.
fn tail_flag(m: &[f64], len: usize, cap: usize, epsilon: f64) -> Flag {
    let mut last_bad: Option<(usize, usize)> = None;
    for k in (0..len).rev() {
        if let Some(n) = (k..len).find(|&n| m[k * len + n] >= epsilon) {
            last_bad = Some((k, n));
            break;
        }
    }
    match last_bad {
        None => Flag::holding(1),
        Some((k, _)) if k + 2 <= cap => Flag::holding(k + 2),
        Some((k, n)) => Flag::failing(k + 1, n + 1),
    }
}

/// Smallest 1-based `n₀` with `dist(c, x_n) < ε` for all `n ≥ n₀`.
fn candidate_n0(points: &[Point], epsilon: f64, dist: impl Fn(Point) -> f64) -> usize {
    points.iter().rposition(|&x| dist(x) >= epsilon).map_or(1, |i| i + 2)
}

/// `∃ x ∈ candidates, n₀ ≤ cap: ∀ n ≥ n₀, dist(x, x_n) < ε`.
fn d_cauchy_flag(seq: &SequenceWindow, candidates: &[Point], epsilon: f64, dist: impl Fn(Point, Point) -> f64) -> Flag {
    let pts = seq.points();
    let cap = seq.cap();
    let best =
        candidates.iter().chain(pts).map(|&c| candidate_n0(pts, epsilon, |x| dist(c, x))).min().unwrap_or(usize::MAX);
    if best <= cap {
        return Flag::holding(best);
    }
    // x_cap is itself a candidate and failed, so some n ≥ cap breaks it.
    let anchor = pts[cap - 1];
    let n = (cap - 1..pts.len()).find(|&n| dist(anchor, pts[n]) >= epsilon).unwrap_or(pts.len() - 1);
    Flag::failing(cap, n + 1)
}

/// Classify against the default candidate set: the sequence's own points and
/// the carrier (all points if finite, a 21-point grid if an interval).
pub fn classify_cauchy(seq: &SequenceWindow, epsilon: f64) -> Result<CauchyVerdict> {
    let candidates = seq.space().grid(DEFAULT_GRID);
    classify_cauchy_with(seq, epsilon, &candidates)
}

pub fn classify_cauchy_with(seq: &SequenceWindow, epsilon: f64, candidates: &[Point]) -> Result<CauchyVerdict> {
    if !(epsilon > 0.0) {
        return Err(Error::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    if seq.horizon() < 2 {
        return Err(Error::Argument("classification needs a horizon of at least 2".into()));
    }
    for c in candidates {
        seq.space().check(*c)?;
    }
    let space = seq.space();
    let pts = seq.points();
    let len = pts.len();
    let cap = seq.cap();

    let d = pair_matrix(pts, |a, b| space.d(a, b));
    let dinv = pair_matrix(pts, |a, b| space.d(b, a));
    let ds: Vec<f64> = d.iter().zip(&dinv).map(|(a, b)| a.max(*b)).collect();

    let left_k = tail_flag(&d, len, cap, epsilon);
    let right_k = tail_flag(&dinv, len, cap, epsilon);
    let d_s = tail_flag(&ds, len, cap, epsilon);
    let left_d = d_cauchy_flag(seq, candidates, epsilon, |c, x| space.d(c, x));
    let right_d = d_cauchy_flag(seq, candidates, epsilon, |c, x| space.d(x, c));

    Ok(CauchyVerdict { left_d, left_k, right_d, right_k, d_s, epsilon, horizon: len, n0: left_k.n0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitMode {
    /// `d(x, x_n) → 0`
    #[default]
    Left,
    /// `d(x_n, x) → 0`
    Right,
    /// both
    Symmetric,
}

impl LimitMode {
    pub(crate) fn dist(self, space: &QPSpace, limit: Point, x: Point) -> f64 {
        match self {
            LimitMode::Left => space.d(limit, x),
            LimitMode::Right => space.d(x, limit),
            LimitMode::Symmetric => space.ds(limit, x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitHit {
    pub point: Point,
    /// 1-based tail start.
    pub n0: usize,
}

/// First candidate (in the given order) whose mode distance to the tail stays
/// below `tol` from some `n₀ ≤ ⌊N/2⌋` on, with the smallest such `n₀`.
pub fn detect_limit(seq: &SequenceWindow, candidates: &[Point], mode: LimitMode, tol: f64) -> Result<Option<LimitHit>> {
    if candidates.is_empty() {
        return Err(Error::Argument("detect_limit needs at least one candidate".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let space = seq.space();
    let cap = seq.cap();
    for &c in candidates {
        space.check(c)?;
        let n0 = candidate_n0(seq.points(), tol, |x| mode.dist(space, c, x));
        if n0 <= cap {
            return Ok(Some(LimitHit { point: c, n0 }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub inconsistencies: Vec<String>,
}

impl ChainReport {
    pub fn consistent(&self) -> bool {
        self.inconsistencies.is_empty()
    }
}

/// Check `dˢ ⇒ K ⇒ d` on each side within both verdicts, and the duality of
/// left notions under `d` with right notions under `d⁻¹`.
pub fn check_implication_chain(verdict: &CauchyVerdict, conjugate: &CauchyVerdict) -> Result<ChainReport> {
    if verdict.horizon != conjugate.horizon || verdict.epsilon != conjugate.epsilon {
        return Err(Error::Argument(format!(
            "verdicts differ in horizon/epsilon: ({}, {}) vs ({}, {})",
            verdict.horizon, verdict.epsilon, conjugate.horizon, conjugate.epsilon
        )));
    }
    let mut out = Vec::new();
    for (tag, v) in [("d", verdict), ("d⁻¹", conjugate)] {
        let implications = [
            ("d_s ⇒ left_K", v.d_s.holds, v.left_k.holds),
            ("left_K ⇒ left_d", v.left_k.holds, v.left_d.holds),
            ("d_s ⇒ right_K", v.d_s.holds, v.right_k.holds),
            ("right_K ⇒ right_d", v.right_k.holds, v.right_d.holds),
        ];
        for (rule, a, b) in implications {
            if a && !b {
                out.push(format!("[{tag}] {rule} violated"));
            }
        }
    }
    let dualities = [
        ("left_K(d) ⇔ right_K(d⁻¹)", verdict.left_k.holds, conjugate.right_k.holds),
        ("left_d(d) ⇔ right_d(d⁻¹)", verdict.left_d.holds, conjugate.right_d.holds),
        ("right_K(d) ⇔ left_K(d⁻¹)", verdict.right_k.holds, conjugate.left_k.holds),
        ("right_d(d) ⇔ left_d(d⁻¹)", verdict.right_d.holds, conjugate.left_d.holds),
        ("d_s(d) ⇔ d_s(d⁻¹)", verdict.d_s.holds, conjugate.d_s.holds),
    ];
    for (rule, a, b) in dualities {
        if a != b {
            out.push(format!("{rule} violated"));
        }
    }
    Ok(ChainReport { inconsistencies: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(lo: f64, hi: f64, f: impl Fn(usize) -> f64, len: usize) -> SequenceWindow {
        let space = QPSpace::upper_interval(lo, hi).unwrap();
        let vals: Vec<f64> = (1..=len).map(f).collect();
        SequenceWindow::from_values(space, &vals).unwrap()
    }

    /// Brute force: smallest n₀ ≤ cap with all n₀ ≤ k ≤ n < ε, straight from the definition.
    fn brute_left_k(seq: &SequenceWindow, eps: f64) -> Option<usize> {
        let p = seq.points();
        let n = p.len();
        (1..=n / 2).find(|&n0| (n0..=n).all(|k| (k..=n).all(|m| seq.space().dist(p[k - 1], p[m - 1]).unwrap() < eps)))
    }

    #[test]
    fn harmonic_sequence_is_left_k_cauchy() {
        let seq = window(0.0, 2.0, |n| 1.0 / n as f64, 1000);
        let v = classify_cauchy(&seq, 0.01).unwrap();
        let expected = brute_left_k(&seq, 0.01);
        // 1/k − 1/1000 < 0.01 first holds for every tail index at k = 91.
        assert_eq!(expected, Some(91));
        assert!(v.left_k.holds);
        assert_eq!(v.left_k.n0, expected);
        assert_eq!(v.n0, Some(91));
        assert!(v.left_d.holds && v.right_k.holds && v.d_s.holds);
    }

    #[test]
    fn oscillation_fails_left_k_with_witness() {
        let seq = window(-1.0, 1.0, |n| if n % 2 == 0 { 1.0 } else { -1.0 }, 100);
        let v = classify_cauchy(&seq, 1.0).unwrap();
        assert!(!v.left_k.holds);
        let (k, n) = v.left_k.witness.unwrap();
        assert!(k >= 50 && k <= n);
        let p = seq.points();
        assert_eq!(seq.space().dist(p[k - 1], p[n - 1]).unwrap(), 2.0);
        assert!(!v.d_s.holds);
    }

    #[test]
    fn constant_sequence_holds_everywhere() {
        let seq = window(0.0, 1.0, |_| 0.3, 50);
        for eps in [1e-9, 0.01, 1.0] {
            let v = classify_cauchy(&seq, eps).unwrap();
            for f in [v.left_d, v.left_k, v.right_d, v.right_k, v.d_s] {
                assert_eq!(f, Flag::holding(1));
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let seq = window(0.0, 1.0, |_| 0.3, 50);
        assert!(classify_cauchy(&seq, 0.0).is_err());
        assert!(classify_cauchy(&window(0.0, 1.0, |_| 0.3, 1), 0.1).is_err());
        assert!(SequenceWindow::new(QPSpace::upper_interval(0.0, 1.0).unwrap(), vec![]).is_err());
        assert!(detect_limit(&seq, &[], LimitMode::Left, 0.1).is_err());
    }

    #[test]
    fn detect_limit_examples() {
        let seq = window(0.0, 1.0, |n| 1.0 / n as f64, 1000);
        let zero = [Point::Real(0.0)];
        assert_eq!(
            detect_limit(&seq, &zero, LimitMode::Left, 0.01).unwrap(),
            Some(LimitHit { point: Point::Real(0.0), n0: 1 })
        );
        // 1/n < 0.01 exactly when n > 100.
        assert_eq!(
            detect_limit(&seq, &zero, LimitMode::Right, 0.01).unwrap(),
            Some(LimitHit { point: Point::Real(0.0), n0: 101 })
        );
        let osc = window(-1.0, 1.0, |n| if n % 2 == 0 { 1.0 } else { -1.0 }, 100);
        for mode in [LimitMode::Left, LimitMode::Right, LimitMode::Symmetric] {
            assert_eq!(detect_limit(&osc, &zero, mode, 0.5).unwrap(), None);
        }
    }

    #[test]
    fn chain_report_flags_planted_violation() {
        let seq = window(0.0, 1.0, |n| 1.0 / n as f64, 100);
        let v = classify_cauchy(&seq, 0.1).unwrap();
        let c = classify_cauchy(&seq.conjugate(), 0.1).unwrap();
        assert!(check_implication_chain(&v, &c).unwrap().consistent());

        let mut bad = v.clone();
        bad.left_k = Flag { holds: false, n0: None, witness: None };
        let rep = check_implication_chain(&bad, &c).unwrap();
        assert!(rep.inconsistencies.iter().any(|s| s.contains("d_s ⇒ left_K")));
        assert!(rep.inconsistencies.iter().any(|s| s.contains("left_K(d) ⇔ right_K(d⁻¹)")));

        let other = classify_cauchy(&seq.conjugate(), 0.2).unwrap();
        assert!(check_implication_chain(&v, &other).is_err());
    }
}
