//! Named spaces, `φ` functions and maps, addressable by string id from
//! configuration files.
//!
//! Parameters arrive as a JSON object; unknown keys are rejected.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::maps::{BoundDirection, CoupledMap, PhiFn, SelfMap};
use crate::space::{IntervalDist, Point, QPSpace};

pub type Params = Map<String, Value>;

/// Documentation labels carried by a catalog entry. Completeness is stated,
/// not certified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Labels {
    /// `None` for user matrices, where it must be checked.
    pub t0: Option<bool>,
    pub left_k_complete: Option<bool>,
    pub phi_bound: Option<BoundDirection>,
}

#[derive(Debug, Clone)]
pub struct SpaceEntry {
    pub space: QPSpace,
    pub labels: Labels,
}

#[derive(Debug, Clone)]
pub struct PhiEntry {
    pub phi: PhiFn,
    pub labels: Labels,
}

#[derive(Debug, Clone)]
pub enum MapEntry {
    Coupled(CoupledMap),
    Single(SelfMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Space,
    Phi,
    Coupled,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EntryInfo {
    pub id: &'static str,
    pub kind: EntryKind,
    pub params: &'static [&'static str],
    pub summary: &'static str,
}

const fn entry(id: &'static str, kind: EntryKind, params: &'static [&'static str], summary: &'static str) -> EntryInfo {
    EntryInfo { id, kind, params, summary }
}

use EntryKind::{Coupled, Phi, Single, Space};

pub const ENTRIES: &[EntryInfo] = &[
    entry("upper_interval", Space, &["lo", "hi"], "[lo, hi] with d(x, y) = max(x − y, 0)"),
    entry("lower_interval", Space, &["lo", "hi"], "[lo, hi] with d(x, y) = max(y − x, 0)"),
    entry("abs_interval", Space, &["lo", "hi"], "[lo, hi] with d(x, y) = |x − y|"),
    entry("chain_finite", Space, &["n", "step"], "{0, …, n−1} with d(i, j) = step·max(i − j, 0)"),
    entry("discrete_finite", Space, &["n"], "{0, …, n−1} with d(i, j) = 1 for i ≠ j"),
    entry("indiscrete_finite", Space, &["n"], "{0, …, n−1} with d ≡ 0; not T₀"),
    entry("finite", Space, &["matrix"], "user matrix, axioms unchecked"),
    entry("identity", Phi, &["direction", "bound"], "φ(x) = x; bound defaults to the carrier's end"),
    entry("arctan", Phi, &[], "φ(x) = arctan x, bounded above by π/2"),
    entry("neg_exp", Phi, &[], "φ(x) = −e^{−x}, bounded above by 0 for x ≥ 0"),
    entry("table", Phi, &["values", "direction"], "φ(i) = values[i]"),
    entry("coupled_max", Coupled, &[], "F(x, y) = max(x, y)"),
    entry("coupled_min", Coupled, &[], "F(x, y) = min(x, y)"),
    entry("coupled_affine", Coupled, &["a", "b", "c"], "F(x, y) = a·x + b·y + c (default (x + y + 2)/4)"),
    entry("first_projection", Coupled, &[], "F(x, y) = x"),
    entry("coupled_product", Coupled, &[], "F(x, y) = x·y"),
    entry("coupled_reflect", Coupled, &["c"], "F(x, y) = c − y"),
    entry("coupled_table", Coupled, &["table"], "F(i, j) = table[i][j]"),
    entry("identity", Single, &[], "g(x) = x"),
    entry("affine_pull", Single, &["a", "b"], "g(x) = a·x + b (default (1 + x)/2)"),
    entry("power", Single, &["p"], "g(x) = x^p"),
    entry("step", Single, &["at", "low", "high"], "g(x) = high if x ≥ at else low"),
    entry("constant", Single, &["value"], "g(x) = value"),
    entry("table", Single, &["values"], "g(i) = values[i]"),
];

fn info(id: &str, kind: EntryKind) -> Result<&'static EntryInfo> {
    ENTRIES
        .iter()
        .find(|e| e.id == id && e.kind == kind)
        .ok_or_else(|| Error::Lookup(format!("no {kind:?} entry named {id:?}")))
}

struct Args<'a> {
    id: &'a str,
    params: &'a Params,
}

impl<'a> Args<'a> {
    fn new(info: &EntryInfo, params: &'a Params) -> Result<Self> {
        if let Some(k) = params.keys().find(|k| !info.params.contains(&k.as_str())) {
            return Err(Error::Config(format!("{}: unknown parameter {k:?} (accepted: {:?})", info.id, info.params)));
        }
        Ok(Args { id: info.id, params })
    }

    fn bad(&self, key: &str, want: &str) -> Error {
        Error::Config(format!("{}: parameter {key:?} must be {want}", self.id))
    }

    fn num(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| self.bad(key, "a finite number")),
        }
    }

    fn count(&self, key: &str, default: Option<usize>) -> Result<usize> {
        match self.params.get(key) {
            None => default.ok_or_else(|| self.bad(key, "given")),
            Some(v) => {
                v.as_u64().filter(|&n| n >= 1).map(|n| n as usize).ok_or_else(|| self.bad(key, "a positive integer"))
            }
        }
    }

    fn value<T: serde::de::DeserializeOwned>(&self, key: &str, want: &str) -> Result<T> {
        let v = self.params.get(key).ok_or_else(|| self.bad(key, "given"))?;
        serde_json::from_value(v.clone()).map_err(|_| self.bad(key, want))
    }

    fn direction(&self) -> Result<Option<BoundDirection>> {
        match self.params.get("direction") {
            None => Ok(None),
            Some(v) => {
                serde_json::from_value(v.clone()).map(Some).map_err(|_| self.bad("direction", "\"above\" or \"below\""))
            }
        }
    }
}

fn labels(t0: Option<bool>, complete: Option<bool>) -> Labels {
    Labels { t0, left_k_complete: complete, phi_bound: None }
}

fn square(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
}

pub fn get_space(id: &str, params: &Params) -> Result<SpaceEntry> {
    let a = Args::new(info(id, Space)?, params)?;
    let interval = |dist| -> Result<SpaceEntry> {
        let (lo, hi) = (a.num("lo", 0.0)?, a.num("hi", 1.0)?);
        Ok(SpaceEntry { space: QPSpace::interval(lo, hi, dist)?, labels: labels(Some(true), Some(true)) })
    };
    match id {
        "upper_interval" => interval(IntervalDist::Upper),
        "lower_interval" => interval(IntervalDist::Lower),
        "abs_interval" => interval(IntervalDist::Abs),
        "chain_finite" => {
            let (n, step) = (a.count("n", Some(5))?, a.num("step", 1.0)?);
            if step <= 0.0 {
                return Err(a.bad("step", "positive"));
            }
            let m = square(n, |i, j| step * i.saturating_sub(j) as f64);
            Ok(SpaceEntry { space: QPSpace::finite(m)?, labels: labels(Some(true), Some(true)) })
        }
        "discrete_finite" => {
            let m = square(a.count("n", Some(3))?, |i, j| if i == j { 0.0 } else { 1.0 });
            Ok(SpaceEntry { space: QPSpace::finite(m)?, labels: labels(Some(true), Some(true)) })
        }
        "indiscrete_finite" => {
            let n = a.count("n", Some(3))?;
            Ok(SpaceEntry { space: QPSpace::finite(square(n, |_, _| 0.0))?, labels: labels(Some(n == 1), Some(true)) })
        }
        "finite" => {
            let m: Vec<Vec<f64>> = a.value("matrix", "a square matrix of nonnegative numbers")?;
            Ok(SpaceEntry { space: QPSpace::finite(m)?, labels: labels(None, Some(true)) })
        }
        _ => unreachable!("listed in ENTRIES"),
    }
}

/// `space` supplies defaults, such as the bound of the identity.
pub fn get_phi(id: &str, params: &Params, space: &QPSpace) -> Result<PhiEntry> {
    let a = Args::new(info(id, Phi)?, params)?;
    let phi = match id {
        "identity" => {
            let dir = a.direction()?.unwrap_or(BoundDirection::Above);
            let (lo, hi) = match (space.bounds(), space.size()) {
                (Some(b), _) => b,
                (None, Some(n)) => (0.0, (n - 1) as f64),
                (None, None) => unreachable!("a space is an interval or finite"),
            };
            let end = match dir {
                BoundDirection::Above => hi,
                BoundDirection::Below => lo,
            };
            PhiFn::identity(dir, a.num("bound", end)?)
        }
        "arctan" => PhiFn::arctan(),
        "neg_exp" => PhiFn::neg_exp(),
        "table" => {
            let values: Vec<f64> = a.value("values", "a list of numbers")?;
            if let Some(n) = space.size() {
                if values.len() != n {
                    return Err(a.bad("values", &format!("a list of {n} numbers")));
                }
            }
            PhiFn::table(values, a.direction()?.unwrap_or(BoundDirection::Above))?
        }
        _ => unreachable!("listed in ENTRIES"),
    };
    let labels = Labels { t0: None, left_k_complete: None, phi_bound: Some(phi.bound_direction) };
    Ok(PhiEntry { phi, labels })
}

/// Coupled maps are tried first, so `table` resolves to the self-map table
/// only through [`get_self_map`].
pub fn get_map(id: &str, params: &Params) -> Result<MapEntry> {
    match get_coupled_map(id, params) {
        Err(Error::Lookup(_)) => get_self_map(id, params).map(MapEntry::Single),
        other => other.map(MapEntry::Coupled),
    }
}

pub fn get_coupled_map(id: &str, params: &Params) -> Result<CoupledMap> {
    let a = Args::new(info(id, Coupled)?, params)?;
    Ok(match id {
        "coupled_max" => CoupledMap::real(id, f64::max),
        "coupled_min" => CoupledMap::real(id, f64::min),
        "coupled_affine" => {
            let (p, q, c) = (a.num("a", 0.25)?, a.num("b", 0.25)?, a.num("c", 0.5)?);
            CoupledMap::real(id, move |x, y| p * x + q * y + c)
        }
        "first_projection" => CoupledMap::new(id, |x, _| x),
        "coupled_product" => CoupledMap::real(id, |x, y| x * y),
        "coupled_reflect" => {
            let c = a.num("c", 1.0)?;
            CoupledMap::real(id, move |_, y| c - y)
        }
        "coupled_table" => CoupledMap::table(id, a.value("table", "a square table of point indices")?)?,
        _ => unreachable!("listed in ENTRIES"),
    })
}

pub fn get_self_map(id: &str, params: &Params) -> Result<SelfMap> {
    let a = Args::new(info(id, Single)?, params)?;
    Ok(match id {
        "identity" => SelfMap::identity(),
        "affine_pull" => {
            let (p, q) = (a.num("a", 0.5)?, a.num("b", 0.5)?);
            SelfMap::real(id, move |x| p * x + q)
        }
        "power" => {
            let p = a.num("p", 0.5)?;
            SelfMap::real(id, move |x| x.powf(p))
        }
        "step" => {
            let (at, low, high) = (a.num("at", 0.5)?, a.num("low", 0.0)?, a.num("high", 1.0)?);
            SelfMap::real(id, move |x| if x >= at { high } else { low })
        }
        "constant" => {
            let v = a.num("value", 0.0)?;
            SelfMap::new(id, move |p| match p {
                Point::Real(_) => Point::Real(v),
                Point::Index(_) if v >= 0.0 && v.fract() == 0.0 => Point::Index(v as usize),
                Point::Index(_) => Point::Real(f64::NAN),
            })
        }
        "table" => SelfMap::table(id, a.value("values", "a list of point indices")?)?,
        _ => unreachable!("listed in ENTRIES"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{check_phi_bound, check_preorder_laws, PreorderCtx};
    use crate::space::{check_axioms, check_t0, Sample};
    use serde_json::json;

    fn params(v: Value) -> Params {
        v.as_object().cloned().unwrap_or_default()
    }

    fn r(v: f64) -> Point {
        Point::Real(v)
    }

    fn all_spaces() -> Vec<(&'static str, SpaceEntry)> {
        let finite = json!({"matrix": [[0, 1, 2], [0, 0, 1], [0, 0, 0]]});
        ENTRIES
            .iter()
            .filter(|e| e.kind == EntryKind::Space)
            .map(|e| {
                let p = if e.id == "finite" { params(finite.clone()) } else { Params::new() };
                (e.id, get_space(e.id, &p).unwrap())
            })
            .collect()
    }

    #[test]
    fn spaces_satisfy_axioms_and_t0_labels() {
        for (id, e) in all_spaces() {
            assert!(check_axioms(&e.space, &Sample::default()).unwrap().passed(), "{id}");
            if let Some(t0) = e.labels.t0 {
                assert_eq!(check_t0(&e.space, &Sample::default()).unwrap().passed(), t0, "{id}");
            }
        }
    }

    #[test]
    fn space_phi_pairs_are_preorders() {
        for (id, e) in all_spaces() {
            let phis: Vec<&str> =
                if e.space.is_finite() { vec!["identity", "table"] } else { vec!["identity", "arctan", "neg_exp"] };
            for phi_id in phis {
                let p = if phi_id == "table" {
                    let n = e.space.size().unwrap();
                    params(json!({"values": (0..n).map(|i| (i * 7 % 5) as f64 / 4.0).collect::<Vec<_>>()}))
                } else {
                    Params::new()
                };
                let phi = get_phi(phi_id, &p, &e.space).unwrap().phi;
                let ctx = PreorderCtx::new(e.space.clone(), phi);
                assert!(check_preorder_laws(&ctx, &Sample::default()).unwrap().passed(), "{id} / {phi_id}");
            }
        }
    }

    #[test]
    fn formula_entries() {
        let s = get_space("upper_interval", &params(json!({"lo": 0, "hi": 1}))).unwrap().space;
        assert_eq!(s.dist(r(0.75), r(0.25)).unwrap(), 0.5);
        assert_eq!(s.dist(r(0.25), r(0.75)).unwrap(), 0.0);

        let f = get_coupled_map("coupled_max", &Params::new()).unwrap();
        assert_eq!(f.apply(r(0.3), r(0.8)), r(0.8));
        let g = get_self_map("affine_pull", &params(json!({"a": 0.5, "b": 0.5}))).unwrap();
        assert_eq!(g.apply(r(0.5)), r(0.75));
        let f = get_coupled_map("coupled_affine", &Params::new()).unwrap();
        assert_eq!(f.apply(r(1.0), r(1.0)), r(1.0));

        let phi = get_phi("identity", &Params::new(), &s).unwrap();
        assert_eq!((phi.phi.bound_direction, phi.phi.declared_bound), (BoundDirection::Above, 1.0));
        assert!(check_phi_bound(&phi.phi, &s.grid(21)).passed());

        assert!(matches!(get_map("coupled_max", &Params::new()), Ok(MapEntry::Coupled(_))));
        assert!(matches!(get_map("power", &Params::new()), Ok(MapEntry::Single(_))));
    }

    #[test]
    fn lookup_and_parameter_errors() {
        assert!(matches!(get_space("moebius", &Params::new()), Err(Error::Lookup(_))));
        assert!(matches!(get_map("nope", &Params::new()), Err(Error::Lookup(_))));
        assert!(matches!(get_space("upper_interval", &params(json!({"low": 0}))), Err(Error::Config(_))));
        assert!(matches!(get_self_map("power", &params(json!({"p": "two"}))), Err(Error::Config(_))));
        assert!(matches!(get_self_map("table", &Params::new()), Err(Error::Config(_))));
        let s = get_space("discrete_finite", &Params::new()).unwrap().space;
        assert!(get_phi("table", &params(json!({"values": [0, 1]})), &s).is_err());
    }
}
