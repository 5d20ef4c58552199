//! JSON run configuration shared by the CLI subcommands.
//!
//! ```json
//! {
//!   "schema": "1",
//!   "space": {"id": "upper_interval", "params": {"lo": 0, "hi": 1}},
//!   "phi": {"id": "identity"},
//!   "maps": [{"id": "coupled_max"}, {"id": "affine_pull"}],
//!   "scheme": "pair",
//!   "seed_pair": [0, 0],
//!   "solver": {"tol": 1e-9, "verify_hypotheses": true},
//!   "output_dir": "out"
//! }
//! ```
//!
//! The first entry of `maps` is the coupled map `F`; the rest are self maps.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{get_coupled_map, get_phi, get_self_map, get_space, Params};
use crate::error::{Error, Result};
use crate::maps::{CoupledMap, SelfMap};
use crate::oracle::FuzzConfig;
use crate::order::{PreorderCtx, ORDER_SLACK};
use crate::solver::{scheme_for, Scheme, SolverConfig};
use crate::space::{Point, QPSpace, Sample};

pub const SCHEMA: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRef {
    pub id: String,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKeyword {
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Pair([f64; 2]),
    Keyword(SeedKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSpec {
    Grid(usize),
    Exhaustive,
    Points(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub space: Option<CatalogRef>,
    /// Defaults to the identity.
    #[serde(default)]
    pub phi: Option<CatalogRef>,
    #[serde(default)]
    pub maps: Vec<CatalogRef>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub seed_pair: Option<SeedSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Points for checks; defaults to every point of a finite carrier or a
    /// 21-point grid.
    #[serde(default)]
    pub sample: Option<SampleSpec>,
    /// Order slack; defaults to 1e-12.
    #[serde(default)]
    pub slack: Option<f64>,
    #[serde(default)]
    pub fuzz: Option<FuzzConfig>,
}

/// A configuration resolved against the catalog.
#[derive(Debug, Clone)]
pub struct Instance {
    pub ctx: PreorderCtx,
    pub f: Option<CoupledMap>,
    pub maps: Vec<SelfMap>,
    pub sample: Sample,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema {:?}, expected {SCHEMA:?}", self.schema)));
        }
        self.solver.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let (Some(scheme), Some(k)) = (self.scheme, self.maps.len().checked_sub(1)) {
            let fits = match scheme {
                Scheme::Kmap => true,
                other => other == scheme_for(k),
            };
            if !fits {
                return Err(Error::Config(format!("scheme {scheme:?} does not take {k} self maps")));
            }
        }
        Ok(())
    }

    pub fn scheme(&self) -> Option<Scheme> {
        let k = self.maps.len().checked_sub(1)?;
        Some(self.scheme.unwrap_or(scheme_for(k)))
    }

    pub fn build(&self) -> Result<Instance> {
        let space_ref = self.space.as_ref().ok_or_else(|| Error::Config("missing \"space\"".into()))?;
        let space = get_space(&space_ref.id, &space_ref.params)?.space;
        let phi = match &self.phi {
            Some(p) => get_phi(&p.id, &p.params, &space)?.phi,
            None => get_phi("identity", &Params::new(), &space)?.phi,
        };
        let ctx = PreorderCtx::new(space.clone(), phi).with_slack(self.slack.unwrap_or(ORDER_SLACK))?;
        let f = match self.maps.first() {
            Some(m) => Some(get_coupled_map(&m.id, &m.params)?),
            None => None,
        };
        let maps = self.maps.iter().skip(1).map(|m| get_self_map(&m.id, &m.params)).collect::<Result<_>>()?;
        let sample = match &self.sample {
            Some(SampleSpec::Grid(k)) => Sample::Grid(*k),
            Some(SampleSpec::Exhaustive) => Sample::Exhaustive,
            Some(SampleSpec::Points(v)) => Sample::Points(v.iter().map(|&x| space.point(x)).collect::<Result<_>>()?),
            None if space.is_finite() => Sample::Exhaustive,
            None => Sample::default(),
        };
        Ok(Instance { ctx, f, maps, sample })
    }

    pub fn seed(&self, space: &QPSpace) -> Result<Option<(Point, Point)>> {
        match &self.seed_pair {
            None | Some(SeedSpec::Keyword(SeedKeyword::Search)) => Ok(None),
            Some(SeedSpec::Pair([x, y])) => Ok(Some((space.point(*x)?, space.point(*y)?))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"{
        "schema": "1",
        "space": {"id": "upper_interval", "params": {"lo": 0, "hi": 1}},
        "maps": [{"id": "coupled_max"}, {"id": "affine_pull"}],
        "seed_pair": [0, 0],
        "solver": {"verify_hypotheses": true}
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = RunConfig::from_json(PAIR).unwrap();
        assert_eq!(cfg.scheme(), Some(Scheme::Pair));
        assert!(cfg.solver.verify_hypotheses);
        assert_eq!(cfg.solver.tol, 1e-9);
        let inst = cfg.build().unwrap();
        assert_eq!(inst.maps.len(), 1);
        assert_eq!(cfg.seed(&inst.ctx.space).unwrap(), Some((Point::Real(0.0), Point::Real(0.0))));
    }

    #[test]
    fn rejects_bad_configs() {
        let typo = PAIR.replace("verify_hypotheses", "verify_hypothesis");
        assert!(matches!(RunConfig::from_json(&typo), Err(Error::Config(_))));
        let schema = PAIR.replace(r#""schema": "1""#, r#""schema": "2""#);
        assert!(RunConfig::from_json(&schema).is_err());
        let extra = PAIR.replace(r#""schema": "1","#, r#""schema": "1", "colour": 3,"#);
        assert!(RunConfig::from_json(&extra).is_err());
        let scheme = PAIR.replace(r#""seed_pair""#, r#""scheme": "triple", "seed_pair""#);
        assert!(RunConfig::from_json(&scheme).is_err());
        let seed = PAIR.replace("[0, 0]", r#""anywhere""#);
        assert!(RunConfig::from_json(&seed).is_err());
        let tol = PAIR.replace(r#""verify_hypotheses": true"#, r#""tol": 0"#);
        assert!(RunConfig::from_json(&tol).is_err());
    }

    #[test]
    fn search_keyword_and_defaults() {
        let cfg = RunConfig::from_json(&PAIR.replace("[0, 0]", r#""search""#)).unwrap();
        let inst = cfg.build().unwrap();
        assert_eq!(cfg.seed(&inst.ctx.space).unwrap(), None);
        assert_eq!(inst.ctx.phi.name(), "identity");
        assert_eq!(inst.sample, Sample::Grid(21));
    }
}
