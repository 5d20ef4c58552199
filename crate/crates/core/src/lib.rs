//! Hypothesis checking and successive approximation for coupled fixed points
//! in quasi-pseudometric spaces preordered by a real function `φ`.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod maps;
pub mod oracle;
pub mod order;
pub mod random;
pub mod relations;
pub mod sequence;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use maps::{BoundDirection, CoupledMap, PhiFn, SelfMap};
pub use order::{Direction, MetricMode, PreorderCtx};
pub use space::{Point, QPSpace, Sample};
