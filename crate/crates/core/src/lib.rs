//! Multiplicative G-metric spaces and fixed points of contractive self-maps.
//!
//! Distances are kept as logarithms throughout (see [`metric`]). The crate
//! provides axiom checking by seeded sampling ([`axioms`]), pointwise and
//! region-wide contraction checks ([`contraction`]), Picard iteration with
//! a-priori iteration bounds ([`picard`]), built-in fixtures ([`corpus`]) and
//! the `gmfix` command-line front end ([`cli`]).

pub mod axioms;
pub mod cli;
pub mod contraction;
pub mod corpus;
pub mod error;
pub mod json;
pub mod metric;
pub mod picard;
pub mod sampling;

pub use contraction::{Condition, ContractionParams, Region, SelfMap};
pub use error::{Error, Result};
pub use metric::{
    ball_contains, gm_from_exp, gm_from_product, ClosedBall, GMetric, Interval, LogDistance, MultMetric, Point,
};
pub use picard::{solve_fixed_point, FixedPointResult, OrderRelation, PicardTrace, SolveOptions};
