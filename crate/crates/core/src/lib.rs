//! Alternative multi-year budget search.
//!
//! [`budget`] simulates a local community's chained yearly budgets,
//! [`scaling`] turns two anchor budgets into a dimensionless problem,
//! [`frame`] spans the search box around the anchors, [`fitness`] scores
//! candidates and [`ga`] searches the box. [`testbed`] holds the 1-D
//! verification curves and [`operational`] the ten-gene project/tax coding.

// `!(x >= 0.0)` style checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod fitness;
pub mod frame;
pub mod ga;
pub mod operational;
pub mod pipeline;
pub mod scaling;
pub mod testbed;
