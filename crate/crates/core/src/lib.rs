//! Planning toolkit for offshore wind farm collector cabling: substation
//! siting, candidate enumeration, crossing detection, MILP assembly, an
//! in-repo branch-and-bound solver, exact evaluation, and baselines.

pub mod candidates;
pub mod error;
pub mod evaluate;
pub mod fixtures;
pub mod farm;
pub mod geometry;
pub mod model;
pub mod simplex;
pub mod siting;

pub mod solver;

pub use error::{Error, Result};
