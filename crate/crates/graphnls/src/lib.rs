//! Stationary states of the focusing nonlinear Schroedinger equation on
//! compact metric graphs: normalized-gradient-flow ground states, deflated
//! Newton bound states, symmetric rearrangements, and Gagliardo-Nirenberg
//! diagnostics, with the p = 6 critical-mass thresholds exposed as a mass
//! scan.

pub mod energy;
pub mod error;
pub mod gn;
pub mod graph;
pub mod io;
pub mod mesh;
pub mod rearrange;
pub mod scan;
pub mod solve;

pub use error::{Error, Result};
pub use graph::{critical_mass_half_line, critical_mass_line, MetricGraph, TopologyReport};
pub use mesh::{GraphFunction, Mesh};
