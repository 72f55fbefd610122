//! Closed-loop orchestration of the three-level hierarchy.

pub mod level3;
pub mod metrics;
pub mod plant;
pub mod sim;
