//! Community energy management with fast-frequency-response provision.
//!
//! The crate is organized around a three-level control hierarchy for a
//! small cluster of buildings sharing a grid connection:
//!
//! * [`domain`] — configuration types, physical parameter validation, and
//!   the PV / comfort primitives everything else is built on.
//! * [`lpcore`] — a self-contained sparse LP solver (bounded-variable
//!   revised simplex) with a branch-and-bound layer for the formulation's
//!   binary charge/discharge indicators.
//! * [`model`] — translates a community configuration into solver
//!   instances: the day-ahead allocation MILP and the rolling-window
//!   stochastic re-scheduling problem.
//! * [`scenario`] — seeded PV-irradiance scenario generation with hourly
//!   conditional updates.
//! * [`control`] — the closed loop: day-ahead commitment, hourly
//!   re-scheduling, sub-minute reserve dispatch against a regulation
//!   signal, and ground-truth plant propagation.
//! * [`io`] — configuration/series ingestion, the bundled synthetic
//!   dataset, and report emission.

pub mod control;
pub mod domain;
pub mod io;
pub mod lpcore;
pub mod model;
pub mod scenario;

pub use domain::{CommunityConfig, Violation};
pub use lpcore::{LinearProgram, MilpProblem, Solution};
