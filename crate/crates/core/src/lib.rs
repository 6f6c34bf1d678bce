//! Continuous-time Markov chain models of prioritized secondary-user access
//! to a cognitive-radio band shared with a finite primary-user population.
//!
//! Two chains are provided: [`basic`] (random access, two SU classes) and
//! [`reservation`] (reserved channels plus channel aggregation, three SU
//! classes). Each chain's generator is solved by [`solver`], and [`metrics`]
//! turns the stationary vector into capacity, utilization, blocking and
//! handoff figures. [`sim`] is an independent discrete-event simulator of the
//! same event rules used to cross-validate the analytical pipeline, and
//! [`sweep`] drives parameter sweeps that write CSV tables.

pub mod basic;
pub mod complexity;
pub mod error;
pub mod format;
pub mod generator;
pub mod metrics;
pub mod model;
pub mod params;
pub mod reservation;
pub mod sim;
pub mod solver;
pub mod state;
pub mod sweep;

pub use error::{Error, ParamError, Result, SimError, SolveError};
pub use generator::{Event, Generator, Transition};
pub use metrics::{ClassValues, MetricsReport};
pub use model::{analyze, Analysis, Model, Space};
pub use params::SystemParams;
pub use reservation::ReservationOptions;
pub use sim::{simulate, SimConfig, SimEstimate};
pub use solver::{Method, StationaryDistribution};
pub use state::{BasicState, ChainState, ModelKind, ReservationState, StateSpace, SuClass};
