//! One-call analytical pipeline: enumerate, build, solve, report.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::generator::Generator;
use crate::metrics::{self, MetricsReport};
use crate::params::SystemParams;
use crate::reservation::ReservationOptions;
use crate::solver::{self, StationaryDistribution};
use crate::state::{BasicState, ModelKind, ReservationState, StateSpace};
use crate::{basic, reservation};

/// A chain together with its rule options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Basic,
    Reservation(ReservationOptions),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Basic => ModelKind::Basic,
            Model::Reservation(_) => ModelKind::Reservation,
        }
    }
}

/// Enumerated space of either chain.
#[derive(Debug, Clone)]
pub enum Space {
    Basic(StateSpace<BasicState>),
    Reservation(StateSpace<ReservationState>),
}

impl Space {
    pub fn len(&self) -> usize {
        match self {
            Space::Basic(s) => s.len(),
            Space::Reservation(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tuples in index order.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        use crate::state::ChainState;
        match self {
            Space::Basic(s) => s.iter().map(|x| x.tuple()).collect(),
            Space::Reservation(s) => s.iter().map(|x| x.tuple()).collect(),
        }
    }
}

/// Result of the full analytical pipeline at one parameter point.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub space: Space,
    pub generator: Generator,
    pub stationary: StationaryDistribution,
    pub report: MetricsReport,
}

pub fn enumerate(p: &SystemParams, model: &Model) -> Space {
    match model {
        Model::Basic => Space::Basic(basic::enumerate(p)),
        Model::Reservation(o) => Space::Reservation(reservation::enumerate(p, o)),
    }
}

pub fn build(p: &SystemParams, model: &Model, space: &Space) -> Result<Generator, Error> {
    let g = match (model, space) {
        (Model::Basic, Space::Basic(s)) => basic::build_generator(p, s),
        (Model::Reservation(o), Space::Reservation(s)) => reservation::build_generator(p, o, s),
        _ => panic!("state space does not belong to {:?}", model.kind()),
    };
    Ok(g?)
}

pub fn report(p: &SystemParams, model: &Model, space: &Space, pi: &[f64]) -> MetricsReport {
    match (model, space) {
        (Model::Basic, Space::Basic(s)) => metrics::basic_report(p, s, pi),
        (Model::Reservation(o), Space::Reservation(s)) => metrics::reservation_report(p, o, s, pi),
        _ => panic!("state space does not belong to {:?}", model.kind()),
    }
}

/// Validates `p`, then enumerates, builds, solves directly at `tol` and
/// computes the metrics.
pub fn analyze(p: &SystemParams, model: &Model, tol: f64) -> Result<Analysis, Error> {
    let p = p.validate()?;
    let space = enumerate(&p, model);
    let generator = build(&p, model, &space)?;
    let stationary = solver::solve_direct(&generator, tol).map_err(|source| Error::Solve {
        context: format!(
            "{} model at lambda_s={} mu_s={}",
            model.kind(),
            p.su_arrival,
            p.su_service
        ),
        source,
    })?;
    let report = report(&p, model, &space, &stationary.pi);
    Ok(Analysis {
        space,
        generator,
        stationary,
        report,
    })
}

/// `π` export for either chain.
pub fn pi_csv(space: &Space, dist: &StationaryDistribution) -> String {
    match space {
        Space::Basic(s) => metrics::pi_csv(s, dist),
        Space::Reservation(s) => metrics::pi_csv(s, dist),
    }
}
