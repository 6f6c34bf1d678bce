//! Performance metrics computed from a stationary vector.
//!
//! Capacity is the long-run completion rate per class. Utilization is the
//! mean fraction of busy channels. Blocking and handoff follow the
//! rate-ratio forms
//!
//! ```text
//! P_b(c) = Σ_{s ∈ B_c} λs π_s / ((k - i) λp + λs)
//! P_h(c) = Σ_{s ∈ H_c} f_c(s)/(M - i) (k - i) λp π_s / ((1 - P_b(c)) ((k - i) λp + λs))
//! ```
//!
//! where `B_c` is taken from the chain builders' own blocked-arrival rules
//! and `H_c` is the set of states where a PU landing can displace a class-c
//! relevant user while idle channels remain.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::format::g12;
use crate::params::SystemParams;
use crate::reservation::{self, ReservationOptions};
use crate::state::{BasicState, ChainState, ModelKind, ReservationState, StateSpace, SuClass};
use crate::{basic, solver::StationaryDistribution};

/// One value per SU class; `returned` is `None` for the basic chain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassValues {
    pub returned: Option<f64>,
    pub su1: f64,
    pub su2: f64,
}

impl ClassValues {
    pub fn get(&self, class: SuClass) -> Option<f64> {
        match class {
            SuClass::Returned => self.returned,
            SuClass::Su1 => Some(self.su1),
            SuClass::Su2 => Some(self.su2),
        }
    }

    /// Present values in `Returned, Su1, Su2` order.
    pub fn present(&self) -> Vec<(SuClass, f64)> {
        SuClass::ALL
            .into_iter()
            .filter_map(|c| self.get(c).map(|v| (c, v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: ModelKind,
    /// Completed requests per second.
    pub capacity: ClassValues,
    pub utilization: f64,
    pub blocking: ClassValues,
    pub handoff: ClassValues,
    /// Classes whose blocking probability is 1; their handoff is reported as 0.
    pub degenerate: Vec<SuClass>,
}

/// Metric columns shared by every CSV emitted by the toolkit.
pub const METRIC_COLUMNS: [&str; 10] = [
    "rho_1", "rho_2", "rho_r1", "U", "Pb_r1", "Pb_1", "Pb_2", "Ph_r1", "Ph_1", "Ph_2",
];

impl MetricsReport {
    /// Values aligned with [`METRIC_COLUMNS`]; `None` for columns the model
    /// does not define.
    pub fn values(&self) -> [Option<f64>; 10] {
        [
            Some(self.capacity.su1),
            Some(self.capacity.su2),
            self.capacity.returned,
            Some(self.utilization),
            self.blocking.returned,
            Some(self.blocking.su1),
            Some(self.blocking.su2),
            self.handoff.returned,
            Some(self.handoff.su1),
            Some(self.handoff.su2),
        ]
    }

    /// `model,lambda_s,mu_s,` followed by the metric columns.
    pub fn csv_row(&self, p: &SystemParams) -> String {
        let mut row = format!("{},{},{}", self.model, g12(p.su_arrival), g12(p.su_service));
        for v in self.values() {
            row.push(',');
            if let Some(v) = v {
                row.push_str(&g12(v));
            }
        }
        row
    }
}

pub fn csv_header() -> String {
    let mut h = String::from("model,lambda_s,mu_s");
    for c in METRIC_COLUMNS {
        write!(h, ",{c}").unwrap();
    }
    h
}

fn weighted<S: ChainState>(space: &StateSpace<S>, pi: &[f64], f: impl Fn(&S) -> f64) -> f64 {
    space.iter().zip(pi).map(|(s, &w)| f(s) * w).sum()
}

/// `Σ_{s ∈ blocked} λs π_s / ((k - i) λp + λs)`.
fn blocking_sum<S: ChainState>(
    p: &SystemParams,
    space: &StateSpace<S>,
    pi: &[f64],
    blocked: impl Fn(&S) -> bool,
) -> f64 {
    weighted(space, pi, |s| {
        if blocked(s) {
            p.su_arrival / (p.pu_arrival_rate(s.pus()) + p.su_arrival)
        } else {
            0.0
        }
    })
}

/// Handoff sum; returns `(probability, degenerate)`.
fn handoff_sum<S: ChainState>(
    p: &SystemParams,
    space: &StateSpace<S>,
    pi: &[f64],
    in_set: impl Fn(&S) -> bool,
    occupants: impl Fn(&S) -> usize,
    blocking: f64,
) -> (f64, bool) {
    let admitted = 1.0 - blocking;
    if admitted <= 0.0 {
        return (0.0, true);
    }
    let total = weighted(space, pi, |s| {
        if !in_set(s) {
            return 0.0;
        }
        let pu = p.pu_arrival_rate(s.pus());
        let free = (p.channels - s.pus()) as f64;
        occupants(s) as f64 / free * pu / (pu + p.su_arrival)
    });
    (total / admitted, false)
}

/// Capacities `ρ1 = Σ j1 μs π`, `ρ2 = Σ j2 μs π`.
pub fn basic_capacity(p: &SystemParams, space: &StateSpace<BasicState>, pi: &[f64]) -> ClassValues {
    ClassValues {
        returned: None,
        su1: weighted(space, pi, |s| s.su1 as f64 * p.su_service),
        su2: weighted(space, pi, |s| s.su2 as f64 * p.su_service),
    }
}

/// Capacities `ρ'R1 = Σ j1' μs π`, `ρ'1 = Σ j1 μs π` and the
/// channel-weighted `ρ'2 = Σ (m jm + n jn) μs π`.
pub fn reservation_capacity(
    p: &SystemParams,
    space: &StateSpace<ReservationState>,
    pi: &[f64],
) -> ClassValues {
    ClassValues {
        returned: Some(weighted(space, pi, |s| s.returned as f64 * p.su_service)),
        su1: weighted(space, pi, |s| s.su1 as f64 * p.su_service),
        su2: weighted(space, pi, |s| s.su2_channels(p) as f64 * p.su_service),
    }
}

/// Mean busy-channel fraction (`Cx/M` or `Mx/M`).
pub fn utilization<S: ChainState>(p: &SystemParams, space: &StateSpace<S>, pi: &[f64]) -> f64 {
    weighted(space, pi, |s| s.occupied(p) as f64 / p.channels as f64)
}

pub fn basic_blocking(p: &SystemParams, space: &StateSpace<BasicState>, pi: &[f64]) -> ClassValues {
    let class = |c| blocking_sum(p, space, pi, |s| basic::su_arrival(p, s, c).is_none());
    ClassValues {
        returned: None,
        su1: class(SuClass::Su1),
        su2: class(SuClass::Su2),
    }
}

pub fn reservation_blocking(
    p: &SystemParams,
    opts: &ReservationOptions,
    space: &StateSpace<ReservationState>,
    pi: &[f64],
) -> ClassValues {
    let class = |c| {
        blocking_sum(p, space, pi, |s| {
            reservation::su_arrival(p, opts, s, c).is_none()
        })
    };
    ClassValues {
        returned: Some(class(SuClass::Returned)),
        su1: class(SuClass::Su1),
        su2: class(SuClass::Su2),
    }
}

/// Handoff probabilities of the basic chain. Class 1 counts `j1` occupants
/// over states with `j1 >= 1`; class 2 counts `j1 + j2` over states with
/// `j2 >= 1`. Both require an idle channel.
pub fn basic_handoff(
    p: &SystemParams,
    space: &StateSpace<BasicState>,
    pi: &[f64],
    blocking: &ClassValues,
) -> (ClassValues, Vec<SuClass>) {
    let idle = |s: &BasicState| s.busy() < p.channels;
    let (h1, d1) = handoff_sum(
        p,
        space,
        pi,
        |s| idle(s) && s.su1 >= 1,
        |s| s.su1,
        blocking.su1,
    );
    let (h2, d2) = handoff_sum(
        p,
        space,
        pi,
        |s| idle(s) && s.su2 >= 1,
        |s| s.su1 + s.su2,
        blocking.su2,
    );
    let mut degenerate = Vec::new();
    if d1 {
        degenerate.push(SuClass::Su1);
    }
    if d2 {
        degenerate.push(SuClass::Su2);
    }
    (
        ClassValues {
            returned: None,
            su1: h1,
            su2: h2,
        },
        degenerate,
    )
}

/// Handoff probabilities of the reservation chain.
///
/// The summation conditions of the closed-form sums are, per class:
/// - SU-R1: `i = M_rp..M`; `j'_1 = M'_1`; `M_x = M, j_m > 0`; `M_x < M, j_m = j_n = 0`; `M_x < M, j_n = 0`.
/// - SU-1: `i = M_rp..M`, `j_1 = 1..M - M'_1`; `M_x < M, j_n = 0`; `M_x = M, j_m > 0`; `M_x < M, j_m = j_n = 0`.
/// - SU-2: `i = M_rp..M`; `M_x = M, j_2 ≠ 0, j_m > 0`; `M_x < M, j_n = 0, j_m ≠ 0`; `M_x < M, j_m = 0, j_n ≠ 0`; `M_x < M, j_m ≠ 0, j_n ≠ 0`.
///
/// These are read as: an idle channel exists (a handoff needs somewhere to
/// go), `i >= M_rp` (PUs only land on SU channels once the reserved block is
/// full), and at least one user of the class is present. Occupant weights are
/// `j'_1`, `j'_1 + j_1` and `j'_1 + j_1 + j_2`.
pub fn reservation_handoff(
    p: &SystemParams,
    space: &StateSpace<ReservationState>,
    pi: &[f64],
    blocking: &ClassValues,
) -> (ClassValues, Vec<SuClass>) {
    let landing = |s: &ReservationState| s.idle(p) > 0 && s.pus >= p.pu_reserved;
    let (hr, dr) = handoff_sum(
        p,
        space,
        pi,
        |s| landing(s) && s.returned >= 1,
        |s| s.returned,
        blocking.returned.unwrap_or(0.0),
    );
    let (h1, d1) = handoff_sum(
        p,
        space,
        pi,
        |s| landing(s) && s.su1 >= 1,
        |s| s.returned + s.su1,
        blocking.su1,
    );
    let (h2, d2) = handoff_sum(
        p,
        space,
        pi,
        |s| landing(s) && s.su2() >= 1,
        |s| s.returned + s.su1 + s.su2(),
        blocking.su2,
    );
    let degenerate = [
        (SuClass::Returned, dr),
        (SuClass::Su1, d1),
        (SuClass::Su2, d2),
    ]
    .into_iter()
    .filter_map(|(c, d)| d.then_some(c))
    .collect();
    (
        ClassValues {
            returned: Some(hr),
            su1: h1,
            su2: h2,
        },
        degenerate,
    )
}

pub fn basic_report(p: &SystemParams, space: &StateSpace<BasicState>, pi: &[f64]) -> MetricsReport {
    let blocking = basic_blocking(p, space, pi);
    let (handoff, degenerate) = basic_handoff(p, space, pi, &blocking);
    MetricsReport {
        model: ModelKind::Basic,
        capacity: basic_capacity(p, space, pi),
        utilization: utilization(p, space, pi),
        blocking,
        handoff,
        degenerate,
    }
}

pub fn reservation_report(
    p: &SystemParams,
    opts: &ReservationOptions,
    space: &StateSpace<ReservationState>,
    pi: &[f64],
) -> MetricsReport {
    let blocking = reservation_blocking(p, opts, space, pi);
    let (handoff, degenerate) = reservation_handoff(p, space, pi, &blocking);
    MetricsReport {
        model: ModelKind::Reservation,
        capacity: reservation_capacity(p, space, pi),
        utilization: utilization(p, space, pi),
        blocking,
        handoff,
        degenerate,
    }
}

/// `state_tuple,probability` CSV with 17 significant digits.
pub fn pi_csv<S: ChainState>(space: &StateSpace<S>, dist: &StationaryDistribution) -> String {
    let mut out = String::from("state_tuple,probability\n");
    for (s, w) in space.iter().zip(&dist.pi) {
        let tuple: Vec<String> = s.tuple().iter().map(|x| x.to_string()).collect();
        writeln!(out, "\"({})\",{}", tuple.join(","), crate::format::g17(*w)).unwrap();
    }
    out
}
