//! Basic random-access chain over states `(i, j1, j2)`.
//!
//! PUs land on a uniformly chosen non-PU channel. A landing on an SU forces
//! a handoff while idle channels remain; on a full system the PU drops a
//! class-2 user if one exists, otherwise a class-1 user. Class-1 arrivals
//! preempt class-2 users on a full system; class-2 arrivals are blocked.

use crate::generator::{BuildError, Event, Generator, RawTransition};
use crate::params::SystemParams;
use crate::state::{BasicState, StateSpace, SuClass};

/// All `(i, j1, j2)` with `i + j1 + j2 <= M` and `i <= min(M, k)`, in
/// lexicographic order. Only `M` and `k` are consulted.
pub fn enumerate(p: &SystemParams) -> StateSpace<BasicState> {
    let m = p.channels;
    let mut states = Vec::new();
    for pus in 0..=p.max_pus() {
        for su1 in 0..=(m - pus) {
            for su2 in 0..=(m - pus - su1) {
                states.push(BasicState::new(pus, su1, su2));
            }
        }
    }
    StateSpace::new(states)
}

/// Where an arriving SU of `class` goes, or `None` if it is blocked.
pub fn su_arrival(p: &SystemParams, s: &BasicState, class: SuClass) -> Option<(BasicState, Event)> {
    let full = s.busy() >= p.channels;
    match class {
        SuClass::Returned => None,
        SuClass::Su1 if !full => {
            Some((BasicState::new(s.pus, s.su1 + 1, s.su2), Event::Su1Arrival))
        }
        SuClass::Su1 if s.su2 > 0 => Some((
            BasicState::new(s.pus, s.su1 + 1, s.su2 - 1),
            Event::Su1ArrivalDropSu2,
        )),
        SuClass::Su2 if !full => {
            Some((BasicState::new(s.pus, s.su1, s.su2 + 1), Event::Su2Arrival))
        }
        _ => None,
    }
}

/// Outgoing transitions of `s`, zero-rate rows omitted.
pub fn transitions(p: &SystemParams, s: &BasicState) -> Vec<RawTransition<BasicState>> {
    let mut out = Vec::with_capacity(8);
    let idle = p.channels - s.busy();
    let pu_rate = p.pu_arrival_rate(s.pus);

    if pu_rate > 0.0 && s.pus < p.max_pus() {
        let up = BasicState::new(s.pus + 1, s.su1, s.su2);
        if idle > 0 {
            let free = (p.channels - s.pus) as f64;
            out.push((up, idle as f64 / free * pu_rate, Event::PuArrivalIdle));
            out.push((
                up,
                (s.su1 + s.su2) as f64 / free * pu_rate,
                Event::PuArrivalHandoff,
            ));
        } else if s.su2 > 0 {
            out.push((
                BasicState::new(s.pus + 1, s.su1, s.su2 - 1),
                pu_rate,
                Event::PuArrivalDropSu2,
            ));
        } else if s.su1 > 0 {
            out.push((
                BasicState::new(s.pus + 1, s.su1 - 1, s.su2),
                pu_rate,
                Event::PuArrivalDropSu1,
            ));
        }
    }
    if s.pus > 0 {
        out.push((
            BasicState::new(s.pus - 1, s.su1, s.su2),
            s.pus as f64 * p.pu_service,
            Event::PuDeparture,
        ));
    }
    for class in [SuClass::Su1, SuClass::Su2] {
        if let Some((target, event)) = su_arrival(p, s, class) {
            out.push((target, p.su_arrival, event));
        }
    }
    if s.su1 > 0 {
        out.push((
            BasicState::new(s.pus, s.su1 - 1, s.su2),
            s.su1 as f64 * p.su_service,
            Event::Su1Departure,
        ));
    }
    if s.su2 > 0 {
        out.push((
            BasicState::new(s.pus, s.su1, s.su2 - 1),
            s.su2 as f64 * p.su_service,
            Event::Su2Departure,
        ));
    }
    out.retain(|(_, rate, _)| *rate > 0.0);
    out
}

/// Labeled generator over `space` (normally from [`enumerate`]).
pub fn build_generator(
    p: &SystemParams,
    space: &StateSpace<BasicState>,
) -> Result<Generator, BuildError> {
    Generator::build(space, |s| transitions(p, s))
}
