//! Reservation/aggregation chain over states `(i, j1', j1, jm, jn)`.
//!
//! PUs fill `M_rp` reserved channels first, then land uniformly on the
//! remaining non-PU channels. Class-2 users aggregate `m` channels when room
//! allows and shrink to `n` under pressure; the `M_r2` narrow class-2 users
//! are protected from preemption by class-1 arrivals. The state space is the
//! reachable closure of the empty state under these rules.
//!
//! When `m == n` the two widths are indistinguishable: nothing can degrade,
//! and rules that mention narrow users apply to all class-2 users.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::generator::{BuildError, Event, Generator, RawTransition};
use crate::params::SystemParams;
use crate::state::{ChainState, ReservationState, StateSpace, SuClass};

/// Switches between readings of the class-2 admission rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReservationOptions {
    /// Admit a class-2 arrival at width `n` when fewer than `m` channels are
    /// free and no wide user can shrink.
    pub su2_min_width_admission: bool,
}

impl Default for ReservationOptions {
    fn default() -> Self {
        Self {
            su2_min_width_admission: true,
        }
    }
}

type State = ReservationState;

fn with(s: &State, f: impl FnOnce(&mut State)) -> State {
    let mut t = *s;
    f(&mut t);
    t
}

/// A wide class-2 user exists and shrinking it frees at least one channel.
fn can_degrade(p: &SystemParams, s: &State) -> bool {
    p.max_width > p.min_width && s.wide > 0
}

/// Class-2 users eligible for preemption bookkeeping: narrow users, or all
/// class-2 users when the widths coincide.
fn narrow_count(p: &SystemParams, s: &State) -> usize {
    if p.max_width > p.min_width {
        s.narrow
    } else {
        s.su2()
    }
}

/// Removes one class-2 user, narrow first.
fn drop_su2(s: &State) -> State {
    with(s, |t| {
        if t.narrow > 0 {
            t.narrow -= 1
        } else {
            t.wide -= 1
        }
    })
}

fn degrade(s: &State) -> State {
    with(s, |t| {
        t.wide -= 1;
        t.narrow += 1;
    })
}

/// Where an arriving SU of `class` goes, or `None` if it is blocked.
pub fn su_arrival(
    p: &SystemParams,
    opts: &ReservationOptions,
    s: &State,
    class: SuClass,
) -> Option<(State, Event)> {
    let idle = s.idle(p);
    match class {
        SuClass::Returned | SuClass::Su1 => {
            let (bump, has_room): (fn(&mut State), bool) = if class == SuClass::Returned {
                (|t| t.returned += 1, s.returned < p.returned_channels)
            } else {
                (|t| t.su1 += 1, s.su1 < p.su1_pool())
            };
            if !has_room {
                return None;
            }
            let returned = class == SuClass::Returned;
            if idle > 0 {
                let e = if returned {
                    Event::SuR1Arrival
                } else {
                    Event::Su1Arrival
                };
                return Some((with(s, bump), e));
            }
            if can_degrade(p, s) {
                let e = if returned {
                    Event::SuR1ArrivalDegradeSu2
                } else {
                    Event::Su1ArrivalDegradeSu2
                };
                return Some((with(&degrade(s), bump), e));
            }
            if narrow_count(p, s) > p.su2_reserved {
                let e = if returned {
                    Event::SuR1ArrivalDropSu2
                } else {
                    Event::Su1ArrivalDropSu2
                };
                return Some((with(&drop_su2(s), bump), e));
            }
            if returned && s.su1 > 0 {
                return Some((
                    with(s, |t| {
                        t.su1 -= 1;
                        t.returned += 1;
                    }),
                    Event::SuR1ArrivalDropSu1,
                ));
            }
            None
        }
        SuClass::Su2 => {
            let used = s.su2_channels(p);
            let pool = p.su2_pool();
            if idle >= p.max_width && used + p.max_width <= pool {
                return Some((with(s, |t| t.wide += 1), Event::Su2ArrivalAggregate));
            }
            if can_degrade(p, s) {
                let target = with(s, |t| {
                    t.wide -= 1;
                    t.narrow += 2;
                });
                if target.is_feasible(p) {
                    return Some((target, Event::Su2ArrivalDegrade));
                }
            }
            if opts.su2_min_width_admission && idle >= p.min_width && used + p.min_width <= pool {
                return Some((with(s, |t| t.narrow += 1), Event::Su2ArrivalNarrow));
            }
            None
        }
    }
}

/// Target and label of the class-2 departure, if any class-2 user is present.
pub fn su2_departure(p: &SystemParams, s: &State) -> Option<(State, Event)> {
    if s.narrow == 0 {
        return (s.wide > 0).then(|| (with(s, |t| t.wide -= 1), Event::Su2DepartureSimple));
    }
    if s.narrow >= 2 && p.max_width > p.min_width {
        let upgraded = with(s, |t| {
            t.wide += 1;
            t.narrow -= 2;
        });
        if upgraded.is_feasible(p) {
            return Some((upgraded, Event::Su2DepartureUpgrade));
        }
    }
    Some((with(s, |t| t.narrow -= 1), Event::Su2DepartureSimple))
}

/// PU arrival outcomes on a full system with no wide user to shrink: one
/// victim per class present, weighted by the channels that class holds.
pub fn pu_victims(p: &SystemParams, s: &State) -> Vec<(State, f64, Event)> {
    let su2_held = s.su2_channels(p);
    let total = (s.returned + s.su1 + su2_held) as f64;
    let up = |t: &mut State| t.pus += 1;
    let mut out = Vec::with_capacity(3);
    if s.returned > 0 {
        out.push((
            with(s, |t| {
                up(t);
                t.returned -= 1
            }),
            s.returned as f64 / total,
            Event::PuArrivalDropSuR1,
        ));
    }
    if s.su1 > 0 {
        out.push((
            with(s, |t| {
                up(t);
                t.su1 -= 1
            }),
            s.su1 as f64 / total,
            Event::PuArrivalDropSu1,
        ));
    }
    if su2_held > 0 {
        out.push((
            with(&drop_su2(s), up),
            su2_held as f64 / total,
            Event::PuArrivalDropSu2,
        ));
    }
    out
}

/// Outgoing transitions of `s`, zero-rate rows omitted.
pub fn transitions(
    p: &SystemParams,
    opts: &ReservationOptions,
    s: &State,
) -> Vec<RawTransition<State>> {
    let mut out = Vec::with_capacity(12);
    let idle = s.idle(p);
    let pu_rate = p.pu_arrival_rate(s.pus);

    if pu_rate > 0.0 && s.pus < p.max_pus() {
        let up = with(s, |t| t.pus += 1);
        if idle > 0 && s.pus < p.pu_reserved {
            out.push((up, pu_rate, Event::PuArrivalReserved));
        } else if idle > 0 {
            let free = (p.channels - s.pus) as f64;
            let users = s.returned + s.su1 + s.su2();
            out.push((
                up,
                (p.channels - s.pus - users) as f64 / free * pu_rate,
                Event::PuArrivalUnreserved,
            ));
            out.push((up, users as f64 / free * pu_rate, Event::PuArrivalHandoff));
        } else if can_degrade(p, s) {
            out.push((
                with(&degrade(s), |t| t.pus += 1),
                pu_rate,
                Event::PuArrivalDegradeSu2,
            ));
        } else {
            for (target, share, event) in pu_victims(p, s) {
                out.push((target, share * pu_rate, event));
            }
        }
    }
    if s.pus > 0 {
        out.push((
            with(s, |t| t.pus -= 1),
            s.pus as f64 * p.pu_service,
            Event::PuDeparture,
        ));
    }
    for class in SuClass::ALL {
        if let Some((target, event)) = su_arrival(p, opts, s, class) {
            out.push((target, p.su_arrival, event));
        }
    }
    if s.returned > 0 {
        out.push((
            with(s, |t| t.returned -= 1),
            s.returned as f64 * p.su_service,
            Event::SuR1Departure,
        ));
    }
    if s.su1 > 0 {
        out.push((
            with(s, |t| t.su1 -= 1),
            s.su1 as f64 * p.su_service,
            Event::Su1Departure,
        ));
    }
    if let Some((target, event)) = su2_departure(p, s) {
        out.push((target, s.su2() as f64 * p.su_service, event));
    }
    out.retain(|(_, rate, _)| *rate > 0.0);
    out
}

/// Breadth-first closure of the empty state, returned in lexicographic order.
pub fn enumerate(p: &SystemParams, opts: &ReservationOptions) -> StateSpace<State> {
    let mut seen = HashSet::from([State::EMPTY]);
    let mut queue = VecDeque::from([State::EMPTY]);
    while let Some(s) = queue.pop_front() {
        for (target, _, _) in transitions(p, opts, &s) {
            if seen.insert(target) {
                queue.push_back(target);
            }
        }
    }
    StateSpace::new(seen.into_iter().collect())
}

/// Labeled generator over `space` (normally from [`enumerate`]).
pub fn build_generator(
    p: &SystemParams,
    opts: &ReservationOptions,
    space: &StateSpace<State>,
) -> Result<Generator, BuildError> {
    Generator::build(space, |s| transitions(p, opts, s))
}
