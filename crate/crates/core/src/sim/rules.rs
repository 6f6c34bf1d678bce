//! Event rules for the simulator.
//!
//! Each state exposes eight independent exponential clocks ("drivers"):
//! PU arrival, PU departure, one arrival clock per SU class and one
//! departure clock per SU class. A fired clock is resolved into one of a
//! few outcomes with fixed probabilities. Blocked arrivals resolve to the
//! current state. This is written against the access rules directly and
//! does not call the generator builders.

use crate::metrics::{self, MetricsReport};
use crate::params::SystemParams;
use crate::reservation::ReservationOptions;
use crate::state::{BasicState, ChainState, ReservationState, StateSpace, SuClass};

pub const DRIVERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    PuArrival,
    PuDeparture,
    Arrival(SuClass),
    Departure(SuClass),
}

impl Driver {
    pub const ALL: [Driver; DRIVERS] = [
        Driver::PuArrival,
        Driver::PuDeparture,
        Driver::Arrival(SuClass::Returned),
        Driver::Arrival(SuClass::Su1),
        Driver::Arrival(SuClass::Su2),
        Driver::Departure(SuClass::Returned),
        Driver::Departure(SuClass::Su1),
        Driver::Departure(SuClass::Su2),
    ];
}

/// Counter increments attached to an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    Admit(SuClass),
    Block(SuClass),
    Complete(SuClass),
    Drop(SuClass),
    Handoff(SuClass),
    /// A wide class-2 user shrinks to the narrow width.
    Degrade,
    /// A narrow class-2 user grows to the wide width.
    Upgrade,
    PuAdmit,
    PuBlock,
    PuComplete,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<S> {
    pub prob: f64,
    pub next: S,
    pub effects: [Option<Effect>; 2],
}

/// Up to four outcomes, stored inline.
#[derive(Debug, Clone, Copy)]
pub struct Outcomes<S> {
    items: [Option<Outcome<S>>; 4],
    len: usize,
}

impl<S: Copy> Outcomes<S> {
    fn new() -> Self {
        Self {
            items: [None; 4],
            len: 0,
        }
    }

    fn one(next: S, a: Effect, b: Option<Effect>) -> Self {
        let mut o = Self::new();
        o.push(1.0, next, a, b);
        o
    }

    fn push(&mut self, prob: f64, next: S, a: Effect, b: Option<Effect>) {
        if prob > 0.0 {
            self.items[self.len] = Some(Outcome {
                prob,
                next,
                effects: [Some(a), b],
            });
            self.len += 1;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Outcome<S>> {
        self.items[..self.len].iter().flatten()
    }

    /// Picks the outcome whose cumulative probability first exceeds `u`.
    pub fn pick(&self, u: f64) -> &Outcome<S> {
        let mut acc = 0.0;
        for o in self.iter() {
            acc += o.prob;
            if u < acc {
                return o;
            }
        }
        self.iter().last().expect("fired driver has no outcome")
    }
}

/// Simulation semantics of one chain.
pub trait Dynamics: Sync {
    type State: ChainState;

    fn params(&self) -> &SystemParams;
    fn initial(&self) -> Self::State;
    fn driver_rates(&self, s: &Self::State) -> [f64; DRIVERS];
    fn resolve(&self, s: &Self::State, driver: Driver) -> Outcomes<Self::State>;
    /// Users of `class` currently in service.
    fn in_service(&self, s: &Self::State, class: SuClass) -> usize;
    fn report(&self, space: &StateSpace<Self::State>, pi: &[f64]) -> MetricsReport;
    /// Outgoing rows from the generator builder, for cross-checking.
    fn builder_row(&self, s: &Self::State) -> Vec<(Self::State, f64)>;
}

fn share(part: usize, whole: usize) -> f64 {
    part as f64 / whole as f64
}

pub struct BasicRules {
    pub p: SystemParams,
}

impl Dynamics for BasicRules {
    type State = BasicState;

    fn params(&self) -> &SystemParams {
        &self.p
    }

    fn initial(&self) -> BasicState {
        BasicState::EMPTY
    }

    fn driver_rates(&self, s: &BasicState) -> [f64; DRIVERS] {
        let p = &self.p;
        [
            p.pu_arrival_rate(s.pus),
            s.pus as f64 * p.pu_service,
            0.0,
            p.su_arrival,
            p.su_arrival,
            0.0,
            s.su1 as f64 * p.su_service,
            s.su2 as f64 * p.su_service,
        ]
    }

    fn resolve(&self, s: &BasicState, driver: Driver) -> Outcomes<BasicState> {
        use Effect::*;
        let m = self.p.channels;
        let (i, j1, j2) = (s.pus, s.su1, s.su2);
        let full = i + j1 + j2 == m;
        let st = BasicState::new;
        match driver {
            Driver::PuArrival if !full => {
                let mut o = Outcomes::new();
                let free = m - i;
                o.push(
                    share(j1, free),
                    st(i + 1, j1, j2),
                    Handoff(SuClass::Su1),
                    None,
                );
                o.push(
                    share(j2, free),
                    st(i + 1, j1, j2),
                    Handoff(SuClass::Su2),
                    None,
                );
                o.push(
                    share(free - j1 - j2, free),
                    st(i + 1, j1, j2),
                    PuAdmit,
                    None,
                );
                o
            }
            Driver::PuArrival if j2 > 0 => {
                Outcomes::one(st(i + 1, j1, j2 - 1), PuAdmit, Some(Drop(SuClass::Su2)))
            }
            Driver::PuArrival if j1 > 0 => {
                Outcomes::one(st(i + 1, j1 - 1, j2), PuAdmit, Some(Drop(SuClass::Su1)))
            }
            Driver::PuArrival => Outcomes::one(*s, PuBlock, None),
            Driver::PuDeparture => Outcomes::one(st(i - 1, j1, j2), PuComplete, None),
            Driver::Arrival(SuClass::Su1) if !full => {
                Outcomes::one(st(i, j1 + 1, j2), Admit(SuClass::Su1), None)
            }
            Driver::Arrival(SuClass::Su1) if j2 > 0 => Outcomes::one(
                st(i, j1 + 1, j2 - 1),
                Admit(SuClass::Su1),
                Some(Drop(SuClass::Su2)),
            ),
            Driver::Arrival(SuClass::Su2) if !full => {
                Outcomes::one(st(i, j1, j2 + 1), Admit(SuClass::Su2), None)
            }
            Driver::Arrival(c) => Outcomes::one(*s, Block(c), None),
            Driver::Departure(SuClass::Su1) => {
                Outcomes::one(st(i, j1 - 1, j2), Complete(SuClass::Su1), None)
            }
            Driver::Departure(SuClass::Su2) => {
                Outcomes::one(st(i, j1, j2 - 1), Complete(SuClass::Su2), None)
            }
            Driver::Departure(SuClass::Returned) => unreachable!("no returned users"),
        }
    }

    fn in_service(&self, s: &BasicState, class: SuClass) -> usize {
        match class {
            SuClass::Returned => 0,
            SuClass::Su1 => s.su1,
            SuClass::Su2 => s.su2,
        }
    }

    fn report(&self, space: &StateSpace<BasicState>, pi: &[f64]) -> MetricsReport {
        metrics::basic_report(&self.p, space, pi)
    }

    fn builder_row(&self, s: &BasicState) -> Vec<(BasicState, f64)> {
        crate::basic::transitions(&self.p, s)
            .into_iter()
            .map(|(t, r, _)| (t, r))
            .collect()
    }
}

pub struct ReservationRules {
    pub p: SystemParams,
    pub opts: ReservationOptions,
}

impl Dynamics for ReservationRules {
    type State = ReservationState;

    fn params(&self) -> &SystemParams {
        &self.p
    }

    fn initial(&self) -> ReservationState {
        ReservationState::EMPTY
    }

    fn driver_rates(&self, s: &ReservationState) -> [f64; DRIVERS] {
        let p = &self.p;
        [
            p.pu_arrival_rate(s.pus),
            s.pus as f64 * p.pu_service,
            p.su_arrival,
            p.su_arrival,
            p.su_arrival,
            s.returned as f64 * p.su_service,
            s.su1 as f64 * p.su_service,
            (s.wide + s.narrow) as f64 * p.su_service,
        ]
    }

    fn resolve(&self, s: &ReservationState, driver: Driver) -> Outcomes<ReservationState> {
        use Effect::*;
        let p = &self.p;
        let (wm, wn) = (p.max_width, p.min_width);
        let (i, r, j1, jm, jn) = (s.pus, s.returned, s.su1, s.wide, s.narrow);
        let st = ReservationState::new;
        let su2_ch = wm * jm + wn * jn;
        let used = i + r + j1 + su2_ch;
        let idle = p.channels - used;
        let shrinkable = wm > wn && jm > 0;
        // Users a class-1 arrival may preempt when no wide user can shrink.
        let unprotected = if wm > wn { jn } else { jm + jn };
        let minus_su2 = |i, r, j1| {
            if jn > 0 {
                st(i, r, j1, jm, jn - 1)
            } else {
                st(i, r, j1, jm - 1, jn)
            }
        };

        match driver {
            Driver::PuArrival if idle > 0 && i < p.pu_reserved => {
                Outcomes::one(st(i + 1, r, j1, jm, jn), PuAdmit, None)
            }
            Driver::PuArrival if idle > 0 => {
                let free = p.channels - i;
                let next = st(i + 1, r, j1, jm, jn);
                let mut o = Outcomes::new();
                o.push(share(r, free), next, Handoff(SuClass::Returned), None);
                o.push(share(j1, free), next, Handoff(SuClass::Su1), None);
                o.push(share(jm + jn, free), next, Handoff(SuClass::Su2), None);
                o.push(share(free - r - j1 - jm - jn, free), next, PuAdmit, None);
                o
            }
            Driver::PuArrival if shrinkable => {
                Outcomes::one(st(i + 1, r, j1, jm - 1, jn + 1), PuAdmit, Some(Degrade))
            }
            Driver::PuArrival => {
                let held = r + j1 + su2_ch;
                if held == 0 {
                    return Outcomes::one(*s, PuBlock, None);
                }
                let mut o = Outcomes::new();
                if r > 0 {
                    o.push(
                        share(r, held),
                        st(i + 1, r - 1, j1, jm, jn),
                        PuAdmit,
                        Some(Drop(SuClass::Returned)),
                    );
                }
                if j1 > 0 {
                    o.push(
                        share(j1, held),
                        st(i + 1, r, j1 - 1, jm, jn),
                        PuAdmit,
                        Some(Drop(SuClass::Su1)),
                    );
                }
                if su2_ch > 0 {
                    o.push(
                        share(su2_ch, held),
                        minus_su2(i + 1, r, j1),
                        PuAdmit,
                        Some(Drop(SuClass::Su2)),
                    );
                }
                o
            }
            Driver::PuDeparture => Outcomes::one(st(i - 1, r, j1, jm, jn), PuComplete, None),

            Driver::Arrival(class @ (SuClass::Returned | SuClass::Su1)) => {
                let returned = class == SuClass::Returned;
                let room = if returned {
                    r < p.returned_channels
                } else {
                    j1 < p.su1_pool()
                };
                let (dr, d1) = if returned { (1, 0) } else { (0, 1) };
                if !room {
                    Outcomes::one(*s, Block(class), None)
                } else if idle > 0 {
                    Outcomes::one(st(i, r + dr, j1 + d1, jm, jn), Admit(class), None)
                } else if shrinkable {
                    Outcomes::one(
                        st(i, r + dr, j1 + d1, jm - 1, jn + 1),
                        Admit(class),
                        Some(Degrade),
                    )
                } else if unprotected > p.su2_reserved {
                    Outcomes::one(
                        minus_su2(i, r + dr, j1 + d1),
                        Admit(class),
                        Some(Drop(SuClass::Su2)),
                    )
                } else if returned && j1 > 0 {
                    Outcomes::one(
                        st(i, r + 1, j1 - 1, jm, jn),
                        Admit(class),
                        Some(Drop(SuClass::Su1)),
                    )
                } else {
                    Outcomes::one(*s, Block(class), None)
                }
            }
            Driver::Arrival(SuClass::Su2) => {
                let pool = p.su2_pool();
                let c = SuClass::Su2;
                if idle >= wm && su2_ch + wm <= pool {
                    Outcomes::one(st(i, r, j1, jm + 1, jn), Admit(c), None)
                } else if shrinkable
                    && used + 2 * wn <= p.channels + wm
                    && su2_ch + 2 * wn <= pool + wm
                {
                    Outcomes::one(st(i, r, j1, jm - 1, jn + 2), Admit(c), Some(Degrade))
                } else if self.opts.su2_min_width_admission && idle >= wn && su2_ch + wn <= pool {
                    Outcomes::one(st(i, r, j1, jm, jn + 1), Admit(c), None)
                } else {
                    Outcomes::one(*s, Block(c), None)
                }
            }

            Driver::Departure(SuClass::Returned) => {
                Outcomes::one(st(i, r - 1, j1, jm, jn), Complete(SuClass::Returned), None)
            }
            Driver::Departure(SuClass::Su1) => {
                Outcomes::one(st(i, r, j1 - 1, jm, jn), Complete(SuClass::Su1), None)
            }
            Driver::Departure(SuClass::Su2) => {
                let c = SuClass::Su2;
                if jn == 0 {
                    Outcomes::one(st(i, r, j1, jm - 1, jn), Complete(c), None)
                } else if jn >= 2
                    && wm > wn
                    && used + wm <= p.channels + 2 * wn
                    && su2_ch + wm <= p.su2_pool() + 2 * wn
                {
                    Outcomes::one(st(i, r, j1, jm + 1, jn - 2), Complete(c), Some(Upgrade))
                } else {
                    Outcomes::one(st(i, r, j1, jm, jn - 1), Complete(c), None)
                }
            }
        }
    }

    fn in_service(&self, s: &ReservationState, class: SuClass) -> usize {
        match class {
            SuClass::Returned => s.returned,
            SuClass::Su1 => s.su1,
            SuClass::Su2 => s.wide + s.narrow,
        }
    }

    fn report(&self, space: &StateSpace<ReservationState>, pi: &[f64]) -> MetricsReport {
        metrics::reservation_report(&self.p, &self.opts, space, pi)
    }

    fn builder_row(&self, s: &ReservationState) -> Vec<(ReservationState, f64)> {
        crate::reservation::transitions(&self.p, &self.opts, s)
            .into_iter()
            .map(|(t, r, _)| (t, r))
            .collect()
    }
}
