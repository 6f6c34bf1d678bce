//! Chain states and indexed state spaces.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::params::SystemParams;

/// Secondary-user priority classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SuClass {
    /// Returned class-1 users resuming after a drop (reservation chain only).
    Returned,
    /// High-priority real-time users.
    Su1,
    /// Low-priority non-real-time users.
    Su2,
}

impl SuClass {
    pub const ALL: [SuClass; 3] = [SuClass::Returned, SuClass::Su1, SuClass::Su2];

    pub fn label(self) -> &'static str {
        match self {
            SuClass::Returned => "r1",
            SuClass::Su1 => "1",
            SuClass::Su2 => "2",
        }
    }
}

/// Which chain a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Basic,
    Reservation,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Basic => "basic",
            ModelKind::Reservation => "reservation",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Common view over the two state kinds.
pub trait ChainState: Copy + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync {
    /// Channels held by primary users.
    fn pus(&self) -> usize;
    /// Channels in use by everybody.
    fn occupied(&self, p: &SystemParams) -> usize;
    /// Raw counters in declaration order.
    fn tuple(&self) -> Vec<usize>;

    fn idle(&self, p: &SystemParams) -> usize {
        p.channels.saturating_sub(self.occupied(p))
    }
}

/// State `(i, j1, j2)` of the basic random-access chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasicState {
    pub pus: usize,
    pub su1: usize,
    pub su2: usize,
}

impl BasicState {
    pub const EMPTY: Self = Self::new(0, 0, 0);

    pub const fn new(pus: usize, su1: usize, su2: usize) -> Self {
        Self { pus, su1, su2 }
    }

    /// `Cx = i + j1 + j2`.
    pub fn busy(&self) -> usize {
        self.pus + self.su1 + self.su2
    }

    /// Checks the capacity and population bounds.
    pub fn is_feasible(&self, p: &SystemParams) -> bool {
        self.pus <= p.max_pus() && self.busy() <= p.channels
    }
}

impl ChainState for BasicState {
    fn pus(&self) -> usize {
        self.pus
    }

    fn occupied(&self, _p: &SystemParams) -> usize {
        self.busy()
    }

    fn tuple(&self) -> Vec<usize> {
        vec![self.pus, self.su1, self.su2]
    }
}

impl fmt::Display for BasicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.pus, self.su1, self.su2)
    }
}

/// State `(i, j1', j1, jm, jn)` of the reservation/aggregation chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReservationState {
    pub pus: usize,
    /// Returned class-1 users.
    pub returned: usize,
    pub su1: usize,
    /// Class-2 users aggregating `m` channels.
    pub wide: usize,
    /// Class-2 users aggregating `n` channels.
    pub narrow: usize,
}

impl ReservationState {
    pub const EMPTY: Self = Self::new(0, 0, 0, 0, 0);

    pub const fn new(pus: usize, returned: usize, su1: usize, wide: usize, narrow: usize) -> Self {
        Self {
            pus,
            returned,
            su1,
            wide,
            narrow,
        }
    }

    /// Class-2 user count `j2 = jm + jn`.
    pub fn su2(&self) -> usize {
        self.wide + self.narrow
    }

    /// Channels held by class-2 users, `m jm + n jn`.
    pub fn su2_channels(&self, p: &SystemParams) -> usize {
        p.max_width * self.wide + p.min_width * self.narrow
    }

    /// Every reservation and capacity bound.
    pub fn is_feasible(&self, p: &SystemParams) -> bool {
        self.pus <= p.max_pus()
            && self.returned <= p.returned_channels
            && self.su1 <= p.su1_pool()
            && self.su2_channels(p) <= p.su2_pool()
            && self.occupied(p) <= p.channels
    }
}

impl ChainState for ReservationState {
    fn pus(&self) -> usize {
        self.pus
    }

    /// `Mx = i + j1' + j1 + m jm + n jn`.
    fn occupied(&self, p: &SystemParams) -> usize {
        self.pus + self.returned + self.su1 + self.su2_channels(p)
    }

    fn tuple(&self) -> Vec<usize> {
        vec![self.pus, self.returned, self.su1, self.wide, self.narrow]
    }
}

impl fmt::Display for ReservationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.pus, self.returned, self.su1, self.wide, self.narrow
        )
    }
}

/// Lexicographically ordered states with a bijective index.
#[derive(Debug, Clone)]
pub struct StateSpace<S> {
    states: Vec<S>,
    index: HashMap<S, usize>,
}

impl<S: ChainState> StateSpace<S> {
    /// Sorts and deduplicates `states`.
    pub fn new(mut states: Vec<S>) -> Self {
        states.sort_unstable();
        states.dedup();
        let index = states.iter().enumerate().map(|(n, s)| (*s, n)).collect();
        Self { states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn get(&self, idx: usize) -> S {
        self.states[idx]
    }

    pub fn index_of(&self, s: &S) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &S) -> bool {
        self.index.contains_key(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &S> {
        self.states.iter()
    }
}
