//! Labeled sparse transition-rate matrices.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::state::{ChainState, StateSpace};

/// The event that causes a transition. Blocked arrivals have no label
/// because they do not move the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Event {
    // Basic chain.
    PuArrivalIdle,
    PuArrivalHandoff,
    PuArrivalDropSu2,
    PuArrivalDropSu1,
    PuDeparture,
    Su1Arrival,
    Su1ArrivalDropSu2,
    Su1Departure,
    Su2Arrival,
    Su2Departure,
    // Reservation chain (PuArrivalHandoff, PuArrivalDropSu1/Su2, PuDeparture,
    // Su1Arrival, Su1ArrivalDropSu2 and Su1Departure are shared).
    PuArrivalReserved,
    PuArrivalUnreserved,
    PuArrivalDegradeSu2,
    PuArrivalDropSuR1,
    SuR1Arrival,
    SuR1ArrivalDegradeSu2,
    SuR1ArrivalDropSu2,
    SuR1ArrivalDropSu1,
    SuR1Departure,
    Su1ArrivalDegradeSu2,
    Su2ArrivalAggregate,
    Su2ArrivalDegrade,
    Su2ArrivalNarrow,
    Su2DepartureSimple,
    Su2DepartureUpgrade,
}

impl Event {
    pub fn is_pu_arrival(self) -> bool {
        use Event::*;
        matches!(
            self,
            PuArrivalIdle
                | PuArrivalHandoff
                | PuArrivalDropSu2
                | PuArrivalDropSu1
                | PuArrivalReserved
                | PuArrivalUnreserved
                | PuArrivalDegradeSu2
                | PuArrivalDropSuR1
        )
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One labeled off-diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
    pub event: Event,
}

/// A CTMC generator over an indexed state space. Off-diagonal entries keep
/// their event labels; the diagonal is implied by the row sums.
#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    transitions: Vec<Transition>,
    /// Aggregated off-diagonal rows: `(target, summed rate)` sorted by target.
    rows: Vec<Vec<(usize, f64)>>,
    /// Exit rates summed over the labeled entries.
    exit: Vec<f64>,
}

/// A transition produced by a chain rule, before indexing.
pub type RawTransition<S> = (S, f64, Event);

/// Raised when a builder rule emits a target outside the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildError {
    pub from: String,
    pub to: String,
    pub event: Event,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "builder bug: {} from {} reaches {} outside the state space",
            self.event, self.from, self.to
        )
    }
}

impl std::error::Error for BuildError {}

impl Generator {
    /// Applies `rule` to every state and indexes the resulting transitions.
    /// Zero-rate and self-loop entries are discarded.
    pub fn build<S, F>(space: &StateSpace<S>, mut rule: F) -> Result<Self, BuildError>
    where
        S: ChainState,
        F: FnMut(&S) -> Vec<RawTransition<S>>,
    {
        let mut transitions = Vec::new();
        for (from, s) in space.iter().enumerate() {
            for (target, rate, event) in rule(s) {
                if rate <= 0.0 || target == *s {
                    continue;
                }
                let to = space.index_of(&target).ok_or_else(|| BuildError {
                    from: s.to_string(),
                    to: target.to_string(),
                    event,
                })?;
                transitions.push(Transition {
                    from,
                    to,
                    rate,
                    event,
                });
            }
        }
        Ok(Self::from_transitions(space.len(), transitions))
    }

    /// Builds from already indexed entries.
    pub fn from_transitions(dim: usize, mut transitions: Vec<Transition>) -> Self {
        transitions.retain(|t| t.rate > 0.0 && t.from != t.to);
        transitions.sort_by_key(|t| (t.from, t.to, t.event));
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        let mut exit = vec![0.0; dim];
        for t in &transitions {
            exit[t.from] += t.rate;
            let row = &mut rows[t.from];
            match row.last_mut() {
                Some((to, rate)) if *to == t.to => *rate += t.rate,
                _ => row.push((t.to, t.rate)),
            }
        }
        Self {
            dim,
            transitions,
            rows,
            exit,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Labeled entries sorted by `(from, to, event)`.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Labeled entries leaving `from`.
    pub fn transitions_from(&self, from: usize) -> &[Transition] {
        let lo = self.transitions.partition_point(|t| t.from < from);
        let hi = self.transitions.partition_point(|t| t.from <= from);
        &self.transitions[lo..hi]
    }

    /// Off-diagonal entries of row `from` with rates summed per target.
    pub fn row(&self, from: usize) -> &[(usize, f64)] {
        &self.rows[from]
    }

    /// Total exit rate `-q(s,s)`.
    pub fn exit_rate(&self, from: usize) -> f64 {
        self.exit[from]
    }

    /// `q(s,s)`.
    pub fn diagonal(&self, from: usize) -> f64 {
        -self.exit_rate(from)
    }

    /// Row sum including the diagonal; zero up to summation rounding.
    pub fn row_sum(&self, from: usize) -> f64 {
        self.diagonal(from) + self.rows[from].iter().map(|(_, r)| r).sum::<f64>()
    }

    /// Dense row-major copy of the full matrix, diagonal included.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut q = vec![vec![0.0; self.dim]; self.dim];
        for (from, row) in self.rows.iter().enumerate() {
            for &(to, rate) in row {
                q[from][to] += rate;
            }
            q[from][from] = self.diagonal(from);
        }
        q
    }

    /// `(πQ)_j` for every column `j`.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (from, row) in self.rows.iter().enumerate() {
            let mass = pi[from];
            out[from] -= mass * self.exit[from];
            for &(to, rate) in row {
                out[to] += mass * rate;
            }
        }
        out
    }

    /// `‖πQ‖∞`.
    pub fn residual_inf(&self, pi: &[f64]) -> f64 {
        self.left_multiply(pi)
            .into_iter()
            .fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// States reachable from `start` following positive-rate edges, optionally
    /// on the reversed graph.
    fn reach(&self, start: usize, reversed: bool) -> Vec<bool> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.dim];
        for (from, row) in self.rows.iter().enumerate() {
            for &(to, _) in row {
                if reversed {
                    adj[to].push(from);
                } else {
                    adj[from].push(to);
                }
            }
        }
        let mut seen = vec![false; self.dim];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Every state reaches state 0 and state 0 reaches every state.
    pub fn is_strongly_connected(&self) -> bool {
        if self.dim == 0 {
            return false;
        }
        self.reach(0, false).into_iter().all(|b| b) && self.reach(0, true).into_iter().all(|b| b)
    }

    /// Text export: `src dst rate label`, one labeled entry per line, sorted.
    pub fn export_triples(&self) -> String {
        let mut out = String::new();
        for t in &self.transitions {
            writeln!(out, "{} {} {:e} {}", t.from, t.to, t.rate, t.event).unwrap();
        }
        out
    }
}
