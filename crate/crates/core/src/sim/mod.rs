//! Discrete-event simulation of both chains.
//!
//! The simulator races the exponential clocks in [`rules`] at the
//! count-vector level, accumulates time-weighted state occupancy after a
//! warm-up prefix, and repeats over independent replications. Metrics are
//! estimated by plugging each replication's empirical occupancy into the
//! same formulas the analytical path uses, with Student-t confidence
//! intervals over replications, alongside raw event ratios.

pub mod rules;

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::SimError;
use crate::format::g12;
use crate::metrics::{MetricsReport, METRIC_COLUMNS};
use crate::model::Model;
use crate::params::SystemParams;
use crate::state::{ChainState, ModelKind, StateSpace, SuClass};

pub use rules::{BasicRules, Driver, Dynamics, Effect, Outcomes, ReservationRules, DRIVERS};

/// Two-sided confidence level of reported intervals.
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Simulated seconds per replication.
    pub horizon: f64,
    /// Discarded prefix, in simulated seconds.
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
    /// Compare every visited state's enabled moves with the generator row.
    #[serde(default)]
    pub cross_check: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 1e6,
            warmup: 1e3,
            replications: 10,
            seed: 42,
            cross_check: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.warmup >= 0.0 && self.warmup.is_finite() && self.horizon.is_finite()) {
            return Err(SimError::ConfigInvalid(
                "horizon and warmup must be finite and warmup nonnegative".into(),
            ));
        }
        if self.warmup >= self.horizon {
            return Err(SimError::ConfigInvalid("warmup < horizon violated".into()));
        }
        if self.replications < 1 {
            return Err(SimError::ConfigInvalid("replications >= 1 violated".into()));
        }
        Ok(())
    }
}

/// Per-class event counters over a whole replication, started empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounters {
    pub arrivals: u64,
    pub blocks: u64,
    pub admissions: u64,
    pub completions: u64,
    pub drops: u64,
    pub handoffs: u64,
    pub in_service_at_end: u64,
}

impl ClassCounters {
    fn add(&mut self, o: &ClassCounters) {
        self.arrivals += o.arrivals;
        self.blocks += o.blocks;
        self.admissions += o.admissions;
        self.completions += o.completions;
        self.drops += o.drops;
        self.handoffs += o.handoffs;
        self.in_service_at_end += o.in_service_at_end;
    }

    /// `arrivals = blocks + admissions` and
    /// `admissions = completions + drops + in-service-at-end`.
    pub fn conserved(&self) -> bool {
        self.arrivals == self.blocks + self.admissions
            && self.admissions == self.completions + self.drops + self.in_service_at_end
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Indexed `Returned, Su1, Su2`.
    pub classes: [ClassCounters; 3],
    pub degrades: u64,
    pub upgrades: u64,
    pub pu_arrivals: u64,
    pub pu_blocks: u64,
    pub pu_completions: u64,
    pub events: u64,
}

fn class_idx(c: SuClass) -> usize {
    match c {
        SuClass::Returned => 0,
        SuClass::Su1 => 1,
        SuClass::Su2 => 2,
    }
}

impl Counters {
    pub fn class(&self, c: SuClass) -> &ClassCounters {
        &self.classes[class_idx(c)]
    }

    fn apply(&mut self, e: Effect) {
        match e {
            Effect::Admit(c) => {
                let k = &mut self.classes[class_idx(c)];
                k.arrivals += 1;
                k.admissions += 1;
            }
            Effect::Block(c) => {
                let k = &mut self.classes[class_idx(c)];
                k.arrivals += 1;
                k.blocks += 1;
            }
            Effect::Complete(c) => self.classes[class_idx(c)].completions += 1,
            Effect::Drop(c) => self.classes[class_idx(c)].drops += 1,
            Effect::Handoff(c) => {
                self.classes[class_idx(c)].handoffs += 1;
                self.pu_arrivals += 1;
            }
            Effect::Degrade => self.degrades += 1,
            Effect::Upgrade => self.upgrades += 1,
            Effect::PuAdmit => self.pu_arrivals += 1,
            Effect::PuBlock => {
                self.pu_arrivals += 1;
                self.pu_blocks += 1;
            }
            Effect::PuComplete => self.pu_completions += 1,
        }
    }

    fn add(&mut self, o: &Counters) {
        for (a, b) in self.classes.iter_mut().zip(&o.classes) {
            a.add(b);
        }
        self.degrades += o.degrades;
        self.upgrades += o.upgrades;
        self.pu_arrivals += o.pu_arrivals;
        self.pu_blocks += o.pu_blocks;
        self.pu_completions += o.pu_completions;
        self.events += o.events;
    }
}

/// Mean over replications with a two-sided Student-t half-width
/// (`None` with a single replication).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci_half_width: Option<f64>,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let ci_half_width = (xs.len() >= 2).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let t = StudentsT::new(0.0, 1.0, n - 1.0)
                .expect("valid degrees of freedom")
                .inverse_cdf(0.5 + CONFIDENCE / 2.0);
            t * (var / n).sqrt()
        });
        Self {
            mean,
            ci_half_width,
        }
    }

    /// `|mean - value| <= half-width`; false without an interval.
    pub fn covers(&self, value: f64) -> bool {
        self.ci_half_width
            .is_some_and(|h| (self.mean - value).abs() <= h)
    }
}

/// Raw event ratios per class: blocks/arrivals, handoffs/admissions,
/// drops/admissions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRatios {
    pub blocking: Estimate,
    pub handoff: Estimate,
    pub dropping: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub model: ModelKind,
    pub params: SystemParams,
    pub config: SimConfig,
    /// Time-average occupancy, averaged over replications, keyed by state
    /// tuple in lexicographic order.
    pub occupancy: Vec<(Vec<usize>, f64)>,
    /// Estimates aligned with [`METRIC_COLUMNS`]; `None` where the model
    /// has no such column.
    pub metrics: Vec<(String, Option<Estimate>)>,
    /// Indexed `Returned, Su1, Su2`; `None` for absent classes.
    pub raw: [Option<RawRatios>; 3],
    pub counters: Counters,
    /// Per-replication counters, for conservation checks.
    pub replication_counters: Vec<Counters>,
}

impl SimEstimate {
    pub fn metric(&self, column: &str) -> Option<Estimate> {
        self.metrics
            .iter()
            .find(|(c, _)| c == column)
            .and_then(|(_, e)| *e)
    }

    /// Occupancy of a given tuple (zero if never visited).
    pub fn occupancy_of(&self, tuple: &[usize]) -> f64 {
        self.occupancy
            .binary_search_by(|(t, _)| t.as_slice().cmp(tuple))
            .map(|k| self.occupancy[k].1)
            .unwrap_or(0.0)
    }

    /// Metrics CSV header with `ci_*` half-width columns appended.
    pub fn csv_header() -> String {
        let mut h = crate::metrics::csv_header();
        for c in METRIC_COLUMNS {
            h.push_str(",ci_");
            h.push_str(c);
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{}",
            self.model,
            g12(self.params.su_arrival),
            g12(self.params.su_service)
        );
        for (_, e) in &self.metrics {
            row.push(',');
            if let Some(e) = e {
                row.push_str(&g12(e.mean));
            }
        }
        for (_, e) in &self.metrics {
            row.push(',');
            if let Some(h) = e.and_then(|e| e.ci_half_width) {
                row.push_str(&g12(h));
            }
        }
        row
    }
}

struct Replication<S> {
    occupancy: Vec<(S, f64)>,
    counters: Counters,
    report: MetricsReport,
}

/// Seed of replication `rep`: the config seed selects the key and the
/// replication index selects an independent ChaCha stream.
fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Outgoing moves implied by the simulator rules: rate of each driver times
/// outcome probability, aggregated per target, self-loops removed.
pub fn enabled_moves<D: Dynamics>(dynamics: &D, s: &D::State) -> BTreeMap<D::State, f64> {
    let mut out = BTreeMap::new();
    let rates = dynamics.driver_rates(s);
    for (driver, rate) in Driver::ALL.into_iter().zip(rates) {
        if rate <= 0.0 {
            continue;
        }
        for o in dynamics.resolve(s, driver).iter() {
            if o.next != *s {
                *out.entry(o.next).or_insert(0.0) += rate * o.prob;
            }
        }
    }
    out
}

/// Compares [`enabled_moves`] with the builder's row at `s`.
pub fn cross_check_state<D: Dynamics>(dynamics: &D, s: &D::State) -> Result<(), SimError> {
    let sim = enabled_moves(dynamics, s);
    let mut built: BTreeMap<D::State, f64> = BTreeMap::new();
    for (t, r) in dynamics.builder_row(s) {
        if t != *s {
            *built.entry(t).or_insert(0.0) += r;
        }
    }
    let fail = |detail: String| SimError::CrossCheck {
        state: s.to_string(),
        detail,
    };
    if sim.len() != built.len() || sim.keys().ne(built.keys()) {
        return Err(fail(format!(
            "targets differ: simulator {:?} vs generator {:?}",
            sim.keys().map(|t| t.to_string()).collect::<Vec<_>>(),
            built.keys().map(|t| t.to_string()).collect::<Vec<_>>()
        )));
    }
    for ((t, a), b) in sim.iter().zip(built.values()) {
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
            return Err(fail(format!("rate to {t}: simulator {a} vs generator {b}")));
        }
    }
    Ok(())
}

fn run_replication<D: Dynamics>(
    dynamics: &D,
    cfg: &SimConfig,
    rep: usize,
) -> Result<Replication<D::State>, SimError> {
    let mut rng = replication_rng(cfg.seed, rep);
    let mut state = dynamics.initial();
    let mut clock = 0.0;
    let mut counters = Counters::default();
    let mut occupancy: BTreeMap<D::State, f64> = BTreeMap::new();
    let mut checked: HashSet<D::State> = HashSet::new();
    // Occupancy time is accumulated in a local run while the state stays put.
    let mut dwell = 0.0;

    while clock < cfg.horizon {
        if cfg.cross_check && checked.insert(state) {
            cross_check_state(dynamics, &state)?;
        }
        let rates = dynamics.driver_rates(&state);
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            // Absorbing; only possible for degenerate parameters.
            dwell += cfg.horizon - clock.max(cfg.warmup);
            break;
        }
        let u: f64 = rng.gen();
        let sojourn = -(1.0 - u).ln() / total;
        let end = (clock + sojourn).min(cfg.horizon);
        if end > cfg.warmup {
            dwell += end - clock.max(cfg.warmup);
        }
        clock += sojourn;
        if clock >= cfg.horizon {
            break;
        }

        let mut pick = rng.gen::<f64>() * total;
        let mut driver = Driver::ALL[DRIVERS - 1];
        for (d, r) in Driver::ALL.into_iter().zip(rates) {
            if r > 0.0 {
                driver = d;
                if pick < r {
                    break;
                }
                pick -= r;
            }
        }
        let outcomes = dynamics.resolve(&state, driver);
        let chosen = outcomes.pick(rng.gen());
        counters.events += 1;
        for e in chosen.effects.iter().flatten() {
            counters.apply(*e);
        }
        if chosen.next != state {
            if dwell > 0.0 {
                *occupancy.entry(state).or_insert(0.0) += dwell;
            }
            dwell = 0.0;
            state = chosen.next;
        }
    }
    if dwell > 0.0 {
        *occupancy.entry(state).or_insert(0.0) += dwell;
    }
    for c in SuClass::ALL {
        counters.classes[class_idx(c)].in_service_at_end = dynamics.in_service(&state, c) as u64;
    }

    let window: f64 = occupancy.values().sum();
    let occupancy: Vec<(D::State, f64)> = occupancy
        .into_iter()
        .map(|(s, t)| (s, t / window))
        .collect();
    let space = StateSpace::new(occupancy.iter().map(|(s, _)| *s).collect());
    let pi: Vec<f64> = occupancy.iter().map(|(_, w)| *w).collect();
    let report = dynamics.report(&space, &pi);
    Ok(Replication {
        occupancy,
        counters,
        report,
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn simulate_with<D: Dynamics>(
    dynamics: &D,
    kind: ModelKind,
    cfg: &SimConfig,
) -> Result<SimEstimate, SimError> {
    cfg.validate()?;
    let reps: Vec<Replication<D::State>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(dynamics, cfg, rep))
        .collect::<Result<_, _>>()?;

    let n = reps.len() as f64;
    let mut pooled: BTreeMap<D::State, f64> = BTreeMap::new();
    for r in &reps {
        for (s, w) in &r.occupancy {
            *pooled.entry(*s).or_insert(0.0) += w / n;
        }
    }
    let occupancy = pooled.into_iter().map(|(s, w)| (s.tuple(), w)).collect();

    let columns: Vec<[Option<f64>; 10]> = reps.iter().map(|r| r.report.values()).collect();
    let metrics = METRIC_COLUMNS
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let samples: Option<Vec<f64>> = columns.iter().map(|c| c[k]).collect();
            (
                name.to_string(),
                samples.map(|xs| Estimate::from_samples(&xs)),
            )
        })
        .collect();

    let present = |c: SuClass| kind == ModelKind::Reservation || c != SuClass::Returned;
    let raw = SuClass::ALL.map(|c| {
        present(c).then(|| {
            let per = |f: fn(&ClassCounters) -> f64| {
                let xs: Vec<f64> = reps.iter().map(|r| f(r.counters.class(c))).collect();
                Estimate::from_samples(&xs)
            };
            RawRatios {
                blocking: per(|k| ratio(k.blocks, k.arrivals)),
                handoff: per(|k| ratio(k.handoffs, k.admissions)),
                dropping: per(|k| ratio(k.drops, k.admissions)),
            }
        })
    });

    let mut counters = Counters::default();
    for r in &reps {
        counters.add(&r.counters);
    }
    Ok(SimEstimate {
        model: kind,
        params: *dynamics.params(),
        config: *cfg,
        occupancy,
        metrics,
        raw,
        counters,
        replication_counters: reps.iter().map(|r| r.counters).collect(),
    })
}

/// Simulates `model` at `p` under `cfg`.
pub fn simulate(
    p: &SystemParams,
    model: &Model,
    cfg: &SimConfig,
) -> Result<SimEstimate, crate::Error> {
    let p = p.validate_allowing_idle_su()?;
    cfg.validate()?;
    Ok(match model {
        Model::Basic => simulate_with(&BasicRules { p }, ModelKind::Basic, cfg)?,
        Model::Reservation(opts) => simulate_with(
            &ReservationRules { p, opts: *opts },
            ModelKind::Reservation,
            cfg,
        )?,
    })
}
