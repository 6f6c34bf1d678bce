use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crn_markov::generator::{Event, Generator};
use crn_markov::metrics;
use crn_markov::model::{self, Model};
use crn_markov::solver::{self, StationaryDistribution};
use crn_markov::state::{BasicState, ChainState, ReservationState, StateSpace, SuClass};
use crn_markov::{basic, reservation, ReservationOptions, SystemParams};

fn small() -> SystemParams {
    SystemParams {
        channels: 2,
        pu_sources: 2,
        pu_arrival: 0.5,
        pu_service: 1.0,
        su_arrival: 0.25,
        su_service: 0.75,
        pu_reserved: 0,
        returned_channels: 1,
        su2_reserved: 0,
        max_width: 2,
        min_width: 1,
    }
}

#[test]
fn generator_export_matches_golden_files() {
    let p = small();
    for (m, golden) in [
        (Model::Basic, include_str!("golden/basic_m2.txt")),
        (
            Model::Reservation(ReservationOptions::default()),
            include_str!("golden/reservation_m2.txt"),
        ),
    ] {
        let space = model::enumerate(&p, &m);
        let g = model::build(&p, &m, &space).unwrap();
        assert_eq!(g.export_triples(), golden, "{:?}", m.kind());
    }
}

/// `π_i ∝ C(k, i) (λp/μp)^i`, `i ≤ min(M, k)`.
fn engset(p: &SystemParams) -> Vec<f64> {
    let rho = p.pu_arrival / p.pu_service;
    let mut w = vec![1.0];
    for i in 1..=p.max_pus() {
        let prev = w[i - 1];
        w.push(prev * (p.pu_sources - i + 1) as f64 / i as f64 * rho);
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn pu_marginal<S: ChainState>(space: &StateSpace<S>, pi: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (s, w) in space.iter().zip(pi) {
        out[s.pus()] += w;
    }
    out
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn pu_only_chain_is_engset() {
    for m in 1..=5 {
        for k in 1..=5 {
            let p = SystemParams {
                channels: m,
                pu_sources: k,
                pu_arrival: 0.3,
                pu_service: 0.7,
                su_arrival: 0.0,
                ..small()
            };
            // Without SU traffic the SU-free states form a closed class.
            let full = basic::enumerate(&p);
            let g_full = basic::build_generator(&p, &full).unwrap();
            let free: Vec<usize> = (0..full.len())
                .filter(|&x| full.get(x).su1 + full.get(x).su2 == 0)
                .collect();
            for &x in &free {
                for &(to, _) in g_full.row(x) {
                    assert!(free.contains(&to));
                }
            }
            let space = StateSpace::new(free.iter().map(|&x| full.get(x)).collect());
            let g = Generator::build(&space, |s| basic::transitions(&p, s)).unwrap();
            let pi = solver::solve_direct(&g, 1e-12).unwrap().pi;
            let want = engset(&p);
            let got = pu_marginal(&space, &pi, want.len());
            assert!(
                max_diff(&got, &want) <= 1e-10,
                "M={m} k={k}: {got:?} vs {want:?}"
            );
        }
    }
}

#[test]
fn pu_marginal_is_engset_under_su_load() {
    // PU dynamics never depend on SU occupancy in the basic chain.
    for (m, k) in [(3, 2), (4, 6), (5, 5)] {
        let p = SystemParams {
            channels: m,
            pu_sources: k,
            ..small()
        };
        let space = basic::enumerate(&p);
        let g = basic::build_generator(&p, &space).unwrap();
        let pi = solver::solve_direct(&g, 1e-12).unwrap().pi;
        let want = engset(&p);
        assert!(max_diff(&pu_marginal(&space, &pi, want.len()), &want) <= 1e-10);
    }
}

#[test]
fn two_state_on_off_closed_form() {
    let p = SystemParams {
        channels: 1,
        pu_sources: 1,
        pu_arrival: 0.3,
        pu_service: 0.7,
        su_arrival: 0.0,
        ..small()
    };
    let space = StateSpace::new(vec![BasicState::EMPTY, BasicState::new(1, 0, 0)]);
    let g = Generator::build(&space, |s| basic::transitions(&p, s)).unwrap();
    for dist in [
        solver::solve_direct(&g, 1e-12).unwrap(),
        solver::solve_uniformization(&g, 1e-14, 1_000_000).unwrap(),
    ] {
        assert!((dist.pi[0] - 0.7).abs() < 1e-10 && (dist.pi[1] - 0.3).abs() < 1e-10);
    }
}

fn aggregated_rows<S: ChainState>(
    space: &StateSpace<S>,
    g: &Generator,
) -> Vec<BTreeMap<Vec<usize>, f64>> {
    (0..g.dim())
        .map(|r| {
            g.row(r)
                .iter()
                .map(|&(c, q)| (space.get(c).tuple(), q))
                .collect()
        })
        .collect()
}

/// With no reservations and unit widths the reservation chain collapses to
/// the basic chain. They differ in one rule: on a full system holding both
/// SU classes, the basic chain always drops an SU-2 on PU arrival, while the
/// reservation chain splits the drop between classes by channels held.
#[test]
fn degenerate_reservation_reduces_to_basic() {
    for m in 1..=4 {
        for k in [1, 2, 5] {
            let p = SystemParams {
                channels: m,
                pu_sources: k,
                pu_reserved: 0,
                returned_channels: 0,
                su2_reserved: 0,
                max_width: 1,
                min_width: 1,
                ..small()
            };
            let o = ReservationOptions::default();
            let bs = basic::enumerate(&p);
            let rs = reservation::enumerate(&p, &o);
            let project = |s: &ReservationState| {
                assert_eq!(s.returned, 0);
                BasicState::new(s.pus, s.su1, s.su2()).tuple()
            };
            let mut images: Vec<Vec<usize>> = rs.iter().map(project).collect();
            images.sort();
            images.dedup();
            assert_eq!(images.len(), rs.len(), "projection is injective");
            assert_eq!(images, bs.iter().map(|s| s.tuple()).collect::<Vec<_>>());

            let bg = basic::build_generator(&p, &bs).unwrap();
            let rg = reservation::build_generator(&p, &o, &rs).unwrap();
            let brows = aggregated_rows(&bs, &bg);
            for (x, s) in rs.iter().enumerate() {
                let rrow: BTreeMap<Vec<usize>, f64> = rg
                    .row(x)
                    .iter()
                    .map(|&(c, q)| (project(&rs.get(c)), q))
                    .fold(BTreeMap::new(), |mut acc, (t, q)| {
                        *acc.entry(t).or_insert(0.0) += q;
                        acc
                    });
                let b = &brows[bs
                    .index_of(&BasicState::new(s.pus, s.su1, s.su2()))
                    .unwrap()];
                let same = rrow.len() == b.len()
                    && rrow
                        .iter()
                        .zip(b)
                        .all(|((t1, q1), (t2, q2))| t1 == t2 && (q1 - q2).abs() < 1e-12);
                let victim_split = s.idle(&p) == 0 && s.su1 > 0 && s.su2() > 0 && s.pus < k;
                assert_eq!(
                    same, !victim_split,
                    "M={m} k={k} state {s}: {rrow:?} vs {b:?}"
                );
                if victim_split {
                    let c = p.pu_arrival_rate(s.pus);
                    let share = s.su1 as f64 / (s.su1 + s.su2()) as f64;
                    let drop1 = BasicState::new(s.pus + 1, s.su1 - 1, s.su2()).tuple();
                    assert!((rrow[&drop1] - c * share).abs() < 1e-12);
                }
            }
        }
    }
}

fn balance_check<S: ChainState>(
    g: &Generator,
    space: &StateSpace<S>,
    dist: &StationaryDistribution,
) {
    let inflow = g.left_multiply(&dist.pi);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for x in sample(&mut rng, space.len(), 20.min(space.len())) {
        let out = dist.pi[x] * g.exit_rate(x);
        let into = inflow[x] + out;
        assert!((into - out).abs() <= 1e-10, "state {}", space.get(x));
    }
}

#[test]
fn global_balance_at_reference_point() {
    let p = SystemParams::reference();
    let bs = basic::enumerate(&p);
    let bg = basic::build_generator(&p, &bs).unwrap();
    balance_check(&bg, &bs, &solver::solve_direct(&bg, 1e-10).unwrap());
    let o = ReservationOptions::default();
    let rs = reservation::enumerate(&p, &o);
    let rg = reservation::build_generator(&p, &o, &rs).unwrap();
    balance_check(&rg, &rs, &solver::solve_direct(&rg, 1e-10).unwrap());
}

/// The blocked and handoff index sets of the closed-form sums for the basic chain:
/// class 1 blocked when `N_idle = 0, j2 = 0`; class 2 blocked when
/// `N_idle = 0`; handoff sums over `N_idle > 0` with `j1 >= 1` (class 1) or
/// `j2 >= 1` (class 2), `j1 <= M - (i + j2 + 1)` resp. `j2 <= M - (i + j1 + 1)`.
#[test]
fn summation_index_sets_match_builder_predicates() {
    for m in 0..=5 {
        let p = SystemParams {
            channels: m,
            ..SystemParams::reference()
        };
        for s in basic::enumerate(&p).iter() {
            let full = s.busy() == m;
            let (i, j1, j2) = (s.pus, s.su1, s.su2);
            assert_eq!(
                basic::su_arrival(&p, s, SuClass::Su1).is_none(),
                full && j2 == 0,
                "{s}"
            );
            assert_eq!(
                basic::su_arrival(&p, s, SuClass::Su2).is_none(),
                full,
                "{s}"
            );
            let h1 = !full && j1 >= 1 && j1 + i + j2 < m;
            let h2 = !full && j2 >= 1 && j2 + i + j1 < m;
            assert_eq!(h1, !full && j1 >= 1);
            assert_eq!(h2, !full && j2 >= 1);
        }
    }
}

#[test]
fn blocked_state_with_all_pus_counts_its_full_mass() {
    // (k - i) = 0 collapses the denominator to λs.
    let p = SystemParams {
        channels: 2,
        pu_sources: 1,
        ..small()
    };
    let space = basic::enumerate(&p);
    let mut pi = vec![0.0; space.len()];
    pi[space.index_of(&BasicState::new(1, 1, 0)).unwrap()] = 1.0;
    let b = metrics::basic_blocking(&p, &space, &pi);
    assert_eq!(b.su1, 1.0);
    assert_eq!(b.su2, 1.0);
}

#[test]
fn handoff_on_one_state_support() {
    let p = SystemParams {
        channels: 2,
        pu_sources: 1,
        pu_arrival: 0.2,
        su_arrival: 0.6,
        ..small()
    };
    let space = basic::enumerate(&p);
    let mut pi = vec![0.0; space.len()];
    pi[space.index_of(&BasicState::new(0, 1, 0)).unwrap()] = 1.0;
    let r = metrics::basic_report(&p, &space, &pi);
    assert_eq!(r.blocking.su1, 0.0);
    let want = (0.2 / 2.0) / (0.2 + 0.6);
    assert!((r.handoff.su1 - want).abs() < 1e-15);
    assert_eq!(r.handoff.su2, 0.0);
}

#[test]
fn reference_reservation_empty_state_row() {
    let p = SystemParams::reference();
    let o = ReservationOptions::default();
    let space = reservation::enumerate(&p, &o);
    let g = reservation::build_generator(&p, &o, &space).unwrap();
    let edges: Vec<(ReservationState, f64, Event)> = g
        .transitions_from(0)
        .iter()
        .map(|t| (space.get(t.to), t.rate, t.event))
        .collect();
    assert_eq!(
        edges,
        vec![
            (
                ReservationState::new(0, 0, 0, 1, 0),
                0.25,
                Event::Su2ArrivalAggregate
            ),
            (
                ReservationState::new(0, 0, 1, 0, 0),
                0.25,
                Event::Su1Arrival
            ),
            (
                ReservationState::new(0, 1, 0, 0, 0),
                0.25,
                Event::SuR1Arrival
            ),
            (
                ReservationState::new(1, 0, 0, 0, 0),
                0.5,
                Event::PuArrivalReserved
            ),
        ]
    );
}
