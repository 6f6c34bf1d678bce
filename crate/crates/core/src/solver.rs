//! Stationary distributions of a [`Generator`].
//!
//! Two independent routes are provided: a dense LU solve of the balance
//! equations with one equation swapped for the normalization, and power
//! iteration on the uniformized chain.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::generator::Generator;

pub const DEFAULT_DIRECT_TOL: f64 = 1e-10;
pub const DEFAULT_ITERATE_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 10_000_000;
/// Uniformization constant is this multiple of the largest exit rate.
pub const UNIFORMIZATION_INFLATION: f64 = 1.05;
/// Negative entries at least this large are rounding noise.
const CLAMP_FLOOR: f64 = -1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    DirectLinear,
    Uniformization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    /// `‖πQ‖∞` of the returned vector.
    pub residual_inf: f64,
    pub method: Method,
}

impl StationaryDistribution {
    /// `max_s |π_s - other_s|`.
    pub fn distance_inf(&self, other: &[f64]) -> f64 {
        self.pi
            .iter()
            .zip(other)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Clamps rounding-level negatives and renormalizes.
fn clean(mut pi: Vec<f64>) -> Result<Vec<f64>, SolveError> {
    for x in pi.iter_mut() {
        if *x < 0.0 {
            if *x < CLAMP_FLOOR {
                return Err(SolveError::NegativeMass(*x));
            }
            *x = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(SolveError::SingularMatrix);
    }
    pi.iter_mut().for_each(|x| *x /= total);
    Ok(pi)
}

/// Dense solve of `Qᵀπ = 0` with the last equation replaced by `Σπ = 1`.
pub fn solve_direct(g: &Generator, tol: f64) -> Result<StationaryDistribution, SolveError> {
    let n = g.dim();
    if n == 0 {
        return Err(SolveError::Empty);
    }
    if !g.is_strongly_connected() {
        return Err(SolveError::SingularMatrix);
    }
    let q = g.to_dense();
    let a = DMatrix::from_fn(n, n, |r, c| if r == n - 1 { 1.0 } else { q[c][r] });
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or(SolveError::SingularMatrix)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::SingularMatrix);
    }
    let pi = clean(x.iter().copied().collect())?;
    let residual_inf = g.residual_inf(&pi);
    if residual_inf > tol {
        return Err(SolveError::ResidualTooLarge {
            residual: residual_inf,
            tol,
        });
    }
    Ok(StationaryDistribution {
        pi,
        residual_inf,
        method: Method::DirectLinear,
    })
}

/// Power iteration on `T = I + Q/Λ`, `Λ = 1.05 max_s |q(s,s)|`, from the
/// uniform vector until successive iterates differ by less than `tol`.
pub fn solve_uniformization(
    g: &Generator,
    tol: f64,
    max_iters: usize,
) -> Result<StationaryDistribution, SolveError> {
    let n = g.dim();
    if n == 0 {
        return Err(SolveError::Empty);
    }
    let max_exit = (0..n).map(|s| g.exit_rate(s)).fold(0.0, f64::max);
    if max_exit == 0.0 {
        if n == 1 {
            return Ok(StationaryDistribution {
                pi: vec![1.0],
                residual_inf: 0.0,
                method: Method::Uniformization,
            });
        }
        return Err(SolveError::SingularMatrix);
    }
    let lambda = UNIFORMIZATION_INFLATION * max_exit;
    let stay: Vec<f64> = (0..n).map(|s| 1.0 - g.exit_rate(s) / lambda).collect();

    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iters {
        for (x, (p, st)) in next.iter_mut().zip(pi.iter().zip(&stay)) {
            *x = p * st;
        }
        for (from, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let scaled = mass / lambda;
            for &(to, rate) in g.row(from) {
                next[to] += scaled * rate;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta = next
            .iter()
            .zip(&pi)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        std::mem::swap(&mut pi, &mut next);
        if delta < tol {
            let pi = clean(pi)?;
            let residual_inf = g.residual_inf(&pi);
            return Ok(StationaryDistribution {
                pi,
                residual_inf,
                method: Method::Uniformization,
            });
        }
    }
    Err(SolveError::NoConvergence(max_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{Event, Transition};

    fn birth_death(rates: &[(f64, f64)]) -> Generator {
        let mut t = Vec::new();
        for (n, &(up, down)) in rates.iter().enumerate() {
            t.push(Transition {
                from: n,
                to: n + 1,
                rate: up,
                event: Event::PuArrivalIdle,
            });
            t.push(Transition {
                from: n + 1,
                to: n,
                rate: down,
                event: Event::PuDeparture,
            });
        }
        Generator::from_transitions(rates.len() + 1, t)
    }

    #[test]
    fn two_state_closed_form() {
        let (l, m) = (0.7, 1.9);
        let g = birth_death(&[(l, m)]);
        let expect = [m / (l + m), l / (l + m)];
        let d = solve_direct(&g, DEFAULT_DIRECT_TOL).unwrap();
        assert!(d.distance_inf(&expect) < 1e-14);
        assert_eq!(d.method, Method::DirectLinear);
        let u = solve_uniformization(&g, DEFAULT_ITERATE_TOL, DEFAULT_MAX_ITERS).unwrap();
        assert!(u.distance_inf(&d.pi) < 1e-10);
    }

    #[test]
    fn single_state_chain() {
        let g = Generator::from_transitions(1, vec![]);
        let u = solve_uniformization(&g, 1e-12, 10).unwrap();
        assert_eq!(u.pi, vec![1.0]);
        let d = solve_direct(&g, 1e-12).unwrap();
        assert_eq!(d.pi, vec![1.0]);
    }

    #[test]
    fn birth_death_product_form() {
        let rates = [(1.0, 0.5), (2.0, 3.0), (0.25, 1.0), (4.0, 0.1)];
        let g = birth_death(&rates);
        let mut w = vec![1.0];
        for &(up, down) in &rates {
            w.push(w.last().unwrap() * up / down);
        }
        let total: f64 = w.iter().sum();
        let expect: Vec<f64> = w.iter().map(|x| x / total).collect();
        let d = solve_direct(&g, 1e-10).unwrap();
        assert!(d.distance_inf(&expect) < 1e-13);
        let u = solve_uniformization(&g, 1e-14, DEFAULT_MAX_ITERS).unwrap();
        assert!(u.distance_inf(&expect) < 1e-10);
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let g = Generator::from_transitions(
            2,
            vec![Transition {
                from: 0,
                to: 1,
                rate: 1.0,
                event: Event::PuArrivalIdle,
            }],
        );
        assert_eq!(solve_direct(&g, 1e-10), Err(SolveError::SingularMatrix));
        let g = Generator::from_transitions(3, vec![]);
        assert_eq!(
            solve_uniformization(&g, 1e-10, 10),
            Err(SolveError::SingularMatrix)
        );
    }

    #[test]
    fn iteration_cap_is_reported() {
        let g = birth_death(&[(1.0, 1e-3), (1e-3, 1.0)]);
        assert_eq!(
            solve_uniformization(&g, 1e-15, 3),
            Err(SolveError::NoConvergence(3))
        );
    }

    #[test]
    fn clamping_bounds() {
        assert_eq!(clean(vec![-1e-16, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            clean(vec![-1e-6, 1.0]),
            Err(SolveError::NegativeMass(_))
        ));
    }
}
