//! Closed-form state counts and a comparison against the enumerators.

use serde::{Deserialize, Serialize};

use crate::params::SystemParams;
use crate::reservation::{self, ReservationOptions};
use crate::{basic, format::g12};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("closed form {0}/6 is not an integer")]
pub struct NonIntegerCount(pub i64);

fn sixths(numerator: i64) -> Result<i64, NonIntegerCount> {
    if numerator % 6 == 0 {
        Ok(numerator / 6)
    } else {
        Err(NonIntegerCount(numerator))
    }
}

/// `M³/6 + M² + 11M/6 + 1`, the number of `(i, j1, j2)` with sum at most `M`.
pub fn state_count_basic(m: usize) -> Result<i64, NonIntegerCount> {
    let m = m as i64;
    sixths(m * m * m + 6 * m * m + 11 * m + 6)
}

/// `M³/3 + 3M²/2 - 23M/6 - 7`, the reservation-chain count quoted for
/// `M_rp = 2`.
pub fn state_count_reservation(m: usize) -> Result<i64, NonIntegerCount> {
    let m = m as i64;
    sixths(2 * m * m * m + 9 * m * m - 23 * m - 42)
}

/// `(M_rp + 1)(Σ_{v=M_rp}^{M-M_rp} 2v + (M - M_rp)) + Σ_{w=1}^{M-M_rp} w²`
/// for general `M_rp`. Empty sums are zero.
pub fn state_count_reservation_general(m: usize, pu_reserved: usize) -> i64 {
    let m = m as i64;
    let r = pu_reserved as i64;
    let linear: i64 = (r..=m - r).map(|v| 2 * v).sum();
    let squares: i64 = (1..=m - r).map(|w| w * w).sum();
    (r + 1) * (linear + (m - r)) + squares
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub channels: usize,
    pub formula_basic: i64,
    pub enumerated_basic: usize,
    /// Quoted closed form; `None` if it fails to be an integer.
    pub formula_prop: Option<i64>,
    pub formula_prop_general: i64,
    /// `None` when the reservation parameters do not fit in `M` channels.
    pub enumerated_prop: Option<usize>,
    /// `enumerated_basic / (M³/6)`.
    pub ratio_basic: Option<f64>,
    /// `enumerated_prop / (M³/3)`.
    pub ratio_prop: Option<f64>,
}

impl ComplexityRow {
    pub fn basic_matches(&self) -> bool {
        self.formula_basic == self.enumerated_basic as i64
    }

    pub fn prop_matches(&self) -> Option<bool> {
        Some(self.formula_prop? == self.enumerated_prop? as i64)
    }
}

/// One row per `M` in `range`, using `template` for every parameter except
/// `M` (reservation sizes, widths, `k`).
pub fn report(
    template: &SystemParams,
    opts: &ReservationOptions,
    range: std::ops::RangeInclusive<usize>,
) -> Vec<ComplexityRow> {
    range
        .map(|m| {
            let p = SystemParams {
                channels: m,
                ..*template
            };
            let enumerated_basic = basic::enumerate(&p).len();
            let enumerated_prop = p
                .validate()
                .ok()
                .map(|p| reservation::enumerate(&p, opts).len());
            let cube = (m as f64).powi(3);
            ComplexityRow {
                channels: m,
                formula_basic: state_count_basic(m).expect("always integral"),
                enumerated_basic,
                formula_prop: state_count_reservation(m).ok(),
                formula_prop_general: state_count_reservation_general(m, template.pu_reserved),
                enumerated_prop,
                ratio_basic: (m > 0).then(|| enumerated_basic as f64 / (cube / 6.0)),
                ratio_prop: enumerated_prop
                    .filter(|_| m > 0)
                    .map(|n| n as f64 / (cube / 3.0)),
            }
        })
        .collect()
}

pub fn report_csv(rows: &[ComplexityRow]) -> String {
    let mut out = String::from(
        "M,formula_basic,enumerated_basic,basic_match,formula_prop,formula_prop_general,enumerated_prop,prop_match,ratio_basic_m3_6,ratio_prop_m3_3\n",
    );
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.channels,
            r.formula_basic,
            r.enumerated_basic,
            r.basic_matches(),
            opt(r.formula_prop.map(|v| v.to_string())),
            r.formula_prop_general,
            opt(r.enumerated_prop.map(|v| v.to_string())),
            opt(r.prop_matches().map(|v| v.to_string())),
            opt(r.ratio_basic.map(g12)),
            opt(r.ratio_prop.map(g12)),
        ));
    }
    out
}
