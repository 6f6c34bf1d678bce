//! System parameters shared by both chains and the simulator.
//!
//! The JSON form uses the conventional symbol names (`M`, `k`, `lambda_p`,
//! ...). `M` and `m` differ only by case, so the keys are kept verbatim
//! instead of being mapped to a snake_case convention.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// All model constants. Derived pool sizes (`M1`, `M2`) are computed on
/// demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Total homogeneous channels.
    #[serde(rename = "M")]
    pub channels: usize,
    /// Size of the finite primary-user population.
    #[serde(rename = "k")]
    pub pu_sources: usize,
    /// Arrival rate of each idle primary user (calls/s).
    #[serde(rename = "lambda_p")]
    pub pu_arrival: f64,
    /// Primary-user service rate (calls/s).
    #[serde(rename = "mu_p")]
    pub pu_service: f64,
    /// Arrival rate of each secondary-user class (calls/s).
    #[serde(rename = "lambda_s")]
    pub su_arrival: f64,
    /// Secondary-user service rate (calls/s).
    #[serde(rename = "mu_s")]
    pub su_service: f64,
    /// Channels that primary users fill first.
    #[serde(rename = "M_rp")]
    pub pu_reserved: usize,
    /// Channels usable by returned class-1 users.
    #[serde(rename = "M1_prime")]
    pub returned_channels: usize,
    /// Channels reserved for class-2 users.
    #[serde(rename = "M_r2")]
    pub su2_reserved: usize,
    /// Maximum aggregation width of a class-2 user.
    #[serde(rename = "m")]
    pub max_width: usize,
    /// Minimum aggregation width of a class-2 user.
    #[serde(rename = "n")]
    pub min_width: usize,
}

impl SystemParams {
    /// Reference operating point: 7 channels, 10 PUs, λp=0.05, μp=0.4,
    /// λs=0.25, μs=0.5, two PU-reserved channels, one returned-user channel,
    /// one SU-2 reserved channel, widths 2 and 1.
    pub fn reference() -> Self {
        Self {
            channels: 7,
            pu_sources: 10,
            pu_arrival: 0.05,
            pu_service: 0.4,
            su_arrival: 0.25,
            su_service: 0.5,
            pu_reserved: 2,
            returned_channels: 1,
            su2_reserved: 1,
            max_width: 2,
            min_width: 1,
        }
    }

    /// Parses and validates a JSON parameter document.
    pub fn from_json(text: &str) -> Result<Self, ParamError> {
        let p: Self =
            serde_json::from_str(text).map_err(|e| ParamError::Malformed(e.to_string()))?;
        p.validate()
    }

    /// Returns `self` unchanged if every invariant holds, otherwise the
    /// first violated one.
    pub fn validate(self) -> Result<Self, ParamError> {
        self.check(false)
    }

    /// As [`validate`](Self::validate), but also accepts `lambda_s = 0`
    /// (secondary traffic switched off), which the simulator can run.
    pub fn validate_allowing_idle_su(self) -> Result<Self, ParamError> {
        self.check(true)
    }

    fn check(self, allow_idle_su: bool) -> Result<Self, ParamError> {
        if self.channels < 1 {
            return Err(ParamError::NoChannels);
        }
        if self.pu_sources < 1 {
            return Err(ParamError::NoPrimaryUsers);
        }
        for (name, value) in [
            ("lambda_p", self.pu_arrival),
            ("mu_p", self.pu_service),
            ("lambda_s", self.su_arrival),
            ("mu_s", self.su_service),
        ] {
            let idle_ok = allow_idle_su && name == "lambda_s" && value == 0.0;
            if !(value > 0.0 && value.is_finite()) && !idle_ok {
                return Err(ParamError::NonPositiveRate { name, value });
            }
        }
        if self.max_width < 1 {
            return Err(ParamError::MaxWidthZero);
        }
        if self.min_width < 1 {
            return Err(ParamError::MinWidthZero);
        }
        if self.min_width > self.max_width {
            return Err(ParamError::WidthOrder {
                n: self.min_width,
                m: self.max_width,
            });
        }
        if self.su1_pool_signed() < 0 {
            return Err(ParamError::Su1PoolNegative);
        }
        if self.su2_pool_signed() < 0 {
            return Err(ParamError::Su2PoolNegative);
        }
        Ok(self)
    }

    fn su1_pool_signed(&self) -> i64 {
        self.channels as i64 - self.pu_reserved as i64 - self.su2_reserved as i64
    }

    fn su2_pool_signed(&self) -> i64 {
        self.channels as i64 - self.pu_reserved as i64 - self.returned_channels as i64
    }

    /// `M1 = M - M_rp - M_r2`, saturating at zero for unvalidated input.
    pub fn su1_pool(&self) -> usize {
        self.su1_pool_signed().max(0) as usize
    }

    /// `M2 = M - M_rp - M1_prime`, saturating at zero for unvalidated input.
    pub fn su2_pool(&self) -> usize {
        self.su2_pool_signed().max(0) as usize
    }

    /// Upper bound on the PU count: both the channel count and the
    /// population size bind.
    pub fn max_pus(&self) -> usize {
        self.channels.min(self.pu_sources)
    }

    /// Aggregate PU arrival rate `(k - i) λp` with `i` PUs in service.
    pub fn pu_arrival_rate(&self, pus: usize) -> f64 {
        self.pu_sources.saturating_sub(pus) as f64 * self.pu_arrival
    }

    pub fn with_su_arrival(mut self, lambda_s: f64) -> Self {
        self.su_arrival = lambda_s;
        self
    }

    pub fn with_su_service(mut self, mu_s: f64) -> Self {
        self.su_service = mu_s;
        self
    }
}
