//! System numerology for an LTE-like PRACH and the regulatory cyclic-shift bound.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Speed of light (m/s), used for the round-trip delay check.
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// All numerology of the uplink random-access model.
///
/// Field names in JSON follow the conventional symbols (`N`, `N_g`, `M`, ...);
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of OFDM subcarriers.
    #[serde(rename = "N")]
    pub n: usize,
    /// Cyclic-prefix length in samples.
    #[serde(rename = "N_g")]
    pub cp_len: usize,
    /// Number of PRACH subcarriers (ZC sequence length).
    #[serde(rename = "M")]
    pub m: usize,
    /// Index of the first PRACH subcarrier, 0-based into the N-point grid.
    pub j1: usize,
    /// Sample interval in seconds.
    #[serde(rename = "T_s")]
    pub sample_interval: f64,
    /// Cell radius in km.
    pub gamma: f64,
    /// Maximum delay spread in microseconds.
    pub tau_d: f64,
    /// Preamble sequence duration in microseconds.
    #[serde(rename = "T_SEQ")]
    pub t_seq: f64,
    /// Additional guard samples in the cyclic-shift bound.
    pub n_g: usize,
    /// Maximum channel order in taps.
    #[serde(rename = "P_max")]
    pub p_max: usize,
    /// Maximum round-trip delay in samples.
    #[serde(rename = "D")]
    pub max_delay: usize,
    /// Truncated block width, `P_max + D`.
    #[serde(rename = "N1")]
    pub n1: usize,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing: f64,
}

/// One violated invariant of a [`SystemConfig`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

impl SystemConfig {
    /// The LTE-like preset: 6144 subcarriers, 839 PRACH subcarriers,
    /// 130 ns sampling, 1.3 km cell, 35-tap channels and 70 samples of delay.
    pub fn lte() -> Self {
        SystemConfig {
            n: 6144,
            cp_len: 768,
            m: 839,
            j1: 0,
            sample_interval: 130e-9,
            gamma: 1.3,
            tau_d: 1.0,
            t_seq: 800.0,
            n_g: 2,
            p_max: 35,
            max_delay: 70,
            n1: 105,
            subcarrier_spacing: 1250.0,
        }
    }

    /// A tiny configuration used throughout the tests and examples
    /// (N = 64, M = 13, N1 = 4). The 3 us sample interval folds every ITU
    /// channel into at most two taps.
    pub fn small() -> Self {
        SystemConfig {
            n: 64,
            cp_len: 8,
            m: 13,
            j1: 0,
            sample_interval: 3e-6,
            gamma: 0.0,
            tau_d: 0.0,
            t_seq: 800.0,
            n_g: 0,
            p_max: 2,
            max_delay: 2,
            n1: 4,
            subcarrier_spacing: 1250.0,
        }
    }

    /// Look up a named built-in configuration.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "lte" => Some(Self::lte()),
            "small" => Some(Self::small()),
            _ => None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Every violated invariant, in a fixed order. Empty means valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |rule: &'static str, message: String| out.push(Violation { rule, message });

        if self.m == 0 {
            push("M > 0", "M must be positive".into());
        }
        if 2 * self.m > self.n {
            push("M ≤ N/2", format!("M={} exceeds N/2={}", self.m, self.n as f64 / 2.0));
        }
        if (self.m as f64) < PI * 2f64.sqrt() {
            push("M ≥ 5", format!("M={} is below ceil(pi*sqrt(2)) = 5", self.m));
        }
        if self.j1 + self.m > self.n {
            push(
                "j1 + M ≤ N",
                format!("PRACH bins {}..{} leave the {}-point grid", self.j1, self.j1 + self.m, self.n),
            );
        }
        if self.n1 == 0 {
            push("N1 ≥ 1", "N1 must be at least one".into());
        }
        if self.n1 != self.p_max + self.max_delay {
            push(
                "N1 = P_max + D",
                format!("N1={} but P_max + D = {}", self.n1, self.p_max + self.max_delay),
            );
        }
        if self.n1 >= self.m {
            push("N1 < M", format!("N1={} is not below M={}", self.n1, self.m));
        }
        if !(self.t_seq > 0.0) {
            push("T_SEQ > 0", format!("T_SEQ={} must be positive", self.t_seq));
        }
        if !(self.sample_interval > 0.0) {
            push("T_s > 0", format!("T_s={} must be positive", self.sample_interval));
        }
        if !(self.gamma >= 0.0) {
            push("gamma ≥ 0", format!("gamma={} must be non-negative", self.gamma));
        }
        out
    }

    /// `Ok(())` when every invariant holds, otherwise the full violation list.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Like [`validate`](Self::validate) but folded into the crate error type.
    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().map_err(|v| {
            Error::InvalidConfig(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
        })
    }

    /// Regulatory lower bound on n_cs for this configuration.
    pub fn ncs_lower_bound(&self) -> Result<usize> {
        ncs_lower_bound(self.gamma, self.tau_d, self.t_seq, self.m, self.n_g)
    }

    /// Round-trip delay of a terminal at the cell edge, in whole samples.
    pub fn round_trip_delay_samples(&self) -> usize {
        let seconds = 2.0 * self.gamma * 1000.0 / SPEED_OF_LIGHT;
        (seconds / self.sample_interval).ceil() as usize
    }

    /// Indices `j_1, ..., j_M` of the PRACH subcarriers.
    pub fn prach_bins(&self) -> impl Iterator<Item = usize> + '_ {
        self.j1..self.j1 + self.m
    }
}

/// Smallest admissible cyclic-shift step for a cell of radius `gamma` km:
/// `ceil((20/3 * gamma - tau_d) * M / T_SEQ) + n_g`, clamped at zero.
pub fn ncs_lower_bound(gamma: f64, tau_d: f64, t_seq: f64, m: usize, n_g: usize) -> Result<usize> {
    if !(t_seq > 0.0) {
        return Err(Error::InvalidConfig(format!("T_SEQ={t_seq} must be positive")));
    }
    if m == 0 {
        return Err(Error::InvalidConfig("M must be positive".into()));
    }
    if !(gamma >= 0.0) {
        return Err(Error::InvalidConfig(format!("gamma={gamma} must be non-negative")));
    }
    let raw = (20.0 / 3.0 * gamma - tau_d) * m as f64 / t_seq;
    // values that are integers up to rounding must not be pushed to the next integer
    let ceil = (raw - 1e-9 * raw.abs().max(1.0)).ceil();
    let total = ceil + n_g as f64;
    Ok(if total <= 0.0 { 0 } else { total as usize })
}
