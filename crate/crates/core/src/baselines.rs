//! Comparison schemes.
//!
//! Every surface-tuning method is judged against the same yardsticks: no
//! surface at all, randomly chosen phases (best and average of several
//! draws), and the alternating optimizer from several random starting
//! points (again best and average). All of them score configurations
//! with the scaling factor at its optimum.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{ChannelRealization, CoefficientVector};
use crate::error::{Error, Result};
use crate::optimizer::{ao_optimize, AOConfig, AOResult};
use crate::rate::{computation_rate_direct, rate_at_optimal_beta, PhaseShifts, RateValue};
use crate::stats::Welford;

/// The evaluated schemes. Declaration order matches the lexicographic
/// order of the method names, so the derived `Ord` sorts output rows the
/// same way the CSV contract does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodId {
    /// Alternating optimization, average over initializations.
    AoAvg,
    /// Alternating optimization, best initialization.
    AoMax,
    /// Direct links only, no reflecting surface.
    NoIrs,
    /// Random phases, average over draws.
    RndPhzAvg,
    /// Random phases, best draw.
    RndPhzMax,
}

impl MethodId {
    pub const ALL: [MethodId; 5] = [
        MethodId::AoAvg,
        MethodId::AoMax,
        MethodId::NoIrs,
        MethodId::RndPhzAvg,
        MethodId::RndPhzMax,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodId::AoAvg => "ao-avg",
            MethodId::AoMax => "ao-max",
            MethodId::NoIrs => "no-irs",
            MethodId::RndPhzAvg => "rndphz-avg",
            MethodId::RndPhzMax => "rndphz-max",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Rate with no surface: the direct links are the whole channel.
pub fn no_irs_rate(
    chan: &ChannelRealization,
    a: &CoefficientVector,
    snr: f64,
) -> Result<RateValue> {
    computation_rate_direct(a, chan.direct(), snr)
}

/// `count` independent uniform phase configurations.
pub fn draw_uniform_phases<R: Rng + ?Sized>(
    num_elements: usize,
    count: usize,
    rng: &mut R,
) -> Vec<PhaseShifts> {
    (0..count)
        .map(|_| PhaseShifts::uniform_random(num_elements, rng))
        .collect()
}

/// Rates of `count` random phase draws on one channel, in draw order.
/// Callers reduce with [`reduce_mean`] or [`reduce_max`] for the
/// averaged and best-draw baselines.
pub fn random_phase_rates<R: Rng + ?Sized>(
    chan: &ChannelRealization,
    a: &CoefficientVector,
    snr: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<RateValue>> {
    draw_uniform_phases(chan.num_irs_elements(), count, rng)
        .iter()
        .map(|p| rate_at_optimal_beta(chan, p, a, snr))
        .collect()
}

/// One alternating-optimization run per starting point, in input order.
pub fn ao_over_inits(
    chan: &ChannelRealization,
    a: &CoefficientVector,
    snr: f64,
    inits: &[PhaseShifts],
    cfg: &AOConfig,
) -> Result<Vec<AOResult>> {
    inits
        .iter()
        .map(|init| ao_optimize(chan, a, snr, init, cfg))
        .collect()
}

/// Mean of a non-empty rate sequence (NaN if empty).
pub fn reduce_mean(bits: &[f64]) -> f64 {
    let mut w = Welford::new();
    for &b in bits {
        w.push(b);
    }
    w.mean()
}

/// Maximum of a non-empty rate sequence (negative infinity if empty).
pub fn reduce_max(bits: &[f64]) -> f64 {
    bits.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
