//! Shared scenario builders for the benchmarks.

use irs_cf_core::{
    sample_channel, sub_rng, ChannelRealization, CoefficientVector, PhaseShifts, SeedDomain,
    SystemParams,
};

/// A fixed mid-sized scenario: channel, coefficients, SNR, and one
/// phase configuration, deterministic across runs so timings compare.
pub struct Scenario {
    pub params: SystemParams,
    pub chan: ChannelRealization,
    pub a: CoefficientVector,
    pub snr: f64,
    pub phases: PhaseShifts,
}

pub fn scenario(k: usize, m: usize, snr: f64, seed: u64) -> Scenario {
    let a = CoefficientVector::ones(k).unwrap();
    let params = SystemParams::new(k, m, snr, a.clone(), true).unwrap();
    let chan = sample_channel(&params, &mut sub_rng(seed, SeedDomain::Channel, &[0]));
    let phases =
        PhaseShifts::uniform_random(m, &mut sub_rng(seed, SeedDomain::AoInit, &[0, 0]));
    Scenario {
        params,
        chan,
        a,
        snr,
        phases,
    }
}
