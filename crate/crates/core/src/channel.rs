//! System description and random channel generation.
//!
//! The model is a K-user multiple-access channel assisted by an
//! M-element reflecting surface. Three channel groups exist per
//! realization: direct user-to-relay links, user-to-surface links, and
//! surface-to-relay links. All fades are drawn i.i.d. circularly
//! symmetric complex Gaussian with unit variance (Rayleigh magnitudes).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A Gaussian integer, used for the integer combination coefficients
/// decoded by the relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaussianInt {
    pub re: i64,
    pub im: i64,
}

impl GaussianInt {
    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub const fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
}

impl fmt::Display for GaussianInt {
    /// Canonical form always spells out both parts: `1+0i`, `-2-3i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im < 0 { '-' } else { '+' };
        write!(f, "{}{}{}i", self.re, sign, self.im.unsigned_abs())
    }
}

/// Integer coefficient vector selected at the relay. Never all zero,
/// which the constructor enforces so downstream rate expressions cannot
/// divide by zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientVector(Vec<GaussianInt>);

impl CoefficientVector {
    pub fn new(entries: Vec<GaussianInt>) -> Result<Self> {
        if entries.is_empty() || entries.iter().all(GaussianInt::is_zero) {
            return Err(Error::ZeroCoefficients);
        }
        Ok(Self(entries))
    }

    /// All-ones vector of length `k`, the common default when every user
    /// message enters the decoded combination with weight one.
    pub fn ones(k: usize) -> Result<Self> {
        Self::new(vec![GaussianInt::new(1, 0); k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[GaussianInt] {
        &self.0
    }

    pub fn to_complex(&self) -> DVector<Complex64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|g| g.to_complex()))
    }
}

impl fmt::Display for CoefficientVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Convert a decibel SNR figure to linear scale.
pub fn snr_db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Static description of the scenario: user count, surface size,
/// transmit SNR, decoded coefficient vector, and whether the direct
/// user-to-relay links exist (they can be blocked in practice).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    num_users: usize,
    num_irs_elements: usize,
    snr_linear: f64,
    coeffs: CoefficientVector,
    direct_link_enabled: bool,
}

impl SystemParams {
    pub fn new(
        num_users: usize,
        num_irs_elements: usize,
        snr_linear: f64,
        coeffs: CoefficientVector,
        direct_link_enabled: bool,
    ) -> Result<Self> {
        if num_users < 1 {
            return Err(Error::CountTooSmall {
                what: "num_users",
                min: 1,
                actual: num_users,
            });
        }
        if !snr_linear.is_finite() || snr_linear <= 0.0 {
            return Err(Error::NonPositive {
                what: "snr_linear",
                value: snr_linear,
            });
        }
        if coeffs.len() != num_users {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected: num_users,
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            num_users,
            num_irs_elements,
            snr_linear,
            coeffs,
            direct_link_enabled,
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_irs_elements(&self) -> usize {
        self.num_irs_elements
    }

    pub fn snr_linear(&self) -> f64 {
        self.snr_linear
    }

    pub fn coeffs(&self) -> &CoefficientVector {
        &self.coeffs
    }

    pub fn direct_link_enabled(&self) -> bool {
        self.direct_link_enabled
    }

    /// Same scenario with a different surface size, for sweeps over M.
    pub fn with_num_irs_elements(&self, num_irs_elements: usize) -> Self {
        Self {
            num_irs_elements,
            ..self.clone()
        }
    }

    /// Same scenario at a different SNR, for sweeps over transmit power.
    pub fn with_snr_linear(&self, snr_linear: f64) -> Result<Self> {
        if !snr_linear.is_finite() || snr_linear <= 0.0 {
            return Err(Error::NonPositive {
                what: "snr_linear",
                value: snr_linear,
            });
        }
        Ok(Self {
            snr_linear,
            ..self.clone()
        })
    }
}

/// One draw of all channel coefficients.
///
/// `direct` is the K-vector of user-to-relay links, `user_irs` the K x M
/// matrix whose column m holds every user's link to reflecting element m,
/// and `irs_bs` the M-vector of element-to-relay links.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    direct: DVector<Complex64>,
    user_irs: DMatrix<Complex64>,
    irs_bs: DVector<Complex64>,
}

impl ChannelRealization {
    /// Build a realization from explicit coefficients. Dimensions must
    /// agree (`user_irs` is K x M with `direct` of length K and `irs_bs`
    /// of length M) and every entry must be finite.
    pub fn from_parts(
        direct: DVector<Complex64>,
        user_irs: DMatrix<Complex64>,
        irs_bs: DVector<Complex64>,
    ) -> Result<Self> {
        if user_irs.nrows() != direct.len() {
            return Err(Error::DimensionMismatch {
                what: "user_irs rows",
                expected: direct.len(),
                actual: user_irs.nrows(),
            });
        }
        if user_irs.ncols() != irs_bs.len() {
            return Err(Error::DimensionMismatch {
                what: "user_irs columns",
                expected: irs_bs.len(),
                actual: user_irs.ncols(),
            });
        }
        let finite = direct.iter().chain(user_irs.iter()).chain(irs_bs.iter());
        for c in finite {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFiniteChannel);
            }
        }
        Ok(Self {
            direct,
            user_irs,
            irs_bs,
        })
    }

    pub fn direct(&self) -> &DVector<Complex64> {
        &self.direct
    }

    pub fn user_irs(&self) -> &DMatrix<Complex64> {
        &self.user_irs
    }

    pub fn irs_bs(&self) -> &DVector<Complex64> {
        &self.irs_bs
    }

    pub fn num_users(&self) -> usize {
        self.direct.len()
    }

    pub fn num_irs_elements(&self) -> usize {
        self.irs_bs.len()
    }
}

/// One sample of a standard circularly symmetric complex Gaussian:
/// real and imaginary parts independent N(0, 1/2), unit total variance.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draw a full channel realization.
///
/// The consumption order of the generator is fixed and part of the
/// reproducibility contract: first the K direct links (skipped entirely
/// when the direct link is disabled, in which case they are zero), then
/// the K x M user-to-surface matrix column by column, then the M
/// surface-to-relay links. Each coefficient consumes two normal samples,
/// real part first.
pub fn sample_channel<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelRealization {
    let k = params.num_users();
    let m = params.num_irs_elements();

    let direct = if params.direct_link_enabled() {
        DVector::from_iterator(k, (0..k).map(|_| complex_gaussian(rng)))
    } else {
        DVector::zeros(k)
    };

    let mut user_irs = DMatrix::zeros(k, m);
    for col in 0..m {
        for row in 0..k {
            user_irs[(row, col)] = complex_gaussian(rng);
        }
    }

    let irs_bs = DVector::from_iterator(m, (0..m).map(|_| complex_gaussian(rng)));

    ChannelRealization {
        direct,
        user_irs,
        irs_bs,
    }
}

/// Independent random-number streams used by the Monte-Carlo driver.
/// Keeping the purposes separated means adding samples to one stream
/// (say, more random-phase draws) never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum SeedDomain {
    /// Channel coefficient draws, indexed by realization.
    Channel = 1,
    /// Phase-shift starting points for the alternating optimizer,
    /// indexed by realization and initialization.
    AoInit = 2,
    /// Random-phase baseline draws, indexed by realization.
    RandomPhase = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a stream seed from the master seed, a domain tag, and a list
/// of indices (realization, initialization, ...). Pure function of its
/// arguments, so any (master, domain, indices) triple names the same
/// stream on every run and on every thread.
pub fn derive_seed(master: u64, domain: SeedDomain, indices: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ (domain as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    for &ix in indices {
        h = splitmix64(h ^ ix.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1));
    }
    h
}

/// Generator for one derived stream. ChaCha8 keyed through
/// `seed_from_u64` is documented by the rand project as a reproducible,
/// portable construction.
pub fn sub_rng(master: u64, domain: SeedDomain, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, indices))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, m: usize, direct: bool) -> SystemParams {
        SystemParams::new(k, m, 10.0, CoefficientVector::ones(k).unwrap(), direct).unwrap()
    }

    #[test]
    fn gaussian_int_display_always_signs_imaginary_part() {
        assert_eq!(GaussianInt::new(1, 0).to_string(), "1+0i");
        assert_eq!(GaussianInt::new(-2, -3).to_string(), "-2-3i");
        assert_eq!(GaussianInt::new(0, 1).to_string(), "0+1i");
        assert_eq!(
            CoefficientVector::new(vec![GaussianInt::new(1, 0), GaussianInt::new(0, -1)])
                .unwrap()
                .to_string(),
            "1+0i,0-1i"
        );
    }

    #[test]
    fn all_zero_coefficients_rejected() {
        let err = CoefficientVector::new(vec![GaussianInt::new(0, 0); 3]).unwrap_err();
        assert_eq!(err, Error::ZeroCoefficients);
        assert_eq!(
            CoefficientVector::new(vec![]).unwrap_err(),
            Error::ZeroCoefficients
        );
    }

    #[test]
    fn params_validate_dimensions_and_snr() {
        let coeffs = CoefficientVector::ones(2).unwrap();
        assert!(SystemParams::new(2, 8, 10.0, coeffs.clone(), true).is_ok());
        assert!(matches!(
            SystemParams::new(3, 8, 10.0, coeffs.clone(), true),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            SystemParams::new(2, 8, 0.0, coeffs.clone(), true),
            Err(Error::NonPositive { .. })
        ));
        assert!(matches!(
            SystemParams::new(2, 8, f64::NAN, coeffs, true),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn snr_conversion_matches_reference_points() {
        assert!((snr_db_to_linear(0.0) - 1.0).abs() < 1e-15);
        assert!((snr_db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((snr_db_to_linear(around_5db()) - 3.162_277_660_168_379_5).abs() < 1e-12);
    }

    fn around_5db() -> f64 {
        5.0
    }

    #[test]
    fn sampling_is_deterministic_for_a_fixed_seed() {
        let p = params(3, 4, true);
        let a = sample_channel(&p, &mut sub_rng(7, SeedDomain::Channel, &[0]));
        let b = sample_channel(&p, &mut sub_rng(7, SeedDomain::Channel, &[0]));
        assert_eq!(a, b);
        let c = sample_channel(&p, &mut sub_rng(7, SeedDomain::Channel, &[1]));
        assert_ne!(a, c);
    }

    #[test]
    fn disabling_direct_link_zeroes_it_without_consuming_randomness() {
        let with = params(2, 3, true);
        let without = params(2, 3, false);
        let a = sample_channel(&without, &mut sub_rng(9, SeedDomain::Channel, &[0]));
        assert!(a.direct().iter().all(|c| c.norm() == 0.0));
        // The reflected-path draws shift forward when the direct draws
        // are skipped: the first user_irs entry equals what the first
        // direct entry would have been.
        let b = sample_channel(&with, &mut sub_rng(9, SeedDomain::Channel, &[0]));
        assert_eq!(a.user_irs()[(0, 0)], b.direct()[0]);
    }

    #[test]
    fn channel_dimensions_follow_params() {
        let p = params(2, 5, true);
        let c = sample_channel(&p, &mut sub_rng(1, SeedDomain::Channel, &[0]));
        assert_eq!(c.num_users(), 2);
        assert_eq!(c.num_irs_elements(), 5);
        assert_eq!(c.user_irs().nrows(), 2);
        assert_eq!(c.user_irs().ncols(), 5);
    }

    #[test]
    fn zero_element_surface_is_allowed() {
        let p = params(2, 0, true);
        let c = sample_channel(&p, &mut sub_rng(1, SeedDomain::Channel, &[0]));
        assert_eq!(c.num_irs_elements(), 0);
    }

    #[test]
    fn sample_moments_are_roughly_standard() {
        // 4000 coefficients: mean ~ 0, per-part variance ~ 1/2.
        let p = params(2, 999, true);
        let c = sample_channel(&p, &mut sub_rng(123, SeedDomain::Channel, &[0]));
        let values: Vec<Complex64> = c
            .direct()
            .iter()
            .chain(c.user_irs().iter())
            .chain(c.irs_bs().iter())
            .copied()
            .collect();
        let n = values.len() as f64;
        let mean_re = values.iter().map(|c| c.re).sum::<f64>() / n;
        let var_re = values.iter().map(|c| (c.re - mean_re).powi(2)).sum::<f64>() / n;
        let mean_im = values.iter().map(|c| c.im).sum::<f64>() / n;
        let var_im = values.iter().map(|c| (c.im - mean_im).powi(2)).sum::<f64>() / n;
        assert!(mean_re.abs() < 0.05, "mean_re = {mean_re}");
        assert!(mean_im.abs() < 0.05, "mean_im = {mean_im}");
        assert!((var_re - 0.5).abs() < 0.05, "var_re = {var_re}");
        assert!((var_im - 0.5).abs() < 0.05, "var_im = {var_im}");
    }

    #[test]
    fn derived_seeds_are_stable_and_separated() {
        let s = derive_seed(42, SeedDomain::Channel, &[5]);
        assert_eq!(s, derive_seed(42, SeedDomain::Channel, &[5]));
        assert_ne!(s, derive_seed(42, SeedDomain::AoInit, &[5]));
        assert_ne!(s, derive_seed(42, SeedDomain::RandomPhase, &[5]));
        assert_ne!(s, derive_seed(42, SeedDomain::Channel, &[6]));
        assert_ne!(s, derive_seed(43, SeedDomain::Channel, &[5]));
        assert_ne!(
            derive_seed(42, SeedDomain::AoInit, &[5, 0]),
            derive_seed(42, SeedDomain::AoInit, &[5])
        );
        assert_ne!(
            derive_seed(42, SeedDomain::AoInit, &[5, 0]),
            derive_seed(42, SeedDomain::AoInit, &[0, 5])
        );
    }
}
