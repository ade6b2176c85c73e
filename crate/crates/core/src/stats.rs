//! Streaming summary statistics for Monte-Carlo reductions.

/// Welford's online mean and variance accumulator.
///
/// One pass, numerically stable, and exact in two cases the tests rely
/// on: a stream of identical values reports zero variance (every delta
/// is exactly zero), and the running mean of such a stream equals that
/// value bit for bit.
#[derive(Debug, Clone, Default)]
pub struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        let delta2 = x - self.mean;
        self.m2 += delta * delta2;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Mean of the pushed values; NaN when nothing was pushed.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance (n − 1 denominator); zero when fewer
    /// than two values were pushed.
    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            // Guard against a tiny negative from rounding.
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean, `sqrt(variance / n)`; zero for a
    /// single value.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.sample_variance() / self.count as f64).sqrt()
        }
    }
}
