//! Phase-shift optimization.
//!
//! For a fixed relay scaling factor `β` the rate is maximized by
//! minimizing the quadratic `g(θ) = ‖β h_eff(θ) − a‖²` over the
//! reflection phases. The alternating optimizer interleaves the
//! closed-form `β` update with gradient descent on `g`, which makes the
//! reported rate non-decreasing across iterations: the `β` step is an
//! exact maximizer and the descent step never accepts an increase.
//!
//! Besides the production path (analytic gradient plus Armijo
//! backtracking) this module carries three independent checks used by
//! the test suites: central finite differences for the gradient, a
//! closed-form single-coordinate minimizer, and exhaustive grid search
//! for surfaces small enough to enumerate.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{ChannelRealization, CoefficientVector};
use crate::error::{Error, Result};
use crate::rate::{
    computation_rate_beta, effective_channel, optimal_beta, rate_at_optimal_beta, residual_norm_sq,
    PhaseShifts, RateValue,
};

/// Gradient-descent settings for the inner phase update.
#[derive(Debug, Clone, PartialEq)]
pub struct GDConfig {
    /// Maximum descent steps per inner call.
    pub max_inner_iters: usize,
    /// Stop once the gradient norm falls to this level.
    pub grad_tolerance: f64,
    /// Armijo sufficient-decrease constant, in (0, 1).
    pub armijo_c: f64,
    /// Step shrink factor per backtrack, in (0, 1).
    pub backtrack_shrink: f64,
    /// Step length each line search starts from.
    pub initial_step: f64,
}

impl Default for GDConfig {
    fn default() -> Self {
        Self {
            max_inner_iters: 100,
            grad_tolerance: 1e-6,
            armijo_c: 1e-4,
            backtrack_shrink: 0.5,
            initial_step: 1.0,
        }
    }
}

impl GDConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_inner_iters < 1 {
            return Err(Error::CountTooSmall {
                what: "max_inner_iters",
                min: 1,
                actual: self.max_inner_iters,
            });
        }
        if !self.grad_tolerance.is_finite() || self.grad_tolerance <= 0.0 {
            return Err(Error::NonPositive {
                what: "grad_tolerance",
                value: self.grad_tolerance,
            });
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::OutOfRange {
                what: "armijo_c",
                range: "(0, 1)",
                value: self.armijo_c,
            });
        }
        if !(self.backtrack_shrink > 0.0 && self.backtrack_shrink < 1.0) {
            return Err(Error::OutOfRange {
                what: "backtrack_shrink",
                range: "(0, 1)",
                value: self.backtrack_shrink,
            });
        }
        if !self.initial_step.is_finite() || self.initial_step <= 0.0 {
            return Err(Error::NonPositive {
                what: "initial_step",
                value: self.initial_step,
            });
        }
        Ok(())
    }
}

/// Alternating-optimization settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AOConfig {
    /// Maximum outer (β, θ) rounds.
    pub max_ao_iters: usize,
    /// Stop once the per-round rate improvement drops below this
    /// (strictly; a tolerance of zero therefore runs all rounds).
    pub rate_tolerance: f64,
    pub gd: GDConfig,
}

impl Default for AOConfig {
    fn default() -> Self {
        Self {
            max_ao_iters: 50,
            rate_tolerance: 1e-8,
            gd: GDConfig::default(),
        }
    }
}

impl AOConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_ao_iters < 1 {
            return Err(Error::CountTooSmall {
                what: "max_ao_iters",
                min: 1,
                actual: self.max_ao_iters,
            });
        }
        if !self.rate_tolerance.is_finite() || self.rate_tolerance < 0.0 {
            return Err(Error::OutOfRange {
                what: "rate_tolerance",
                range: "[0, inf)",
                value: self.rate_tolerance,
            });
        }
        self.gd.validate()
    }
}

/// Snapshot of one alternating round.
#[derive(Debug, Clone, PartialEq)]
pub struct AOTraceEntry {
    /// 1-based round number.
    pub iteration: usize,
    /// Scaling factor used during this round's phase update.
    pub beta: Complex64,
    /// Rate at the round's (phases, beta) pair, in bits.
    pub rate_bits: f64,
    /// Phase-gradient norm at that pair.
    pub grad_norm: f64,
}

/// Outcome of one alternating-optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct AOResult {
    pub phases: PhaseShifts,
    pub beta: Complex64,
    /// Rate of (`phases`, `beta`), identical bits to evaluating
    /// [`computation_rate_beta`] on them.
    pub rate_bits: f64,
    pub trace: Vec<AOTraceEntry>,
    /// True when the run stalled (per-round improvement under
    /// `rate_tolerance`) with the returned point gradient-stationary.
    pub converged: bool,
}

fn assert_problem_dims(chan: &ChannelRealization, phases: &PhaseShifts, a: &CoefficientVector) {
    assert_eq!(
        phases.len(),
        chan.num_irs_elements(),
        "phase vector length must match the number of reflecting elements"
    );
    assert_eq!(
        a.len(),
        chan.num_users(),
        "coefficient vector length must match the number of users"
    );
}

fn objective_with(
    chan: &ChannelRealization,
    phases: &PhaseShifts,
    beta: Complex64,
    a_c: &DVector<Complex64>,
) -> f64 {
    let h_eff = effective_channel(chan, phases).expect("dimensions checked by caller");
    residual_norm_sq(beta, &h_eff, a_c)
}

fn gradient_with(
    chan: &ChannelRealization,
    phases: &PhaseShifts,
    beta: Complex64,
    a_c: &DVector<Complex64>,
) -> Vec<f64> {
    let h_eff = effective_channel(chan, phases).expect("dimensions checked by caller");
    let r = DVector::from_fn(h_eff.len(), |i, _| beta * h_eff[i] - a_c[i]);
    let mut grad = Vec::with_capacity(phases.len());
    for (m, &theta) in phases.iter().enumerate() {
        // d h_eff / d θ_m = j e^{jθ_m} f_m g_m, so
        // d g / d θ_m = 2 Re( j β e^{jθ_m} f_m (rᴴ g_m) ).
        let col_dot = r.dotc(&chan.user_irs().column(m));
        let factor = Complex64::i() * beta * Complex64::from_polar(1.0, theta) * chan.irs_bs()[m];
        grad.push(2.0 * (factor * col_dot).re);
    }
    grad
}

/// `‖β h_eff(θ) − a‖²` for the given phases.
///
/// Panics on dimension mismatch; there is no failure mode beyond misuse.
pub fn phase_objective(
    chan: &ChannelRealization,
    phases: &PhaseShifts,
    beta: Complex64,
    a: &CoefficientVector,
) -> f64 {
    assert_problem_dims(chan, phases, a);
    objective_with(chan, phases, beta, &a.to_complex())
}

/// Analytic gradient of [`phase_objective`] with respect to each phase.
///
/// Panics on dimension mismatch; there is no failure mode beyond misuse.
pub fn phase_gradient(
    chan: &ChannelRealization,
    phases: &PhaseShifts,
    beta: Complex64,
    a: &CoefficientVector,
) -> Vec<f64> {
    assert_problem_dims(chan, phases, a);
    gradient_with(chan, phases, beta, &a.to_complex())
}

/// Central finite-difference estimate of the phase gradient, used as an
/// independent oracle for [`phase_gradient`] in tests.
pub fn finite_difference_gradient(
    chan: &ChannelRealization,
    phases: &PhaseShifts,
    beta: Complex64,
    a: &CoefficientVector,
    step: f64,
) -> Vec<f64> {
    assert_problem_dims(chan, phases, a);
    assert!(step.is_finite() && step > 0.0, "step must be positive");
    let a_c = a.to_complex();
    let base = phases.as_slice();
    let mut grad = Vec::with_capacity(base.len());
    for m in 0..base.len() {
        let mut plus = base.to_vec();
        plus[m] += step;
        let mut minus = base.to_vec();
        minus[m] -= step;
        let f_plus = objective_with(chan, &PhaseShifts::wrapped(plus), beta, &a_c);
        let f_minus = objective_with(chan, &PhaseShifts::wrapped(minus), beta, &a_c);
        grad.push((f_plus - f_minus) / (2.0 * step));
    }
    grad
}

const MAX_BACKTRACKS: usize = 60;

/// Minimize the phase objective at fixed `β` by steepest descent with
/// Armijo backtracking. The line-search condition is evaluated on the
/// wrapped candidate, so the objective value of the returned phases is
/// never above that of `init`, exactly.
///
/// Panics on dimension mismatch or an invalid configuration.
pub fn gd_minimize(
    chan: &ChannelRealization,
    init: &PhaseShifts,
    beta: Complex64,
    a: &CoefficientVector,
    cfg: &GDConfig,
) -> PhaseShifts {
    assert_problem_dims(chan, init, a);
    cfg.validate().expect("invalid gradient-descent configuration");
    let a_c = a.to_complex();
    let mut theta = init.clone();

    for _ in 0..cfg.max_inner_iters {
        let grad = gradient_with(chan, &theta, beta, &a_c);
        let gnorm_sq: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm_sq.sqrt() <= cfg.grad_tolerance {
            break;
        }
        let g0 = objective_with(chan, &theta, beta, &a_c);
        let mut t = cfg.initial_step;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = PhaseShifts::wrapped(
                theta
                    .iter()
                    .zip(&grad)
                    .map(|(&th, &g)| th - t * g)
                    .collect(),
            );
            let g1 = objective_with(chan, &candidate, beta, &a_c);
            if g1 <= g0 - cfg.armijo_c * t * gnorm_sq {
                theta = candidate;
                accepted = true;
                break;
            }
            t *= cfg.backtrack_shrink;
        }
        if !accepted {
            // No acceptable step at any tried length; the point is as
            // good as this search will make it.
            break;
        }
    }
    theta
}

/// Alternate closed-form `β` updates with gradient descent on the
/// phases, starting from `init`.
///
/// Each round records a trace entry; the loop stops once the rate gain
/// of a round falls below `rate_tolerance` or the round budget runs out.
/// The returned (phases, beta, rate) triple is the best pair observed,
/// including the starting point evaluated at its own optimal `β`, so the
/// result never falls below the starting rate even at the last bit.
pub fn ao_optimize(
    chan: &ChannelRealization,
    a: &CoefficientVector,
    snr: f64,
    init: &PhaseShifts,
    cfg: &AOConfig,
) -> Result<AOResult> {
    cfg.validate()?;
    if init.len() != chan.num_irs_elements() {
        return Err(Error::DimensionMismatch {
            what: "initial phase shifts",
            expected: chan.num_irs_elements(),
            actual: init.len(),
        });
    }
    if a.len() != chan.num_users() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: chan.num_users(),
            actual: a.len(),
        });
    }

    let a_c = a.to_complex();
    let mut phases = init.clone();
    let mut h_eff = effective_channel(chan, &phases)?;

    // Starting point scored exactly like every later round so that the
    // comparison below is apples to apples.
    let beta0 = optimal_beta(&h_eff, a, snr)?;
    let mut prev_rate = computation_rate_beta(a, &h_eff, snr, beta0)?.bits();
    let mut best = (phases.clone(), beta0, prev_rate);

    let mut trace = Vec::new();
    let mut stalled = false;

    for iteration in 1..=cfg.max_ao_iters {
        let beta = optimal_beta(&h_eff, a, snr)?;
        phases = gd_minimize(chan, &phases, beta, a, &cfg.gd);
        h_eff = effective_channel(chan, &phases)?;
        let rate_bits = computation_rate_beta(a, &h_eff, snr, beta)?.bits();

        let grad = gradient_with(chan, &phases, beta, &a_c);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        trace.push(AOTraceEntry {
            iteration,
            beta,
            rate_bits,
            grad_norm,
        });

        if rate_bits > best.2 {
            best = (phases.clone(), beta, rate_bits);
        }
        let improvement = rate_bits - prev_rate;
        prev_rate = rate_bits;
        if improvement < cfg.rate_tolerance {
            stalled = true;
            break;
        }
    }

    let (best_phases, best_beta, best_rate) = best;
    let converged = if stalled {
        let grad = gradient_with(chan, &best_phases, best_beta, &a_c);
        grad.iter().map(|g| g * g).sum::<f64>().sqrt() <= cfg.gd.grad_tolerance
    } else {
        false
    };

    Ok(AOResult {
        phases: best_phases,
        beta: best_beta,
        rate_bits: best_rate,
        trace,
        converged,
    })
}

/// Best phase for a single element with all others held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateOptimum {
    /// Unique minimizer of the objective along this coordinate.
    Angle(f64),
    /// The element has no effect (its cascade weight is zero), so every
    /// angle is equally optimal.
    AnyAngle,
}

/// Closed-form minimizer of the phase objective along coordinate `m`
/// (0-based), holding the other phases and `β` fixed.
///
/// Writing the objective as `‖r₋ + e^{jθ} w‖²` with `w = β f_m g_m` and
/// `r₋` the residual excluding element `m`, the minimizing angle is
/// `π − arg(r₋ᴴ w)`. Used as an oracle for stationarity of optimized
/// phase configurations.
pub fn coordinate_phase_optimum(
    chan: &ChannelRealization,
    phases: &PhaseShifts,
    beta: Complex64,
    a: &CoefficientVector,
    m: usize,
) -> Result<CoordinateOptimum> {
    if phases.len() != chan.num_irs_elements() {
        return Err(Error::DimensionMismatch {
            what: "phase shifts",
            expected: chan.num_irs_elements(),
            actual: phases.len(),
        });
    }
    if a.len() != chan.num_users() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: chan.num_users(),
            actual: a.len(),
        });
    }
    if m >= phases.len() {
        return Err(Error::CountTooSmall {
            what: "number of reflecting elements (coordinate index out of range)",
            min: m + 1,
            actual: phases.len(),
        });
    }

    let k = chan.num_users();
    let w = {
        let mut w = DVector::zeros(k);
        let scale = beta * chan.irs_bs()[m];
        for i in 0..k {
            w[i] = scale * chan.user_irs()[(i, m)];
        }
        w
    };
    if w.norm_squared() == 0.0 {
        return Ok(CoordinateOptimum::AnyAngle);
    }

    let a_c = a.to_complex();
    let mut r_minus = DVector::zeros(k);
    for i in 0..k {
        r_minus[i] = beta * chan.direct()[i] - a_c[i];
    }
    for (mp, &theta) in phases.iter().enumerate() {
        if mp == m {
            continue;
        }
        let scale = beta * Complex64::from_polar(1.0, theta) * chan.irs_bs()[mp];
        for i in 0..k {
            r_minus[i] += scale * chan.user_irs()[(i, mp)];
        }
    }

    let s = r_minus.dotc(&w);
    Ok(CoordinateOptimum::Angle(crate::rate::wrap_angle(
        std::f64::consts::PI - s.arg(),
    )))
}

/// Exhaustively search a uniform grid of `points_per_dim` phases per
/// element and return the best configuration under
/// [`rate_at_optimal_beta`]. Only practical for tiny surfaces, so
/// anything above two elements is refused. Ties keep the first grid
/// point visited (row-major over elements).
pub fn grid_search_phases(
    chan: &ChannelRealization,
    a: &CoefficientVector,
    snr: f64,
    points_per_dim: usize,
) -> Result<(PhaseShifts, RateValue)> {
    if points_per_dim < 1 {
        return Err(Error::CountTooSmall {
            what: "points_per_dim",
            min: 1,
            actual: points_per_dim,
        });
    }
    let m = chan.num_irs_elements();
    if m > 2 {
        return Err(Error::GridTooLarge { max: 2, actual: m });
    }

    let angle = |i: usize| std::f64::consts::TAU * (i as f64) / (points_per_dim as f64);
    let mut best: Option<(PhaseShifts, RateValue)> = None;
    let mut consider = |phases: PhaseShifts| -> Result<()> {
        let rate = rate_at_optimal_beta(chan, &phases, a, snr)?;
        if best.as_ref().is_none_or(|(_, r)| rate > *r) {
            best = Some((phases, rate));
        }
        Ok(())
    };

    match m {
        0 => consider(PhaseShifts::zeros(0))?,
        1 => {
            for i in 0..points_per_dim {
                consider(PhaseShifts::wrapped(vec![angle(i)]))?;
            }
        }
        2 => {
            for i in 0..points_per_dim {
                for j in 0..points_per_dim {
                    consider(PhaseShifts::wrapped(vec![angle(i), angle(j)]))?;
                }
            }
        }
        _ => unreachable!(),
    }

    Ok(best.expect("at least one grid point is always evaluated"))
}
