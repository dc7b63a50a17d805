//! Priors for the individual-player model and the coordinate transforms the
//! sampler uses.
//!
//! Inference runs in `(C, mu2, D)` coordinates where `mu1 = C * mu2` and
//! `L = D * mu2` with C, D in [0, 1], which bakes in the constraints
//! `mu1 <= mu2` and `L <= mu2`. The priors are C ~ Beta(1, 2), D ~ Beta(1, 5)
//! and mu2 lognormal with median 25 and log-scale 0.75; the constant-hazard
//! baseline model uses a lognormal with median 20 and the same width.
//!
//! Sampler moves live in the unit cube: each coordinate is mapped through its
//! prior quantile function, so a uniform cube point is a prior draw and
//! Metropolis moves need no Jacobian bookkeeping.

use std::sync::LazyLock;

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::model::{BattingParams, MIN_TRANSITION_SCALE};
use crate::stats::{ParamSummary, SummaryRow};

static STANDARD_NORMAL: LazyLock<Normal> =
    LazyLock::new(|| Normal::new(0.0, 1.0).expect("standard normal"));

/// Cube coordinates are clamped into this open interval before applying
/// quantile functions, so transformed parameters stay finite and the
/// resulting [`BattingParams`] invariants hold by construction.
const CUBE_EPS: f64 = 1e-16;

/// Sampler coordinates: fraction of equilibrium ability on arrival (C),
/// equilibrium average (mu2), and transition scale as a fraction of the
/// equilibrium average (D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalParams {
    /// C = mu1 / mu2, in [0, 1].
    pub initial_fraction: f64,
    /// Equilibrium effective average, in runs (> 0).
    pub equilibrium_average: f64,
    /// D = L / mu2, in [0, 1].
    pub scale_fraction: f64,
}

impl InternalParams {
    pub fn new(initial_fraction: f64, equilibrium_average: f64, scale_fraction: f64) -> Self {
        InternalParams {
            initial_fraction,
            equilibrium_average,
            scale_fraction,
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.initial_fraction)
            && (0.0..=1.0).contains(&self.scale_fraction)
            && self.equilibrium_average > 0.0
            && self.equilibrium_average.is_finite()
    }
}

/// Map sampler coordinates to natural parameters. The transition scale is
/// floored at [`MIN_TRANSITION_SCALE`] so D = 0 stays evaluable; when mu2 is
/// itself below the floor (deep lognormal tails) the floor caps at mu2 to
/// keep L <= mu2.
pub fn to_natural(q: &InternalParams) -> BattingParams {
    let mu2 = q.equilibrium_average;
    let mu1 = q.initial_fraction * mu2;
    let scale = (q.scale_fraction * mu2).max(MIN_TRANSITION_SCALE.min(mu2));
    BattingParams::new(mu1, mu2, scale)
        .expect("internal coordinates always map to valid batting parameters")
}

/// Lognormal distribution parameterized by its median and the standard
/// deviation of the log (so the 68% interval is median * exp(+-log_sd)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalByMedian {
    median: f64,
    log_sd: f64,
}

impl LogNormalByMedian {
    pub fn new(median: f64, log_sd: f64) -> Self {
        assert!(median > 0.0 && log_sd > 0.0, "lognormal needs median > 0, log_sd > 0");
        LogNormalByMedian { median, log_sd }
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn log_sd(&self) -> f64 {
        self.log_sd
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if x <= 0.0 || !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        let z = (x.ln() - self.median.ln()) / self.log_sd;
        -x.ln() - self.log_sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
    }

    /// Quantile function; maps (0, 1) onto the support.
    pub fn quantile(&self, p: f64) -> f64 {
        self.median * (self.log_sd * STANDARD_NORMAL.inverse_cdf(p)).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        STANDARD_NORMAL.cdf((x.ln() - self.median.ln()) / self.log_sd)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>().clamp(CUBE_EPS, 1.0 - CUBE_EPS))
    }
}

/// Beta(1, b) distribution on [0, 1]; density b (1 - x)^(b-1), all closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaOneB {
    b: f64,
}

impl BetaOneB {
    pub fn new(b: f64) -> Self {
        assert!(b > 0.0);
        BetaOneB { b }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return f64::NEG_INFINITY;
        }
        self.b.ln() + (self.b - 1.0) * (1.0 - x).ln()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        1.0 - (1.0 - p.clamp(0.0, 1.0)).powf(1.0 / self.b)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

/// Prior on C (initial ability as a fraction of equilibrium ability).
pub fn initial_fraction_prior() -> BetaOneB {
    BetaOneB::new(2.0)
}

/// Prior on D (transition scale as a fraction of equilibrium ability).
pub fn scale_fraction_prior() -> BetaOneB {
    BetaOneB::new(5.0)
}

/// Prior on the equilibrium average mu2.
pub fn equilibrium_prior() -> LogNormalByMedian {
    LogNormalByMedian::new(25.0, 0.75)
}

/// Prior on the single effective average of the constant-hazard baseline.
pub fn constant_model_prior() -> LogNormalByMedian {
    LogNormalByMedian::new(20.0, 0.75)
}

/// Joint prior log-density in internal coordinates; `-inf` outside support.
pub fn prior_log_density(q: &InternalParams) -> f64 {
    initial_fraction_prior().log_density(q.initial_fraction)
        + equilibrium_prior().log_density(q.equilibrium_average)
        + scale_fraction_prior().log_density(q.scale_fraction)
}

/// Map a unit-cube point (the sampler's coordinates) to internal parameters
/// via the per-coordinate prior quantile functions.
pub fn cube_to_internal(cube: &[f64]) -> InternalParams {
    debug_assert_eq!(cube.len(), 3);
    let clamp = |u: f64| u.clamp(CUBE_EPS, 1.0 - CUBE_EPS);
    InternalParams {
        initial_fraction: initial_fraction_prior().quantile(cube[0]),
        equilibrium_average: equilibrium_prior().quantile(clamp(cube[1])),
        scale_fraction: scale_fraction_prior().quantile(cube[2]),
    }
}

/// One i.i.d. draw from the joint prior.
pub fn prior_sample<R: Rng + ?Sized>(rng: &mut R) -> InternalParams {
    let cube = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
    cube_to_internal(&cube)
}

/// Monte Carlo summary (median, 16/84 offsets) of the natural parameters
/// implied by the prior, using `n_draws` draws from `rng`.
pub fn natural_prior_summaries<R: Rng + ?Sized>(rng: &mut R, n_draws: usize) -> ParamSummary {
    assert!(n_draws > 0);
    let mut mu1 = Vec::with_capacity(n_draws);
    let mut mu2 = Vec::with_capacity(n_draws);
    let mut scale = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let p = to_natural(&prior_sample(rng));
        mu1.push(p.initial_average());
        mu2.push(p.equilibrium_average());
        scale.push(p.transition_scale());
    }
    ParamSummary {
        mu1: SummaryRow::from_samples(&mu1),
        mu2: SummaryRow::from_samples(&mu2),
        transition_scale: SummaryRow::from_samples(&scale),
    }
}
