//! Nested sampling over a unit-cube prior with constrained random-walk
//! Metropolis updates.
//!
//! Problems expose a log-likelihood over cube coordinates in [0, 1]^d; prior
//! structure is folded into the coordinate transform (see
//! [`crate::priors::cube_to_internal`]), so the prior is uniform here and the
//! only Metropolis acceptance rule is the likelihood constraint L > L*.
//!
//! Each iteration discards the worst live particle at threshold L*, assigns
//! it the deterministic prior-mass shrinkage X_i = exp(-i / n), and replaces
//! it with a clone of a random survivor evolved by `mcmc_steps` constrained
//! moves. The evidence accumulates as Z = sum_i w_i L_i with
//! w_i = X_{i-1} - X_i, plus the live-point remainder at termination. The
//! reported uncertainty is the standard information-based estimate
//! sqrt(H / n).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::stats::logsumexp2;

/// A sampling problem over the unit cube.
pub trait Problem: Sync {
    fn dim(&self) -> usize;

    /// Log-likelihood at a cube point. `-inf` marks zero likelihood; NaN or
    /// `+inf` are treated as errors at initialization.
    fn log_likelihood(&self, cube: &[f64]) -> f64;
}

#[derive(Debug, Error)]
pub enum NsError {
    #[error("invalid nested sampling configuration: {0}")]
    InvalidConfig(String),
    #[error("log-likelihood returned {value} at prior draw {cube:?}")]
    NonFiniteLogLikelihood { value: f64, cube: Vec<f64> },
    #[error("no particle with finite log-likelihood after initialization")]
    NoFiniteLikelihood,
}

/// Nested sampling run configuration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NsConfig {
    pub n_particles: usize,
    /// Constrained MH steps applied to each replacement particle.
    pub mcmc_steps: usize,
    /// Stop once max-L * X_i < termination_log_tol * Z (stored as a ratio).
    pub termination_log_tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl NsConfig {
    /// Config with the standard termination rule (ratio 1e-6, at most
    /// 100 * n_particles iterations).
    pub fn new(n_particles: usize, mcmc_steps: usize, seed: u64) -> Self {
        NsConfig {
            n_particles,
            mcmc_steps,
            termination_log_tol: 1e-6,
            max_iterations: 100 * n_particles,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), NsError> {
        if self.n_particles < 2 {
            return Err(NsError::InvalidConfig("need at least 2 particles".into()));
        }
        if self.mcmc_steps < 1 {
            return Err(NsError::InvalidConfig("need at least 1 MCMC step".into()));
        }
        let tol_ok = self.termination_log_tol > 0.0; // also rejects NaN
        if !tol_ok {
            return Err(NsError::InvalidConfig("termination tolerance must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for NsConfig {
    /// The production default: 1000 particles, 1000 MCMC steps.
    fn default() -> Self {
        NsConfig::new(1000, 1000, 0)
    }
}

/// A live point: cube coordinates plus cached log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct NsPoint {
    pub cube: Vec<f64>,
    pub log_likelihood: f64,
}

/// One stored sample: where it was discarded and with how much prior mass.
#[derive(Debug, Clone, PartialEq)]
pub struct NsSample {
    pub cube: Vec<f64>,
    pub log_likelihood: f64,
    /// log(X_{i-1} - X_i) for discarded particles; log(X_final / n) for the
    /// live particles flushed at termination.
    pub log_prior_mass: f64,
}

/// Result of a nested sampling run.
#[derive(Debug, Clone)]
pub struct NsRun {
    pub samples: Vec<NsSample>,
    pub log_evidence: f64,
    pub log_evidence_err: f64,
    /// Information H = E_posterior[log L] - log Z, in nats.
    pub information: f64,
    pub iterations: usize,
    /// Per-iteration MH acceptance fractions.
    pub acceptance: Vec<f64>,
}

/// Normalized posterior weights of a run's samples.
#[derive(Debug, Clone)]
pub struct PosteriorWeights {
    pub weights: Vec<f64>,
    /// Effective sample size 1 / sum(w^2).
    pub ess: f64,
}

/// Run nested sampling; fully deterministic given `config.seed`.
pub fn run<P: Problem>(problem: &P, config: &NsConfig) -> Result<NsRun, NsError> {
    config.validate()?;
    let dim = problem.dim();
    let n = config.n_particles;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut live: Vec<NsPoint> = Vec::with_capacity(n);
    for _ in 0..n {
        let cube: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let ll = problem.log_likelihood(&cube);
        if ll.is_nan() || ll == f64::INFINITY {
            return Err(NsError::NonFiniteLogLikelihood { value: ll, cube });
        }
        live.push(NsPoint { cube, log_likelihood: ll });
    }
    if live.iter().all(|p| p.log_likelihood == f64::NEG_INFINITY) {
        return Err(NsError::NoFiniteLikelihood);
    }

    let nf = n as f64;
    // X_{i-1} - X_i = exp(-(i-1)/n) * (1 - exp(-1/n)), precomputed in log.
    let log_shrink_gap = (-(-1.0 / nf).exp()).ln_1p();

    let mut samples: Vec<NsSample> = Vec::new();
    let mut acceptance: Vec<f64> = Vec::new();
    let mut log_z = f64::NEG_INFINITY;
    let mut iterations = 0usize;

    while iterations < config.max_iterations {
        let i = iterations + 1;

        // Discard the worst particle at threshold L*.
        let worst = live
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.log_likelihood
                    .partial_cmp(&b.log_likelihood)
                    .expect("NaN log-likelihood in live set")
            })
            .map(|(idx, _)| idx)
            .expect("non-empty live set");
        let threshold = live[worst].log_likelihood;
        let log_weight = -((i - 1) as f64) / nf + log_shrink_gap;
        samples.push(NsSample {
            cube: live[worst].cube.clone(),
            log_likelihood: threshold,
            log_prior_mass: log_weight,
        });
        log_z = logsumexp2(log_z, log_weight + threshold);

        // Clone a survivor and evolve it. Prefer survivors strictly above
        // the threshold; fall back to ties when every survivor sits exactly
        // at it (constant likelihoods, clone collapse late in a run).
        let mut eligible: Vec<usize> = (0..live.len())
            .filter(|&j| j != worst && live[j].log_likelihood > threshold)
            .collect();
        if eligible.is_empty() {
            eligible = (0..live.len()).filter(|&j| j != worst).collect();
            if threshold == f64::NEG_INFINITY {
                // Nothing above zero likelihood is left to clone from.
                return Err(NsError::NoFiniteLikelihood);
            }
        }
        let source = eligible[rng.random_range(0..eligible.len())];
        let mut point = live[source].clone();
        let mut accepted = 0usize;
        for _ in 0..config.mcmc_steps {
            let (next, moved) = constrained_mh_step(problem, &point, threshold, &mut rng);
            point = next;
            accepted += moved as usize;
        }
        acceptance.push(accepted as f64 / config.mcmc_steps as f64);
        live[worst] = point;
        iterations = i;

        // Remaining contribution bounded by max-L * X_i.
        let log_x = -(i as f64) / nf;
        let log_l_max = live
            .iter()
            .map(|p| p.log_likelihood)
            .fold(f64::NEG_INFINITY, f64::max);
        if log_l_max + log_x < config.termination_log_tol.ln() + log_z {
            break;
        }
    }

    // Flush the live set: each particle carries X_final / n of prior mass.
    let log_x_final = -(iterations as f64) / nf;
    let mut order: Vec<usize> = (0..live.len()).collect();
    order.sort_by(|&a, &b| {
        live[a]
            .log_likelihood
            .partial_cmp(&live[b].log_likelihood)
            .expect("NaN log-likelihood in live set")
    });
    for idx in order {
        let p = &live[idx];
        let log_weight = log_x_final - nf.ln();
        samples.push(NsSample {
            cube: p.cube.clone(),
            log_likelihood: p.log_likelihood,
            log_prior_mass: log_weight,
        });
        log_z = logsumexp2(log_z, log_weight + p.log_likelihood);
    }

    // Information H = sum_i p_i log L_i - log Z over posterior weights p_i.
    let mut information = 0.0;
    for s in &samples {
        if s.log_likelihood > f64::NEG_INFINITY {
            let p = (s.log_prior_mass + s.log_likelihood - log_z).exp();
            if p > 0.0 {
                information += p * (s.log_likelihood - log_z);
            }
        }
    }
    let information = information.max(0.0);

    Ok(NsRun {
        samples,
        log_evidence: log_z,
        log_evidence_err: (information / nf).sqrt(),
        information,
        iterations,
        acceptance,
    })
}

/// One constrained Metropolis step: symmetric heavy-tailed random walk in the
/// cube (reflected at the boundaries), accepted only if the proposal's
/// log-likelihood exceeds `threshold`. Returns the new point and whether the
/// proposal was accepted.
pub fn constrained_mh_step<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    point: &NsPoint,
    threshold: f64,
    rng: &mut R,
) -> (NsPoint, bool) {
    // Per-coordinate scale 0.5 * 10^(-2u): a log-uniform mixture from 0.005
    // to 0.5 that needs no tuning across problems.
    let scales: Vec<f64> = (0..point.cube.len())
        .map(|_| 0.5 * 10f64.powf(-2.0 * rng.random::<f64>()))
        .collect();
    constrained_mh_step_with_scales(problem, point, threshold, &scales, rng)
}

/// [`constrained_mh_step`] with explicit per-coordinate proposal scales.
pub fn constrained_mh_step_with_scales<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    point: &NsPoint,
    threshold: f64,
    scales: &[f64],
    rng: &mut R,
) -> (NsPoint, bool) {
    let proposal: Vec<f64> = point
        .cube
        .iter()
        .zip(scales)
        .map(|(&x, &s)| {
            let z: f64 = rng.sample(StandardNormal);
            reflect_into_unit(x + s * z)
        })
        .collect();
    let ll = problem.log_likelihood(&proposal);
    if ll > threshold {
        (NsPoint { cube: proposal, log_likelihood: ll }, true)
    } else {
        (point.clone(), false)
    }
}

/// Fold a coordinate back into [0, 1] by reflection at both boundaries.
fn reflect_into_unit(x: f64) -> f64 {
    let t = x.rem_euclid(2.0);
    if t > 1.0 {
        2.0 - t
    } else {
        t
    }
}

/// Normalized posterior weights w_i proportional to exp(log w_i + log L_i).
pub fn posterior_weights(run: &NsRun) -> PosteriorWeights {
    let raw: Vec<f64> = run
        .samples
        .iter()
        .map(|s| {
            if s.log_likelihood == f64::NEG_INFINITY {
                0.0
            } else {
                (s.log_prior_mass + s.log_likelihood - run.log_evidence).exp()
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    PosteriorWeights { weights, ess }
}

/// Systematic resampling to `n` equally weighted cube points.
pub fn resample_equal<R: Rng + ?Sized>(run: &NsRun, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    if n == 0 {
        return Vec::new();
    }
    let weights = posterior_weights(run).weights;
    let offset: f64 = rng.random();
    let mut out = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut idx = 0usize;
    for k in 0..n {
        let target = (k as f64 + offset) / n as f64;
        while cumulative < target && idx + 1 < weights.len() {
            idx += 1;
            cumulative += weights[idx];
        }
        out.push(run.samples[idx].cube.clone());
    }
    out
}
