//! Hierarchical pooling of per-player posteriors.
//!
//! The population of equilibrium averages is modelled as lognormal with
//! hyperparameters (nu, sigma) — the population median and log-scale spread —
//! under flat hyperpriors on [1, 100] x [0, 10]. Rather than re-running
//! inference jointly, each player's contribution to the hyperposterior is the
//! posterior expectation of the prior ratio f(mu2 | nu, sigma) / pi(mu2),
//! where pi is the fixed lognormal(median 25, 0.75) prior the individual runs
//! actually used. The hyperposterior is evaluated on a rectangular grid and
//! everything downstream (marginals, next-player predictions, credible
//! ellipses) reads off that grid.

use rand::Rng;
use thiserror::Error;

use crate::analysis::{PlayerPosterior, PosteriorSample};
use crate::priors::{
    equilibrium_prior, initial_fraction_prior, scale_fraction_prior, to_natural, InternalParams,
    LogNormalByMedian,
};
use crate::stats::{logsumexp, ParamSummary, SummaryRow};

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("hierarchical stage needs at least one player posterior")]
    NoPlayers,
    #[error("invalid hypergrid spec: {0}")]
    InvalidGridSpec(String),
    #[error("every grid cell has zero posterior mass; the player posteriors are inconsistent with the hyperprior range")]
    AllCellsImpossible,
    #[error("credible ellipse needs at least 3 points, found {0}")]
    TooFewPoints(usize),
    #[error("sample covariance is degenerate; points do not span the plane")]
    DegenerateCovariance,
    #[error("credible level {0} outside (0, 1)")]
    InvalidLevel(f64),
}

/// Lognormal log-density at a point given by its log, sharing one code path
/// between the population density f and the fixed prior pi so their ratio is
/// exactly zero when the parameters coincide.
fn lognormal_log_density_at_log(log_x: f64, log_median: f64, log_sd: f64) -> f64 {
    let z = (log_x - log_median) / log_sd;
    -log_x - log_sd.ln() - 0.5 * LN_2PI - 0.5 * z * z
}

/// Per-player cached quantities for reweighting: log(mu2) per sample and the
/// log-density of the fixed individual-stage prior at each sample.
struct ReweightCache {
    log_mu2: Vec<f64>,
    log_pi: Vec<f64>,
}

impl ReweightCache {
    fn new(post: &PlayerPosterior) -> Self {
        let pi = equilibrium_prior();
        let log_pi_median = pi.median().ln();
        let log_mu2: Vec<f64> = post
            .samples
            .iter()
            .map(|s| s.internal.equilibrium_average.ln())
            .collect();
        let log_pi = log_mu2
            .iter()
            .map(|&t| lognormal_log_density_at_log(t, log_pi_median, pi.log_sd()))
            .collect();
        ReweightCache { log_mu2, log_pi }
    }

    /// log of the posterior expectation of f(mu2 | nu, sigma) / pi(mu2).
    fn log_term(&self, log_nu: f64, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let n = self.log_mu2.len();
        let mut max = f64::NEG_INFINITY;
        for i in 0..n {
            let r = lognormal_log_density_at_log(self.log_mu2[i], log_nu, sigma) - self.log_pi[i];
            if r > max {
                max = r;
            }
        }
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let mut sum = 0.0;
        for i in 0..n {
            let r = lognormal_log_density_at_log(self.log_mu2[i], log_nu, sigma) - self.log_pi[i];
            sum += (r - max).exp();
        }
        max + sum.ln() - (n as f64).ln()
    }
}

/// Log of one player's reweighting term at hyperparameters (nu, sigma).
///
/// `sigma <= 0` gives a degenerate population density and returns `-inf`.
pub fn log_reweight_term(post: &PlayerPosterior, nu: f64, sigma: f64) -> f64 {
    ReweightCache::new(post).log_term(nu.ln(), sigma)
}

/// The reweighting expectation itself; exactly 1 at the individual-stage
/// prior (nu = 25, sigma = 0.75), where the ratio is identically one.
pub fn reweight_term(post: &PlayerPosterior, nu: f64, sigma: f64) -> f64 {
    log_reweight_term(post, nu, sigma).exp()
}

/// Rectangular evaluation grid over the hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HyperGridSpec {
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_cells: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_cells: usize,
}

impl Default for HyperGridSpec {
    /// 200 x 200 cells over nu in [1, 100] and sigma in [0.01, 10]; the
    /// sigma axis starts above zero where the density degenerates.
    fn default() -> Self {
        HyperGridSpec {
            nu_min: 1.0,
            nu_max: 100.0,
            nu_cells: 200,
            sigma_min: 0.01,
            sigma_max: 10.0,
            sigma_cells: 200,
        }
    }
}

impl HyperGridSpec {
    pub fn with_cells(nu_cells: usize, sigma_cells: usize) -> Self {
        HyperGridSpec { nu_cells, sigma_cells, ..HyperGridSpec::default() }
    }

    fn validate(&self) -> Result<(), HierarchyError> {
        let ordered = self.nu_min < self.nu_max && self.sigma_min < self.sigma_max;
        if !ordered {
            return Err(HierarchyError::InvalidGridSpec("ranges must be increasing".into()));
        }
        if self.nu_cells < 1 || self.sigma_cells < 1 {
            return Err(HierarchyError::InvalidGridSpec("need at least one cell per axis".into()));
        }
        if self.nu_min < 1.0 || self.nu_max > 100.0 {
            return Err(HierarchyError::InvalidGridSpec(
                "nu range outside the uniform(1, 100) hyperprior".into(),
            ));
        }
        if self.sigma_min <= 0.0 || self.sigma_max > 10.0 {
            return Err(HierarchyError::InvalidGridSpec(
                "sigma range outside (0, 10]".into(),
            ));
        }
        Ok(())
    }
}

/// Normalized hyperposterior mass over the (nu, sigma) grid.
#[derive(Debug, Clone)]
pub struct HyperGrid {
    /// Cell centers, strictly increasing.
    pub nu_axis: Vec<f64>,
    pub sigma_axis: Vec<f64>,
    /// Unnormalized log posterior per cell, row-major over (nu, sigma).
    pub log_mass: Vec<f64>,
    /// Normalized probability per cell; sums to 1.
    pub normalized_mass: Vec<f64>,
}

impl HyperGrid {
    pub fn cell(&self, nu_idx: usize, sigma_idx: usize) -> f64 {
        self.normalized_mass[nu_idx * self.sigma_axis.len() + sigma_idx]
    }

    pub fn marginal_nu(&self) -> Vec<f64> {
        let ns = self.sigma_axis.len();
        self.nu_axis
            .iter()
            .enumerate()
            .map(|(i, _)| self.normalized_mass[i * ns..(i + 1) * ns].iter().sum())
            .collect()
    }

    pub fn marginal_sigma(&self) -> Vec<f64> {
        let ns = self.sigma_axis.len();
        (0..ns)
            .map(|j| (0..self.nu_axis.len()).map(|i| self.normalized_mass[i * ns + j]).sum())
            .collect()
    }

    pub fn nu_summary(&self) -> SummaryRow {
        grid_summary(&self.nu_axis, &self.marginal_nu())
    }

    pub fn sigma_summary(&self) -> SummaryRow {
        grid_summary(&self.sigma_axis, &self.marginal_sigma())
    }
}

/// Quantile of a discrete marginal, interpolated uniformly within cells.
fn grid_quantile(axis: &[f64], probs: &[f64], q: f64) -> f64 {
    let step = if axis.len() > 1 { axis[1] - axis[0] } else { 0.0 };
    let mut cum = 0.0;
    for (x, &p) in axis.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        if cum + p >= q {
            let frac = ((q - cum) / p).clamp(0.0, 1.0);
            return x - step / 2.0 + frac * step;
        }
        cum += p;
    }
    *axis.last().expect("non-empty axis") + step / 2.0
}

fn grid_summary(axis: &[f64], probs: &[f64]) -> SummaryRow {
    let median = grid_quantile(axis, probs, 0.5);
    let lo68 = grid_quantile(axis, probs, 0.16);
    let hi68 = grid_quantile(axis, probs, 0.84);
    SummaryRow { median, plus_err: hi68 - median, minus_err: median - lo68, lo68, hi68 }
}

/// Evaluate the hyperposterior over the grid: per cell, the sum over players
/// of the log reweighting term (the flat hyperprior is a constant), then
/// normalized across cells. Cells whose product underflows stay at `-inf`
/// and receive zero mass.
pub fn hyper_posterior(
    players: &[PlayerPosterior],
    spec: &HyperGridSpec,
) -> Result<HyperGrid, HierarchyError> {
    if players.is_empty() {
        return Err(HierarchyError::NoPlayers);
    }
    spec.validate()?;
    let nu_step = (spec.nu_max - spec.nu_min) / spec.nu_cells as f64;
    let sigma_step = (spec.sigma_max - spec.sigma_min) / spec.sigma_cells as f64;
    let nu_axis: Vec<f64> =
        (0..spec.nu_cells).map(|i| spec.nu_min + (i as f64 + 0.5) * nu_step).collect();
    let sigma_axis: Vec<f64> =
        (0..spec.sigma_cells).map(|j| spec.sigma_min + (j as f64 + 0.5) * sigma_step).collect();

    let caches: Vec<ReweightCache> = players.iter().map(ReweightCache::new).collect();

    // Rows are independent; split them across the available cores.
    let n_threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let chunk = spec.nu_cells.div_ceil(n_threads);
    let mut log_mass = vec![f64::NEG_INFINITY; spec.nu_cells * spec.sigma_cells];
    std::thread::scope(|scope| {
        let caches = &caches;
        let nu_axis = &nu_axis;
        let sigma_axis = &sigma_axis;
        for (row_block, mass_block) in
            nu_axis.chunks(chunk).zip(log_mass.chunks_mut(chunk * spec.sigma_cells))
        {
            scope.spawn(move || {
                for (r, &nu) in row_block.iter().enumerate() {
                    let log_nu = nu.ln();
                    for (j, &sigma) in sigma_axis.iter().enumerate() {
                        let total: f64 =
                            caches.iter().map(|c| c.log_term(log_nu, sigma)).sum();
                        mass_block[r * sigma_axis.len() + j] = total;
                    }
                }
            });
        }
    });

    let log_norm = logsumexp(&log_mass);
    if log_norm == f64::NEG_INFINITY {
        return Err(HierarchyError::AllCellsImpossible);
    }
    let raw: Vec<f64> = log_mass.iter().map(|&lm| (lm - log_norm).exp()).collect();
    let total: f64 = raw.iter().sum();
    let normalized_mass: Vec<f64> = raw.iter().map(|&p| p / total).collect();

    Ok(HyperGrid { nu_axis, sigma_axis, log_mass, normalized_mass })
}

/// Predictive draws for an unseen player from the hyperposterior.
#[derive(Debug, Clone)]
pub struct NextPlayerPrediction {
    pub samples: Vec<PosteriorSample>,
    pub summary: ParamSummary,
}

/// Sample the next-player predictive: draw a grid cell by mass, then
/// mu2 ~ lognormal(nu_cell, sigma_cell) with the usual C and D priors, mapped
/// to natural parameters.
pub fn predict_next_player<R: Rng + ?Sized>(
    grid: &HyperGrid,
    n_draws: usize,
    rng: &mut R,
) -> NextPlayerPrediction {
    assert!(n_draws > 0, "need at least one draw");
    let mut cumulative = Vec::with_capacity(grid.normalized_mass.len());
    let mut acc = 0.0;
    for &p in &grid.normalized_mass {
        acc += p;
        cumulative.push(acc);
    }
    let n_sigma = grid.sigma_axis.len();
    let c_prior = initial_fraction_prior();
    let d_prior = scale_fraction_prior();

    let mut samples = Vec::with_capacity(n_draws);
    let mut mu1 = Vec::with_capacity(n_draws);
    let mut mu2 = Vec::with_capacity(n_draws);
    let mut scale = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let u: f64 = rng.random();
        let cell = cumulative.partition_point(|&c| c < u).min(cumulative.len() - 1);
        let nu = grid.nu_axis[cell / n_sigma];
        let sigma = grid.sigma_axis[cell % n_sigma];
        let eq = LogNormalByMedian::new(nu, sigma).sample(rng);
        let q = InternalParams::new(c_prior.sample(rng), eq, d_prior.sample(rng));
        let p = to_natural(&q);
        mu1.push(p.initial_average());
        mu2.push(p.equilibrium_average());
        scale.push(p.transition_scale());
        samples.push(PosteriorSample { internal: q, params: p });
    }
    NextPlayerPrediction {
        samples,
        summary: ParamSummary {
            mu1: SummaryRow::from_samples(&mu1),
            mu2: SummaryRow::from_samples(&mu2),
            transition_scale: SummaryRow::from_samples(&scale),
        },
    }
}

/// Gaussian-approximation credible ellipse in a plane.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Ellipse {
    pub center: (f64, f64),
    /// Semi-axis lengths, major first.
    pub semi_axes: (f64, f64),
    /// Rotation of the major axis from the first coordinate, radians in
    /// (-pi/2, pi/2].
    pub rotation: f64,
    pub level: f64,
}

/// Fit a credible ellipse at `level` from the sample mean and covariance,
/// scaled by the chi-square(2 dof) quantile -2 ln(1 - level).
pub fn credible_ellipse(points: &[(f64, f64)], level: f64) -> Result<Ellipse, HierarchyError> {
    if !(0.0..1.0).contains(&level) || level == 0.0 {
        return Err(HierarchyError::InvalidLevel(level));
    }
    if points.len() < 3 {
        return Err(HierarchyError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    sxx /= n - 1.0;
    sxy /= n - 1.0;
    syy /= n - 1.0;

    // Eigenvalues of the 2x2 covariance.
    let half_trace = 0.5 * (sxx + syy);
    let det_root = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let lambda_major = half_trace + det_root;
    let lambda_minor = half_trace - det_root;
    let scale_floor = 1e-12 * half_trace.max(f64::MIN_POSITIVE);
    if !lambda_minor.is_finite() || lambda_minor <= scale_floor {
        return Err(HierarchyError::DegenerateCovariance);
    }

    let chi2_quantile = -2.0 * (1.0 - level).ln();
    let rotation = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Ok(Ellipse {
        center: (mean_x, mean_y),
        semi_axes: (
            (lambda_major * chi2_quantile).sqrt(),
            (lambda_minor * chi2_quantile).sqrt(),
        ),
        rotation,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::PosteriorSample;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn posterior_from_mu2(values: &[f64]) -> PlayerPosterior {
        let samples: Vec<PosteriorSample> = values
            .iter()
            .map(|&m| {
                let internal = InternalParams::new(0.3, m, 0.1);
                PosteriorSample { internal, params: to_natural(&internal) }
            })
            .collect();
        PlayerPosterior::from_samples("test", samples).unwrap()
    }

    fn random_posterior(seed: u64, n: usize) -> PlayerPosterior {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let values: Vec<f64> =
            (0..n).map(|_| 20.0 * (1.0 + rng.random::<f64>())).collect();
        posterior_from_mu2(&values)
    }

    #[test]
    fn reweight_identity_at_individual_prior() {
        for seed in 0..5 {
            let post = random_posterior(seed, 500);
            assert_eq!(reweight_term(&post, 25.0, 0.75), 1.0);
        }
    }

    #[test]
    fn reweight_single_sample_is_direct_ratio() {
        let post = posterior_from_mu2(&[31.0]);
        let f = LogNormalByMedian::new(40.0, 0.5);
        let pi = equilibrium_prior();
        let expected = (f.log_density(31.0) - pi.log_density(31.0)).exp();
        assert_relative_eq!(reweight_term(&post, 40.0, 0.5), expected, max_relative = 1e-12);
    }

    #[test]
    fn reweight_matches_naive_sum_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let post = random_posterior(99, 100);
        for _ in 0..20 {
            let nu = 1.0 + 99.0 * rng.random::<f64>();
            let sigma = 0.05 + 5.0 * rng.random::<f64>();
            let f = LogNormalByMedian::new(nu, sigma);
            let pi = equilibrium_prior();
            let naive: f64 = post
                .samples
                .iter()
                .map(|s| {
                    let m = s.internal.equilibrium_average;
                    (f.log_density(m) - pi.log_density(m)).exp()
                })
                .sum::<f64>()
                / post.samples.len() as f64;
            assert_relative_eq!(reweight_term(&post, nu, sigma), naive, max_relative = 1e-10);
        }
    }

    #[test]
    fn reweight_sigma_zero_is_impossible() {
        let post = posterior_from_mu2(&[20.0, 30.0]);
        assert_eq!(log_reweight_term(&post, 25.0, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn grid_normalizes_and_prior_player_is_flat_at_identity() {
        let players = vec![random_posterior(1, 300), random_posterior(2, 300)];
        let grid = hyper_posterior(&players, &HyperGridSpec::with_cells(40, 40)).unwrap();
        let total: f64 = grid.normalized_mass.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(grid.nu_axis.windows(2).all(|w| w[1] > w[0]));
        assert!(grid.sigma_axis.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn concentrated_player_pins_nu_marginal() {
        // All of a player's mu2 samples near m: the nu marginal must peak
        // within one cell of m.
        let m = 37.0;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let values: Vec<f64> =
            (0..400).map(|_| m * (1.0 + 0.002 * (rng.random::<f64>() - 0.5))).collect();
        let post = posterior_from_mu2(&values);
        let grid = hyper_posterior(&[post], &HyperGridSpec::with_cells(100, 60)).unwrap();
        let marginal = grid.marginal_nu();
        let mode = marginal
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let cell_width = grid.nu_axis[1] - grid.nu_axis[0];
        assert!(
            (grid.nu_axis[mode] - m).abs() <= cell_width,
            "mode at {} for true {m}",
            grid.nu_axis[mode]
        );
    }

    #[test]
    fn empty_players_rejected() {
        assert!(matches!(
            hyper_posterior(&[], &HyperGridSpec::default()),
            Err(HierarchyError::NoPlayers)
        ));
    }

    #[test]
    fn bad_grid_specs_rejected() {
        let players = vec![random_posterior(3, 50)];
        let bad = HyperGridSpec { nu_min: 50.0, nu_max: 10.0, ..HyperGridSpec::default() };
        assert!(hyper_posterior(&players, &bad).is_err());
        let bad = HyperGridSpec { sigma_min: 0.0, ..HyperGridSpec::default() };
        assert!(hyper_posterior(&players, &bad).is_err());
        let bad = HyperGridSpec { nu_max: 150.0, ..HyperGridSpec::default() };
        assert!(hyper_posterior(&players, &bad).is_err());
    }

    #[test]
    fn predictive_degenerate_grid_recovers_cell_median() {
        // Mass concentrated on a single cell with tiny sigma: the mu2 median
        // converges to that cell's nu.
        let mut grid = HyperGrid {
            nu_axis: (0..50).map(|i| 1.0 + (i as f64 + 0.5) * 2.0).collect(),
            sigma_axis: (0..50).map(|j| 0.01 + (j as f64 + 0.5) * 0.2).collect(),
            log_mass: vec![f64::NEG_INFINITY; 2500],
            normalized_mass: vec![0.0; 2500],
        };
        let nu_idx = 20; // nu = 42.0
        grid.log_mass[nu_idx * 50] = 0.0;
        grid.normalized_mass[nu_idx * 50] = 1.0;
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let pred = predict_next_player(&grid, 40_000, &mut rng);
        let nu0 = grid.nu_axis[nu_idx];
        assert!(
            (pred.summary.mu2.median - nu0).abs() < 0.05 * nu0,
            "median {} vs {}",
            pred.summary.mu2.median,
            nu0
        );
    }

    #[test]
    fn predictive_matches_independent_oracle() {
        // Independent re-implementation with its own RNG stream: inverse-CDF
        // sampling of the cell index and direct transforms.
        let players = vec![random_posterior(4, 400), random_posterior(6, 400)];
        let grid = hyper_posterior(&players, &HyperGridSpec::with_cells(50, 50)).unwrap();

        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let pred = predict_next_player(&grid, 100_000, &mut rng);

        let mut oracle_rng = ChaCha12Rng::seed_from_u64(2026);
        let n = 100_000;
        let mut mu2 = Vec::with_capacity(n);
        let mut mu1 = Vec::with_capacity(n);
        let mut scale = Vec::with_capacity(n);
        let std_normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
        use statrs::distribution::ContinuousCDF;
        for _ in 0..n {
            let target: f64 = oracle_rng.random();
            let mut acc = 0.0;
            let mut cell = grid.normalized_mass.len() - 1;
            for (k, &p) in grid.normalized_mass.iter().enumerate() {
                acc += p;
                if acc >= target {
                    cell = k;
                    break;
                }
            }
            let nu = grid.nu_axis[cell / grid.sigma_axis.len()];
            let sigma = grid.sigma_axis[cell % grid.sigma_axis.len()];
            let m = nu * (sigma * std_normal.inverse_cdf(oracle_rng.random())).exp();
            let c = 1.0 - (1.0 - oracle_rng.random::<f64>()).sqrt();
            let d = 1.0 - (1.0 - oracle_rng.random::<f64>()).powf(0.2);
            mu2.push(m);
            mu1.push(c * m);
            scale.push((d * m).max(crate::model::MIN_TRANSITION_SCALE));
        }
        let oracle_mu1 = crate::stats::percentile(&mu1, 0.5);
        let oracle_mu2 = crate::stats::percentile(&mu2, 0.5);
        let oracle_scale = crate::stats::percentile(&scale, 0.5);
        assert!((pred.summary.mu1.median - oracle_mu1).abs() / oracle_mu1 < 0.02);
        assert!((pred.summary.mu2.median - oracle_mu2).abs() / oracle_mu2 < 0.02);
        assert!((pred.summary.transition_scale.median - oracle_scale).abs() / oracle_scale < 0.02);
    }

    #[test]
    fn predictive_medians_converge_in_draw_count() {
        let players = vec![random_posterior(14, 300), random_posterior(15, 300)];
        let grid = hyper_posterior(&players, &HyperGridSpec::with_cells(40, 40)).unwrap();
        let mut rng_a = ChaCha12Rng::seed_from_u64(30);
        let mut rng_b = ChaCha12Rng::seed_from_u64(31);
        let small = predict_next_player(&grid, 100_000, &mut rng_a);
        let large = predict_next_player(&grid, 200_000, &mut rng_b);
        for (a, b) in [
            (small.summary.mu1, large.summary.mu1),
            (small.summary.mu2, large.summary.mu2),
            (small.summary.transition_scale, large.summary.transition_scale),
        ] {
            let rel = (a.median - b.median).abs() / b.median;
            assert!(rel < 0.01, "median moved by {rel:.4} when doubling draws");
        }
    }

    #[test]
    fn ellipse_isotropic_radius_is_chi2_quantile() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let std_normal = statrs::distribution::Normal::new(0.0, 1.0).unwrap();
        use statrs::distribution::ContinuousCDF;
        let points: Vec<(f64, f64)> = (0..200_000)
            .map(|_| {
                (
                    std_normal.inverse_cdf(rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12)),
                    std_normal.inverse_cdf(rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12)),
                )
            })
            .collect();
        let e = credible_ellipse(&points, 0.68).unwrap();
        // radius^2 = chi2_2 quantile at 0.68 = -2 ln(0.32) = 2.27887.
        let expected = 2.27886856637673f64.sqrt();
        assert!((e.semi_axes.0 - expected).abs() < 0.02, "major {}", e.semi_axes.0);
        assert!((e.semi_axes.1 - expected).abs() < 0.02, "minor {}", e.semi_axes.1);
    }

    #[test]
    fn ellipse_rejects_degenerate_input() {
        let same = vec![(2.0, 3.0); 10];
        assert!(matches!(
            credible_ellipse(&same, 0.68),
            Err(HierarchyError::DegenerateCovariance)
        ));
        assert!(matches!(
            credible_ellipse(&[(0.0, 0.0), (1.0, 1.0)], 0.68),
            Err(HierarchyError::TooFewPoints(2))
        ));
        assert!(credible_ellipse(&[(0.0, 0.0), (1.0, 0.5), (0.2, 0.8)], 1.0).is_err());
    }

    #[test]
    fn ellipse_rotates_with_the_points() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let points: Vec<(f64, f64)> = (0..5000)
            .map(|_| {
                let x = 3.0 * (rng.random::<f64>() - 0.5);
                let y = 0.5 * (rng.random::<f64>() - 0.5);
                (x, y)
            })
            .collect();
        let theta = 0.7f64;
        let rotated: Vec<(f64, f64)> = points
            .iter()
            .map(|&(x, y)| (x * theta.cos() - y * theta.sin(), x * theta.sin() + y * theta.cos()))
            .collect();
        let e0 = credible_ellipse(&points, 0.95).unwrap();
        let e1 = credible_ellipse(&rotated, 0.95).unwrap();
        assert!((e0.semi_axes.0 - e1.semi_axes.0).abs() < 1e-9);
        assert!((e0.semi_axes.1 - e1.semi_axes.1).abs() < 1e-9);
        let mut diff = (e1.rotation - e0.rotation - theta) % std::f64::consts::PI;
        if diff > std::f64::consts::FRAC_PI_2 {
            diff -= std::f64::consts::PI;
        }
        if diff < -std::f64::consts::FRAC_PI_2 {
            diff += std::f64::consts::PI;
        }
        assert!(diff.abs() < 1e-9, "rotation off by {diff}");
    }
}
