//! Per-player inference: posterior samples and evidence via nested sampling,
//! summary rows, predictive effective-average curves, pairwise player
//! comparisons, and the Bayes factor against the constant-hazard baseline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::model::{BattingParams, InningsData, InningsRecord, ModelError};
use crate::nested::{self, NsConfig, NsError, Problem};
use crate::priors::{constant_model_prior, cube_to_internal, to_natural, InternalParams};
use crate::stats::{derive_seed, percentile_sorted, ParamSummary, SummaryRow};

/// Number of equal-weight posterior samples kept per player.
pub const EQUAL_WEIGHT_SAMPLES: usize = 2000;

/// Up to this many samples per side, pairwise comparisons enumerate all
/// pairs; beyond it they use a fixed number of seeded random pairs.
pub const ALL_PAIRS_LIMIT: usize = 2000;

/// Random pair count for large-sample comparisons.
pub const COMPARISON_PAIRS: usize = 1_000_000;

/// Per-sample survival values below this are dropped from the predictive
/// hazard ratio to avoid 0/0 underflow at large scores.
const SURVIVAL_FLOOR: f64 = 1e-300;

const RESAMPLE_SALT: u64 = 1;
const CONSTANT_MODEL_SALT: u64 = 2;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] NsError),
    #[error("posterior needs at least {needed} samples, found {found}")]
    TooFewSamples { found: usize, needed: usize },
    #[error("posterior must contain at least one sample")]
    EmptySamples,
}

/// Which natural parameter a comparison or summary refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSelector {
    InitialAverage,
    EquilibriumAverage,
    TransitionScale,
}

impl ParamSelector {
    pub fn extract(&self, p: &BattingParams) -> f64 {
        match self {
            ParamSelector::InitialAverage => p.initial_average(),
            ParamSelector::EquilibriumAverage => p.equilibrium_average(),
            ParamSelector::TransitionScale => p.transition_scale(),
        }
    }

    /// External name, as used in file headers and CLI flags.
    pub fn as_str(&self) -> &'static str {
        match self {
            ParamSelector::InitialAverage => "mu1",
            ParamSelector::EquilibriumAverage => "mu2",
            ParamSelector::TransitionScale => "L",
        }
    }
}

impl std::str::FromStr for ParamSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mu1" => Ok(ParamSelector::InitialAverage),
            "mu2" => Ok(ParamSelector::EquilibriumAverage),
            "L" | "l" => Ok(ParamSelector::TransitionScale),
            other => Err(format!("unknown parameter '{other}' (expected mu1, mu2 or L)")),
        }
    }
}

/// One equally weighted posterior draw, kept in both coordinate systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSample {
    pub internal: InternalParams,
    pub params: BattingParams,
}

/// Log-evidence with its information-based uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Evidence {
    pub log_z: f64,
    pub log_z_err: f64,
}

/// Innings counts of the data a posterior was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DataFingerprint {
    pub innings: usize,
    pub not_outs: usize,
}

/// Equal-weight posterior for one player.
///
/// Evidence, sampler config and data fingerprint are present when the
/// posterior came out of [`analyze_player`]; posteriors reloaded from sample
/// CSVs carry only the samples.
#[derive(Debug, Clone)]
pub struct PlayerPosterior {
    pub player_id: String,
    pub samples: Vec<PosteriorSample>,
    pub evidence: Option<Evidence>,
    pub ns_config: Option<NsConfig>,
    pub fingerprint: Option<DataFingerprint>,
}

impl PlayerPosterior {
    /// Wrap externally stored equal-weight samples (e.g. loaded from CSV).
    pub fn from_samples(
        player_id: impl Into<String>,
        samples: Vec<PosteriorSample>,
    ) -> Result<Self, AnalysisError> {
        if samples.is_empty() {
            return Err(AnalysisError::EmptySamples);
        }
        Ok(PlayerPosterior {
            player_id: player_id.into(),
            samples,
            evidence: None,
            ns_config: None,
            fingerprint: None,
        })
    }

    pub fn values(&self, selector: ParamSelector) -> Vec<f64> {
        self.samples.iter().map(|s| selector.extract(&s.params)).collect()
    }

    pub fn equilibrium_values(&self) -> Vec<f64> {
        self.values(ParamSelector::EquilibriumAverage)
    }
}

/// The three-parameter varying-hazard model over the unit cube.
pub struct BattingProblem {
    data: InningsData,
}

impl BattingProblem {
    pub fn new(records: &[InningsRecord]) -> Result<Self, ModelError> {
        Ok(BattingProblem { data: InningsData::new(records)? })
    }
}

impl Problem for BattingProblem {
    fn dim(&self) -> usize {
        3
    }

    fn log_likelihood(&self, cube: &[f64]) -> f64 {
        let params = to_natural(&cube_to_internal(cube));
        self.data.log_likelihood(&params)
    }
}

/// The one-parameter constant-hazard baseline over the unit cube.
pub struct ConstantHazardProblem {
    data: InningsData,
}

impl ConstantHazardProblem {
    pub fn new(records: &[InningsRecord]) -> Result<Self, ModelError> {
        Ok(ConstantHazardProblem { data: InningsData::new(records)? })
    }

    /// Effective average for a cube coordinate, through the baseline prior.
    pub fn average_from_cube(u: f64) -> f64 {
        constant_model_prior().quantile(u.clamp(1e-16, 1.0 - 1e-16))
    }
}

impl Problem for ConstantHazardProblem {
    fn dim(&self) -> usize {
        1
    }

    fn log_likelihood(&self, cube: &[f64]) -> f64 {
        let avg = Self::average_from_cube(cube[0]);
        let params = BattingParams::constant(avg).expect("positive constant average");
        self.data.log_likelihood(&params)
    }
}

/// Run nested sampling for one player and resample to equal weights.
pub fn analyze_player(
    player_id: &str,
    records: &[InningsRecord],
    config: &NsConfig,
) -> Result<PlayerPosterior, AnalysisError> {
    let data = InningsData::new(records)?;
    let fingerprint = DataFingerprint { innings: data.innings(), not_outs: data.not_outs() };
    let problem = BattingProblem { data };
    let run = nested::run(&problem, config)?;
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(config.seed, RESAMPLE_SALT));
    let samples: Vec<PosteriorSample> =
        nested::resample_equal(&run, EQUAL_WEIGHT_SAMPLES, &mut rng)
            .into_iter()
            .map(|cube| {
                let internal = cube_to_internal(&cube);
                PosteriorSample { internal, params: to_natural(&internal) }
            })
            .collect();
    Ok(PlayerPosterior {
        player_id: player_id.to_string(),
        samples,
        evidence: Some(Evidence { log_z: run.log_evidence, log_z_err: run.log_evidence_err }),
        ns_config: Some(*config),
        fingerprint: Some(fingerprint),
    })
}

/// Median and 16/84 percentile offsets per natural parameter.
///
/// Requires at least 100 samples for the percentiles to mean anything.
pub fn summarize(post: &PlayerPosterior) -> Result<ParamSummary, AnalysisError> {
    if post.samples.len() < 100 {
        return Err(AnalysisError::TooFewSamples { found: post.samples.len(), needed: 100 });
    }
    Ok(ParamSummary {
        mu1: SummaryRow::from_samples(&post.values(ParamSelector::InitialAverage)),
        mu2: SummaryRow::from_samples(&post.values(ParamSelector::EquilibriumAverage)),
        transition_scale: SummaryRow::from_samples(&post.values(ParamSelector::TransitionScale)),
    })
}

/// One point of the predictive effective-average curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictivePoint {
    pub score: u32,
    /// Effective average implied by the posterior-predictive score
    /// distribution: 1 / H_pred(x) - 1.
    pub predictive_average: f64,
    pub lo68: f64,
    pub hi68: f64,
    pub lo95: f64,
    pub hi95: f64,
}

/// Predictive effective-average curve with pointwise 68%/95% bands.
///
/// The central curve derives from the posterior-predictive score pmf
/// P_pred(x) = mean_s P_s(x): its hazard is the survival-weighted mixture of
/// the per-sample hazards, H_pred(x) = sum_s G_s(x) H_s(x) / sum_s G_s(x).
/// The bands are percentiles of the per-sample curves mu_s(x).
pub fn predictive_effective_average(post: &PlayerPosterior, x_max: u32) -> Vec<PredictivePoint> {
    assert!(!post.samples.is_empty(), "posterior has no samples");
    let n = post.samples.len();
    let mut survival = vec![1.0f64; n];
    let mut curve = Vec::with_capacity(x_max as usize + 1);
    let mut mu_values = vec![0.0f64; n];
    for x in 0..=x_max {
        let mut weighted_hazard = 0.0;
        let mut total_survival = 0.0;
        for (i, sample) in post.samples.iter().enumerate() {
            let mu = sample.params.effective_average(x as f64);
            mu_values[i] = mu;
            let hazard = 1.0 / (mu + 1.0);
            if survival[i] >= SURVIVAL_FLOOR {
                weighted_hazard += survival[i] * hazard;
                total_survival += survival[i];
            }
            survival[i] *= 1.0 - hazard;
        }
        let predictive_hazard = weighted_hazard / total_survival;
        let mut sorted = mu_values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite effective average"));
        curve.push(PredictivePoint {
            score: x,
            predictive_average: 1.0 / predictive_hazard - 1.0,
            lo68: percentile_sorted(&sorted, 0.16),
            hi68: percentile_sorted(&sorted, 0.84),
            lo95: percentile_sorted(&sorted, 0.025),
            hi95: percentile_sorted(&sorted, 0.975),
        });
    }
    curve
}

/// Posterior probability that `selector` is larger for player `a` than for
/// player `b`, from independent sample pairs (all pairs at small sample
/// counts, a seeded million-pair subsample otherwise).
///
/// The underlying posteriors are continuous but equal-weight resampling
/// duplicates atoms, so tied pairs count one half; this keeps
/// `compare(a, b) + compare(b, a) = 1` exact and a self-comparison at 0.5.
pub fn compare_players<R: Rng + ?Sized>(
    a: &PlayerPosterior,
    b: &PlayerPosterior,
    selector: ParamSelector,
    rng: &mut R,
) -> f64 {
    let va = a.values(selector);
    let vb = b.values(selector);
    assert!(!va.is_empty() && !vb.is_empty(), "empty posterior in comparison");
    if va.len() <= ALL_PAIRS_LIMIT && vb.len() <= ALL_PAIRS_LIMIT {
        // All pairs, counted via the sorted merge: for each a, the number of
        // b strictly below it plus half the b equal to it.
        let mut sorted_b = vb.clone();
        sorted_b.sort_by(|x, y| x.partial_cmp(y).expect("non-finite sample"));
        let mut half_wins = 0u64; // in units of half a win
        for &x in &va {
            let below = sorted_b.partition_point(|&y| y < x) as u64;
            let at_or_below = sorted_b.partition_point(|&y| y <= x) as u64;
            half_wins += below + at_or_below;
        }
        half_wins as f64 / (2.0 * va.len() as f64 * vb.len() as f64)
    } else {
        let mut half_wins = 0u64;
        for _ in 0..COMPARISON_PAIRS {
            let x = va[rng.random_range(0..va.len())];
            let y = vb[rng.random_range(0..vb.len())];
            half_wins += if x > y {
                2
            } else if x == y {
                1
            } else {
                0
            };
        }
        half_wins as f64 / (2.0 * COMPARISON_PAIRS as f64)
    }
}

/// Evidence comparison of the varying-hazard model against the
/// constant-hazard baseline on the same innings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelComparison {
    pub varying: Evidence,
    pub constant: Evidence,
    /// log(Z / Z0).
    pub log_bayes_factor: f64,
}

/// Evidence of the constant-hazard baseline, via its own nested-sampling run
/// on a seed derived from `config.seed`.
pub fn constant_model_evidence(
    records: &[InningsRecord],
    config: &NsConfig,
) -> Result<Evidence, AnalysisError> {
    let problem = ConstantHazardProblem::new(records)?;
    let run = nested::run(
        &problem,
        &config.with_seed(derive_seed(config.seed, CONSTANT_MODEL_SALT)),
    )?;
    Ok(Evidence { log_z: run.log_evidence, log_z_err: run.log_evidence_err })
}

/// Evidence for both models and the log Bayes factor between them.
pub fn bayes_factor_vs_constant(
    records: &[InningsRecord],
    config: &NsConfig,
) -> Result<ModelComparison, AnalysisError> {
    let problem = BattingProblem::new(records)?;
    let run = nested::run(&problem, config)?;
    let varying = Evidence { log_z: run.log_evidence, log_z_err: run.log_evidence_err };
    let constant = constant_model_evidence(records, config)?;
    Ok(ModelComparison {
        varying,
        constant,
        log_bayes_factor: varying.log_z - constant.log_z,
    })
}
