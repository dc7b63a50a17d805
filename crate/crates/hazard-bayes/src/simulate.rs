//! Synthetic careers drawn from the model, for oracle tests and
//! parameter-recovery experiments.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::analysis::{analyze_player, AnalysisError};
use crate::model::{BattingParams, InningsRecord};
use crate::nested::NsConfig;
use crate::stats::{derive_seed, percentile};

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("censoring probability {0} outside [0, 1)")]
    InvalidCensorProb(f64),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Independent chance that an innings is flagged not-out at its realized
/// score.
///
/// The flag is drawn independently of the score, so flag/score independence
/// holds exactly; the flagged score is still a completed dismissal draw,
/// though, so refits of heavily censored synthetic careers sit slightly high
/// (the likelihood credits a censored row with survival only). Calibration
/// experiments should censor at 0. Real declarations, which correlate with
/// high scores, are out of scope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensorModel {
    censor_prob: f64,
}

impl CensorModel {
    pub fn new(censor_prob: f64) -> Result<Self, SimulateError> {
        if !(0.0..1.0).contains(&censor_prob) {
            return Err(SimulateError::InvalidCensorProb(censor_prob));
        }
        Ok(CensorModel { censor_prob })
    }

    pub fn none() -> Self {
        CensorModel { censor_prob: 0.0 }
    }

    pub fn censor_prob(&self) -> f64 {
        self.censor_prob
    }
}

/// Draw one innings score: walk the scores from 0, dismissing at each score
/// `a` with probability H(a). The result is distributed as `score_pmf`.
pub fn simulate_innings<R: Rng + ?Sized>(params: &BattingParams, rng: &mut R) -> u32 {
    let mut score = 0u32;
    loop {
        if rng.random::<f64>() < params.hazard(score) {
            return score;
        }
        score += 1;
    }
}

/// Draw a career of `n_innings` independent innings, each flagged not-out
/// with the censoring probability (independent of the score).
pub fn simulate_career<R: Rng + ?Sized>(
    params: &BattingParams,
    n_innings: usize,
    censor: CensorModel,
    rng: &mut R,
) -> Vec<InningsRecord> {
    (0..n_innings)
        .map(|_| {
            let score = simulate_innings(params, rng);
            let not_out = rng.random::<f64>() < censor.censor_prob;
            InningsRecord { score, not_out }
        })
        .collect()
}

/// Interval coverage of one recovered parameter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntervalCheck {
    pub truth: f64,
    pub median: f64,
    pub lo68: f64,
    pub hi68: f64,
    pub lo95: f64,
    pub hi95: f64,
    pub covered68: bool,
    pub covered95: bool,
}

/// One simulate-and-refit repeat.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RecoveryRow {
    pub repeat: usize,
    pub seed: u64,
    pub mu1: IntervalCheck,
    pub mu2: IntervalCheck,
    #[serde(rename = "L")]
    pub transition_scale: IntervalCheck,
}

/// Empirical coverage report over all repeats.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoverageReport {
    pub rows: Vec<RecoveryRow>,
    /// Fraction of repeats whose 68% interval covered the truth, per
    /// parameter (mu1, mu2, L).
    pub coverage68: [f64; 3],
    pub coverage95: [f64; 3],
}

fn check_interval(truth: f64, samples: &[f64]) -> IntervalCheck {
    let lo68 = percentile(samples, 0.16);
    let hi68 = percentile(samples, 0.84);
    let lo95 = percentile(samples, 0.025);
    let hi95 = percentile(samples, 0.975);
    IntervalCheck {
        truth,
        median: percentile(samples, 0.5),
        lo68,
        hi68,
        lo95,
        hi95,
        covered68: lo68 <= truth && truth <= hi68,
        covered95: lo95 <= truth && truth <= hi95,
    }
}

/// Simulate `repeats` careers from `true_params`, refit each with
/// [`analyze_player`], and report how often the 68%/95% posterior intervals
/// cover the true parameters. Repeats run in parallel on derived seeds, so
/// the report is deterministic in `config.seed`.
pub fn recovery_experiment(
    true_params: &BattingParams,
    n_innings: usize,
    censor: CensorModel,
    config: &NsConfig,
    repeats: usize,
) -> Result<CoverageReport, SimulateError> {
    assert!(repeats >= 1, "need at least one repeat");
    let results: Vec<Result<RecoveryRow, SimulateError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..repeats)
            .map(|repeat| {
                scope.spawn(move || -> Result<RecoveryRow, SimulateError> {
                    let seed = derive_seed(config.seed, 1000 + repeat as u64);
                    let mut rng = ChaCha12Rng::seed_from_u64(seed);
                    let records = simulate_career(true_params, n_innings, censor, &mut rng);
                    let run_config = config.with_seed(seed);
                    let post = analyze_player(&format!("repeat-{repeat}"), &records, &run_config)?;
                    let mu1: Vec<f64> =
                        post.samples.iter().map(|s| s.params.initial_average()).collect();
                    let mu2: Vec<f64> =
                        post.samples.iter().map(|s| s.params.equilibrium_average()).collect();
                    let scale: Vec<f64> =
                        post.samples.iter().map(|s| s.params.transition_scale()).collect();
                    Ok(RecoveryRow {
                        repeat,
                        seed,
                        mu1: check_interval(true_params.initial_average(), &mu1),
                        mu2: check_interval(true_params.equilibrium_average(), &mu2),
                        transition_scale: check_interval(true_params.transition_scale(), &scale),
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("recovery worker panicked")).collect()
    });

    let mut rows = Vec::with_capacity(repeats);
    for r in results {
        rows.push(r?);
    }
    let frac = |pick: fn(&RecoveryRow) -> bool| {
        rows.iter().filter(|r| pick(r)).count() as f64 / rows.len() as f64
    };
    Ok(CoverageReport {
        coverage68: [
            frac(|r| r.mu1.covered68),
            frac(|r| r.mu2.covered68),
            frac(|r| r.transition_scale.covered68),
        ],
        coverage95: [
            frac(|r| r.mu1.covered95),
            frac(|r| r.mu2.covered95),
            frac(|r| r.transition_scale.covered95),
        ],
        rows,
    })
}
