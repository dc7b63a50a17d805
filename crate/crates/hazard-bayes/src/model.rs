//! Discrete survival model for a batting innings.
//!
//! The score X in a single innings is a non-negative integer. The hazard
//! H(x) is the probability of being dismissed on score x given that score x
//! was reached, and is parameterized through an *effective average* curve
//!
//! ```text
//! mu(x) = mu2 + (mu1 - mu2) * exp(-x / L),    H(x) = 1 / (mu(x) + 1)
//! ```
//!
//! so mu(0) = mu1 (ability on arrival), mu(x) -> mu2 (ability once set), and
//! L is the e-folding scale of the transition in runs. Survival to score x is
//! G(x) = prod_{a<x} [1 - H(a)], the score distribution is P(X = x) =
//! H(x) G(x), and a not-out innings at score y (a right-censored observation)
//! contributes G(y) to the likelihood.

use thiserror::Error;

/// Floor applied to the transition scale so the decay exp(-x/L) stays
/// defined as the scale fraction goes to zero.
pub const MIN_TRANSITION_SCALE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid batting parameters: {0}")]
    InvalidParams(String),
    #[error("innings data must be non-empty")]
    EmptyData,
}

/// Natural parameters of the effective-average model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BattingParams {
    initial_average: f64,
    equilibrium_average: f64,
    transition_scale: f64,
}

impl BattingParams {
    /// Validates `0 <= mu1 <= mu2` and `0 < L <= mu2`.
    pub fn new(
        initial_average: f64,
        equilibrium_average: f64,
        transition_scale: f64,
    ) -> Result<Self, ModelError> {
        if !initial_average.is_finite()
            || !equilibrium_average.is_finite()
            || !transition_scale.is_finite()
        {
            return Err(ModelError::InvalidParams("non-finite parameter".into()));
        }
        if initial_average < 0.0 || initial_average > equilibrium_average {
            return Err(ModelError::InvalidParams(format!(
                "initial average {initial_average} outside [0, {equilibrium_average}]"
            )));
        }
        if transition_scale <= 0.0 || transition_scale > equilibrium_average {
            return Err(ModelError::InvalidParams(format!(
                "transition scale {transition_scale} outside (0, {equilibrium_average}]"
            )));
        }
        Ok(BattingParams {
            initial_average,
            equilibrium_average,
            transition_scale,
        })
    }

    /// Constant-hazard special case: the same effective average at every score.
    pub fn constant(average: f64) -> Result<Self, ModelError> {
        // The transition scale is inert when mu1 == mu2; any legal value works.
        BattingParams::new(average, average, average.max(MIN_TRANSITION_SCALE))
    }

    /// Effective average at score 0.
    pub fn initial_average(&self) -> f64 {
        self.initial_average
    }

    /// Equilibrium ("eye in") effective average.
    pub fn equilibrium_average(&self) -> f64 {
        self.equilibrium_average
    }

    /// E-folding scale of the transition, in runs.
    pub fn transition_scale(&self) -> f64 {
        self.transition_scale
    }

    /// Effective average mu(x). Defined for real `x >= 0` so curves can be
    /// plotted continuously; the likelihood only ever evaluates integers.
    /// Written as a convex combination so mu(0) is exactly mu1.
    pub fn effective_average(&self, score: f64) -> f64 {
        let decay = (-score / self.transition_scale).exp();
        self.initial_average * decay + self.equilibrium_average * (1.0 - decay)
    }

    /// Dismissal probability H(x) = 1 / (mu(x) + 1) at integer score x.
    pub fn hazard(&self, score: u32) -> f64 {
        1.0 / (self.effective_average(score as f64) + 1.0)
    }

    /// Survival function G(x) = prod_{a < x} [1 - H(a)], with G(0) = 1.
    pub fn survival(&self, score: u32) -> f64 {
        let mut g = 1.0;
        for a in 0..score {
            g *= 1.0 - self.hazard(a);
        }
        g
    }

    /// Probability of scoring exactly x: P(X = x) = H(x) G(x).
    pub fn score_pmf(&self, score: u32) -> f64 {
        self.hazard(score) * self.survival(score)
    }
}

/// One batting innings: the runs scored and whether the batsman was left
/// not-out (the score is then a censoring point, not a dismissal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InningsRecord {
    pub score: u32,
    pub not_out: bool,
}

impl InningsRecord {
    pub fn out(score: u32) -> Self {
        InningsRecord { score, not_out: false }
    }

    pub fn not_out(score: u32) -> Self {
        InningsRecord { score, not_out: true }
    }
}

/// Sufficient statistics of an innings set for likelihood evaluation.
///
/// The censored log-likelihood only needs, for each score x, how many innings
/// were dismissed exactly at x and how many innings (dismissed or not)
/// progressed beyond x. Folding the records once makes each likelihood call
/// O(max score) no matter how many innings there are, which matters because
/// nested sampling evaluates the likelihood millions of times.
#[derive(Debug, Clone)]
pub struct InningsData {
    dismissals_at: Vec<u32>,
    progressed_past: Vec<u32>,
    innings: usize,
    not_outs: usize,
}

impl InningsData {
    pub fn new(records: &[InningsRecord]) -> Result<Self, ModelError> {
        if records.is_empty() {
            return Err(ModelError::EmptyData);
        }
        let max_score = records.iter().map(|r| r.score).max().unwrap() as usize;
        let mut dismissals_at = vec![0u32; max_score + 1];
        let mut not_outs = 0usize;
        for r in records {
            if r.not_out {
                not_outs += 1;
            } else {
                dismissals_at[r.score as usize] += 1;
            }
        }
        // progressed_past[x] = number of innings whose recorded score exceeds x.
        let mut count_at = vec![0u32; max_score + 1];
        for r in records {
            count_at[r.score as usize] += 1;
        }
        let mut progressed_past = vec![0u32; max_score + 1];
        let mut beyond = 0u32;
        for x in (0..max_score).rev() {
            beyond += count_at[x + 1];
            progressed_past[x] = beyond;
        }
        Ok(InningsData {
            dismissals_at,
            progressed_past,
            innings: records.len(),
            not_outs,
        })
    }

    pub fn innings(&self) -> usize {
        self.innings
    }

    pub fn not_outs(&self) -> usize {
        self.not_outs
    }

    /// Censored log-likelihood of the innings set under `params`.
    ///
    /// Each dismissal at x contributes log H(x) + log G(x) and each not-out at
    /// y contributes log G(y); grouping by score gives
    /// sum_x [ d(x) log H(x) + n(x) log(1 - H(x)) ] with d(x) the dismissal
    /// count and n(x) the number of innings progressing past x. Returns
    /// `-inf` when the data are impossible under `params` (e.g. a positive
    /// score with a zero initial average).
    pub fn log_likelihood(&self, params: &BattingParams) -> f64 {
        let mu1 = params.initial_average;
        let mu2 = params.equilibrium_average;
        let step = (-1.0 / params.transition_scale).exp();
        let mut decay = 1.0;
        let mut total = 0.0;
        for x in 0..self.dismissals_at.len() {
            let mu = mu1 * decay + mu2 * (1.0 - decay);
            let log_reach = (mu + 1.0).ln();
            let dismissed = self.dismissals_at[x];
            if dismissed > 0 {
                total -= dismissed as f64 * log_reach; // log H = -log(mu + 1)
            }
            let progressed = self.progressed_past[x];
            if progressed > 0 {
                total += progressed as f64 * (mu.ln() - log_reach); // log(1 - H)
            }
            decay *= step;
        }
        total
    }
}

/// Censored log-likelihood of a raw record list. Prefer building an
/// [`InningsData`] once when evaluating many parameter points.
pub fn log_likelihood(records: &[InningsRecord], params: &BattingParams) -> Result<f64, ModelError> {
    Ok(InningsData::new(records)?.log_likelihood(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn waugh_like() -> BattingParams {
        BattingParams::new(13.2, 58.5, 3.1).unwrap()
    }

    #[test]
    fn effective_average_endpoints() {
        let p = waugh_like();
        assert_eq!(p.effective_average(0.0), 13.2);
        // One e-folding covers 63.2% of the transition.
        let frac = (p.effective_average(3.1) - 13.2) / (58.5 - 13.2);
        assert_relative_eq!(frac, 1.0 - (-1.0f64).exp(), epsilon = 1e-12);
        // Hand evaluation: 58.5 - 45.3 * e^-1.
        assert_relative_eq!(p.effective_average(3.1), 41.83506131493366, epsilon = 1e-12);
        // Long-run limit.
        assert_relative_eq!(p.effective_average(1e6), 58.5, epsilon = 1e-9);
    }

    #[test]
    fn hazard_closed_form_values() {
        let p = waugh_like();
        assert_relative_eq!(p.hazard(0), 1.0 / 14.2, epsilon = 1e-15);
        assert_relative_eq!(p.hazard(0), 0.07042253521126761, epsilon = 1e-15);
        // Constant-hazard case: mu = 39 everywhere gives H = 0.025.
        let c = BattingParams::constant(39.0).unwrap();
        for x in [0, 7, 100] {
            assert_relative_eq!(c.hazard(x), 0.025, epsilon = 1e-15);
        }
        // Degenerate mu == 0 limit: dismissal is certain.
        let zero = BattingParams::new(0.0, 0.0, MIN_TRANSITION_SCALE);
        assert!(zero.is_err(), "mu2 = 0 leaves no room for a positive scale");
        let near_zero = BattingParams::new(0.0, MIN_TRANSITION_SCALE, MIN_TRANSITION_SCALE).unwrap();
        assert_relative_eq!(near_zero.hazard(0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn survival_hand_computed_product() {
        let p = waugh_like();
        assert_eq!(p.survival(0), 1.0);
        // Frozen from the two-factor product (1 - 1/14.2)(1 - 1/(mu(1)+1)).
        assert_relative_eq!(p.survival(2), 0.8947490829267608, epsilon = 1e-12);
        // Constant hazard h gives geometric survival (1-h)^x.
        let c = BattingParams::constant(1.0).unwrap(); // h = 0.5
        assert_relative_eq!(c.survival(3), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn pmf_geometric_case() {
        let c = BattingParams::constant(1.0).unwrap(); // h = 0.5
        assert_relative_eq!(c.score_pmf(0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(c.score_pmf(1), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn pmf_matches_recursive_oracle() {
        // Independent evaluation of the difference equation
        // G(x+1) = G(x) [1 - H(x)] with H from first principles.
        let p = BattingParams::new(5.0, 50.0, 10.0).unwrap();
        let mut g = 1.0;
        let mut total = 0.0;
        for x in 0..400u32 {
            let mu = 50.0 + (5.0 - 50.0) * (-(x as f64) / 10.0).exp();
            let h = 1.0 / (mu + 1.0);
            assert_relative_eq!(p.score_pmf(x), h * g, max_relative = 1e-11);
            total += h * g;
            g *= 1.0 - h;
        }
        assert!(total > 1.0 - 1e-3, "pmf mass should approach 1, got {total}");
    }

    #[test]
    fn pmf_normalizes() {
        let p = BattingParams::new(2.0, 120.0, 30.0).unwrap();
        let total: f64 = (0..5000).map(|x| p.score_pmf(x)).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn log_likelihood_single_records() {
        // One duck at constant h = 0.5: log H(0) = ln 0.5.
        let p = BattingParams::constant(1.0).unwrap();
        let ll = log_likelihood(&[InningsRecord::out(0)], &p).unwrap();
        assert_relative_eq!(ll, 0.5f64.ln(), epsilon = 1e-12);
        // One not-out on 2: censored term log G(2) = 2 ln 0.5.
        let ll = log_likelihood(&[InningsRecord::not_out(2)], &p).unwrap();
        assert_relative_eq!(ll, 2.0 * 0.5f64.ln(), epsilon = 1e-12);
        // Not-out on 0 is vacuous: log G(0) = 0.
        let ll = log_likelihood(&[InningsRecord::not_out(0)], &p).unwrap();
        assert_eq!(ll, 0.0);
    }

    #[test]
    fn log_likelihood_matches_term_by_term_product() {
        let p = BattingParams::new(5.0, 30.0, 3.0).unwrap();
        let data = [
            InningsRecord::out(4),
            InningsRecord::out(0),
            InningsRecord::not_out(7),
        ];
        let oracle = p.score_pmf(4).ln() + p.score_pmf(0).ln() + p.survival(7).ln();
        let ll = log_likelihood(&data, &p).unwrap();
        assert_relative_eq!(ll, oracle, max_relative = 1e-12);
    }

    #[test]
    fn empty_data_is_rejected() {
        let p = waugh_like();
        assert_eq!(log_likelihood(&[], &p), Err(ModelError::EmptyData));
        assert!(InningsData::new(&[]).is_err());
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(BattingParams::new(10.0, 5.0, 1.0).is_err()); // mu1 > mu2
        assert!(BattingParams::new(-1.0, 5.0, 1.0).is_err());
        assert!(BattingParams::new(1.0, 5.0, 0.0).is_err()); // L = 0
        assert!(BattingParams::new(1.0, 5.0, 6.0).is_err()); // L > mu2
        assert!(BattingParams::new(1.0, f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn hazard_monotone_average_monotone(
            mu2 in 0.5f64..200.0,
            c in 0.0f64..1.0,
            d in 0.001f64..1.0,
            x in 0u32..500,
        ) {
            let p = BattingParams::new(c * mu2, mu2, d * mu2).unwrap();
            prop_assert!(p.hazard(x + 1) <= p.hazard(x) + 1e-15);
            prop_assert!(p.effective_average((x + 1) as f64) + 1e-12
                >= p.effective_average(x as f64));
        }

        #[test]
        fn survival_difference_equation(
            mu2 in 0.5f64..200.0,
            c in 0.0f64..1.0,
            d in 0.001f64..1.0,
            x in 0u32..200,
        ) {
            let p = BattingParams::new(c * mu2, mu2, d * mu2).unwrap();
            let lhs = p.survival(x + 1);
            let rhs = p.survival(x) * (1.0 - p.hazard(x));
            prop_assert_eq!(lhs, rhs); // identical product, extended one factor
        }

        #[test]
        fn pmf_tail_bounded_by_constant_hazard_floor(
            mu2 in 0.5f64..200.0,
            c in 0.0f64..1.0,
            d in 0.001f64..1.0,
        ) {
            let p = BattingParams::new(c * mu2, mu2, d * mu2).unwrap();
            let mass: f64 = (0..=2000).map(|x| p.score_pmf(x)).sum();
            let floor = 1.0 / (mu2 + 1.0);
            prop_assert!(mass >= 1.0 - (1.0 - floor).powi(2000) - 1e-9);
        }

        #[test]
        fn geometric_equivalence(mu in 0.1f64..200.0, x in 0u32..500) {
            let p = BattingParams::constant(mu).unwrap();
            let h = 1.0 / (mu + 1.0);
            let geometric = h * (1.0 - h).powi(x as i32);
            prop_assert!((p.score_pmf(x) - geometric).abs() <= 1e-12);
        }

        #[test]
        fn likelihood_sums_over_singletons(
            scores in proptest::collection::vec((0u32..120, proptest::bool::ANY), 1..30),
            mu2 in 1.0f64..150.0,
            c in 0.01f64..1.0,
            d in 0.01f64..1.0,
        ) {
            let p = BattingParams::new(c * mu2, mu2, d * mu2).unwrap();
            let records: Vec<InningsRecord> = scores
                .iter()
                .map(|&(s, n)| InningsRecord { score: s, not_out: n })
                .collect();
            let whole = log_likelihood(&records, &p).unwrap();
            let parts: f64 = records
                .iter()
                .map(|r| log_likelihood(std::slice::from_ref(r), &p).unwrap())
                .sum();
            prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole.abs()));
        }
    }
}
