//! On-disk formats for pipeline artifacts.
//!
//! Posterior samples: CSV with header `mu1,mu2,L,C,D`, one equal-weight draw
//! per row. Curves: CSV `x,median,lo68,hi68,lo95,hi95`. Summaries, evidence
//! reports, hypergrids and ellipses: JSON. Floats are written in shortest
//! round-trip form so files are diffable and reload losslessly.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::analysis::{Evidence, ParamSelector, PlayerPosterior, PosteriorSample, PredictivePoint};
use crate::hierarchy::HyperGrid;
use crate::model::BattingParams;
use crate::priors::InternalParams;
use crate::stats::ParamSummary;

pub const POSTERIOR_HEADER: &str = "mu1,mu2,L,C,D";
pub const CURVE_HEADER: &str = "x,median,lo68,hi68,lo95,hi95";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: line {line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}: expected header '{expected}', found '{found}'")]
    WrongHeader { path: String, expected: String, found: String },
    #[error("{path}: file holds no samples")]
    Empty { path: String },
}

/// Render posterior samples as CSV text.
pub fn posterior_to_csv(samples: &[PosteriorSample]) -> String {
    let mut out = String::from(POSTERIOR_HEADER);
    out.push('\n');
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.params.initial_average(),
            s.params.equilibrium_average(),
            s.params.transition_scale(),
            s.internal.initial_fraction,
            s.internal.scale_fraction,
        )
        .expect("write to string");
    }
    out
}

/// Parse a posterior sample CSV produced by [`posterior_to_csv`]. The player
/// id is taken from the file stem.
pub fn posterior_from_csv(path: &Path, content: &str) -> Result<PlayerPosterior, FormatError> {
    let path_str = path.display().to_string();
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| FormatError::Empty { path: path_str.clone() })?;
    if header.trim() != POSTERIOR_HEADER {
        return Err(FormatError::WrongHeader {
            path: path_str,
            expected: POSTERIOR_HEADER.to_string(),
            found: header.to_string(),
        });
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(FormatError::Malformed {
                path: path_str.clone(),
                line: idx + 1,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let mut values = [0.0f64; 5];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|e| FormatError::Malformed {
                path: path_str.clone(),
                line: idx + 1,
                message: format!("bad float '{field}': {e}"),
            })?;
        }
        let [mu1, mu2, scale, c, d] = values;
        let params = BattingParams::new(mu1, mu2, scale).map_err(|e| FormatError::Malformed {
            path: path_str.clone(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        samples.push(PosteriorSample { internal: InternalParams::new(c, mu2, d), params });
    }
    let player = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    let player = player.strip_suffix("_posterior").unwrap_or(&player).to_string();
    PlayerPosterior::from_samples(player, samples)
        .map_err(|_| FormatError::Empty { path: path.display().to_string() })
}

/// Render a predictive curve as CSV text.
pub fn curve_to_csv(curve: &[PredictivePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in curve {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.score, p.predictive_average, p.lo68, p.hi68, p.lo95, p.hi95
        )
        .expect("write to string");
    }
    out
}

/// Render a hypergrid as CSV text (`nu,sigma,mass` per cell).
pub fn hypergrid_to_csv(grid: &HyperGrid) -> String {
    let mut out = String::from("nu,sigma,mass\n");
    for (i, &nu) in grid.nu_axis.iter().enumerate() {
        for (j, &sigma) in grid.sigma_axis.iter().enumerate() {
            writeln!(out, "{},{},{}", nu, sigma, grid.cell(i, j)).expect("write to string");
        }
    }
    out
}

/// Render a 1-D marginal as CSV text.
pub fn marginal_to_csv(axis_name: &str, axis: &[f64], mass: &[f64]) -> String {
    let mut out = format!("{axis_name},mass\n");
    for (x, m) in axis.iter().zip(mass) {
        writeln!(out, "{},{}", x, m).expect("write to string");
    }
    out
}

/// Per-player summary report (JSON).
#[derive(Debug, serde::Serialize)]
pub struct SummaryReport {
    pub player: String,
    pub innings: usize,
    pub not_outs: usize,
    pub parameters: ParamSummary,
}

/// Per-player evidence report (JSON).
#[derive(Debug, serde::Serialize)]
pub struct EvidenceReport {
    pub player: String,
    pub varying_hazard: Evidence,
    pub constant_hazard: Evidence,
    pub log_bayes_factor: f64,
}

/// Pairwise comparison result (JSON, and the line printed on stdout).
#[derive(Debug, serde::Serialize)]
pub struct ComparisonReport {
    pub player_a: String,
    pub player_b: String,
    pub parameter: String,
    pub probability_a_exceeds_b: f64,
}

impl ComparisonReport {
    pub fn new(a: &PlayerPosterior, b: &PlayerPosterior, param: ParamSelector, p: f64) -> Self {
        ComparisonReport {
            player_a: a.player_id.clone(),
            player_b: b.player_id.clone(),
            parameter: param.as_str().to_string(),
            probability_a_exceeds_b: p,
        }
    }
}

pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text
}
