//! The `hazard-bayes` command-line pipeline.
//!
//! Subcommands: `analyze` (innings CSV to posterior samples, summary and
//! evidence report per player), `compare` (two posterior files to a
//! probability), `curve` (posterior file to a predictive effective-average
//! CSV), `hier` (directory of posterior files to a hypergrid, marginals,
//! next-player prediction and credible ellipses), `simulate` (parameters to a
//! synthetic career CSV) and `recover` (simulate-and-refit coverage report).
//!
//! Every file-producing run writes a `manifest.json` recording flags, seed
//! and input/output digests. All randomness flows from `--seed` (falling back
//! to `HAZARD_BAYES_SEED`), so reruns are byte-identical apart from manifest
//! timestamps.

pub mod formats;
pub mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::analysis::{
    analyze_player, compare_players, constant_model_evidence, predictive_effective_average,
    summarize, AnalysisError, ParamSelector, PlayerPosterior,
};
use crate::hierarchy::{
    credible_ellipse, hyper_posterior, predict_next_player, HierarchyError, HyperGridSpec,
};
use crate::ingest::{career_summary, parse_innings_file, serialize_innings, IngestError};
use crate::model::{BattingParams, InningsRecord, ModelError};
use crate::nested::{NsConfig, NsError};
use crate::simulate::{recovery_experiment, simulate_career, CensorModel, SimulateError};
use formats::FormatError;
use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Sampler(String),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    /// Distinct exit codes per failure category: 3 I/O or missing file,
    /// 4 malformed input data, 5 sampler failure, 6 invalid argument values.
    /// Usage errors exit 2 via clap.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 3,
            CliError::Input(_) => 4,
            CliError::Sampler(_) => 5,
            CliError::Invalid(_) => 6,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NsError> for CliError {
    fn from(e: NsError) -> Self {
        CliError::Sampler(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(ModelError::EmptyData) => {
                CliError::Input("player has no innings".into())
            }
            AnalysisError::Model(m) => CliError::Invalid(m.to_string()),
            AnalysisError::Sampler(s) => CliError::Sampler(s.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        match e {
            SimulateError::Analysis(a) => a.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<HierarchyError> for CliError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::AllCellsImpossible => CliError::Sampler(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

fn parse_selector(s: &str) -> Result<ParamSelector, String> {
    s.parse()
}

#[derive(Debug, Args)]
struct SamplerArgs {
    /// Nested-sampling particle count.
    #[arg(long, default_value_t = 1000)]
    particles: usize,
    /// Constrained MCMC steps per nested-sampling iteration.
    #[arg(long = "mcmc-steps", default_value_t = 1000)]
    mcmc_steps: usize,
    /// Master seed; all per-player and per-repeat seeds derive from it.
    #[arg(long, env = "HAZARD_BAYES_SEED", default_value_t = 0)]
    seed: u64,
}

impl SamplerArgs {
    fn config(&self) -> NsConfig {
        NsConfig::new(self.particles, self.mcmc_steps, self.seed)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hazard-bayes",
    version,
    about = "Bayesian survival analysis of batting: score-varying dismissal hazards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit every player in an innings CSV; write posterior samples, summary
    /// and evidence report per player.
    Analyze {
        /// Innings CSV (player,score rows; trailing * marks not-out).
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Posterior probability that player A's parameter exceeds player B's.
    Compare {
        /// Posterior sample CSV for player A.
        a: PathBuf,
        /// Posterior sample CSV for player B.
        b: PathBuf,
        /// Which parameter to compare: mu1, mu2 or L.
        #[arg(long, value_parser = parse_selector)]
        param: ParamSelector,
        #[arg(long, env = "HAZARD_BAYES_SEED", default_value_t = 0)]
        seed: u64,
        /// Also write comparison.json (and a manifest) here.
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
    /// Predictive effective-average curve with 68%/95% bands.
    Curve {
        /// Posterior sample CSV.
        posterior: PathBuf,
        #[arg(long = "x-max", default_value_t = 300)]
        x_max: u32,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Pool a directory of posterior files into a hyperparameter grid and
    /// predict the next player's ability.
    Hier {
        /// Directory of posterior sample CSVs.
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        /// Grid cells along the nu axis.
        #[arg(long = "grid-nu", default_value_t = 200)]
        grid_nu: usize,
        /// Grid cells along the sigma axis.
        #[arg(long = "grid-sigma", default_value_t = 200)]
        grid_sigma: usize,
        /// Predictive draws for the next-player posterior.
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        #[arg(long, env = "HAZARD_BAYES_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Draw a synthetic career and write it in the innings CSV format.
    Simulate {
        #[arg(long)]
        mu1: f64,
        #[arg(long)]
        mu2: f64,
        /// Transition e-folding scale in runs.
        #[arg(long = "L")]
        transition_scale: f64,
        /// Number of innings.
        #[arg(long)]
        n: usize,
        /// Probability an innings ends not-out, independent of score.
        #[arg(long = "censor-prob", default_value_t = 0.0)]
        censor_prob: f64,
        #[arg(long, default_value = "sim")]
        player: String,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, env = "HAZARD_BAYES_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Simulate careers from known parameters, refit each, and report
    /// interval coverage.
    Recover {
        #[arg(long)]
        mu1: f64,
        #[arg(long)]
        mu2: f64,
        #[arg(long = "L")]
        transition_scale: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        /// Not-out flagging probability for the simulated careers. Flagged
        /// scores are still full dismissal draws, so any value above zero
        /// biases the refit upward; calibration runs want 0.
        #[arg(long = "censor-prob", default_value_t = 0.0)]
        censor_prob: f64,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
}

/// Parse `argv` and run the selected subcommand; returns the process exit
/// code. Usage errors print to stderr and exit 2 (clap's convention).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze { data, out_dir, sampler } => cmd_analyze(&data, &out_dir, &sampler),
        Command::Compare { a, b, param, seed, out_dir } => {
            cmd_compare(&a, &b, param, seed, out_dir.as_deref())
        }
        Command::Curve { posterior, x_max, out_dir } => cmd_curve(&posterior, x_max, &out_dir),
        Command::Hier { data, out_dir, grid_nu, grid_sigma, draws, seed } => {
            cmd_hier(&data, &out_dir, grid_nu, grid_sigma, draws, seed)
        }
        Command::Simulate {
            mu1,
            mu2,
            transition_scale,
            n,
            censor_prob,
            player,
            out_dir,
            seed,
        } => cmd_simulate(mu1, mu2, transition_scale, n, censor_prob, &player, &out_dir, seed),
        Command::Recover {
            mu1,
            mu2,
            transition_scale,
            n,
            repeats,
            censor_prob,
            out_dir,
            sampler,
        } => cmd_recover(mu1, mu2, transition_scale, n, repeats, censor_prob, &out_dir, &sampler),
    }
}

/// File stem for a player name: keep alphanumerics, dot and dash, map the
/// rest to underscores.
fn sanitize_stem(name: &str) -> String {
    let stem: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    if stem.is_empty() {
        "player".to_string()
    } else {
        stem
    }
}

struct PlayerArtifacts {
    stem: String,
    posterior_csv: String,
    summary_json: String,
    evidence_json: String,
    console_line: String,
}

fn analyze_one_player(
    name: &str,
    stem: String,
    records: &[InningsRecord],
    config: &NsConfig,
) -> Result<PlayerArtifacts, CliError> {
    let posterior = analyze_player(name, records, config)?;
    let constant = constant_model_evidence(records, config)?;
    let varying = posterior.evidence.expect("analyze_player always sets evidence");
    let summary = summarize(&posterior)?;
    let fingerprint = posterior.fingerprint.expect("analyze_player always sets fingerprint");

    let summary_report = formats::SummaryReport {
        player: name.to_string(),
        innings: fingerprint.innings,
        not_outs: fingerprint.not_outs,
        parameters: summary,
    };
    let evidence_report = formats::EvidenceReport {
        player: name.to_string(),
        varying_hazard: varying,
        constant_hazard: constant,
        log_bayes_factor: varying.log_z - constant.log_z,
    };
    let console_line = format!(
        "{name}: mu1 {:.1} +{:.1}/-{:.1} | mu2 {:.1} +{:.1}/-{:.1} | L {:.1} +{:.1}/-{:.1} | logZ {:.2} | log(Z/Z0) {:.2}",
        summary.mu1.median,
        summary.mu1.plus_err,
        summary.mu1.minus_err,
        summary.mu2.median,
        summary.mu2.plus_err,
        summary.mu2.minus_err,
        summary.transition_scale.median,
        summary.transition_scale.plus_err,
        summary.transition_scale.minus_err,
        varying.log_z,
        evidence_report.log_bayes_factor,
    );
    Ok(PlayerArtifacts {
        stem,
        posterior_csv: formats::posterior_to_csv(&posterior.samples),
        summary_json: formats::to_json_pretty(&summary_report),
        evidence_json: formats::to_json_pretty(&evidence_report),
        console_line,
    })
}

fn cmd_analyze(data: &Path, out_dir: &Path, sampler: &SamplerArgs) -> Result<(), CliError> {
    let content = std::fs::read_to_string(data)?;
    let parsed = parse_innings_file(&content)?;
    if parsed.players.is_empty() {
        return Err(CliError::Input(format!("{}: no innings rows", data.display())));
    }
    let config = sampler.config();
    let mut manifest = RunManifest::new(
        "analyze",
        serde_json::json!({
            "data": data.display().to_string(),
            "out_dir": out_dir.display().to_string(),
            "particles": sampler.particles,
            "mcmc_steps": sampler.mcmc_steps,
        }),
        sampler.seed,
    );
    manifest.record_input(data)?;

    // Unique file stems, assigned in player order.
    let mut taken = std::collections::HashSet::new();
    let stems: Vec<String> = parsed
        .players
        .iter()
        .map(|(name, _)| {
            let base = sanitize_stem(name);
            let mut stem = base.clone();
            let mut k = 1;
            while !taken.insert(stem.clone()) {
                k += 1;
                stem = format!("{base}_{k}");
            }
            stem
        })
        .collect();

    // One worker per player, seeded by master seed plus player index.
    let results: Vec<Result<PlayerArtifacts, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = parsed
            .players
            .iter()
            .zip(&stems)
            .enumerate()
            .map(|(index, ((name, records), stem))| {
                let player_config = config.with_seed(config.seed.wrapping_add(index as u64));
                let stem = stem.clone();
                scope.spawn(move || analyze_one_player(name, stem, records, &player_config))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("analysis worker panicked")).collect()
    });

    let mut lines = Vec::new();
    for result in results {
        let artifacts = result?;
        manifest.write_output(
            &out_dir.join(format!("{}_posterior.csv", artifacts.stem)),
            &artifacts.posterior_csv,
        )?;
        manifest.write_output(
            &out_dir.join(format!("{}_summary.json", artifacts.stem)),
            &artifacts.summary_json,
        )?;
        manifest.write_output(
            &out_dir.join(format!("{}_evidence.json", artifacts.stem)),
            &artifacts.evidence_json,
        )?;
        lines.push(artifacts.console_line);
    }
    manifest.finalize(out_dir)?;
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

fn cmd_compare(
    a: &Path,
    b: &Path,
    param: ParamSelector,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let post_a = load_posterior(a)?;
    let post_b = load_posterior(b)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let p = compare_players(&post_a, &post_b, param, &mut rng);
    println!("{p}");
    if let Some(dir) = out_dir {
        let mut manifest = RunManifest::new(
            "compare",
            serde_json::json!({
                "a": a.display().to_string(),
                "b": b.display().to_string(),
                "param": param.as_str(),
            }),
            seed,
        );
        manifest.record_input(a)?;
        manifest.record_input(b)?;
        let report = formats::ComparisonReport::new(&post_a, &post_b, param, p);
        manifest.write_output(&dir.join("comparison.json"), &formats::to_json_pretty(&report))?;
        manifest.finalize(dir)?;
    }
    Ok(())
}

fn load_posterior(path: &Path) -> Result<PlayerPosterior, CliError> {
    let content = std::fs::read_to_string(path)?;
    Ok(formats::posterior_from_csv(path, &content)?)
}

fn cmd_curve(posterior_path: &Path, x_max: u32, out_dir: &Path) -> Result<(), CliError> {
    let posterior = load_posterior(posterior_path)?;
    let curve = predictive_effective_average(&posterior, x_max);
    let mut manifest = RunManifest::new(
        "curve",
        serde_json::json!({
            "posterior": posterior_path.display().to_string(),
            "x_max": x_max,
        }),
        0,
    );
    manifest.record_input(posterior_path)?;
    let stem = sanitize_stem(&posterior.player_id);
    manifest
        .write_output(&out_dir.join(format!("{stem}_curve.csv")), &formats::curve_to_csv(&curve))?;
    manifest.finalize(out_dir)?;
    println!("{stem}: curve over scores 0..={x_max}");
    Ok(())
}

fn cmd_hier(
    data: &Path,
    out_dir: &Path,
    grid_nu: usize,
    grid_sigma: usize,
    draws: usize,
    seed: u64,
) -> Result<(), CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(data)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Input(format!("{}: no posterior CSV files", data.display())));
    }

    let mut manifest = RunManifest::new(
        "hier",
        serde_json::json!({
            "data": data.display().to_string(),
            "grid_nu": grid_nu,
            "grid_sigma": grid_sigma,
            "draws": draws,
        }),
        seed,
    );
    let mut players = Vec::with_capacity(paths.len());
    for path in &paths {
        manifest.record_input(path)?;
        players.push(load_posterior(path)?);
    }

    let spec = HyperGridSpec::with_cells(grid_nu, grid_sigma);
    let grid = hyper_posterior(&players, &spec)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let prediction = predict_next_player(&grid, draws, &mut rng);
    let plane: Vec<(f64, f64)> = prediction
        .samples
        .iter()
        .map(|s| (s.params.initial_average(), s.params.equilibrium_average()))
        .collect();
    let ellipses = [credible_ellipse(&plane, 0.68)?, credible_ellipse(&plane, 0.95)?];

    let nu_summary = grid.nu_summary();
    let sigma_summary = grid.sigma_summary();
    let hyper_summary = serde_json::json!({
        "players": players.iter().map(|p| p.player_id.clone()).collect::<Vec<_>>(),
        "nu": nu_summary,
        "sigma": sigma_summary,
    });

    manifest.write_output(&out_dir.join("hypergrid.csv"), &formats::hypergrid_to_csv(&grid))?;
    manifest.write_output(
        &out_dir.join("nu_marginal.csv"),
        &formats::marginal_to_csv("nu", &grid.nu_axis, &grid.marginal_nu()),
    )?;
    manifest.write_output(
        &out_dir.join("sigma_marginal.csv"),
        &formats::marginal_to_csv("sigma", &grid.sigma_axis, &grid.marginal_sigma()),
    )?;
    manifest.write_output(&out_dir.join("hyper_summary.json"), &formats::to_json_pretty(&hyper_summary))?;
    manifest.write_output(
        &out_dir.join("next_player_posterior.csv"),
        &formats::posterior_to_csv(&prediction.samples),
    )?;
    manifest.write_output(
        &out_dir.join("next_player_summary.json"),
        &formats::to_json_pretty(&prediction.summary),
    )?;
    manifest.write_output(&out_dir.join("ellipses.json"), &formats::to_json_pretty(&ellipses))?;
    manifest.finalize(out_dir)?;

    println!(
        "nu {:.2} +{:.2}/-{:.2} | sigma {:.2} +{:.2}/-{:.2} | next player mu1 {:.1} mu2 {:.1} L {:.1}",
        nu_summary.median,
        nu_summary.plus_err,
        nu_summary.minus_err,
        sigma_summary.median,
        sigma_summary.plus_err,
        sigma_summary.minus_err,
        prediction.summary.mu1.median,
        prediction.summary.mu2.median,
        prediction.summary.transition_scale.median,
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    mu1: f64,
    mu2: f64,
    transition_scale: f64,
    n: usize,
    censor_prob: f64,
    player: &str,
    out_dir: &Path,
    seed: u64,
) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Invalid("need at least one innings".into()));
    }
    let params = BattingParams::new(mu1, mu2, transition_scale)?;
    let censor = CensorModel::new(censor_prob).map_err(CliError::from)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let records = simulate_career(&params, n, censor, &mut rng);
    let career = career_summary(&records).expect("simulated career is non-empty");

    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::json!({
            "mu1": mu1,
            "mu2": mu2,
            "L": transition_scale,
            "n": n,
            "censor_prob": censor_prob,
            "player": player,
        }),
        seed,
    );
    let stem = sanitize_stem(player);
    let csv = serialize_innings(&[(player.to_string(), records)]);
    manifest.write_output(&out_dir.join(format!("{stem}.csv")), &csv)?;
    manifest.finalize(out_dir)?;
    println!(
        "{player}: {} innings, {} not-outs, {} runs, high score {}, average {}",
        career.innings,
        career.not_outs,
        career.runs,
        career.high_score,
        career.average_2dp().unwrap_or_else(|| "undefined".into()),
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_recover(
    mu1: f64,
    mu2: f64,
    transition_scale: f64,
    n: usize,
    repeats: usize,
    censor_prob: f64,
    out_dir: &Path,
    sampler: &SamplerArgs,
) -> Result<(), CliError> {
    if repeats == 0 {
        return Err(CliError::Invalid("need at least one repeat".into()));
    }
    let params = BattingParams::new(mu1, mu2, transition_scale)?;
    let censor = CensorModel::new(censor_prob).map_err(CliError::from)?;
    let report = recovery_experiment(&params, n, censor, &sampler.config(), repeats)?;

    let mut manifest = RunManifest::new(
        "recover",
        serde_json::json!({
            "mu1": mu1,
            "mu2": mu2,
            "L": transition_scale,
            "n": n,
            "repeats": repeats,
            "censor_prob": censor_prob,
            "particles": sampler.particles,
            "mcmc_steps": sampler.mcmc_steps,
        }),
        sampler.seed,
    );
    manifest.write_output(&out_dir.join("recovery.json"), &formats::to_json_pretty(&report))?;
    manifest.finalize(out_dir)?;
    println!(
        "coverage68 mu1 {:.2} mu2 {:.2} L {:.2} | coverage95 mu1 {:.2} mu2 {:.2} L {:.2}",
        report.coverage68[0],
        report.coverage68[1],
        report.coverage68[2],
        report.coverage95[0],
        report.coverage95[1],
        report.coverage95[2],
    );
    Ok(())
}
