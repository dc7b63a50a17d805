//! Innings-file parsing and career-record arithmetic.
//!
//! The on-disk format is a UTF-8 CSV of `player,score` rows, one row per
//! innings in chronological order, with an optional `player,score` header and
//! `#` comment lines. A trailing `*` on the score marks a not-out innings
//! (standard cricket notation, e.g. `400*`). Non-batting tokens (`DNB`,
//! `TDNB`, `absent`, `sub`) are skipped and counted rather than dropped
//! silently.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::InningsRecord;

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("line {line}: malformed score token '{token}'")]
    MalformedScore { line: u64, token: String },
    #[error("line {line}: expected 2 fields (player,score), found {found}")]
    WrongFieldCount { line: u64, found: usize },
    #[error("line {line}: empty player name")]
    EmptyPlayer { line: u64 },
    #[error("csv framing error: {0}")]
    Framing(String),
    #[error("career summary needs at least one innings")]
    EmptyCareer,
}

/// Tokens that mark a row without a batting innings.
const SKIP_TOKENS: [&str; 4] = ["dnb", "tdnb", "absent", "sub"];

/// Parsed innings grouped per player, in first-appearance order, plus row
/// accounting: every data row is either parsed or skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInnings {
    pub players: Vec<(String, Vec<InningsRecord>)>,
    pub rows_parsed: usize,
    pub rows_skipped: usize,
}

impl ParsedInnings {
    pub fn get(&self, player: &str) -> Option<&[InningsRecord]> {
        self.players.iter().find(|(name, _)| name == player).map(|(_, r)| r.as_slice())
    }
}

/// Parse an innings CSV. Fails on the first malformed row, reporting its
/// line number.
pub fn parse_innings_file(content: &str) -> Result<ParsedInnings, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(content.as_bytes());

    let mut players: Vec<(String, Vec<InningsRecord>)> = Vec::new();
    let mut index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut rows_parsed = 0usize;
    let mut rows_skipped = 0usize;
    let mut first_row = true;

    for result in reader.records() {
        let record = result.map_err(|e| IngestError::Framing(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue; // blank line
        }
        if record.len() != 2 {
            return Err(IngestError::WrongFieldCount { line, found: record.len() });
        }
        let player = &record[0];
        let token = &record[1];
        if first_row {
            first_row = false;
            if player.eq_ignore_ascii_case("player") && token.eq_ignore_ascii_case("score") {
                continue; // optional header
            }
        }
        if player.is_empty() {
            return Err(IngestError::EmptyPlayer { line });
        }
        if SKIP_TOKENS.iter().any(|t| token.eq_ignore_ascii_case(t)) {
            rows_skipped += 1;
            continue;
        }
        let (digits, not_out) = match token.strip_suffix('*') {
            Some(rest) => (rest, true),
            None => (token as &str, false),
        };
        let score: u32 = digits.parse().map_err(|_| IngestError::MalformedScore {
            line,
            token: token.to_string(),
        })?;
        let slot = *index.entry(player.to_string()).or_insert_with(|| {
            players.push((player.to_string(), Vec::new()));
            players.len() - 1
        });
        players[slot].1.push(InningsRecord { score, not_out });
        rows_parsed += 1;
    }

    Ok(ParsedInnings { players, rows_parsed, rows_skipped })
}

/// Serialize innings back to the CSV format, with header. Inverse of
/// [`parse_innings_file`] on valid record lists.
pub fn serialize_innings(players: &[(String, Vec<InningsRecord>)]) -> String {
    let mut out = String::from("player,score\n");
    for (name, records) in players {
        for r in records {
            let star = if r.not_out { "*" } else { "" };
            writeln!(out, "{},{}{}", name, r.score, star).expect("write to string");
        }
    }
    out
}

/// Highest score of a career with its not-out flag; a not-out outranks a
/// dismissal at the same score, matching scorecard convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct HighScore {
    pub score: u32,
    pub not_out: bool,
}

impl std::fmt::Display for HighScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.score, if self.not_out { "*" } else { "" })
    }
}

/// Career aggregate in scorecard conventions. Matches and strike rate are
/// pass-through metadata that innings rows cannot supply.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CareerRecord {
    pub matches: Option<u32>,
    pub innings: usize,
    pub not_outs: usize,
    pub runs: u64,
    pub high_score: HighScore,
    /// Runs per dismissal; `None` when every innings was not-out.
    pub average: Option<f64>,
    pub strike_rate: Option<f64>,
    pub hundreds: usize,
    pub fifties: usize,
}

impl CareerRecord {
    /// Average truncated to two decimals, the published-scorecard convention
    /// (e.g. 3320 runs / 99 dismissals prints as 33.53, not 33.54).
    pub fn average_2dp(&self) -> Option<String> {
        self.average.map(|a| format!("{:.2}", (a * 100.0).floor() / 100.0))
    }
}

/// Compute the derivable career fields from innings records.
pub fn career_summary(records: &[InningsRecord]) -> Result<CareerRecord, IngestError> {
    if records.is_empty() {
        return Err(IngestError::EmptyCareer);
    }
    let innings = records.len();
    let not_outs = records.iter().filter(|r| r.not_out).count();
    let runs: u64 = records.iter().map(|r| r.score as u64).sum();
    let dismissals = innings - not_outs;
    let high_score = records
        .iter()
        .map(|r| HighScore { score: r.score, not_out: r.not_out })
        .max_by_key(|h| (h.score, h.not_out))
        .expect("non-empty records");
    Ok(CareerRecord {
        matches: None,
        innings,
        not_outs,
        runs,
        high_score,
        average: (dismissals > 0).then(|| runs as f64 / dismissals as f64),
        strike_rate: None,
        hundreds: records.iter().filter(|r| r.score >= 100).count(),
        fifties: records.iter().filter(|r| (50..100).contains(&r.score)).count(),
    })
}

/// Distinct player names in a parse result (sorted, for reporting).
pub fn player_names(parsed: &ParsedInnings) -> Vec<String> {
    parsed.players.iter().map(|(n, _)| n.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}
