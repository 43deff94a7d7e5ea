//! Match datasets: ingestion, validation, per-pair tallies and splitting.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{CompetitorId, MatchRecord, Outcome};

/// On-disk dataset encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Jsonl,
}

impl DataFormat {
    /// Guess from a file extension; defaults to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => DataFormat::Jsonl,
            _ => DataFormat::Csv,
        }
    }
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DataFormat::Csv),
            "jsonl" => Ok(DataFormat::Jsonl),
            other => Err(Error::validation(format!("unknown format `{other}` (expected csv or jsonl)"))),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Csv => "csv",
            DataFormat::Jsonl => "jsonl",
        })
    }
}

/// Head-to-head record of one competitor against another.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairTally {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
}

impl PairTally {
    pub fn total(&self) -> u64 {
        self.wins + self.losses + self.ties
    }

    /// Wins with ties counted as half a win.
    pub fn half_credit_wins(&self) -> f64 {
        self.wins as f64 + 0.5 * self.ties as f64
    }

    pub fn half_credit_losses(&self) -> f64 {
        self.losses as f64 + 0.5 * self.ties as f64
    }
}

/// Per-competitor sums over all opponents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CompetitorTotals {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
}

impl CompetitorTotals {
    pub fn played(&self) -> u64 {
        self.wins + self.losses + self.ties
    }
}

/// Immutable match log plus roster and dense pairwise tallies.
///
/// The roster is kept in ascending id order, and that order defines the
/// index used by every matrix-valued computation downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    roster: Vec<CompetitorId>,
    index: HashMap<CompetitorId, usize>,
    matches: Vec<MatchRecord>,
    // row-major n*n: wins[i*n + j] = times i beat j
    wins: Vec<u64>,
    ties: Vec<u64>,
}

impl Dataset {
    /// Builds a dataset whose roster is exactly the competitors appearing in `matches`.
    pub fn from_matches(matches: Vec<MatchRecord>) -> Result<Self> {
        let roster: BTreeSet<CompetitorId> =
            matches.iter().flat_map(|m| [m.first.clone(), m.second.clone()]).collect();
        Self::with_roster(roster, matches)
    }

    /// Builds a dataset over an explicit roster, which may include competitors
    /// without matches.
    pub fn with_roster(roster: impl IntoIterator<Item = CompetitorId>, mut matches: Vec<MatchRecord>) -> Result<Self> {
        let roster: Vec<CompetitorId> = roster.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: HashMap<CompetitorId, usize> =
            roster.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let n = roster.len();
        let mut wins = vec![0u64; n * n];
        let mut ties = vec![0u64; n * n];

        matches.sort_by_key(|m| m.sequence);
        let mut seen = BTreeSet::new();
        for m in &matches {
            if m.first == m.second {
                return Err(Error::validation(format!(
                    "self-match for competitor `{}` at sequence {}",
                    m.first, m.sequence
                )));
            }
            if !seen.insert(m.sequence) {
                return Err(Error::validation(format!("duplicate match sequence {}", m.sequence)));
            }
            let a = *index.get(&m.first).ok_or_else(|| Error::UnknownCompetitor(m.first.clone()))?;
            let b = *index.get(&m.second).ok_or_else(|| Error::UnknownCompetitor(m.second.clone()))?;
            match m.outcome {
                Outcome::FirstWins => wins[a * n + b] += 1,
                Outcome::SecondWins => wins[b * n + a] += 1,
                Outcome::Tie => {
                    ties[a * n + b] += 1;
                    ties[b * n + a] += 1;
                }
            }
        }
        Ok(Self { roster, index, matches, wins, ties })
    }

    pub fn roster(&self) -> &[CompetitorId] {
        &self.roster
    }

    pub fn matches(&self) -> &[MatchRecord] {
        &self.matches
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn n_competitors(&self) -> usize {
        self.roster.len()
    }

    pub fn index_of(&self, id: &CompetitorId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require_index(&self, id: &CompetitorId) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownCompetitor(id.clone()))
    }

    /// Record of roster member `i` against roster member `j` (by index).
    pub fn tally(&self, i: usize, j: usize) -> PairTally {
        let n = self.roster.len();
        PairTally { wins: self.wins[i * n + j], losses: self.wins[j * n + i], ties: self.ties[i * n + j] }
    }

    pub fn tally_by_id(&self, i: &CompetitorId, j: &CompetitorId) -> Result<PairTally> {
        Ok(self.tally(self.require_index(i)?, self.require_index(j)?))
    }

    pub fn totals(&self, i: usize) -> CompetitorTotals {
        let mut t = CompetitorTotals::default();
        for j in 0..self.roster.len() {
            if j == i {
                continue;
            }
            let p = self.tally(i, j);
            t.wins += p.wins;
            t.losses += p.losses;
            t.ties += p.ties;
        }
        t
    }

    /// Roster members that took part in no match.
    pub fn unplayed(&self) -> Vec<CompetitorId> {
        (0..self.roster.len())
            .filter(|&i| self.totals(i).played() == 0)
            .map(|i| self.roster[i].clone())
            .collect()
    }

    /// Loads a dataset from disk. Match order follows file order.
    pub fn load(path: impl AsRef<Path>, format: DataFormat) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        Self::read(file, format)
    }

    pub fn read<R: Read>(reader: R, format: DataFormat) -> Result<Self> {
        let matches = match format {
            DataFormat::Csv => read_csv(reader)?,
            DataFormat::Jsonl => read_jsonl(reader)?,
        };
        Self::from_matches(matches)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: DataFormat) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        self.write(&mut w, format)?;
        w.flush()?;
        Ok(())
    }

    pub fn write<W: Write>(&self, writer: W, format: DataFormat) -> Result<()> {
        match format {
            DataFormat::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
                w.write_record(["first", "second", "outcome"]).map_err(csv_io)?;
                for m in &self.matches {
                    w.write_record([m.first.as_str(), m.second.as_str(), m.outcome.token()]).map_err(csv_io)?;
                }
                w.flush()?;
            }
            DataFormat::Jsonl => {
                let mut writer = writer;
                for m in &self.matches {
                    let row = JsonRow {
                        first: m.first.as_str().to_owned(),
                        second: m.second.as_str().to_owned(),
                        outcome: m.outcome.token().to_owned(),
                    };
                    serde_json::to_writer(&mut writer, &row).map_err(std::io::Error::from)?;
                    writer.write_all(b"\n")?;
                }
            }
        }
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn parse_row(first: &str, second: &str, outcome: &str, line: usize, sequence: u64) -> Result<MatchRecord> {
    let parse_err = |message: String| Error::Parse { line, message };
    let first = CompetitorId::new(first).map_err(|_| parse_err("empty `first` field".into()))?;
    let second = CompetitorId::new(second).map_err(|_| parse_err("empty `second` field".into()))?;
    let outcome = outcome.parse::<Outcome>().map_err(parse_err)?;
    if first == second {
        return Err(Error::validation(format!("line {line}: self-match for competitor `{first}`")));
    }
    MatchRecord::new(first, second, outcome, sequence)
}

fn read_csv<R: Read>(reader: R) -> Result<Vec<MatchRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    match records.next() {
        None => return Ok(Vec::new()),
        Some(header) => {
            let header = header.map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
            let cols: Vec<&str> = header.iter().collect();
            if cols != ["first", "second", "outcome"] {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `first,second,outcome`, found `{}`", cols.join(",")),
                });
            }
        }
    }
    let mut out = Vec::new();
    for record in records {
        let line = out.len() + 2;
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(line);
        if record.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected 3 fields, found {}", record.len()) });
        }
        let seq = out.len() as u64;
        out.push(parse_row(&record[0], &record[1], &record[2], line, seq)?);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    first: String,
    second: String,
    outcome: String,
}

fn read_jsonl<R: Read>(reader: R) -> Result<Vec<MatchRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow =
            serde_json::from_str(line).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        let seq = out.len() as u64;
        out.push(parse_row(&row.first, &row.second, &row.outcome, line_no, seq)?);
    }
    Ok(out)
}

/// Random match-level partition into train and test halves.
///
/// `train` receives `round(train_fraction * len)` matches. Both halves keep
/// the full roster and the original sequence order.
pub fn split_dataset(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::validation(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    if d.len() < 2 {
        return Err(Error::validation(format!("need at least 2 matches to split, found {}", d.len())));
    }
    let n_train = (train_fraction * d.len() as f64).round() as usize;
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_train = vec![false; d.len()];
    for &i in &idx[..n_train] {
        is_train[i] = true;
    }
    let (train, test): (Vec<_>, Vec<_>) =
        d.matches.iter().zip(&is_train).partition(|(_, &t)| t);
    let strip = |v: Vec<(&MatchRecord, &bool)>| v.into_iter().map(|(m, _)| m.clone()).collect::<Vec<_>>();
    Ok((
        Dataset::with_roster(d.roster.iter().cloned(), strip(train))?,
        Dataset::with_roster(d.roster.iter().cloned(), strip(test))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<Dataset> {
        Dataset::read(text.as_bytes(), DataFormat::Csv)
    }

    #[test]
    fn loads_and_tallies_four_rows() {
        let d = csv("first,second,outcome\nA,B,first\nA,B,tie\nB,C,second\nA,C,first\n").unwrap();
        let ids: Vec<_> = d.roster().iter().map(|c| c.as_str()).collect();
        assert_eq!(ids, ["A", "B", "C"]);
        let ab = d.tally_by_id(&"A".into(), &"B".into()).unwrap();
        assert_eq!(ab, PairTally { wins: 1, losses: 0, ties: 1 });
        assert_eq!(d.tally_by_id(&"C".into(), &"B".into()).unwrap().wins, 1);
        assert_eq!(d.tally_by_id(&"A".into(), &"C".into()).unwrap().wins, 1);
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn header_only_is_empty() {
        let d = csv("first,second,outcome\n").unwrap();
        assert!(d.is_empty());
        assert_eq!(d.n_competitors(), 0);
    }

    #[test]
    fn self_match_is_validation_error() {
        assert!(matches!(csv("first,second,outcome\nA,A,first\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn unknown_token_is_parse_error() {
        let err = csv("first,second,outcome\nA,B,first\nA,B,draw\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(csv("first,second,outcome\nA,B,FIRST\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn wrong_header_and_arity() {
        assert!(matches!(csv("a,b,c\nA,B,first\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(csv("first,second,outcome\nA,B\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn crlf_accepted() {
        let d = csv("first,second,outcome\r\nA,B,first\r\nB,A,tie\r\n").unwrap();
        assert_eq!(d.len(), 2);
        let j = Dataset::read(
            "{\"first\":\"A\",\"second\":\"B\",\"outcome\":\"second\"}\r\n\r\n".as_bytes(),
            DataFormat::Jsonl,
        )
        .unwrap();
        assert_eq!(j.tally_by_id(&"B".into(), &"A".into()).unwrap().wins, 1);
    }

    #[test]
    fn jsonl_errors() {
        let bad = Dataset::read("{\"first\":\"A\",\"second\":\"B\"}\n".as_bytes(), DataFormat::Jsonl);
        assert!(matches!(bad, Err(Error::Parse { line: 1, .. })));
        let selfm = Dataset::read(
            "{\"first\":\"A\",\"second\":\"A\",\"outcome\":\"tie\"}\n".as_bytes(),
            DataFormat::Jsonl,
        );
        assert!(matches!(selfm, Err(Error::Validation(_))));
    }

    #[test]
    fn split_sizes_and_errors() {
        let text: String = std::iter::once("first,second,outcome\n".to_owned())
            .chain((0..100).map(|i| format!("m{},m{},first\n", i % 7, (i % 7) + 1)))
            .collect();
        let d = csv(&text).unwrap();
        let (train, test) = split_dataset(&d, 0.75, 42).unwrap();
        assert_eq!((train.len(), test.len()), (75, 25));
        assert_eq!(train.roster(), d.roster());
        assert_eq!(test.roster(), d.roster());
        assert!(split_dataset(&d, 1.0, 0).is_err());
        assert!(split_dataset(&d, 0.0, 0).is_err());
        let tiny = csv("first,second,outcome\nA,B,first\n").unwrap();
        assert!(split_dataset(&tiny, 0.5, 0).is_err());
    }

    #[test]
    fn split_four_matches_half() {
        let d = csv("first,second,outcome\nA,B,first\nB,C,first\nC,D,tie\nA,D,second\n").unwrap();
        let (train, test) = split_dataset(&d, 0.5, 0).unwrap();
        assert_eq!((train.len(), test.len()), (2, 2));
        let mut seqs: Vec<u64> = train.matches().iter().chain(test.matches()).map(|m| m.sequence).collect();
        seqs.sort();
        assert_eq!(seqs, [0, 1, 2, 3]);
    }
}
