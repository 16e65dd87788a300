//! File-based ingestion: tweet and friend JSONL, VAA CSV, election periods.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::types::{ElectionPeriod, Tweet, VaaResult, VaaSource};
use crate::error::{Error, Result};

const DEFAULT_PERIODS: &str = include_str!("../../assets/election_periods.json");

/// A skipped input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineWarning {
    pub line: usize,
    pub message: String,
}

/// Parsed records plus one warning per skipped line.
#[derive(Debug, Clone)]
pub struct LoadReport<T> {
    pub records: Vec<T>,
    pub warnings: Vec<LineWarning>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct RawTweet {
    user_id: Option<String>,
    timestamp: Option<String>,
    text: Option<String>,
    lang: Option<String>,
}

pub fn load_tweets(path: &Path) -> Result<LoadReport<Tweet>> {
    let report = parse_tweets(open(path)?)?;
    for w in &report.warnings {
        log::warn!("{}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(report)
}

/// Parses tweet JSONL. Blank lines are ignored; lines that are not JSON or
/// lack `user_id`, `timestamp` or a non-blank `text` are skipped with a
/// warning.
pub fn parse_tweets<R: BufRead>(reader: R) -> Result<LoadReport<Tweet>> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<tweets>", e))?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut warn = |message: String| warnings.push(LineWarning { line: lineno, message });
        let raw: RawTweet = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                warn(format!("malformed JSON: {e}"));
                continue;
            }
        };
        let (Some(user_id), Some(ts), Some(text)) = (raw.user_id, raw.timestamp, raw.text) else {
            warn("missing user_id, timestamp or text".into());
            continue;
        };
        if text.trim().is_empty() {
            warn("empty text".into());
            continue;
        }
        let timestamp = match DateTime::parse_from_rfc3339(&ts) {
            Ok(t) => t.with_timezone(&Utc),
            Err(e) => {
                warn(format!("bad timestamp {ts:?}: {e}"));
                continue;
            }
        };
        records.push(Tweet {
            user_id,
            timestamp,
            text,
            detected_language: raw.lang,
        });
    }
    Ok(LoadReport { records, warnings })
}

pub fn write_tweets<W: Write>(mut w: W, tweets: &[Tweet]) -> Result<()> {
    for t in tweets {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n").map_err(|e| Error::io("<tweets>", e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriendsRecord {
    pub user_id: String,
    pub friends: Vec<String>,
}

pub fn load_friends(path: &Path) -> Result<LoadReport<(String, BTreeSet<String>)>> {
    let report = parse_friends(open(path)?)?;
    for w in &report.warnings {
        log::warn!("{}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(report)
}

pub fn parse_friends<R: BufRead>(reader: R) -> Result<LoadReport<(String, BTreeSet<String>)>> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<friends>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<FriendsRecord>(&line) {
            Ok(r) => records.push((r.user_id, r.friends.into_iter().collect())),
            Err(e) => warnings.push(LineWarning {
                line: i + 1,
                message: format!("malformed friends record: {e}"),
            }),
        }
    }
    Ok(LoadReport { records, warnings })
}

pub fn write_friends<W: Write>(mut w: W, friends: &BTreeMap<String, BTreeSet<String>>) -> Result<()> {
    for (user_id, f) in friends {
        let rec = FriendsRecord {
            user_id: user_id.clone(),
            friends: f.iter().cloned().collect(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n").map_err(|e| Error::io("<friends>", e))?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct VaaRow {
    user_id: String,
    vaa: String,
    party: String,
    #[serde(rename = "match")]
    score: f64,
}

pub fn load_vaa(path: &Path) -> Result<LoadReport<VaaResult>> {
    let report = parse_vaa(open(path)?)?;
    for w in &report.warnings {
        log::warn!("{}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(report)
}

/// Parses `user_id,vaa,party,match` rows and groups them per (user, VAA).
/// Rows with unknown VAA names or scores outside [0,100] are skipped.
pub fn parse_vaa<R: Read>(reader: R) -> Result<LoadReport<VaaResult>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut grouped: BTreeMap<(String, VaaSource), BTreeMap<String, f64>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (i, row) in rdr.deserialize::<VaaRow>().enumerate() {
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                warnings.push(LineWarning { line, message: e.to_string() });
                continue;
            }
        };
        let source: VaaSource = match row.vaa.parse() {
            Ok(s) => s,
            Err(e) => {
                warnings.push(LineWarning { line, message: e });
                continue;
            }
        };
        if !(row.score.is_finite() && (0.0..=100.0).contains(&row.score)) {
            warnings.push(LineWarning {
                line,
                message: format!("match score {} outside [0,100]", row.score),
            });
            continue;
        }
        grouped
            .entry((row.user_id, source))
            .or_default()
            .insert(row.party, row.score);
    }
    let records = grouped
        .into_iter()
        .map(|((user_id, vaa_source), party_matches)| VaaResult {
            user_id,
            vaa_source,
            party_matches,
        })
        .collect();
    Ok(LoadReport { records, warnings })
}

pub fn write_vaa<W: Write>(w: W, results: &[VaaResult]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in results {
        for (party, &score) in &r.party_matches {
            wtr.serialize(VaaRow {
                user_id: r.user_id.clone(),
                vaa: r.vaa_source.as_str().to_owned(),
                party: party.clone(),
                score,
            })?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<vaa>", e))?;
    Ok(())
}

/// GE2010, GE2015 and GE2017 windows.
pub fn default_periods() -> Vec<ElectionPeriod> {
    serde_json::from_str(DEFAULT_PERIODS).expect("bundled periods parse")
}

pub fn load_periods(path: &Path) -> Result<Vec<ElectionPeriod>> {
    let periods: Vec<ElectionPeriod> = serde_json::from_reader(open(path)?)?;
    if let Some(p) = periods.iter().find(|p| p.end < p.start) {
        return Err(Error::InvalidInput(format!("period {} ends before it starts", p.name)));
    }
    Ok(periods)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_valid_lines() {
        let data = r#"{"user_id":"u1","timestamp":"2015-05-01T10:00:00Z","text":"hello"}
{"user_id":"u1","timestamp":"2015-05-02T10:00:00+01:00","text":"vote","lang":"en"}
{"user_id":"u2","timestamp":"2016-01-01T00:00:00Z","text":"pier"}
"#;
        let r = parse_tweets(data.as_bytes()).unwrap();
        assert_eq!(r.records.len(), 3);
        assert!(r.warnings.is_empty());
        assert_eq!(r.records[1].detected_language.as_deref(), Some("en"));
    }

    #[test]
    fn missing_text_is_skipped_with_line_number() {
        let data = "{\"user_id\":\"u1\",\"timestamp\":\"2015-05-01T10:00:00Z\",\"text\":\"ok\"}\n{\"user_id\":\"u1\",\"timestamp\":\"2015-05-01T10:00:00Z\"}\n";
        let r = parse_tweets(data.as_bytes()).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].line, 2);
    }

    #[test]
    fn malformed_and_blank_text() {
        let data = "not json\n{\"user_id\":\"u\",\"timestamp\":\"x\",\"text\":\"a\"}\n{\"user_id\":\"u\",\"timestamp\":\"2015-05-01T10:00:00Z\",\"text\":\"  \"}\n";
        let r = parse_tweets(data.as_bytes()).unwrap();
        assert!(r.records.is_empty());
        assert_eq!(r.warnings.iter().map(|w| w.line).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn empty_input() {
        let r = parse_tweets("".as_bytes()).unwrap();
        assert!(r.records.is_empty() && r.warnings.is_empty());
    }

    #[test]
    fn unreadable_file_is_fatal() {
        assert!(matches!(load_tweets(Path::new("/nonexistent/tweets.jsonl")), Err(Error::Io { .. })));
    }

    #[test]
    fn vaa_rows_group_per_platform() {
        let data = "user_id,vaa,party,match\nu1,ISW,Labour,80\nu1,ISW,Conservative,20\nu1,VM,Labour,70\nu1,XX,Labour,1\nu2,ISW,Labour,150\n";
        let r = parse_vaa(data.as_bytes()).unwrap();
        assert_eq!(r.records.len(), 2);
        assert_eq!(r.records[0].party_matches.len(), 2);
        assert_eq!(r.warnings.len(), 2);
    }

    #[test]
    fn default_windows() {
        let p = default_periods();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].name, "GE2010");
        assert_eq!(p[0].start.to_string(), "2010-04-12");
        assert_eq!(p[0].end.to_string(), "2010-06-06");
        let inside: DateTime<Utc> = "2010-06-06T23:59:59Z".parse().unwrap();
        let outside: DateTime<Utc> = "2010-06-07T00:00:00Z".parse().unwrap();
        assert!(p[0].contains(&inside) && !p[0].contains(&outside));
    }
}
