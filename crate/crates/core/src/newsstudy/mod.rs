//! Leaning of users who share political and sport news from three
//! outlets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{apply_threshold, ClassifierModel, PredLabel, Prediction};
use crate::corpus::{LineWarning, LoadReport};
use crate::error::{Error, Result};
use crate::textprep::{DfmKind, FeatureMatrix, SparseDfm};

const DEFAULT_PATTERNS: &str = include_str!("../../assets/url_patterns.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    Guardian,
    #[serde(rename = "BBC")]
    Bbc,
    Telegraph,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Guardian, Source::Bbc, Source::Telegraph];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Guardian => "Guardian",
            Source::Bbc => "BBC",
            Source::Telegraph => "Telegraph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NewsType {
    Political,
    Sport,
}

impl fmt::Display for NewsType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NewsType::Political => "Political",
            NewsType::Sport => "Sport",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlPattern {
    pub source: Source,
    #[serde(rename = "type")]
    pub newstype: NewsType,
    pub substring: String,
}

fn parse_patterns<R: Read>(r: R) -> Result<Vec<UrlPattern>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out: Vec<UrlPattern> = Vec::new();
    for row in rdr.deserialize::<UrlPattern>() {
        let p = row?;
        if p.substring.is_empty() {
            return Err(Error::parse("url patterns", "empty substring"));
        }
        if out.contains(&p) {
            return Err(Error::parse("url patterns", format!("duplicate pattern {}", p.substring)));
        }
        out.push(p);
    }
    Ok(out)
}

/// The outlet URL patterns used by default.
pub fn default_patterns() -> Vec<UrlPattern> {
    parse_patterns(DEFAULT_PATTERNS.as_bytes()).expect("bundled patterns parse")
}

pub fn load_patterns(path: &Path) -> Result<Vec<UrlPattern>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_patterns(f)
}

/// First pattern, in declared order, whose substring occurs in the URL
/// (case-insensitive).
pub fn match_url(url: &str, patterns: &[UrlPattern]) -> Option<(Source, NewsType)> {
    let lower = url.to_lowercase();
    patterns
        .iter()
        .find(|p| lower.contains(&p.substring.to_lowercase()))
        .map(|p| (p.source, p.newstype))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareEvent {
    pub user_id: String,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

pub fn parse_share_events<R: BufRead>(reader: R) -> Result<LoadReport<ShareEvent>> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<shares>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ShareEvent>(&line) {
            Ok(e) => records.push(e),
            Err(e) => warnings.push(LineWarning {
                line: i + 1,
                message: format!("malformed share event: {e}"),
            }),
        }
    }
    Ok(LoadReport { records, warnings })
}

pub fn load_share_events(path: &Path) -> Result<LoadReport<ShareEvent>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let report = parse_share_events(std::io::BufReader::new(f))?;
    for w in &report.warnings {
        log::warn!("{}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(report)
}

/// Text features of news users restricted to the training vocabulary.
#[derive(Debug, Clone)]
pub struct Projection {
    pub dfm: SparseDfm,
    /// Users left with no features after projection.
    pub empty_users: Vec<String>,
}

/// Drops features with total frequency below `min_total_freq` across all
/// users, then keeps only training columns, in training order.
pub fn project_features(
    docs: &BTreeMap<String, Vec<String>>,
    training_vocab: &[String],
    min_total_freq: usize,
) -> Result<Projection> {
    let mut totals: HashMap<&str, usize> = HashMap::new();
    for feats in docs.values() {
        for f in feats {
            *totals.entry(f.as_str()).or_insert(0) += 1;
        }
    }
    let col: HashMap<&str, usize> = training_vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut rows = Vec::with_capacity(docs.len());
    let mut empty_users = Vec::new();
    for (user, feats) in docs {
        let row: Vec<(usize, f64)> = feats
            .iter()
            .filter(|f| totals[f.as_str()] >= min_total_freq)
            .filter_map(|f| col.get(f.as_str()).map(|&c| (c, 1.0)))
            .collect();
        if row.is_empty() {
            empty_users.push(user.clone());
        }
        rows.push(row);
    }
    let dfm = SparseDfm::from_rows(DfmKind::Text, docs.keys().cloned().collect(), training_vocab.to_vec(), rows)?;
    Ok(Projection { dfm, empty_users })
}

/// Follow bits of news users on the training network columns.
pub fn project_network(friends: &BTreeMap<String, BTreeSet<String>>, training_cols: &[String]) -> Result<SparseDfm> {
    let col: HashMap<&str, usize> = training_cols.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let rows = friends
        .values()
        .map(|f| f.iter().filter_map(|a| col.get(a.as_str()).map(|&c| (c, 1.0))).collect())
        .collect();
    SparseDfm::from_rows(DfmKind::Network, friends.keys().cloned().collect(), training_cols.to_vec(), rows)
}

/// Fallback for users without usable text.
pub struct NetworkFallback<'a> {
    pub model: &'a ClassifierModel,
    pub features: &'a FeatureMatrix,
}

/// Predictions for every user in `users`. Users flagged as text-empty, or
/// missing from `features`, go through the fallback when it has a row for
/// them and are Unknown otherwise.
pub fn classify_sharers(
    users: &[String],
    model: &ClassifierModel,
    features: &FeatureMatrix,
    flagged: &BTreeSet<String>,
    fallback: Option<NetworkFallback<'_>>,
    tau: f64,
) -> Result<Vec<Prediction>> {
    let idx: HashMap<&str, usize> = features.row_ids().iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect();
    let fb_idx: HashMap<&str, usize> = fallback
        .as_ref()
        .map(|f| f.features.row_ids().iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect())
        .unwrap_or_default();
    let mut out = Vec::with_capacity(users.len());
    for u in users {
        let p = match idx.get(u.as_str()) {
            Some(&i) if !flagged.contains(u) => Some(model.predict(features.row(i))?),
            _ => match (&fallback, fb_idx.get(u.as_str())) {
                (Some(fb), Some(&j)) => Some(fb.model.predict(fb.features.row(j))?),
                _ => None,
            },
        };
        out.push(match p {
            Some(p) => Prediction {
                user_id: u.clone(),
                p_right: p,
                label: apply_threshold(p, tau),
            },
            None => Prediction {
                user_id: u.clone(),
                p_right: 0.5,
                label: PredLabel::Unknown,
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Each user at most once per (source, type) cell.
    #[default]
    Users,
    Shares,
}

pub const ROW_LABELS: [PredLabel; 3] = [PredLabel::Left, PredLabel::Right, PredLabel::Unknown];
pub const NEWS_TYPES: [NewsType; 2] = [NewsType::Political, NewsType::Sport];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsRow {
    pub newstype: NewsType,
    pub label: PredLabel,
    /// Guardian, BBC, Telegraph.
    pub counts: [usize; 3],
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsTable {
    pub rows: Vec<NewsRow>,
    pub unmatched_events: usize,
    /// Matched events whose user has no prediction.
    pub unclassified_events: usize,
}

fn source_col(s: Source) -> usize {
    Source::ALL.iter().position(|&x| x == s).expect("known source")
}

pub fn counts_table(
    events: &[ShareEvent],
    patterns: &[UrlPattern],
    predictions: &[Prediction],
    mode: CountMode,
) -> NewsTable {
    let labels: HashMap<&str, PredLabel> = predictions.iter().map(|p| (p.user_id.as_str(), p.label)).collect();
    let mut cells: BTreeMap<(NewsType, PredLabel), [usize; 3]> = BTreeMap::new();
    let mut seen: BTreeSet<(&str, Source, NewsType)> = BTreeSet::new();
    let (mut unmatched, mut unclassified) = (0, 0);
    for e in events {
        let Some((source, newstype)) = match_url(&e.url, patterns) else {
            unmatched += 1;
            continue;
        };
        let Some(&label) = labels.get(e.user_id.as_str()) else {
            unclassified += 1;
            continue;
        };
        if mode == CountMode::Users && !seen.insert((e.user_id.as_str(), source, newstype)) {
            continue;
        }
        cells.entry((newstype, label)).or_insert([0; 3])[source_col(source)] += 1;
    }
    table_from_cells(&cells, unmatched, unclassified)
}

pub fn table_from_cells(cells: &BTreeMap<(NewsType, PredLabel), [usize; 3]>, unmatched: usize, unclassified: usize) -> NewsTable {
    let mut rows = Vec::new();
    for t in NEWS_TYPES {
        for l in ROW_LABELS {
            let counts = cells.get(&(t, l)).copied().unwrap_or([0; 3]);
            rows.push(NewsRow {
                newstype: t,
                label: l,
                counts,
                total: counts.iter().sum(),
            });
        }
    }
    NewsTable {
        rows,
        unmatched_events: unmatched,
        unclassified_events: unclassified,
    }
}

impl NewsTable {
    pub fn row(&self, t: NewsType, l: PredLabel) -> &NewsRow {
        self.rows.iter().find(|r| r.newstype == t && r.label == l).expect("all rows present")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["type", "label", "Guardian", "BBC", "Telegraph", "Total"])?;
        for r in &self.rows {
            wtr.write_record([
                r.newstype.to_string(),
                r.label.as_str().to_string(),
                r.counts[0].to_string(),
                r.counts[1].to_string(),
                r.counts[2].to_string(),
                r.total.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<news table>", e))?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:<12}{:>10}{:>10}{:>10}{:>10}\n", "", "Guardian", "BBC", "Telegraph", "Total");
        for t in NEWS_TYPES {
            s.push_str(&format!("{t}\n"));
            for l in ROW_LABELS {
                let r = self.row(t, l);
                s.push_str(&format!(
                    "  {:<10}{:>10}{:>10}{:>10}{:>10}\n",
                    l.as_str(),
                    r.counts[0],
                    r.counts[1],
                    r.counts[2],
                    r.total
                ));
            }
        }
        s.push_str(&format!("unmatched share events: {}\n", self.unmatched_events));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_examples() {
        let p = default_patterns();
        assert_eq!(p.len(), 9);
        assert_eq!(match_url("https://www.bbc.co.uk/sport/football/123", &p), Some((Source::Bbc, NewsType::Sport)));
        assert_eq!(
            match_url("https://theguardian.com/politics/2018/sep/01/x", &p),
            Some((Source::Guardian, NewsType::Political))
        );
        assert_eq!(match_url("HTTPS://WWW.TELEGRAPH.CO.UK/Cricket/2018/09/02/x", &p), Some((Source::Telegraph, NewsType::Sport)));
        assert_eq!(match_url("https://example.com/a", &p), None);
    }

    #[test]
    fn projection_rules() {
        let docs: BTreeMap<String, Vec<String>> = [
            ("a", vec!["tea", "tea", "rare", "pier"]),
            ("b", vec!["tea", "pier", "pier", "new"]),
            ("c", vec!["new", "new", "rare"]),
        ]
        .into_iter()
        .map(|(u, f)| (u.to_string(), f.into_iter().map(String::from).collect()))
        .collect();
        let vocab: Vec<String> = ["pier", "rare", "tea", "zzz"].iter().map(|s| s.to_string()).collect();
        let p = project_features(&docs, &vocab, 3).unwrap();
        assert_eq!(p.dfm.col_ids(), vocab.as_slice());
        // "rare" has total 2, "new" is not in the training vocabulary
        assert_eq!(p.dfm.dense_row(0), vec![1.0, 0.0, 2.0, 0.0]);
        assert_eq!(p.dfm.dense_row(1), vec![2.0, 0.0, 1.0, 0.0]);
        assert_eq!(p.empty_users, vec!["c".to_string()]);
    }

    #[test]
    fn table_six_row_sum() {
        let mut cells = BTreeMap::new();
        cells.insert((NewsType::Political, PredLabel::Left), [1223, 240, 161]);
        let t = table_from_cells(&cells, 0, 0);
        assert_eq!(t.row(NewsType::Political, PredLabel::Left).total, 1624);
        assert_eq!(t.row(NewsType::Sport, PredLabel::Right).total, 0);
    }

    #[test]
    fn users_counted_once_per_cell() {
        let p = default_patterns();
        let ev = |u: &str, url: &str| ShareEvent { user_id: u.into(), url: url.into(), timestamp: None };
        let events = vec![
            ev("u1", "https://www.bbc.co.uk/sport/a"),
            ev("u1", "https://www.bbc.co.uk/sport/a"),
            ev("u2", "https://www.bbc.co.uk/sport/b"),
            ev("u2", "https://example.com"),
        ];
        let preds = vec![
            Prediction { user_id: "u1".into(), p_right: 0.9, label: PredLabel::Right },
            Prediction { user_id: "u2".into(), p_right: 0.5, label: PredLabel::Unknown },
        ];
        let t = counts_table(&events, &p, &preds, CountMode::Users);
        assert_eq!(t.row(NewsType::Sport, PredLabel::Right).counts, [0, 1, 0]);
        assert_eq!(t.row(NewsType::Sport, PredLabel::Unknown).counts, [0, 1, 0]);
        assert_eq!(t.unmatched_events, 1);
        let t = counts_table(&events, &p, &preds, CountMode::Shares);
        assert_eq!(t.row(NewsType::Sport, PredLabel::Right).counts, [0, 2, 0]);
        let empty = counts_table(&[], &p, &preds, CountMode::Users);
        assert!(empty.rows.iter().all(|r| r.total == 0));
    }
}
