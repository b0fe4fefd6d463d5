use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::CategoryPair;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: [&str; 6] = ["kind", "pair", "seed", "accuracy", "ci95", "rel_movement_mean"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Embedding-only learning from one exposure per token.
    Ks,
    /// Region sampling and inverse projection, no training.
    Projection,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Ks => "ks",
            ExperimentKind::Projection => "projection",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ks" => Ok(ExperimentKind::Ks),
            "projection" => Ok(ExperimentKind::Projection),
            _ => Err(Error::Parse(format!("unknown experiment kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub kind: ExperimentKind,
    pub pair: CategoryPair,
    pub seed: u64,
    pub accuracy: f64,
    pub ci95: f64,
    /// Mean relative movement of the pair's two tokens; absent for projection
    /// rows and when no token had a defined movement.
    pub rel_movement_mean: Option<f64>,
}

/// One row per (kind, pair, seed), kept sorted by that key.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    rows: Vec<ResultRow>,
}

impl ResultsTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the row with the same key.
    pub fn insert(&mut self, row: ResultRow) -> Result<()> {
        if !(0.0..=1.0).contains(&row.accuracy) {
            return Err(Error::Config(format!("accuracy {} outside [0, 1]", row.accuracy)));
        }
        let key = (row.kind, row.pair, row.seed);
        match self.rows.binary_search_by(|r| (r.kind, r.pair, r.seed).cmp(&key)) {
            Ok(i) => self.rows[i] = row,
            Err(i) => self.rows.insert(i, row),
        }
        Ok(())
    }

    pub fn rows(&self) -> &[ResultRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn of_kind(&self, kind: ExperimentKind) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(RESULTS_HEADER).expect("in-memory write");
        for r in &self.rows {
            let movement = r.rel_movement_mean.map(|m| format!("{m:.6}")).unwrap_or_default();
            w.write_record([
                r.kind.as_str().to_string(),
                r.pair.name(),
                r.seed.to_string(),
                format!("{:.6}", r.accuracy),
                format!("{:.6}", r.ci95),
                movement,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        if rd.headers()?.iter().ne(RESULTS_HEADER) {
            return Err(Error::Parse(format!("unexpected results header {:?}", rd.headers()?)));
        }
        let mut table = ResultsTable::new();
        for rec in rd.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| Error::Parse(format!("bad {} value {:?}", RESULTS_HEADER[i], &rec[i])))
            };
            table.insert(ResultRow {
                kind: rec[0].parse()?,
                pair: rec[1].parse()?,
                seed: rec[2].parse().map_err(|_| Error::Parse(format!("bad seed {:?}", &rec[2])))?,
                accuracy: num(3)?,
                ci95: num(4)?,
                rel_movement_mean: if rec[5].is_empty() { None } else { Some(num(5)?) },
            })?;
        }
        Ok(table)
    }
}

pub fn write_results_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv_string()).map_err(|e| Error::io(path, e))
}

pub fn read_results_csv(path: &Path) -> Result<ResultsTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ResultsTable::from_csv_str(&text)
}
