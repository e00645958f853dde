use std::collections::BTreeMap;

use crate::coding::BlockLabel;
use crate::error::{Error, Result};

/// Detector channels D0 ("yes") through D6.
pub const DETECTORS: usize = 7;

const MERGED_HEADER: &str = "D4+D5";

/// Photon tallies `N_j^L` per codeword and detector.
///
/// When `merged_d45` is set, D4 holds the combined D4 and D5 count and D5 is
/// always zero; the CSV header then shows a single `D4+D5` column.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountRecord {
    counts: BTreeMap<BlockLabel, [u64; DETECTORS]>,
    merged_d45: bool,
}

impl CountRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: BlockLabel, row: [u64; DETECTORS]) {
        self.counts.insert(label, row);
    }

    pub fn get(&self, label: BlockLabel) -> Option<&[u64; DETECTORS]> {
        self.counts.get(&label)
    }

    pub fn count(&self, label: BlockLabel, detector: usize) -> u64 {
        self.counts.get(&label).map_or(0, |row| row[detector])
    }

    /// `sum_j N_j^L`
    pub fn total(&self, label: BlockLabel) -> u64 {
        self.counts.get(&label).map_or(0, |row| row.iter().sum())
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.values().flatten().sum()
    }

    pub fn labels(&self) -> impl Iterator<Item = BlockLabel> + '_ {
        self.counts.keys().copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = (BlockLabel, &[u64; DETECTORS])> + '_ {
        self.counts.iter().map(|(l, r)| (*l, r))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn is_merged(&self) -> bool {
        self.merged_d45
    }

    /// Folds D5 into D4, as when one APD serves both ports.
    pub fn merge_d45(&self) -> Self {
        let counts = self
            .counts
            .iter()
            .map(|(l, r)| {
                let mut r = *r;
                r[4] += r[5];
                r[5] = 0;
                (*l, r)
            })
            .collect();
        Self {
            counts,
            merged_d45: true,
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["label".to_string()];
        for j in 0..DETECTORS {
            match (self.merged_d45, j) {
                (true, 4) => h.push(MERGED_HEADER.to_string()),
                (true, 5) => {}
                _ => h.push(format!("D{j}")),
            }
        }
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows()
            .map(|(label, row)| {
                let mut out = vec![label.to_string()];
                for (j, n) in row.iter().enumerate() {
                    if !(self.merged_d45 && j == 5) {
                        out.push(n.to_string());
                    }
                }
                out
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for row in self.csv_rows() {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }

    /// Parses the output of [`CountRecord::to_csv`]. Rows whose first field is
    /// not a block label (e.g. a summary footer) end the table.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .clone();
        let merged_d45 = header.iter().any(|h| h == MERGED_HEADER);
        let expected = Self {
            counts: BTreeMap::new(),
            merged_d45,
        }
        .header();
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::Parse(format!("unexpected count header {header:?}")));
        }
        let mut record = Self {
            counts: BTreeMap::new(),
            merged_d45,
        };
        for row in reader.records() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            let Ok(label) = row.get(0).unwrap_or("").parse::<BlockLabel>() else {
                break;
            };
            if row.len() != expected.len() {
                return Err(Error::Parse(format!("row for {label} has {} fields", row.len())));
            }
            let values = row
                .iter()
                .skip(1)
                .map(|f| {
                    f.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("bad count {f:?}")))
                })
                .collect::<Result<Vec<u64>>>()?;
            let mut counts = [0u64; DETECTORS];
            let mut fields = values.into_iter();
            for (j, slot) in counts.iter_mut().enumerate() {
                if !(merged_d45 && j == 5) {
                    *slot = fields.next().expect("length checked");
                }
            }
            if record.counts.insert(label, counts).is_some() {
                return Err(Error::Parse(format!("duplicate label {label}")));
            }
        }
        Ok(record)
    }
}
