use std::fmt;

use crate::coding::BlockLabel;
use crate::error::{Error, Result};

use super::record::CountRecord;

/// A post-selected fidelity with its one-sigma statistical error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Detected events entering the estimate, all codewords.
    pub n_trials: u64,
}

impl FidelityEstimate {
    pub const CSV_HEADER: [&'static str; 3] = ["value", "std_error", "n_trials"];

    pub fn csv_fields(&self) -> [String; 3] {
        [
            self.value.to_string(),
            self.std_error.to_string(),
            self.n_trials.to_string(),
        ]
    }

    pub fn from_csv_fields(fields: &[&str]) -> Result<Self> {
        let [value, std_error, n_trials] = fields else {
            return Err(Error::Parse(format!(
                "expected 3 estimate fields, got {}",
                fields.len()
            )));
        };
        let float = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))
        };
        Ok(Self {
            value: float(value)?,
            std_error: float(std_error)?,
            n_trials: n_trials
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad count {n_trials:?}")))?,
        })
    }

    /// Number of standard errors separating this estimate from `reference`.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.std_error
    }
}

/// `F=0.933±0.006`: the error rounded to one significant figure (at least
/// three decimals), the value to the same precision.
impl fmt::Display for FidelityEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decimals = if self.std_error > 0.0 {
            (-self.std_error.log10().floor()).max(3.0) as usize
        } else {
            3
        };
        write!(
            f,
            "F={:.*}±{:.*}",
            decimals, self.value, decimals, self.std_error
        )
    }
}

fn label_totals(counts: &CountRecord) -> Result<Vec<(BlockLabel, f64)>> {
    BlockLabel::all()
        .map(|label| {
            if counts.get(label).is_none() {
                return Err(Error::Estimation(format!("no counts for codeword {label}")));
            }
            let total = counts.total(label);
            if total == 0 {
                return Err(Error::Estimation(format!(
                    "codeword {label} has zero detected events"
                )));
            }
            Ok((label, total as f64))
        })
        .collect()
}

/// P1 fidelity from one counting run:
/// `(1/8) sum_L N_0^L / sum_j N_j^L`, with binomial errors per codeword
/// combined in quadrature.
pub fn estimate_f1(counts: &CountRecord) -> Result<FidelityEstimate> {
    let mut value = 0.0;
    let mut variance = 0.0;
    for (label, n) in label_totals(counts)? {
        let f = counts.count(label, 0) as f64 / n;
        value += f / 8.0;
        variance += f * (1.0 - f) / n / 64.0;
    }
    Ok(FidelityEstimate {
        value,
        std_error: variance.sqrt(),
        n_trials: counts.grand_total(),
    })
}

/// P2 fidelity from the first-step counts plus the D0 counts of the second
/// step (H photons injected into the channel, one per coding failure):
/// `(1/8) sum_L (N_0^L + N_0^L(2)) / sum_j N_j^L`.
pub fn estimate_f2(counts: &CountRecord, second_step: &CountRecord) -> Result<FidelityEstimate> {
    if counts.labels().ne(second_step.labels()) {
        return Err(Error::Estimation(
            "first and second step cover different codewords".into(),
        ));
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    for (label, n) in label_totals(counts)? {
        let f = counts.count(label, 0) as f64 / n;
        let injected = second_step.total(label) as f64;
        let yes = second_step.count(label, 0) as f64;
        value += ((counts.count(label, 0) as f64 + yes) / n).min(1.0) / 8.0;
        let mut var = f * (1.0 - f) / n;
        if injected > 0.0 {
            let g = yes / injected;
            var += injected * g * (1.0 - g) / (n * n);
        }
        variance += var / 64.0;
    }
    Ok(FidelityEstimate {
        value,
        std_error: variance.sqrt(),
        n_trials: counts.grand_total() + second_step.grand_total(),
    })
}
