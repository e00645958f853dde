//! Three-letter block coding into a two-qubit channel.
//!
//! Letters are the non-orthogonal states `a|0> + (+/-b)|1>`. A block of three
//! letters is rotated by a permutation unitary that swaps `|100>` and `|011>`,
//! after which the leftmost qubit is measured. Outcome `0` leaves the
//! compressed two-qubit message; outcome `1` is a coding failure, handled
//! differently by each [`Protocol`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quantum::{
    apply_unitary, fidelity, project_qubit, tensor, Amplitude, Ensemble, Member, PureState,
    UnitaryMatrix,
};

/// Source parameter: amplitude `alpha` of `|0>` in each letter state, with
/// `beta = sqrt(1 - alpha^2) >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceParam {
    alpha_sq: f64,
    alpha: f64,
    beta: f64,
}

impl SourceParam {
    pub fn from_alpha_sq(alpha_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha_sq) {
            return Err(Error::InvalidParameter(format!(
                "alpha^2 = {alpha_sq} outside [0, 1]"
            )));
        }
        Ok(Self {
            alpha_sq,
            alpha: alpha_sq.sqrt(),
            beta: (1.0 - alpha_sq).sqrt(),
        })
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} outside [0, 1]"
            )));
        }
        Self::from_alpha_sq(alpha * alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }

    pub fn beta_sq(&self) -> f64 {
        1.0 - self.alpha_sq
    }

    /// Probability that the coding measurement finds the first qubit in `|0>`:
    /// `a^4 (1 + 2 b^2)`.
    pub fn success_probability(&self) -> f64 {
        let (a2, b2) = (self.alpha_sq(), self.beta_sq());
        a2 * a2 * (1.0 + 2.0 * b2)
    }

    /// `b^4 (1 + 2 a^2)`
    pub fn failure_probability(&self) -> f64 {
        let (a2, b2) = (self.alpha_sq(), self.beta_sq());
        b2 * b2 * (1.0 + 2.0 * a2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LetterSign {
    Plus,
    Minus,
}

impl LetterSign {
    pub fn signed_beta(self, param: &SourceParam) -> f64 {
        match self {
            LetterSign::Plus => param.beta(),
            LetterSign::Minus => -param.beta(),
        }
    }

    fn symbol(self) -> char {
        match self {
            LetterSign::Plus => '+',
            LetterSign::Minus => '-',
        }
    }
}

/// Which of the eight three-letter codewords is sent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockLabel(pub [LetterSign; 3]);

impl BlockLabel {
    /// `+++, ++-, +-+, +--, -++, -+-, --+, ---`
    pub const ALL: [BlockLabel; 8] = {
        use LetterSign::{Minus as M, Plus as P};
        [
            BlockLabel([P, P, P]),
            BlockLabel([P, P, M]),
            BlockLabel([P, M, P]),
            BlockLabel([P, M, M]),
            BlockLabel([M, P, P]),
            BlockLabel([M, P, M]),
            BlockLabel([M, M, P]),
            BlockLabel([M, M, M]),
        ]
    };

    pub fn all() -> impl Iterator<Item = BlockLabel> {
        Self::ALL.into_iter()
    }

    /// Position in [`BlockLabel::ALL`].
    pub fn index(self) -> usize {
        self.0
            .iter()
            .fold(0, |acc, s| (acc << 1) | (*s == LetterSign::Minus) as usize)
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn signs(self) -> [LetterSign; 3] {
        self.0
    }

    pub fn signed_betas(self, param: &SourceParam) -> [f64; 3] {
        self.0.map(|s| s.signed_beta(param))
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for BlockLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<LetterSign> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(LetterSign::Plus),
                '-' => Ok(LetterSign::Minus),
                _ => Err(Error::Parse(format!("bad block label {s:?}"))),
            })
            .collect::<Result<_>>()?;
        let signs: [LetterSign; 3] = signs
            .try_into()
            .map_err(|_| Error::Parse(format!("block label {s:?} must have 3 letters")))?;
        Ok(BlockLabel(signs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Failure is reported; nothing reaches the receiver.
    P1,
    /// Failure is replaced by `|00>` on the channel.
    P2,
    /// Third letter dropped, receiver substitutes `|0>`.
    P3,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::P1, Protocol::P2, Protocol::P3];
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Protocol::P1 => "P1",
            Protocol::P2 => "P2",
            Protocol::P3 => "P3",
        };
        f.write_str(name)
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(Protocol::P1),
            "P2" | "2" => Ok(Protocol::P2),
            "P3" | "3" => Ok(Protocol::P3),
            _ => Err(Error::Parse(format!("unknown protocol {s:?}"))),
        }
    }
}

/// Channel state produced by the sender.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodeResult {
    pub channel: Ensemble,
    pub success_prob: f64,
}

/// Output of the drop-the-third-letter protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct P3Encoding {
    pub channel: PureState,
    pub reconstructed: PureState,
}

pub fn letter_state(param: &SourceParam, sign: LetterSign) -> PureState {
    PureState::from_real(&[param.alpha(), sign.signed_beta(param)])
        .expect("letter state is normalized by construction")
}

pub fn block_state(param: &SourceParam, label: BlockLabel) -> PureState {
    let [l1, l2, l3] = label.signs();
    let pair = tensor(&letter_state(param, l1), &letter_state(param, l2));
    tensor(&pair, &letter_state(param, l3))
}

/// Permutation swapping `|100>` and `|011>`; identity elsewhere.
pub fn coding_unitary() -> UnitaryMatrix {
    let mut perm: Vec<usize> = (0..8).collect();
    perm.swap(0b100, 0b011);
    UnitaryMatrix::permutation(&perm).expect("transposition is unitary")
}

/// Compressed message for the success branch.
pub fn mu_state(param: &SourceParam, label: BlockLabel) -> PureState {
    let [b1, b2, b3] = label.signed_betas(param);
    let norm = (1.0 + 2.0 * param.beta_sq()).sqrt();
    // |00>, |01>, |10>, |11>
    PureState::from_real(&[param.alpha() / norm, b3 / norm, b2 / norm, b1 / norm])
        .expect("mu state is normalized by construction")
}

/// Residual two-qubit state of the failure branch; undefined at `beta = 0`.
pub fn nu_state(param: &SourceParam, label: BlockLabel) -> Result<PureState> {
    if param.beta() == 0.0 {
        return Err(Error::UndefinedLetterState);
    }
    let [b1, b2, b3] = label.signed_betas(param);
    let a = param.alpha();
    let norm = param.beta_sq() * (1.0 + 2.0 * param.alpha_sq()).sqrt();
    PureState::from_real(&[
        a * b2 * b3 / norm,
        a * b1 * b3 / norm,
        a * b1 * b2 / norm,
        b1 * b2 * b3 / norm,
    ])
}

/// Runs the sender's side of `protocol` (P1 or P2) on codeword `label`.
pub fn encode(param: &SourceParam, label: BlockLabel, protocol: Protocol) -> Result<EncodeResult> {
    let failure = match protocol {
        Protocol::P1 => Member::Vacuum,
        Protocol::P2 => Member::State(PureState::from_bits("00")?),
        Protocol::P3 => {
            return Err(Error::Usage(
                "protocol P3 has no coding measurement; use encode_p3".into(),
            ))
        }
    };
    let rotated = apply_unitary(&coding_unitary(), &block_state(param, label))?;
    let (success_prob, message) = match project_qubit(&rotated, 0, 0) {
        Ok(found) => found,
        // alpha = 0: the success branch carries no weight
        Err(Error::ImpossibleOutcome { .. }) => (0.0, mu_state(param, label)),
        Err(e) => return Err(e),
    };
    let channel = Ensemble::new(vec![
        (success_prob, Member::State(message)),
        (1.0 - success_prob, failure),
    ])?;
    Ok(EncodeResult {
        channel,
        success_prob,
    })
}

/// Receiver: append `|0>` on the left and undo the coding unitary.
pub fn decode(channel: &Ensemble) -> Result<Ensemble> {
    if channel.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: channel.dim(),
        });
    }
    let inverse = coding_unitary().adjoint();
    let zero = PureState::from_bits("0")?;
    channel.try_map(|s| apply_unitary(&inverse, &tensor(&zero, s)))
}

pub fn encode_p3(param: &SourceParam, label: BlockLabel) -> P3Encoding {
    let [l1, l2, _] = label.signs();
    let channel = tensor(&letter_state(param, l1), &letter_state(param, l2));
    let reconstructed = tensor(&channel, &PureState::basis(2, 0).expect("|0>"));
    P3Encoding {
        channel,
        reconstructed,
    }
}

/// Closed-form average fidelity.
pub fn analytic_fidelity(param: &SourceParam, protocol: Protocol) -> f64 {
    let (a2, b2) = (param.alpha_sq(), param.beta_sq());
    let f1 = a2.powi(4) * (1.0 + 2.0 * b2).powi(2);
    match protocol {
        Protocol::P1 => f1,
        Protocol::P2 => f1 + a2.powi(3) * b2 * b2 * (1.0 + 2.0 * a2),
        Protocol::P3 => a2,
    }
}

/// Fidelity of the decoded state with codeword `label`, by explicit
/// encode / decode / overlap.
pub fn label_fidelity(param: &SourceParam, label: BlockLabel, protocol: Protocol) -> Result<f64> {
    let target = block_state(param, label);
    match protocol {
        Protocol::P3 => target.overlap(&encode_p3(param, label).reconstructed),
        _ => {
            let encoded = encode(param, label, protocol)?;
            fidelity(&target, &decode(&encoded.channel)?)
        }
    }
}

/// Codeword-averaged fidelity computed through the full state pipeline.
pub fn numeric_fidelity(param: &SourceParam, protocol: Protocol) -> Result<f64> {
    let total = BlockLabel::all()
        .map(|label| label_fidelity(param, label, protocol))
        .sum::<Result<f64>>()?;
    Ok(total / 8.0)
}

/// `a^2 sqrt(1+2b^2) |0>|mu> + b^2 sqrt(1+2a^2) |1>|nu>`, assembled from the
/// branch states rather than by applying the unitary.
pub fn branch_decomposition(param: &SourceParam, label: BlockLabel) -> Result<PureState> {
    let zero = PureState::from_bits("0")?;
    let one = PureState::from_bits("1")?;
    let success = tensor(&zero, &mu_state(param, label));
    let success_amp = param.alpha_sq() * (1.0 + 2.0 * param.beta_sq()).sqrt();
    let failure_amp = param.beta_sq() * (1.0 + 2.0 * param.alpha_sq()).sqrt();
    let mut amps: Vec<Amplitude> = success.amps().iter().map(|a| a * success_amp).collect();
    if failure_amp > 0.0 {
        let failure = tensor(&one, &nu_state(param, label)?);
        for (a, f) in amps.iter_mut().zip(failure.amps()) {
            *a += f * failure_amp;
        }
    }
    PureState::new(amps)
}
