//! Single-photon linear-optics realization of the block code.
//!
//! One photon carries three qubits: its path (A, B, C, D) holds the first two
//! and its polarization (H, V) the third. Mode `(path, pol)` corresponds to
//! basis index `2 * path + pol`, so `(A,H) = |000>`, `(B,V) = |011>`,
//! `(C,H) = |100>` and so on.
//!
//! Circuits are lists of half-wave plates and polarizing beam splitters. Each
//! element is self-inverse, so the mirror image of a circuit is the same
//! elements in reverse order.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use crate::coding::{BlockLabel, Protocol, SourceParam};
use crate::error::{Error, Result};
use crate::quantum::{Amplitude, PureState, UnitaryMatrix, ALGEBRA_TOL, IMPOSSIBLE_OUTCOME};

pub const MODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Path {
    A,
    B,
    C,
    D,
}

impl Path {
    pub const ALL: [Path; 4] = [Path::A, Path::B, Path::C, Path::D];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Path::A),
            "B" => Ok(Path::B),
            "C" => Ok(Path::C),
            "D" => Ok(Path::D),
            _ => Err(Error::Parse(format!("unknown path {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// In the plane of the circuit, qubit value 0.
    H,
    /// Perpendicular to the plane, qubit value 1.
    V,
}

pub fn mode_index(path: Path, pol: Polarization) -> usize {
    2 * path.index() + pol as usize
}

/// Photon amplitudes over the eight path/polarization modes.
#[derive(Clone, Debug, PartialEq)]
pub struct OpticalState {
    amps: [Amplitude; MODES],
}

impl OpticalState {
    pub fn new(amps: [Amplitude; MODES]) -> Result<Self> {
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { amps })
    }

    /// A single photon in one mode.
    pub fn single(path: Path, pol: Polarization) -> Self {
        let mut amps = [Amplitude::new(0.0, 0.0); MODES];
        amps[mode_index(path, pol)] = Amplitude::new(1.0, 0.0);
        Self { amps }
    }

    pub fn from_pure_state(state: &PureState) -> Result<Self> {
        let amps: [Amplitude; MODES] =
            state
                .amps()
                .try_into()
                .map_err(|_| Error::DimensionMismatch {
                    expected: MODES,
                    found: state.dim(),
                })?;
        Self::new(amps)
    }

    pub fn to_pure_state(&self) -> PureState {
        PureState::new(self.amps.to_vec()).expect("optical state is normalized")
    }

    pub fn amps(&self) -> &[Amplitude; MODES] {
        &self.amps
    }

    pub fn amp(&self, path: Path, pol: Polarization) -> Amplitude {
        self.amps[mode_index(path, pol)]
    }

    pub fn path_probability(&self, path: Path) -> f64 {
        self.amp(path, Polarization::H).norm_sqr() + self.amp(path, Polarization::V).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Reads a state confined to paths A and B as a two-qubit message
    /// (path B/A is the first message qubit, polarization the second).
    pub fn channel_qubits(&self) -> Result<PureState> {
        self.check_channel_support()?;
        PureState::new(self.amps[..4].to_vec())
    }

    /// Inverse of [`OpticalState::channel_qubits`].
    pub fn from_channel_qubits(message: &PureState) -> Result<Self> {
        if message.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: message.dim(),
            });
        }
        let mut amps = [Amplitude::new(0.0, 0.0); MODES];
        amps[..4].copy_from_slice(message.amps());
        Self::new(amps)
    }

    fn check_channel_support(&self) -> Result<()> {
        let stray = self.path_probability(Path::C) + self.path_probability(Path::D);
        if stray > ALGEBRA_TOL {
            return Err(Error::Usage(format!(
                "channel state has probability {stray:e} outside paths A and B"
            )));
        }
        Ok(())
    }
}

/// Half-wave plate with its fast axis at `theta` to the vertical, inserted in
/// one path. Jones matrix on `(H, V)`: `[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WavePlate {
    pub theta: f64,
    pub path: Path,
}

impl WavePlate {
    pub fn jones(&self) -> [[f64; 2]; 2] {
        let (s, c) = (2.0 * self.theta).sin_cos();
        [[c, s], [s, -c]]
    }

    fn apply(&self, amps: &mut [Amplitude; MODES]) {
        let [[m00, m01], [m10, m11]] = self.jones();
        let h = mode_index(self.path, Polarization::H);
        let v = mode_index(self.path, Polarization::V);
        let (x, y) = (amps[h], amps[v]);
        amps[h] = x * m00 + y * m01;
        amps[v] = x * m10 + y * m11;
    }
}

/// Polarizing beam splitter joining two paths: H is transmitted (stays in
/// its path), V is reflected into the other path with phase +1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizingBeamSplitter {
    pub ports: [Path; 2],
}

impl PolarizingBeamSplitter {
    fn apply(&self, amps: &mut [Amplitude; MODES]) {
        let [p, q] = self.ports;
        amps.swap(
            mode_index(p, Polarization::V),
            mode_index(q, Polarization::V),
        );
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Element {
    Plate(WavePlate),
    Pbs(PolarizingBeamSplitter),
}

impl Element {
    pub fn plate(path: Path, theta: f64) -> Self {
        Element::Plate(WavePlate { theta, path })
    }

    pub fn pbs(p: Path, q: Path) -> Self {
        Element::Pbs(PolarizingBeamSplitter { ports: [p, q] })
    }

    pub fn apply(&self, amps: &mut [Amplitude; MODES]) {
        match self {
            Element::Plate(w) => w.apply(amps),
            Element::Pbs(b) => b.apply(amps),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Plate(w) => write!(f, "hwp {} {:?}", w.path, w.theta),
            Element::Pbs(b) => write!(f, "pbs {} {}", b.ports[0], b.ports[1]),
        }
    }
}

impl FromStr for Element {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("bad circuit element {line:?}"));
        match fields.as_slice() {
            ["hwp", path, theta] => {
                let theta: f64 = theta.parse().map_err(|_| bad())?;
                if !theta.is_finite() {
                    return Err(bad());
                }
                Ok(Element::plate(path.parse()?, theta))
            }
            ["pbs", p, q] => {
                let (p, q): (Path, Path) = (p.parse()?, q.parse()?);
                if p == q {
                    return Err(bad());
                }
                Ok(Element::pbs(p, q))
            }
            _ => Err(bad()),
        }
    }
}

/// Ordered list of optical elements.
///
/// The text form has one element per line, `hwp <path> <theta>` or
/// `pbs <path> <path>`; blank lines and `#` comments are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    elements: Vec<Element>,
}

impl Circuit {
    pub fn new(elements: Vec<Element>) -> Self {
        Self { elements }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn then(mut self, other: &Circuit) -> Self {
        self.elements.extend_from_slice(&other.elements);
        self
    }

    /// Mirror image: every element is its own inverse.
    pub fn inverse(&self) -> Self {
        Self {
            elements: self.elements.iter().rev().copied().collect(),
        }
    }

    pub fn apply_amps(&self, amps: &mut [Amplitude; MODES]) {
        for e in &self.elements {
            e.apply(amps);
        }
    }

    pub fn apply(&self, state: &OpticalState) -> OpticalState {
        let mut amps = state.amps;
        self.apply_amps(&mut amps);
        OpticalState { amps }
    }

    /// The 8x8 mode matrix of the whole circuit.
    pub fn unitary(&self) -> UnitaryMatrix {
        let mut entries = vec![Amplitude::new(0.0, 0.0); MODES * MODES];
        for col in 0..MODES {
            let mut amps = [Amplitude::new(0.0, 0.0); MODES];
            amps[col] = Amplitude::new(1.0, 0.0);
            self.apply_amps(&mut amps);
            for (row, a) in amps.iter().enumerate() {
                entries[row * MODES + col] = *a;
            }
        }
        UnitaryMatrix::new(MODES, entries).expect("optical elements are unitary")
    }

    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let elements = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        Ok(Self { elements })
    }
}

/// Detector index of the mirror-image circuit's "yes" port.
pub const D0_YES: usize = 0;

/// Outcome probabilities over D0 ("yes") and detectors D1..D6.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SevenOutcome {
    pub probs: [f64; 7],
}

impl SevenOutcome {
    pub fn d0_yes(&self) -> f64 {
        self.probs[D0_YES]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn scaled(mut self, weight: f64) -> Self {
        for p in &mut self.probs {
            *p *= weight;
        }
        self
    }

    pub fn add(mut self, other: &SevenOutcome) -> Self {
        for (p, q) in self.probs.iter_mut().zip(&other.probs) {
            *p += q;
        }
        self
    }

    pub fn max_abs_diff(&self, other: &SevenOutcome) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Detector reached by each output mode of the mirror-image preparation
/// circuit. The second-stage splitters dump paths B and D into D4 and D5,
/// the first-stage splitter dumps path C into D3, and the V component at
/// the mirror of the entry point goes to D6.
pub const TEST_PORTS: [usize; MODES] = [
    0, // (A,H)
    6, // (A,V)
    4, // (B,H)
    4, // (B,V)
    3, // (C,H)
    3, // (C,V)
    5, // (D,H)
    5, // (D,V)
];

/// Groups mode probabilities of the mirrored preparation's output into
/// detector outcomes.
pub fn port_outcomes(mode_probs: &[f64; MODES]) -> SevenOutcome {
    let mut out = SevenOutcome::default();
    for (mode, p) in mode_probs.iter().enumerate() {
        out.probs[TEST_PORTS[mode]] += p;
    }
    out
}

/// Plate angle that turns H into `a H + b V` for signed amplitude `b`.
/// Requires `|b| <= 1`.
pub fn theta_for_letter(beta_signed: f64) -> f64 {
    0.5 * beta_signed.asin()
}

/// Half-wave plate angle exchanging H and V.
pub const SWAP_ANGLE: f64 = FRAC_PI_4;

/// The three preparation stages, one per qubit.
///
/// Stage 1 rotates the entry photon and splits it into paths A (qubit 0) and
/// C (qubit 1); stage 2 does the same for each of those into A/B and C/D;
/// stage 3 rotates the polarization in all four paths. After each splitter
/// the reflected (V) light is turned back to H by a 45 degree plate.
pub fn prep_stages(param: &SourceParam, label: BlockLabel) -> [Circuit; 3] {
    let [t1, t2, t3] = label.signed_betas(param).map(theta_for_letter);
    use Path::*;
    [
        Circuit::new(vec![
            Element::plate(A, t1),
            Element::pbs(A, C),
            Element::plate(C, SWAP_ANGLE),
        ]),
        Circuit::new(vec![
            Element::plate(A, t2),
            Element::plate(C, t2),
            Element::pbs(A, B),
            Element::pbs(C, D),
            Element::plate(B, SWAP_ANGLE),
            Element::plate(D, SWAP_ANGLE),
        ]),
        Circuit::new(Path::ALL.iter().map(|&p| Element::plate(p, t3)).collect()),
    ]
}

pub fn prep_circuit(param: &SourceParam, label: BlockLabel) -> Circuit {
    let [s1, s2, s3] = prep_stages(param, label);
    s1.then(&s2).then(&s3)
}

/// Realizes the `(C,H) <-> (B,V)` exchange with one splitter and two plates.
pub fn coding_circuit() -> Circuit {
    Circuit::new(vec![
        Element::plate(Path::C, SWAP_ANGLE),
        Element::pbs(Path::B, Path::C),
        Element::plate(Path::C, SWAP_ANGLE),
    ])
}

/// Photon entering at the circuit's input: horizontally polarized in path A.
pub fn input_photon() -> OpticalState {
    OpticalState::single(Path::A, Polarization::H)
}

pub fn prep_stage(param: &SourceParam, label: BlockLabel) -> OpticalState {
    prep_circuit(param, label).apply(&input_photon())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodingOutput {
    /// Renormalized photon state on paths A and B, absent if the photon
    /// can never reach the channel.
    pub channel: Option<OpticalState>,
    pub success_prob: f64,
    /// Probabilities of a click in D1 (path C) and D2 (path D).
    pub fail_probs: (f64, f64),
}

pub fn coding_stage(state: &OpticalState) -> CodingOutput {
    let coded = coding_circuit().apply(state);
    let d1 = coded.path_probability(Path::C);
    let d2 = coded.path_probability(Path::D);
    let success_prob = coded.path_probability(Path::A) + coded.path_probability(Path::B);
    let channel = (success_prob >= IMPOSSIBLE_OUTCOME).then(|| {
        let norm = success_prob.sqrt();
        let mut amps = [Amplitude::new(0.0, 0.0); MODES];
        for (a, c) in amps[..4].iter_mut().zip(&coded.amps[..4]) {
            *a = c / norm;
        }
        OpticalState { amps }
    });
    CodingOutput {
        channel,
        success_prob,
        fail_probs: (d1, d2),
    }
}

/// Receiver's mirror of the coding section. The channel must occupy only
/// paths A and B.
pub fn decode_stage(channel: &OpticalState) -> Result<OpticalState> {
    channel.check_channel_support()?;
    Ok(coding_circuit().inverse().apply(channel))
}

/// Runs the mirror image of the preparation for codeword `label`. A perfectly
/// reconstructed block leaves as an H photon in path A (D0); everything else
/// lands in D3..D6.
pub fn fidelity_test(state: &OpticalState, param: &SourceParam, label: BlockLabel) -> SevenOutcome {
    let out = prep_circuit(param, label).inverse().apply(state);
    port_outcomes(&out.amps.map(|a| a.norm_sqr()))
}

/// Ideal single-photon run of the whole circuit: prepare, code, decode and
/// test. P1 leaves failures in D1/D2; P2 replaces each failure with an H
/// photon injected into channel path A.
pub fn pipeline(param: &SourceParam, label: BlockLabel, protocol: Protocol) -> Result<SevenOutcome> {
    let coded = coding_stage(&prep_stage(param, label));
    let (d1, d2) = coded.fail_probs;
    let success = match &coded.channel {
        Some(channel) => {
            fidelity_test(&decode_stage(channel)?, param, label).scaled(coded.success_prob)
        }
        None => SevenOutcome::default(),
    };
    match protocol {
        Protocol::P1 => {
            let mut out = success;
            out.probs[1] += d1;
            out.probs[2] += d2;
            Ok(out)
        }
        Protocol::P2 => {
            let injected = decode_stage(&input_photon())?;
            Ok(success.add(&fidelity_test(&injected, param, label).scaled(d1 + d2)))
        }
        Protocol::P3 => Err(Error::Usage(
            "the optical circuit implements P1 and P2 only".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{block_state, coding_unitary, mu_state};

    fn param(a2: f64) -> SourceParam {
        SourceParam::from_alpha_sq(a2).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_for_letter(0.0), 0.0);
        assert!((theta_for_letter(1.0) - FRAC_PI_4).abs() < 1e-15);
        let beta = (1.0f64 - 0.9046).sqrt();
        let theta = theta_for_letter(beta);
        assert!((beta - 0.30887).abs() < 1e-5);
        assert!((theta.to_degrees() - 9.0).abs() < 0.01);
        let plate = WavePlate {
            theta,
            path: Path::A,
        };
        let [[h_to_h, _], [h_to_v, _]] = plate.jones();
        assert!((h_to_h - 0.9046f64.sqrt()).abs() < 1e-12);
        assert!((h_to_v - beta).abs() < 1e-12);
    }

    #[test]
    fn prep_matches_block_state() {
        assert_eq!(prep_stage(&param(1.0), BlockLabel::ALL[3]), input_photon());
        for a2 in [0.9, 0.4] {
            let p = param(a2);
            for label in BlockLabel::all() {
                let optical = prep_stage(&p, label).to_pure_state();
                assert!(optical.max_abs_diff(&block_state(&p, label)) < 1e-12);
            }
        }
    }

    #[test]
    fn coding_circuit_is_the_coding_unitary() {
        let dev = coding_circuit()
            .unitary()
            .adjoint()
            .matmul(&coding_unitary())
            .deviation_from_identity();
        assert!(dev < 1e-12);
    }

    #[test]
    fn coding_stage_branches() {
        let p = param(0.9);
        for label in BlockLabel::all() {
            let out = coding_stage(&prep_stage(&p, label));
            let (d1, d2) = out.fail_probs;
            assert!((d1 + d2 - 0.028).abs() < 1e-12);
            assert!((out.success_prob - 0.972).abs() < 1e-12);
            let channel = out.channel.unwrap().channel_qubits().unwrap();
            assert!(channel.max_abs_diff(&mu_state(&p, label)) < 1e-12);
        }
        let trivial = coding_stage(&input_photon());
        assert_eq!(trivial.channel, Some(input_photon()));
        assert_eq!(trivial.fail_probs, (0.0, 0.0));
    }

    #[test]
    fn decode_stage_support() {
        assert_eq!(decode_stage(&input_photon()).unwrap(), input_photon());
        let stray = OpticalState::single(Path::C, Polarization::H);
        assert!(matches!(decode_stage(&stray), Err(Error::Usage(_))));
    }

    #[test]
    fn fidelity_test_on_exact_block() {
        let p = param(0.7);
        for label in BlockLabel::all() {
            let out = fidelity_test(&prep_stage(&p, label), &p, label);
            assert!((out.d0_yes() - 1.0).abs() < 1e-12);
            assert!((out.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pipeline_reproduces_f1() {
        let p = param(0.9);
        let f1: f64 = BlockLabel::all()
            .map(|l| pipeline(&p, l, Protocol::P1).unwrap().d0_yes())
            .sum::<f64>()
            / 8.0;
        assert!((f1 - 0.9448).abs() < 5e-5);
        for label in BlockLabel::all() {
            for proto in [Protocol::P1, Protocol::P2] {
                let out = pipeline(&p, label, proto).unwrap();
                assert!((out.total() - 1.0).abs() < 1e-10);
            }
        }
        assert!(pipeline(&p, BlockLabel::ALL[0], Protocol::P3).is_err());
    }

    #[test]
    fn pipeline_at_alpha_zero() {
        // every photon fails coding
        let out = pipeline(&param(0.0), BlockLabel::ALL[0], Protocol::P1).unwrap();
        assert!((out.probs[1] + out.probs[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_text_round_trip() {
        let c = prep_circuit(&param(0.9046), "+-+".parse().unwrap()).then(&coding_circuit());
        let text = c.dump();
        assert_eq!(text.lines().count(), c.elements().len());
        assert_eq!(text.parse::<Circuit>().unwrap(), c);
        let commented = "# header\n\nhwp A 0.25  # plate\npbs A C\n";
        let parsed: Circuit = commented.parse().unwrap();
        assert_eq!(parsed.elements().len(), 2);
        assert!("hwp E 0.1".parse::<Circuit>().is_err());
        assert!("pbs A A".parse::<Circuit>().is_err());
        assert!("mirror A".parse::<Circuit>().is_err());
        assert!("hwp A NaN".parse::<Circuit>().is_err());
    }
}
