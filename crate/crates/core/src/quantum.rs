//! Dense complex linear algebra over a handful of qubits.
//!
//! Basis ordering is big-endian: for three qubits the amplitudes run
//! `|000>, |001>, ..., |111>` and qubit 0 is the leftmost (most significant)
//! bit.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Tolerance for algebraic identities (normalization, unitarity).
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Tolerance for probability sums supplied by callers.
pub const PROBABILITY_TOL: f64 = 1e-9;
/// Outcomes less likely than this are treated as impossible.
pub const IMPOSSIBLE_OUTCOME: f64 = 1e-14;

fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Normalized vector of amplitudes over the computational basis.
#[derive(Clone, PartialEq)]
pub struct PureState {
    amps: Vec<Amplitude>,
    qubits: usize,
}

impl PureState {
    pub fn new(amps: Vec<Amplitude>) -> Result<Self> {
        let qubits = qubit_count(amps.len())?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { amps, qubits })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| Amplitude::new(a, 0.0)).collect())
    }

    /// Rescales `amps` to unit norm. Fails on the zero vector.
    pub fn normalized(mut amps: Vec<Amplitude>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::new(amps)
    }

    /// Computational basis state `|index>` in a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        qubit_count(dim)?;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amps = vec![Amplitude::new(0.0, 0.0); dim];
        amps[index] = Amplitude::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Parses a bit string such as `"011"` into the matching basis state.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let index = usize::from_str_radix(bits, 2)
            .map_err(|_| Error::Parse(format!("not a bit string: {bits:?}")))?;
        Self::basis(1 << bits.len(), index)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Amplitude {
        self.amps[index]
    }

    /// Amplitude on the basis state named by `bits`, e.g. `"110"`.
    pub fn amp_of(&self, bits: &str) -> Amplitude {
        assert_eq!(bits.len(), self.qubits, "label {bits:?} has wrong length");
        let index = usize::from_str_radix(bits, 2).expect("bit string");
        self.amps[index]
    }

    pub fn basis_label(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.qubits)
    }

    pub fn basis_labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.basis_label(i)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Result<Amplitude> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                list.entry(&format_args!("|{}>", self.basis_label(i)), a);
            }
        }
        list.finish()
    }
}

/// One term of an [`Ensemble`].
#[derive(Clone, Debug, PartialEq)]
pub enum Member {
    State(PureState),
    /// No photon left in the channel: zero overlap with every state.
    Vacuum,
}

impl Member {
    pub fn state(&self) -> Option<&PureState> {
        match self {
            Member::State(s) => Some(s),
            Member::Vacuum => None,
        }
    }
}

/// A weighted mixture of pure states (a density operator in disguise).
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, Member)>,
    dim: usize,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, Member)>) -> Result<Self> {
        let mut dim = None;
        for (w, m) in &members {
            if !(0.0..=1.0 + ALGEBRA_TOL).contains(w) {
                return Err(Error::InvalidProbabilities(format!(
                    "ensemble weight {w} outside [0, 1]"
                )));
            }
            if let Member::State(s) = m {
                match dim {
                    None => dim = Some(s.dim()),
                    Some(d) if d != s.dim() => {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: s.dim(),
                        })
                    }
                    _ => {}
                }
            }
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidProbabilities(format!(
                "ensemble weights sum to {total}"
            )));
        }
        let dim = dim.ok_or_else(|| {
            Error::InvalidProbabilities("ensemble has no non-vacuum member".into())
        })?;
        Ok(Self { members, dim })
    }

    pub fn pure(state: PureState) -> Self {
        let dim = state.dim();
        Self {
            members: vec![(1.0, Member::State(state))],
            dim,
        }
    }

    pub fn members(&self) -> &[(f64, Member)] {
        &self.members
    }

    /// Dimension shared by the non-vacuum members.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(w, _)| w).sum()
    }

    pub fn vacuum_weight(&self) -> f64 {
        self.members
            .iter()
            .filter(|(_, m)| matches!(m, Member::Vacuum))
            .map(|(w, _)| w)
            .sum()
    }

    /// Applies `f` to each non-vacuum member, keeping weights.
    pub fn try_map<F>(&self, mut f: F) -> Result<Ensemble>
    where
        F: FnMut(&PureState) -> Result<PureState>,
    {
        let members = self
            .members
            .iter()
            .map(|(w, m)| {
                Ok((
                    *w,
                    match m {
                        Member::State(s) => Member::State(f(s)?),
                        Member::Vacuum => Member::Vacuum,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(members)
    }
}

/// Square matrix satisfying `U^dagger U = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    // row-major
    entries: Vec<Amplitude>,
}

impl UnitaryMatrix {
    pub fn new(dim: usize, entries: Vec<Amplitude>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let m = Self { dim, entries };
        let dev = m.adjoint().matmul(&m).deviation_from_identity();
        if dev > ALGEBRA_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(m)
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            dim,
            entries.iter().map(|&x| Amplitude::new(x, 0.0)).collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Amplitude::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Amplitude::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    /// Permutation sending basis state `i` to `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        let mut entries = vec![Amplitude::new(0.0, 0.0); dim * dim];
        for (from, &to) in perm.iter().enumerate() {
            if to >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: to,
                });
            }
            entries[to * dim + from] = Amplitude::new(1.0, 0.0);
        }
        Self::new(dim, entries)
    }

    /// Single-qubit gate `gate` acting on qubit `target` of an `n`-qubit register.
    pub fn on_qubit(gate: &UnitaryMatrix, target: usize, qubits: usize) -> Result<Self> {
        if gate.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: gate.dim,
            });
        }
        if target >= qubits {
            return Err(Error::QubitOutOfRange {
                index: target,
                qubits,
            });
        }
        let mut out = Self::identity(1);
        for q in 0..qubits {
            let factor = if q == target {
                gate.clone()
            } else {
                Self::identity(2)
            };
            out = out.kron(&factor);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![Amplitude::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        Self { dim: n, entries }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut entries = vec![Amplitude::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == Amplitude::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        Self { dim: n, entries }
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        let dim = n * m;
        let mut entries = vec![Amplitude::new(0.0, 0.0); dim * dim];
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.entries[r1 * n + c1];
                for r2 in 0..m {
                    for c2 in 0..m {
                        entries[(r1 * m + r2) * dim + c1 * m + c2] = a * rhs.entries[r2 * m + c2];
                    }
                }
            }
        }
        Self { dim, entries }
    }

    /// Max entrywise distance from the identity.
    pub fn deviation_from_identity(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let ideal = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((self.entries[r * n + c] - ideal).norm());
            }
        }
        dev
    }
}

/// Kronecker product of two states, big-endian (`a` is the leftmost factor).
pub fn tensor(a: &PureState, b: &PureState) -> PureState {
    let amps = a
        .amps
        .iter()
        .flat_map(|x| b.amps.iter().map(move |y| x * y))
        .collect();
    PureState {
        amps,
        qubits: a.qubits + b.qubits,
    }
}

pub fn apply_unitary(u: &UnitaryMatrix, s: &PureState) -> Result<PureState> {
    if u.dim != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim,
            found: s.dim(),
        });
    }
    let n = u.dim;
    let amps = (0..n)
        .map(|r| (0..n).map(|c| u.entries[r * n + c] * s.amps[c]).sum())
        .collect();
    Ok(PureState {
        amps,
        qubits: s.qubits,
    })
}

/// Probability of `outcome` on qubit `qubit` and the renormalized state of
/// the remaining qubits (the measured qubit is removed).
pub fn project_qubit(s: &PureState, qubit: usize, outcome: u8) -> Result<(f64, PureState)> {
    if qubit >= s.qubits {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            qubits: s.qubits,
        });
    }
    if outcome > 1 {
        return Err(Error::InvalidParameter(format!(
            "measurement outcome must be 0 or 1, got {outcome}"
        )));
    }
    let shift = s.qubits - 1 - qubit;
    let low_mask = (1usize << shift) - 1;
    let kept: Vec<Amplitude> = (0..s.dim() / 2)
        .map(|rest| {
            let high = rest >> shift;
            let low = rest & low_mask;
            let index = (high << (shift + 1)) | ((outcome as usize) << shift) | low;
            s.amps[index]
        })
        .collect();
    let probability: f64 = kept.iter().map(|a| a.norm_sqr()).sum();
    if probability < IMPOSSIBLE_OUTCOME {
        return Err(Error::ImpossibleOutcome {
            qubit,
            outcome,
            probability,
        });
    }
    let norm = probability.sqrt();
    let post = PureState {
        amps: kept.into_iter().map(|a| a / norm).collect(),
        qubits: s.qubits - 1,
    };
    Ok((probability, post))
}

/// Entropy in bits, with `0 log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::InvalidProbabilities("empty distribution".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidProbabilities(format!(
            "negative or non-finite probability {p}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::InvalidProbabilities(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum())
}

/// Entropy of the average letter state `a^2 |0><0| + b^2 |1><1|`.
pub fn von_neumann_entropy_letter(alpha_sq: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha_sq) {
        return Err(Error::InvalidParameter(format!(
            "alpha^2 = {alpha_sq} outside [0, 1]"
        )));
    }
    shannon_entropy(&[alpha_sq, 1.0 - alpha_sq])
}

/// `sum_i w_i |<target|member_i>|^2`; vacuum members contribute nothing.
pub fn fidelity(target: &PureState, achieved: &Ensemble) -> Result<f64> {
    achieved
        .members
        .iter()
        .map(|(w, m)| match m {
            Member::State(s) => target.overlap(s).map(|o| w * o),
            Member::Vacuum => Ok(0.0),
        })
        .sum()
}
