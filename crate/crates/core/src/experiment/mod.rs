//! Virtual photon-counting experiment.
//!
//! Single photons are sent through the optical circuit one codeword at a
//! time. Interferometer imperfections enter as dephasing of the path
//! coherences, detectors lose photons with probability `1 - efficiency` and
//! add dark counts. The counts feed the post-selected fidelity estimators.

mod estimate;
mod record;
mod sampling;

pub use estimate::{estimate_f1, estimate_f2, FidelityEstimate};
pub use record::{CountRecord, DETECTORS};
pub use sampling::{
    dark_count_mean, dark_count_model, simulate_counts, simulate_counts_with,
    simulate_second_step, simulate_second_step_with, CHUNK_SIZE,
};

use num_complex::Complex64;

use crate::coding::{BlockLabel, SourceParam};
use crate::error::{Error, Result};
use crate::optics::{
    coding_stage, decode_stage, input_photon, port_outcomes, prep_stage,
    prep_stages, Circuit, OpticalState, Path, SevenOutcome, MODES,
};

/// Avalanche photodiode settings shared by all seven detector channels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    /// Quantum efficiency in `[0, 1]`.
    pub efficiency: f64,
    /// Dark counts per second, per detector.
    pub dark_rate: f64,
    /// Gate (integration) time in seconds.
    pub gate_time: f64,
    /// Photon flux entering the circuit, photons per second.
    pub signal_rate: f64,
}

impl DetectorConfig {
    /// Lossless, noiseless detectors.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_rate: 0.0,
            ..Self::typical()
        }
    }

    /// Silicon APDs behind an attenuated He-Ne source.
    pub fn typical() -> Self {
        Self {
            efficiency: 0.7,
            dark_rate: 100.0,
            gate_time: 5.0,
            signal_rate: 1e5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidParameter(format!(
                "efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        for (name, v) in [
            ("dark rate", self.dark_rate),
            ("gate time", self.gate_time),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} {v} must be >= 0")));
            }
        }
        if !(self.signal_rate > 0.0) || !self.signal_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "signal rate {} must be > 0",
                self.signal_rate
            )));
        }
        Ok(())
    }

    /// Photons sent per codeword during one gate.
    pub fn photons_per_gate(&self) -> u64 {
        (self.signal_rate * self.gate_time).round() as u64
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self::typical()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImperfectionConfig {
    /// Fringe visibility of each of the two interferometers.
    pub visibility: f64,
    /// Relative error of the photon-number matching in the second P2 step.
    pub second_step_count_accuracy: f64,
}

impl ImperfectionConfig {
    pub fn ideal() -> Self {
        Self {
            visibility: 1.0,
            second_step_count_accuracy: 0.0,
        }
    }

    pub fn typical() -> Self {
        Self {
            visibility: 0.98,
            second_step_count_accuracy: 0.03,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::InvalidParameter(format!(
                "visibility {} outside [0, 1]",
                self.visibility
            )));
        }
        if !(0.0..1.0).contains(&self.second_step_count_accuracy) {
            return Err(Error::InvalidParameter(format!(
                "count accuracy {} outside [0, 1)",
                self.second_step_count_accuracy
            )));
        }
        Ok(())
    }
}

impl Default for ImperfectionConfig {
    fn default() -> Self {
        Self::typical()
    }
}

/// Photon density matrix over the eight optical modes, row-major.
#[derive(Clone, Debug, PartialEq)]
struct ModeDensity {
    rho: [Complex64; MODES * MODES],
}

impl ModeDensity {
    fn pure(state: &OpticalState) -> Self {
        let a = state.amps();
        let mut rho = [Complex64::new(0.0, 0.0); MODES * MODES];
        for r in 0..MODES {
            for c in 0..MODES {
                rho[r * MODES + c] = a[r] * a[c].conj();
            }
        }
        Self { rho }
    }

    /// `rho -> U rho U^dagger`.
    fn evolve(&mut self, circuit: &Circuit) {
        // U rho: transform each column
        for c in 0..MODES {
            let mut col: [Complex64; MODES] = std::array::from_fn(|r| self.rho[r * MODES + c]);
            circuit.apply_amps(&mut col);
            for (r, v) in col.into_iter().enumerate() {
                self.rho[r * MODES + c] = v;
            }
        }
        // (U rho) U^dagger = (U (U rho)^dagger)^dagger: transform conjugated rows
        for r in 0..MODES {
            let mut row: [Complex64; MODES] =
                std::array::from_fn(|c| self.rho[r * MODES + c].conj());
            circuit.apply_amps(&mut row);
            for (c, v) in row.into_iter().enumerate() {
                self.rho[r * MODES + c] = v.conj();
            }
        }
    }

    /// Scales coherences between modes in different arms by `visibility`.
    fn dephase(&mut self, arm_of: impl Fn(Path) -> bool, visibility: f64) {
        let arm = |mode: usize| arm_of(Path::ALL[mode / 2]);
        for r in 0..MODES {
            for c in 0..MODES {
                if arm(r) != arm(c) {
                    self.rho[r * MODES + c] *= visibility;
                }
            }
        }
    }

    fn mode_probs(&self) -> [f64; MODES] {
        std::array::from_fn(|m| self.rho[m * MODES + m].re)
    }
}

/// Mirror-image fidelity test with partial coherence at the two points
/// where split arms recombine: the second-qubit arms (A,C vs B,D) and the
/// first-qubit arms (A,B vs C,D).
fn imperfect_fidelity_test(
    state: &OpticalState,
    param: &SourceParam,
    label: BlockLabel,
    visibility: f64,
) -> SevenOutcome {
    let [first, second, third] = prep_stages(param, label);
    let mut rho = ModeDensity::pure(state);
    rho.evolve(&third.inverse());
    rho.dephase(|p| matches!(p, Path::B | Path::D), visibility);
    rho.evolve(&second.inverse());
    rho.dephase(|p| matches!(p, Path::C | Path::D), visibility);
    rho.evolve(&first.inverse());
    port_outcomes(&rho.mode_probs())
}

/// Outcome distribution of one P1 photon for codeword `label`, including
/// coding failures (D1, D2). With `visibility = 1` this equals
/// [`crate::optics::pipeline`] for P1.
pub fn outcome_distribution(
    param: &SourceParam,
    label: BlockLabel,
    imperfections: &ImperfectionConfig,
) -> SevenOutcome {
    let coded = coding_stage(&prep_stage(param, label));
    let mut out = match &coded.channel {
        Some(channel) => {
            let decoded = decode_stage(channel).expect("coding output lies on paths A and B");
            imperfect_fidelity_test(&decoded, param, label, imperfections.visibility)
                .scaled(coded.success_prob)
        }
        None => SevenOutcome::default(),
    };
    out.probs[1] += coded.fail_probs.0;
    out.probs[2] += coded.fail_probs.1;
    out
}

/// Outcome distribution of a photon injected as H into channel path A and
/// sent through the decoder and fidelity test (second step of P2).
pub fn second_step_distribution(
    param: &SourceParam,
    label: BlockLabel,
    imperfections: &ImperfectionConfig,
) -> SevenOutcome {
    let decoded = decode_stage(&input_photon()).expect("path A is a channel path");
    imperfect_fidelity_test(&decoded, param, label, imperfections.visibility)
}
