use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::coding::{BlockLabel, SourceParam};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::optics::SevenOutcome;

use super::record::{CountRecord, DETECTORS};
use super::{outcome_distribution, second_step_distribution, DetectorConfig, ImperfectionConfig};

/// Photons per independently seeded work item.
pub const CHUNK_SIZE: u64 = 1 << 16;

const DARK_LANE: u64 = (1 << 40) - 1;
const MATCHING_LANE: u64 = (1 << 40) - 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    First = 1,
    Second = 2,
}

/// One ChaCha stream per (step, codeword, lane); lanes are photon chunks or
/// the dark-count / photon-matching draws.
fn stream(seed: u64, step: Step, label: BlockLabel, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((step as u64) << 48) | ((label.index() as u64) << 40) | lane);
    rng
}

/// Mean dark counts per detector when `trials` photons are sent: the dark
/// rate times the time those photons take to arrive.
pub fn dark_count_mean(config: &DetectorConfig, trials: u64) -> f64 {
    config.dark_rate * trials as f64 / config.signal_rate
}

/// Independent Poisson dark counts for the seven detector channels.
pub fn dark_count_model<R: Rng + ?Sized>(
    config: &DetectorConfig,
    trials: u64,
    rng: &mut R,
) -> [u64; DETECTORS] {
    let mean = dark_count_mean(config, trials);
    if !(mean > 0.0) {
        return [0; DETECTORS];
    }
    let poisson = Poisson::new(mean).expect("positive finite mean");
    std::array::from_fn(|_| poisson.sample(rng) as u64)
}

struct Cumulative([f64; DETECTORS]);

impl Cumulative {
    fn new(dist: &SevenOutcome) -> Self {
        let mut acc = 0.0;
        let mut cdf = dist.probs.map(|p| {
            acc += p.max(0.0);
            acc
        });
        // absorb rounding so that every uniform draw lands somewhere
        for v in cdf.iter_mut() {
            *v /= acc;
        }
        cdf[DETECTORS - 1] = f64::INFINITY;
        Self(cdf)
    }

    fn pick(&self, u: f64) -> usize {
        self.0.iter().position(|&c| u < c).expect("last bin is unbounded")
    }
}

/// Counts detected photons among `photons` single-photon trials.
fn sample_photons(
    cdf: &Cumulative,
    efficiency: f64,
    photons: u64,
    seed: u64,
    step: Step,
    label: BlockLabel,
    exec: Execution,
) -> [u64; DETECTORS] {
    let chunks = photons.div_ceil(CHUNK_SIZE);
    let partial = exec.map_indexed(chunks as usize, |chunk| {
        let mut rng = stream(seed, step, label, chunk as u64);
        let n = CHUNK_SIZE.min(photons - chunk as u64 * CHUNK_SIZE);
        let mut counts = [0u64; DETECTORS];
        for _ in 0..n {
            // both draws are always taken so runs differing only in
            // efficiency see the same photon outcomes
            let outcome = cdf.pick(rng.random::<f64>());
            let detected = rng.random::<f64>() < efficiency;
            counts[outcome] += detected as u64;
        }
        counts
    });
    partial.into_iter().fold([0; DETECTORS], |mut acc, c| {
        for (a, x) in acc.iter_mut().zip(c) {
            *a += x;
        }
        acc
    })
}

fn with_dark_counts(
    mut counts: [u64; DETECTORS],
    config: &DetectorConfig,
    photons: u64,
    seed: u64,
    step: Step,
    label: BlockLabel,
) -> [u64; DETECTORS] {
    let dark = dark_count_model(config, photons, &mut stream(seed, step, label, DARK_LANE));
    for (c, d) in counts.iter_mut().zip(dark) {
        *c += d;
    }
    counts
}

pub fn simulate_counts(
    param: &SourceParam,
    config: &DetectorConfig,
    imperfections: &ImperfectionConfig,
    trials_per_label: u64,
    seed: u64,
) -> Result<CountRecord> {
    simulate_counts_with(
        param,
        config,
        imperfections,
        trials_per_label,
        seed,
        Execution::default(),
    )
}

/// First (P1) counting run: `trials_per_label` photons per codeword.
/// Identical output for either execution strategy.
pub fn simulate_counts_with(
    param: &SourceParam,
    config: &DetectorConfig,
    imperfections: &ImperfectionConfig,
    trials_per_label: u64,
    seed: u64,
    exec: Execution,
) -> Result<CountRecord> {
    config.validate()?;
    imperfections.validate()?;
    if trials_per_label == 0 {
        return Err(Error::EmptyRun);
    }
    let mut record = CountRecord::new();
    for label in BlockLabel::all() {
        let cdf = Cumulative::new(&outcome_distribution(param, label, imperfections));
        let signal = sample_photons(
            &cdf,
            config.efficiency,
            trials_per_label,
            seed,
            Step::First,
            label,
            exec,
        );
        let row = with_dark_counts(signal, config, trials_per_label, seed, Step::First, label);
        record.insert(label, row);
    }
    Ok(record)
}

pub fn simulate_second_step(
    param: &SourceParam,
    first: &CountRecord,
    config: &DetectorConfig,
    imperfections: &ImperfectionConfig,
    seed: u64,
) -> Result<CountRecord> {
    simulate_second_step_with(
        param,
        first,
        config,
        imperfections,
        seed,
        Execution::default(),
    )
}

/// Second step of P2: for each codeword, H photons are injected straight
/// into the decoder until the detected total matches `N_1^L + N_2^L` of the
/// first run, up to a uniform relative error of
/// `second_step_count_accuracy`.
pub fn simulate_second_step_with(
    param: &SourceParam,
    first: &CountRecord,
    config: &DetectorConfig,
    imperfections: &ImperfectionConfig,
    seed: u64,
    exec: Execution,
) -> Result<CountRecord> {
    config.validate()?;
    imperfections.validate()?;
    let mut record = CountRecord::new();
    for label in first.labels() {
        let target = (first.count(label, 1) + first.count(label, 2)) as f64;
        let accuracy = imperfections.second_step_count_accuracy;
        let mismatch = if accuracy > 0.0 {
            stream(seed, Step::Second, label, MATCHING_LANE).random_range(-accuracy..=accuracy)
        } else {
            0.0
        };
        let photons = if config.efficiency > 0.0 {
            (target * (1.0 + mismatch) / config.efficiency).round() as u64
        } else {
            0
        };
        let cdf = Cumulative::new(&second_step_distribution(param, label, imperfections));
        let signal = sample_photons(
            &cdf,
            config.efficiency,
            photons,
            seed,
            Step::Second,
            label,
            exec,
        );
        let row = with_dark_counts(signal, config, photons, seed, Step::Second, label);
        record.insert(label, row);
    }
    Ok(record)
}
