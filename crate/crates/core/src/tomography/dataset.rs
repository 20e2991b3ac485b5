// SPDX-License-Identifier: Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::forward::DesignMatrix;
use super::reconstruct::{Reconstructor, SolverOptions};
use super::TomographySetting;
use crate::error::{Error, Result};
use crate::qop::DensityMatrix;
use crate::scalar::Real;
use crate::sequences::ReadoutError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shots {
    /// Noise-free expectation value.
    Exact,
    Finite(u64),
}

impl Shots {
    pub fn finite(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(Shots::Finite(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord<T: Real> {
    pub setting: TomographySetting<T>,
    /// Observed excited-state frequency in [0, 1].
    pub e_value: T,
    pub shots: Shots,
}

/// Counter-based stream selection: one ChaCha stream per setting index, so
/// every record's draw is independent of evaluation order.
fn setting_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn draw_frequency<T: Real>(p: T, shots: u64, rng: &mut ChaCha8Rng) -> T {
    let p = p.as_f64().clamp(0.0, 1.0);
    let k = Binomial::new(shots, p).expect("probability clamped to [0, 1]").sample(rng);
    T::lit(k as f64 / shots as f64)
}

/// Expectation values (exact or binomially sampled) for every design row.
///
/// Readout error, when given, maps the ideal probability before sampling.
pub fn simulate_dataset<T: Real>(
    rho: &DensityMatrix<T>,
    design: &DesignMatrix<T>,
    shots: Shots,
    seed: u64,
    readout: &ReadoutError<T>,
) -> Result<Vec<MeasurementRecord<T>>> {
    if shots == Shots::Finite(0) {
        return Err(Error::ZeroShots);
    }
    if rho.dim() != design.dim() {
        return Err(Error::DimensionMismatch { expected: design.dim(), found: rho.dim() });
    }
    let probs = design.predict(rho);
    Ok(design
        .settings()
        .par_iter()
        .zip(probs.par_iter())
        .enumerate()
        .map(|(i, (setting, &p))| {
            let p = readout.apply(p.max(T::zero()).min(T::one()));
            let e_value = match shots {
                Shots::Exact => p,
                Shots::Finite(n) => draw_frequency(p, n, &mut setting_rng(seed, i)),
            };
            MeasurementRecord { setting: *setting, e_value, shots }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary<T: Real> {
    pub std_dev: T,
    pub mean: T,
    pub fidelities: Vec<T>,
}

/// Parametric bootstrap of the reconstructed fidelity: each resample redraws
/// every record binomially around its observed value and reconstructs again.
pub fn bootstrap_error<T: Real>(
    records: &[MeasurementRecord<T>],
    design: &DesignMatrix<T>,
    resamples: usize,
    seed: u64,
    options: SolverOptions<T>,
) -> Result<BootstrapSummary<T>> {
    if resamples < 2 {
        return Err(Error::TooFewResamples(resamples));
    }
    if records.iter().any(|r| r.shots == Shots::Exact) {
        return Err(Error::ExactRecords);
    }
    if records.len() != design.len() {
        return Err(Error::DimensionMismatch { expected: design.len(), found: records.len() });
    }
    let weights = Reconstructor::weights_for(records, options.weighting);
    let solver = Reconstructor::new(design, weights, options)?;
    let fidelities = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let key = splitmix(seed ^ splitmix(r as u64));
            let values: Vec<T> = records
                .iter()
                .enumerate()
                .map(|(i, rec)| match rec.shots {
                    Shots::Finite(n) => draw_frequency(rec.e_value, n, &mut setting_rng(key, i)),
                    Shots::Exact => rec.e_value,
                })
                .collect();
            solver.solve(&values).map(|res| res.fidelity)
        })
        .collect::<Result<Vec<T>>>()?;
    let count = T::lit(fidelities.len() as f64);
    let mean = fidelities.iter().fold(T::zero(), |a, b| a + *b) / count;
    let var = fidelities.iter().fold(T::zero(), |a, f| a + (*f - mean) * (*f - mean)) / (count - T::one());
    Ok(BootstrapSummary { std_dev: var.sqrt(), mean, fidelities })
}
