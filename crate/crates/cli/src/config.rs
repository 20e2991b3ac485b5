// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration.
//!
//! Values are entered in laboratory units named in each key (GHz, MHz, μs,
//! ns) and converted to rad/ns and ns exactly once, in the `*_params`
//! methods. Missing keys fall back to the device constants below.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use magbell_core::dynamics::{DecoherenceParams, SystemParams};
use magbell_core::qop::FockTruncation;
use magbell_core::sequences::{ATDrive, ReadoutError, SimOptions};
use magbell_core::tomography::{NoiseModel, SettingGrid, Shots, SolverOptions, Weighting};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

fn ghz(f: f64) -> f64 {
    2.0 * PI * f
}

fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub magnon_frequency_ghz: f64,
    pub qubit_ge_frequency_ghz: f64,
    /// Carrier of the Autler-Townes drive; informational only.
    pub qubit_ef_frequency_ghz: f64,
    /// Dressed-qubit frequency while idle.
    pub work_point_ghz: f64,
    pub coupling_mhz: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            magnon_frequency_ghz: 5.927,
            qubit_ge_frequency_ghz: 5.847,
            qubit_ef_frequency_ghz: 5.493,
            work_point_ghz: 5.867,
            coupling_mhz: 5.59,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoherenceConfig {
    pub qubit_t1_us: f64,
    pub qubit_t2_us: f64,
    pub magnon_lifetime_ns: f64,
    pub thermal_occupation: f64,
}

impl Default for DecoherenceConfig {
    fn default() -> Self {
        Self { qubit_t1_us: 8.0, qubit_t2_us: 0.1, magnon_lifetime_ns: 250.0, thermal_occupation: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub n_max: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { n_max: FockTruncation::default().n_max() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Points per axis of the square displacement lattice.
    pub displacements_per_side: usize,
    pub displacement_step: f64,
    pub tau_max_ns: f64,
    pub tau_count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { displacements_per_side: 8, displacement_step: 0.25, tau_max_ns: 180.0, tau_count: 61 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotsSetting {
    Exact,
    Count(u64),
}

impl ShotsSetting {
    pub fn to_shots(self) -> Result<Shots, CliError> {
        match self {
            ShotsSetting::Exact => Ok(Shots::Exact),
            ShotsSetting::Count(n) => Shots::finite(n).map_err(|e| CliError::Config(format!("shots: {e}"))),
        }
    }
}

impl fmt::Display for ShotsSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShotsSetting::Exact => write!(f, "exact"),
            ShotsSetting::Count(n) => write!(f, "{n}"),
        }
    }
}

impl std::str::FromStr for ShotsSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(ShotsSetting::Exact);
        }
        match s.parse::<u64>() {
            Ok(0) => Err("shot count must be positive".into()),
            Ok(n) => Ok(ShotsSetting::Count(n)),
            Err(_) => Err(format!("expected a positive integer or \"exact\", got {s:?}")),
        }
    }
}

impl Serialize for ShotsSetting {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ShotsSetting::Exact => s.serialize_str("exact"),
            ShotsSetting::Count(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for ShotsSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(i64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) if n > 0 => Ok(ShotsSetting::Count(n as u64)),
            Raw::Count(n) => Err(serde::de::Error::custom(format!("shot count must be positive, got {n}"))),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForwardModelSetting {
    /// Lindblad when noise is on, ideal otherwise.
    Auto,
    Ideal,
    Lindblad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub shots: ShotsSetting,
    pub seed: u64,
    pub noise: bool,
    pub forward_model: ForwardModelSetting,
    /// P(read +| state g).
    pub readout_false_plus: f64,
    /// P(read g | state +).
    pub readout_false_ground: f64,
    pub bootstrap_resamples: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            shots: ShotsSetting::Count(1000),
            seed: 20170101,
            noise: true,
            forward_model: ForwardModelSetting::Auto,
            readout_false_plus: 0.0,
            readout_false_ground: 0.0,
            bootstrap_resamples: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingSetting {
    Uniform,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub rank_tolerance: f64,
    pub weighting: WeightingSetting,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::<f64>::default();
        Self {
            max_iterations: d.max_iterations,
            tolerance: d.tolerance,
            rank_tolerance: d.rank_tolerance,
            weighting: WeightingSetting::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub swap_tau_max_ns: f64,
    pub swap_points: usize,
    pub purity_tau_max_ns: f64,
    pub purity_points: usize,
    /// Qubit detuning range either side of the magnon line.
    pub crossing_span_mhz: f64,
    pub crossing_points: usize,
    pub truncations: Vec<usize>,
    /// Fock levels shown in the density-matrix plots.
    pub display_n_max: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            swap_tau_max_ns: 180.0,
            swap_points: 61,
            purity_tau_max_ns: 50.0,
            purity_points: 501,
            crossing_span_mhz: 40.0,
            crossing_points: 401,
            truncations: vec![1, 4, 6, 8, 10, 12],
            display_n_max: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub decoherence: DecoherenceConfig,
    pub truncation: TruncationConfig,
    pub grid: GridConfig,
    pub acquisition: AcquisitionConfig,
    pub solver: SolverConfig,
    pub sweeps: SweepConfig,
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<ShotsSetting>,
    pub noise: Option<bool>,
    pub forward_model: Option<ForwardModelSetting>,
}

/// False for NaN as well as for non-positive values.
fn positive(v: f64) -> bool {
    v > 0.0
}

fn linspace(max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|k| max * k as f64 / (count - 1) as f64).collect(),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.acquisition.seed = seed;
        }
        if let Some(shots) = o.shots {
            self.acquisition.shots = shots;
        }
        if let Some(noise) = o.noise {
            self.acquisition.noise = noise;
        }
        if let Some(fm) = o.forward_model {
            self.acquisition.forward_model = fm;
        }
    }

    /// Checks everything that can be checked without running a simulation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let s = &self.system;
        for (name, v) in [
            ("system.magnon_frequency_ghz", s.magnon_frequency_ghz),
            ("system.qubit_ge_frequency_ghz", s.qubit_ge_frequency_ghz),
            ("system.qubit_ef_frequency_ghz", s.qubit_ef_frequency_ghz),
            ("system.work_point_ghz", s.work_point_ghz),
            ("system.coupling_mhz", s.coupling_mhz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if s.work_point_ghz < s.qubit_ge_frequency_ghz {
            return bad("system.work_point_ghz lies below the g-e line; the upper dressed state cannot reach it".into());
        }
        self.system_params()?;
        self.decoherence_params()?;
        self.trunc()?;
        self.grid()?;
        self.acquisition.shots.to_shots()?;
        self.readout()?;
        let sw = &self.sweeps;
        if sw.swap_points < 6 || sw.purity_points < 2 || sw.crossing_points < 3 {
            return bad("sweeps need at least 6 swap, 2 purity and 3 crossing points".into());
        }
        for (name, v) in [
            ("sweeps.swap_tau_max_ns", sw.swap_tau_max_ns),
            ("sweeps.purity_tau_max_ns", sw.purity_tau_max_ns),
            ("sweeps.crossing_span_mhz", sw.crossing_span_mhz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if sw.truncations.is_empty() || sw.truncations.contains(&0) {
            return bad("sweeps.truncations must list n_max values of at least 1".into());
        }
        if self.solver.max_iterations == 0 || !positive(self.solver.tolerance) || self.solver.rank_tolerance.is_nan() || self.solver.rank_tolerance < 0.0 {
            return bad("solver needs max_iterations > 0, tolerance > 0, rank_tolerance ≥ 0".into());
        }
        if self.acquisition.bootstrap_resamples == 1 {
            return bad("acquisition.bootstrap_resamples must be 0 (off) or at least 2".into());
        }
        Ok(())
    }

    pub fn trunc(&self) -> Result<FockTruncation, CliError> {
        FockTruncation::new(self.truncation.n_max).map_err(|e| CliError::Config(format!("truncation.n_max: {e}")))
    }

    /// Device parameters in rad/ns with the qubit at its work point.
    pub fn system_params(&self) -> Result<SystemParams<f64>, CliError> {
        let s = &self.system;
        let drive = ATDrive::for_qubit_frequency(ghz(s.qubit_ge_frequency_ghz), ghz(s.work_point_ghz))
            .map_err(|e| CliError::Config(format!("system: {e}")))?;
        let omega_q = magbell_core::sequences::at_qubit_frequency(&drive);
        SystemParams::new(omega_q, ghz(s.magnon_frequency_ghz), mhz(s.coupling_mhz), self.trunc()?)
            .map_err(|e| CliError::Config(format!("system: {e}")))
    }

    /// Rates in 1/ns; an infinite lifetime switches the channel off.
    pub fn decoherence_params(&self) -> Result<DecoherenceParams<f64>, CliError> {
        let d = &self.decoherence;
        for (name, v) in [
            ("decoherence.qubit_t1_us", d.qubit_t1_us),
            ("decoherence.qubit_t2_us", d.qubit_t2_us),
            ("decoherence.magnon_lifetime_ns", d.magnon_lifetime_ns),
        ] {
            if !positive(v) {
                return Err(CliError::Config(format!("{name} must be positive (inf disables it), got {v}")));
            }
        }
        DecoherenceParams::from_lifetimes(
            d.qubit_t1_us * 1e3,
            d.qubit_t2_us * 1e3,
            d.magnon_lifetime_ns,
            d.thermal_occupation,
        )
        .map_err(|e| CliError::Config(format!("decoherence: {e}")))
    }

    /// Rates used for simulation: zero when noise is off.
    pub fn active_decoherence(&self) -> Result<DecoherenceParams<f64>, CliError> {
        if self.acquisition.noise {
            self.decoherence_params()
        } else {
            Ok(DecoherenceParams::none())
        }
    }

    pub fn grid(&self) -> Result<SettingGrid<f64>, CliError> {
        let g = &self.grid;
        if !(g.displacement_step.is_finite() && g.displacement_step > 0.0) {
            return Err(CliError::Config(format!("grid.displacement_step must be positive, got {}", g.displacement_step)));
        }
        if !(g.tau_max_ns.is_finite() && g.tau_max_ns >= 0.0) {
            return Err(CliError::Config(format!("grid.tau_max_ns must be non-negative, got {}", g.tau_max_ns)));
        }
        SettingGrid::uniform(g.displacements_per_side, g.displacement_step, g.tau_max_ns, g.tau_count)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn readout(&self) -> Result<ReadoutError<f64>, CliError> {
        ReadoutError::new(self.acquisition.readout_false_plus, self.acquisition.readout_false_ground)
            .map_err(|e| CliError::Config(format!("acquisition readout: {e}")))
    }

    pub fn sim_options(&self) -> Result<SimOptions<f64>, CliError> {
        Ok(SimOptions { readout: self.readout()?, ..SimOptions::default() })
    }

    pub fn noise_model(&self) -> NoiseModel {
        match (self.acquisition.forward_model, self.acquisition.noise) {
            (ForwardModelSetting::Ideal, _) | (ForwardModelSetting::Auto, false) => NoiseModel::Ideal,
            (ForwardModelSetting::Lindblad, _) | (ForwardModelSetting::Auto, true) => NoiseModel::Lindblad,
        }
    }

    pub fn solver_options(&self) -> SolverOptions<f64> {
        SolverOptions {
            max_iterations: self.solver.max_iterations,
            tolerance: self.solver.tolerance,
            rank_tolerance: self.solver.rank_tolerance,
            weighting: match self.solver.weighting {
                WeightingSetting::Uniform => Weighting::Uniform,
                WeightingSetting::Binomial => Weighting::BinomialVariance,
            },
        }
    }

    pub fn swap_taus(&self) -> Vec<f64> {
        linspace(self.sweeps.swap_tau_max_ns, self.sweeps.swap_points)
    }

    pub fn purity_taus(&self) -> Vec<f64> {
        linspace(self.sweeps.purity_tau_max_ns, self.sweeps.purity_points)
    }

    /// Qubit frequencies (rad/ns) swept symmetrically through the magnon line.
    pub fn crossing_sweep(&self) -> Vec<f64> {
        let n = self.sweeps.crossing_points;
        let span = self.sweeps.crossing_span_mhz;
        (0..n)
            .map(|k| {
                let offset = -span + 2.0 * span * k as f64 / (n - 1) as f64;
                ghz(self.system.magnon_frequency_ghz) + mhz(offset)
            })
            .collect()
    }
}
