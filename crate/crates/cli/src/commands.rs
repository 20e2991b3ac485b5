// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand. Each writes its files under the output
//! directory and returns a summary for printing and for tests.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use chrono::Utc;
use magbell_core::dynamics::DecoherenceParams;
use magbell_core::fit::{fit_damped_cosine, DampedCosine};
use magbell_core::linalg::{self, CMatrix};
use magbell_core::qop::{self, bell_state, DensityMatrix, FockTruncation, PureState};
use magbell_core::sequences::{coherent_tail_weight, Simulator, DISPLACEMENT_TAIL_LIMIT};
use magbell_core::tomography::{
    bootstrap_error, display_block, fidelity, io, reconstruct, simulate_dataset, BootstrapSummary, DesignMatrix,
    ForwardModel, NoiseModel, SettingGrid, Shots, SolverOptions,
};
use magbell_core::Complex;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{cell, table, write_file, RunManifest};
use crate::plot::{matrix_bars, LinePlot, Series};

#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub workers: usize,
}

fn to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI) * 1e3
}

fn noise_label(on: bool) -> &'static str {
    if on { "on" } else { "off" }
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn simulator(&self) -> Result<Simulator<f64>, CliError> {
        let cfg = &self.config;
        Ok(Simulator::new(cfg.system_params()?, cfg.active_decoherence()?, cfg.sim_options()?)?)
    }

    fn finish(&self, command: &str, started: chrono::DateTime<Utc>, mut outputs: Vec<PathBuf>) -> Result<Vec<PathBuf>, CliError> {
        let manifest = RunManifest::new(command, &self.config, self.workers, started, &outputs);
        outputs.push(manifest.write(&self.out_dir)?);
        Ok(outputs)
    }
}

#[derive(Debug, Clone)]
pub struct SwapReport {
    pub points: Vec<(f64, f64)>,
    pub fit: DampedCosine,
    pub outputs: Vec<PathBuf>,
}

impl SwapReport {
    pub fn frequency_mhz(&self) -> f64 {
        self.fit.frequency() * 1e3
    }

    /// Envelope decay rate in 1/μs.
    pub fn decay_per_us(&self) -> f64 {
        self.fit.gamma * 1e3
    }

    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("swap oscillation frequency: {:.4} MHz", self.frequency_mhz()),
            format!("swap envelope decay rate: {:.4} 1/us", self.decay_per_us()),
            format!("fit rms residual: {:.3e}", self.fit.rms),
        ]
    }
}

pub fn cmd_swap(ctx: &Context) -> Result<SwapReport, CliError> {
    let started = Utc::now();
    let noise = ctx.config.acquisition.noise;
    let taus = ctx.config.swap_taus();
    let points = ctx.simulator()?.swap_oscillation_curve(&taus, noise)?;
    let (ts, ps): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let fit = fit_damped_cosine(&ts, &ps)?;

    let rows: Vec<Vec<String>> = points.iter().map(|(t, p)| vec![cell(*t), cell(*p)]).collect();
    let csv = write_file(
        &ctx.path("swap.csv"),
        &table(
            &[
                "magnon-qubit swap oscillation".into(),
                format!("noise {}", noise_label(noise)),
                format!("fit frequency_mhz {} decay_per_us {}", cell(fit.frequency() * 1e3), cell(fit.gamma * 1e3)),
            ],
            &["tau_ns", "p_plus"],
            &rows,
        ),
    )?;
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    let fine: Vec<(f64, f64)> = (0..=600).map(|k| t_max * k as f64 / 600.0).map(|t| (t, fit.eval(t))).collect();
    let svg = write_file(
        &ctx.path("swap.svg"),
        &LinePlot {
            title: format!("Swap oscillation, fitted {:.3} MHz", fit.frequency() * 1e3),
            x_label: "swap time (ns)".into(),
            y_label: "P+".into(),
            series: vec![Series::markers("simulated", points.clone()), Series::line("damped cosine fit", fine)],
            y_range: Some((-0.05, 1.05)),
        }
        .to_svg(),
    )?;
    let outputs = ctx.finish("swap", started, vec![csv, svg])?;
    Ok(SwapReport { points, fit, outputs })
}

#[derive(Debug, Clone)]
pub struct PurityReport {
    pub points: Vec<(f64, f64)>,
    pub min_purity: f64,
    pub min_tau: f64,
    pub bell_time: f64,
    pub outputs: Vec<PathBuf>,
}

impl PurityReport {
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("minimum qubit purity: {:.5} at {:.2} ns", self.min_purity, self.min_tau),
            format!("Bell time pi/(4g): {:.3} ns", self.bell_time),
        ]
    }
}

pub fn cmd_purity(ctx: &Context) -> Result<PurityReport, CliError> {
    let started = Utc::now();
    let noise = ctx.config.acquisition.noise;
    let sim = ctx.simulator()?;
    let points = sim.purity_experiment(&ctx.config.purity_taus(), noise)?;
    let (min_tau, min_purity) =
        points.iter().copied().fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });
    let bell_time = sim.bell_swap_time();

    let rows: Vec<Vec<String>> = points.iter().map(|(t, p)| vec![cell(*t), cell(*p)]).collect();
    let csv = write_file(
        &ctx.path("purity.csv"),
        &table(
            &[
                "qubit purity after swap, from three-rotation qubit tomography".into(),
                format!("noise {}", noise_label(noise)),
                format!("minimum {} at tau_ns {}", cell(min_purity), cell(min_tau)),
            ],
            &["tau_ns", "purity"],
            &rows,
        ),
    )?;
    let svg = write_file(
        &ctx.path("purity.svg"),
        &LinePlot {
            title: "Qubit purity versus swap time".into(),
            x_label: "swap time (ns)".into(),
            y_label: "Tr(rho_q^2)".into(),
            series: vec![
                Series::line("purity", points.clone()),
                Series::line("Bell time", vec![(bell_time, 0.45), (bell_time, 1.02)]),
            ],
            y_range: Some((0.45, 1.02)),
        }
        .to_svg(),
    )?;
    let outputs = ctx.finish("purity", started, vec![csv, svg])?;
    Ok(PurityReport { points, min_purity, min_tau, bell_time, outputs })
}

#[derive(Debug, Clone)]
pub struct CrossingReport {
    /// (qubit frequency GHz, lower MHz, upper MHz), levels relative to the
    /// magnon frequency.
    pub rows: Vec<(f64, f64, f64)>,
    pub min_splitting_mhz: f64,
    /// Qubit detuning from the magnon at the minimum, MHz.
    pub min_detuning_mhz: f64,
    pub outputs: Vec<PathBuf>,
}

impl CrossingReport {
    pub fn lines(&self) -> Vec<String> {
        vec![format!(
            "minimum normal-mode splitting: {:.4} MHz at qubit detuning {:.3} MHz",
            self.min_splitting_mhz, self.min_detuning_mhz
        )]
    }
}

pub fn cmd_crossing(ctx: &Context) -> Result<CrossingReport, CliError> {
    let started = Utc::now();
    let sim = ctx.simulator()?;
    let omega_m = sim.system().omega_m;
    let spectrum = sim.avoided_crossing(&ctx.config.crossing_sweep());
    let rows: Vec<(f64, f64, f64)> =
        spectrum.iter().map(|(wq, ev)| (wq / (2.0 * PI), to_mhz(ev[0]), to_mhz(ev[1]))).collect();
    let (min_wq, min_split) = spectrum
        .iter()
        .map(|(wq, ev)| (*wq, to_mhz(ev[1] - ev[0])))
        .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });

    let table_rows: Vec<Vec<String>> = rows.iter().map(|(f, lo, hi)| vec![cell(*f), cell(*lo), cell(*hi)]).collect();
    let csv = write_file(
        &ctx.path("crossing.csv"),
        &table(
            &[
                "single-excitation levels in the frame rotating at the magnon frequency".into(),
                format!("minimum splitting_mhz {}", cell(min_split)),
            ],
            &["qubit_ghz", "lower_mhz", "upper_mhz"],
            &table_rows,
        ),
    )?;
    let svg = write_file(
        &ctx.path("crossing.svg"),
        &LinePlot {
            title: "Qubit-magnon avoided crossing".into(),
            x_label: "qubit frequency (GHz)".into(),
            y_label: "level offset from magnon (MHz)".into(),
            series: vec![
                Series::line("lower", rows.iter().map(|r| (r.0, r.1)).collect()),
                Series::line("upper", rows.iter().map(|r| (r.0, r.2)).collect()),
            ],
            y_range: None,
        }
        .to_svg(),
    )?;
    let outputs = ctx.finish("crossing", started, vec![csv, svg])?;
    Ok(CrossingReport {
        rows,
        min_splitting_mhz: min_split,
        min_detuning_mhz: to_mhz(min_wq - omega_m),
        outputs,
    })
}

#[derive(Debug, Clone)]
pub struct GenerateReport {
    pub records: usize,
    pub true_fidelity: f64,
    pub dataset: PathBuf,
    pub outputs: Vec<PathBuf>,
}

impl GenerateReport {
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("wrote {} records to {}", self.records, self.dataset.display()),
            format!("prepared-state fidelity (before tomography): {:.6}", self.true_fidelity),
        ]
    }
}

pub fn cmd_generate(ctx: &Context) -> Result<GenerateReport, CliError> {
    let started = Utc::now();
    let cfg = &ctx.config;
    let noise = cfg.acquisition.noise;
    let sys = cfg.system_params()?;
    let dec = cfg.active_decoherence()?;
    let rho = ctx.simulator()?.generate_bell(noise)?;
    let truth_model = if noise { NoiseModel::Lindblad } else { NoiseModel::Ideal };
    let design = DesignMatrix::build(&ForwardModel::new(sys, dec, truth_model)?, &cfg.grid()?)?;
    let shots = cfg.acquisition.shots.to_shots()?;
    let records = simulate_dataset(&rho, &design, shots, cfg.acquisition.seed, &cfg.readout()?)?;
    let true_fidelity = fidelity(&rho, &bell_state(sys.trunc))?;

    let dataset = write_file(&ctx.path("dataset.csv"), &io::write_dataset(&records))?;
    let prepared = write_file(&ctx.path("prepared_state.txt"), &io::write_state(&rho))?;
    let outputs = ctx.finish("generate", started, vec![dataset.clone(), prepared])?;
    Ok(GenerateReport { records: records.len(), true_fidelity, dataset, outputs })
}

#[derive(Debug, Clone)]
pub struct ReconstructReport {
    pub fidelity: f64,
    pub bootstrap: Option<BootstrapSummary<f64>>,
    pub purity_qubit: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub noise_model: NoiseModel,
    pub rho_hat: DensityMatrix<f64>,
    pub outputs: Vec<PathBuf>,
}

impl ReconstructReport {
    pub fn lines(&self) -> Vec<String> {
        let fid = match &self.bootstrap {
            Some(b) => format!("fidelity: {:.4} +/- {:.4} (bootstrap, {} resamples)", self.fidelity, b.std_dev, b.fidelities.len()),
            None => format!("fidelity: {:.6}", self.fidelity),
        };
        vec![
            fid,
            format!("qubit marginal purity: {:.4}", self.purity_qubit),
            format!("forward model: {}", self.noise_model.label()),
            format!("rms residual: {:.3e}", self.residual),
            format!("iterations: {} (converged: {})", self.iterations, self.converged),
        ]
    }
}

fn basis_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{}{}", i / 2, if i % 2 == 0 { "g" } else { "+" })).collect()
}

fn split_parts(m: &CMatrix<f64>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
    let im = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect();
    (re, im)
}

/// Design for the dataset's own settings under the configured forward model.
pub fn design_for(cfg: &ExperimentConfig, settings: Vec<magbell_core::TomographySetting>) -> Result<DesignMatrix<f64>, CliError> {
    let model = cfg.noise_model();
    let dec = match model {
        NoiseModel::Ideal => DecoherenceParams::none(),
        NoiseModel::Lindblad => cfg.decoherence_params()?,
    };
    let fm = ForwardModel::new(cfg.system_params()?, dec, model)?.with_readout(cfg.readout()?);
    Ok(DesignMatrix::from_settings(&fm, settings)?)
}

pub fn read_dataset(path: &Path) -> Result<Vec<magbell_core::MeasurementRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    io::parse_dataset(&text).map_err(|e| CliError::io(path, e))
}

pub fn cmd_reconstruct(ctx: &Context, dataset: Option<&Path>) -> Result<ReconstructReport, CliError> {
    let started = Utc::now();
    let cfg = &ctx.config;
    let default_path = ctx.path("dataset.csv");
    let dataset = dataset.unwrap_or(&default_path);
    let records = read_dataset(dataset)?;
    let design = design_for(cfg, records.iter().map(|r| r.setting).collect())?;
    let opts: SolverOptions<f64> = cfg.solver_options();
    let res = reconstruct(&records, &design, opts)?;
    let resamples = cfg.acquisition.bootstrap_resamples;
    let finite = records.iter().all(|r| matches!(r.shots, Shots::Finite(_)));
    let bootstrap = if resamples >= 2 && finite {
        Some(bootstrap_error(&records, &design, resamples, cfg.acquisition.seed, opts)?)
    } else {
        None
    };

    let n_show = cfg.sweeps.display_n_max;
    let trunc = FockTruncation::from_joint_dim(design.dim())?;
    let block = display_block(&res.rho_hat, n_show);
    let target = DensityMatrix::from_pure(&bell_state::<f64>(trunc));
    let target_block = display_block(&target, n_show);
    let labels = basis_labels(block.nrows());
    let (re, im) = split_parts(&block);
    let (tre, tim) = split_parts(&target_block);

    let state = write_file(&ctx.path("state.txt"), &io::write_state(&res.rho_hat))?;
    let re_svg = write_file(
        &ctx.path("rho_real.svg"),
        &matrix_bars(&format!("Re rho, Fock levels n <= {n_show}"), &re, Some(&tre), &labels),
    )?;
    let im_svg = write_file(
        &ctx.path("rho_imag.svg"),
        &matrix_bars(&format!("Im rho, Fock levels n <= {n_show}"), &im, Some(&tim), &labels),
    )?;
    let mut report = ReconstructReport {
        fidelity: res.fidelity,
        bootstrap,
        purity_qubit: res.purity_qubit,
        residual: res.residual,
        iterations: res.iterations,
        converged: res.converged,
        noise_model: design.noise_model(),
        rho_hat: res.rho_hat,
        outputs: Vec::new(),
    };
    let mut text = report.lines().join("\n");
    text.push_str(&format!("\ndataset: {}\n", dataset.display()));
    if let Some(b) = &report.bootstrap {
        text.push_str(&format!("bootstrap mean fidelity: {}\n", cell(b.mean)));
    }
    let summary = write_file(&ctx.path("report.txt"), &text)?;
    report.outputs = ctx.finish("reconstruct", started, vec![state, summary, re_svg, im_svg])?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub n_max: usize,
    pub joint_dim: usize,
    /// Coherent-state weight above n_max at the largest grid amplitude.
    pub tail_weight: f64,
    pub sufficient: bool,
    /// ‖D(α)|0⟩ − |α⟩‖ for the truncated displacement at the grid corner.
    pub displaced_norm_error: f64,
    pub bell_fidelity: f64,
    /// Exact-data round trip with the ideal model; absent when insufficient.
    pub reconstructed_fidelity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TruncationReport {
    pub rows: Vec<TruncationRow>,
    pub outputs: Vec<PathBuf>,
}

impl TruncationReport {
    pub fn lines(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "n_max {:>2}: tail {:.2e} {} | displaced norm error {:.2e} | Bell fidelity {:.12} | reconstructed {}",
                    r.n_max,
                    r.tail_weight,
                    if r.sufficient { "ok" } else { "INSUFFICIENT" },
                    r.displaced_norm_error,
                    r.bell_fidelity,
                    r.reconstructed_fidelity.map_or("-".into(), |f| format!("{f:.9}"))
                )
            })
            .collect()
    }
}

/// Distance between the truncated-generator displacement of vacuum and the
/// exact coherent state, counting the amplitude lost above the cutoff.
pub fn displaced_norm_error(alpha: Complex<f64>, n_max: usize) -> Result<f64, CliError> {
    let trunc = FockTruncation::new(n_max)?;
    let a = qop::annihilation::<f64>(trunc);
    let ad = qop::creation::<f64>(trunc);
    let gen = ad.matrix().map(|z| z * alpha) - a.matrix().map(|z| z * alpha.conj());
    let d = linalg::expm(&gen);
    let mut sq = 0.0;
    let mut coeff = Complex::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=n_max {
        if n > 0 {
            coeff = coeff * alpha / (n as f64).sqrt();
        }
        sq += (d[(n, 0)] - coeff).norm_sqr();
    }
    Ok((sq + coherent_tail_weight(alpha.norm(), n_max)).sqrt())
}

pub fn cmd_sweep_truncation(ctx: &Context, n_max_list: Option<&[usize]>) -> Result<TruncationReport, CliError> {
    let started = Utc::now();
    let cfg = &ctx.config;
    let list = n_max_list.unwrap_or(&cfg.sweeps.truncations).to_vec();
    if list.is_empty() || list.contains(&0) {
        return Err(CliError::Config("truncation list must hold n_max values of at least 1".into()));
    }
    let grid: SettingGrid<f64> = cfg.grid()?;
    let alpha_max = grid.max_alpha_abs();
    let corner = grid
        .alphas
        .iter()
        .copied()
        .max_by(|a, b| (a.norm(), a.re, a.im).partial_cmp(&(b.norm(), b.re, b.im)).unwrap_or(Ordering::Equal))
        .unwrap_or_default();
    let noise = cfg.acquisition.noise;
    let mut rows = Vec::new();
    for &n_max in &list {
        let mut local = cfg.clone();
        local.truncation.n_max = n_max;
        let trunc = local.trunc()?;
        let tail = coherent_tail_weight(alpha_max, n_max);
        let sufficient = tail <= DISPLACEMENT_TAIL_LIMIT;
        let sim = Simulator::new(local.system_params()?, local.active_decoherence()?, local.sim_options()?)?;
        let rho = sim.generate_bell(noise)?;
        let target: PureState<f64> = bell_state(trunc);
        let bell_fidelity = fidelity(&rho, &target)?;
        let reconstructed_fidelity = if sufficient {
            let ideal = Simulator::new(local.system_params()?, DecoherenceParams::none(), local.sim_options()?)?;
            let pure = ideal.generate_bell(false)?;
            let fm = ForwardModel::new(local.system_params()?, DecoherenceParams::none(), NoiseModel::Ideal)?;
            let design = DesignMatrix::build(&fm, &grid)?;
            let values = design.predict(&pure);
            let solver = magbell_core::tomography::Reconstructor::new(&design, None, local.solver_options())?;
            Some(solver.solve(&values)?.fidelity)
        } else {
            None
        };
        rows.push(TruncationRow {
            n_max,
            joint_dim: trunc.joint_dim(),
            tail_weight: tail,
            sufficient,
            displaced_norm_error: displaced_norm_error(corner, n_max)?,
            bell_fidelity,
            reconstructed_fidelity,
        });
    }

    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_max.to_string(),
                r.joint_dim.to_string(),
                cell(r.tail_weight),
                r.sufficient.to_string(),
                cell(r.displaced_norm_error),
                cell(r.bell_fidelity),
                r.reconstructed_fidelity.map_or(String::new(), cell),
            ]
        })
        .collect();
    let csv = write_file(
        &ctx.path("truncation.csv"),
        &table(
            &[
                "Fock truncation convergence".into(),
                format!("largest grid amplitude {} corner {}{:+}i", cell(alpha_max), corner.re, corner.im),
                format!("tail limit {}", cell(DISPLACEMENT_TAIL_LIMIT)),
                format!("noise {}", noise_label(noise)),
            ],
            &[
                "n_max",
                "joint_dim",
                "tail_weight",
                "sufficient",
                "displaced_norm_error",
                "bell_fidelity",
                "reconstructed_fidelity",
            ],
            &table_rows,
        ),
    )?;
    let outputs = ctx.finish("sweep-truncation", started, vec![csv])?;
    Ok(TruncationReport { rows, outputs })
}

/// Prepared state for direct use by callers that skip file I/O.
pub fn prepared_bell(cfg: &ExperimentConfig) -> Result<DensityMatrix<f64>, CliError> {
    let sim = Simulator::new(cfg.system_params()?, cfg.active_decoherence()?, cfg.sim_options()?)?;
    Ok(sim.generate_bell(cfg.acquisition.noise)?)
}
