// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::sync::OnceLock;

use magbell_core::dynamics::{DecoherenceParams, SystemParams};
use magbell_core::linalg::{self, CMatrix};
use magbell_core::qop::{bell_state, trace_product, Basis, DensityMatrix, FockTruncation, Operator};
use magbell_core::sequences::{ReadoutError, SimOptions, Simulator};
use magbell_core::tomography::{
    bootstrap_error, fidelity, reconstruct, simulate_dataset, state_fidelity, DesignMatrix, ForwardModel,
    NoiseModel, QubitRotation, Reconstructor, SettingGrid, Shots, SolverOptions,
    TomographySetting,
};
use magbell_core::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system() -> SystemParams<f64> {
    let tp = 2.0 * PI;
    SystemParams::new(tp * 5.867, tp * 5.927, tp * 5.59e-3, FockTruncation::new(10).unwrap()).unwrap()
}

fn ideal_design() -> &'static DesignMatrix<f64> {
    static DESIGN: OnceLock<DesignMatrix<f64>> = OnceLock::new();
    DESIGN.get_or_init(|| {
        let fm = ForwardModel::new(system(), DecoherenceParams::none(), NoiseModel::Ideal).unwrap();
        DesignMatrix::build(&fm, &SettingGrid::standard()).unwrap()
    })
}

fn ideal_bell() -> DensityMatrix<f64> {
    Simulator::new(system(), DecoherenceParams::none(), SimOptions::default()).unwrap().generate_bell(false).unwrap()
}

/// Random state of rank `rank` supported on Fock levels n ≤ 3, embedded in
/// the full space.
fn random_low_n_state(rng: &mut ChaCha8Rng, rank: usize, dim: usize) -> DensityMatrix<f64> {
    let sub = 8;
    let g = CMatrix::<f64>::from_fn(sub, rank, |_, _| {
        Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let small = &g * g.adjoint();
    let tr = small.trace().re;
    let mut full = CMatrix::<f64>::zeros(dim, dim);
    full.view_mut((0, 0), (sub, sub)).copy_from(&small.map(|z| z / tr));
    DensityMatrix::from_evolved(Operator::new(full, Basis::MagnonMajor).unwrap()).unwrap()
}

#[test]
fn exact_bell_dataset_round_trips() {
    let design = ideal_design();
    let rho = ideal_bell();
    let records = simulate_dataset(&rho, design, Shots::Exact, 0, &ReadoutError::none()).unwrap();
    assert_eq!(records.len(), 11712);
    let res = reconstruct(&records, design, SolverOptions::default()).unwrap();
    assert!(res.converged);
    assert!(res.fidelity >= 0.999, "fidelity {}", res.fidelity);
    assert!((res.purity_qubit - 0.5).abs() < 0.01);
    for w in res.objective_history.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn random_low_n_states_round_trip() {
    let design = ideal_design();
    let solver = Reconstructor::new(design, None, SolverOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..6 {
        let rank = 1 + k % 4;
        let rho = random_low_n_state(&mut rng, rank, design.dim());
        let values = design.predict(&rho);
        let res = solver.solve(&values).unwrap();
        let f = state_fidelity(&res.rho_hat, &rho).unwrap();
        assert!(f >= 0.99, "state {k} rank {rank}: fidelity {f}");
    }
}

#[test]
fn predictions_match_independent_trace_of_composite_observable() {
    let fm = ForwardModel::new(system(), DecoherenceParams::none(), NoiseModel::Ideal).unwrap();
    let design = ideal_design();
    let rho = ideal_bell();
    let records = simulate_dataset(&rho, design, Shots::Exact, 0, &ReadoutError::none()).unwrap();
    for i in (0..design.len()).step_by(977) {
        let obs = fm.composite_observable(&design.settings()[i]).unwrap();
        let direct = trace_product(obs.matrix(), rho.matrix()).re;
        assert!((records[i].e_value - direct).abs() < 1e-10, "setting {i}");
    }
    let origin = TomographySetting { rotation: QubitRotation::Identity, alpha: Complex::new(0.0, 0.0), tau: 0.0 };
    let single = DesignMatrix::from_settings(&fm, vec![origin]).unwrap();
    let trivial = simulate_dataset(&rho, &single, Shots::Exact, 0, &ReadoutError::none()).unwrap()[0];
    assert!((trivial.e_value - 0.5).abs() < 1e-12);
}

#[test]
fn many_shots_concentrate_on_exact_values() {
    let design = ideal_design();
    let rho = ideal_bell();
    let exact = simulate_dataset(&rho, design, Shots::Exact, 0, &ReadoutError::none()).unwrap();
    let sampled = simulate_dataset(&rho, design, Shots::finite(1_000_000).unwrap(), 5, &ReadoutError::none()).unwrap();
    for (e, s) in exact.iter().zip(&sampled) {
        let sigma = (e.e_value * (1.0 - e.e_value) / 1e6).sqrt().max(1e-6);
        assert!((e.e_value - s.e_value).abs() < 6.0 * sigma);
    }
}

#[test]
fn same_seed_gives_identical_records() {
    let design = ideal_design();
    let rho = ideal_bell();
    let a = simulate_dataset(&rho, design, Shots::Finite(1000), 11, &ReadoutError::none()).unwrap();
    let b = simulate_dataset(&rho, design, Shots::Finite(1000), 11, &ReadoutError::none()).unwrap();
    let c = simulate_dataset(&rho, design, Shots::Finite(1000), 12, &ReadoutError::none()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn fidelity_error_and_bootstrap_spread_shrink_with_shots() {
    let design = ideal_design();
    let rho = ideal_bell();
    let opts = SolverOptions::default();
    let mut errors = Vec::new();
    let mut spreads = Vec::new();
    for shots in [100u64, 10_000] {
        let records = simulate_dataset(&rho, design, Shots::Finite(shots), 3, &ReadoutError::none()).unwrap();
        let res = reconstruct(&records, design, opts).unwrap();
        errors.push(1.0 - res.fidelity);
        spreads.push(bootstrap_error(&records, design, 4, 9, opts).unwrap().std_dev);
    }
    assert!(errors[1] < errors[0], "{errors:?}");
    assert!(spreads[1] < spreads[0], "{spreads:?}");
}

#[test]
fn design_identifies_every_hermitian_direction() {
    let design = ideal_design();
    let solver = Reconstructor::new(design, None, SolverOptions::default()).unwrap();
    assert_eq!(solver.rank(), design.dim() * design.dim());
}

#[test]
fn too_few_settings_are_rank_deficient() {
    let fm = ForwardModel::new(system(), DecoherenceParams::none(), NoiseModel::Ideal).unwrap();
    let settings = SettingGrid::standard().settings().into_iter().take(50).collect();
    let design = DesignMatrix::from_settings(&fm, settings).unwrap();
    assert!(matches!(
        Reconstructor::new(&design, None, SolverOptions::default()),
        Err(magbell_core::Error::RankDeficient { .. })
    ));
}

#[test]
fn psd_projection_matches_hand_solved_two_by_two_cases() {
    let c = |re: f64, im: f64| Complex::new(re, im);
    let m = |a: [[Complex<f64>; 2]; 2]| CMatrix::from_fn(2, 2, |i, j| a[i][j]);
    let z = c(0.0, 0.0);
    let cases = [
        (m([[c(0.7, 0.0), z], [z, c(0.3, 0.0)]]), m([[c(0.7, 0.0), z], [z, c(0.3, 0.0)]])),
        (m([[c(1.5, 0.0), z], [z, c(-0.5, 0.0)]]), m([[c(1.0, 0.0), z], [z, z]])),
        (m([[c(0.6, 0.0), z], [z, c(0.6, 0.0)]]), m([[c(0.5, 0.0), z], [z, c(0.5, 0.0)]])),
        (m([[c(0.9, 0.0), z], [z, c(0.5, 0.0)]]), m([[c(0.7, 0.0), z], [z, c(0.3, 0.0)]])),
        // eigenvalues 1.3 and −0.3 along (1, ±1)/√2
        (m([[c(0.5, 0.0), c(0.8, 0.0)], [c(0.8, 0.0), c(0.5, 0.0)]]), m([[c(0.5, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.5, 0.0)]])),
        // eigenvalue 1.3 along (1, i)/√2
        (m([[c(0.5, 0.0), c(0.0, -0.8)], [c(0.0, 0.8), c(0.5, 0.0)]]), m([[c(0.5, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.5, 0.0)]])),
    ];
    for (input, expected) in cases {
        let got = linalg::project_density(&input);
        assert!(linalg::max_abs_diff(&got, &expected) < 1e-12, "{input} -> {got}");
    }
}

#[test]
fn noisy_data_prefers_the_decoherence_aware_model() {
    let dec = DecoherenceParams::from_lifetimes(8000.0, 100.0, 250.0, 0.0).unwrap();
    let sim = Simulator::new(system(), dec, SimOptions::default()).unwrap();
    let rho = sim.generate_bell(true).unwrap();
    let truth = fidelity(&rho, &bell_state(system().trunc)).unwrap();
    let lindblad = DesignMatrix::build(
        &ForwardModel::new(system(), dec, NoiseModel::Lindblad).unwrap(),
        &SettingGrid::standard(),
    )
    .unwrap();
    let records = simulate_dataset(&rho, &lindblad, Shots::Exact, 0, &ReadoutError::none()).unwrap();
    let aware = reconstruct(&records, &lindblad, SolverOptions::default()).unwrap();
    let naive = reconstruct(&records, ideal_design(), SolverOptions::default()).unwrap();
    assert!((aware.fidelity - truth).abs() < 1e-4, "{} vs {truth}", aware.fidelity);
    assert!(naive.fidelity < aware.fidelity);
}
