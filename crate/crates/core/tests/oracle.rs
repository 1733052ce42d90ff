//! Phase-space solver against the Fock-basis master equation and Schrodinger oracles.

use lzcqed::analytic::{boltzmann_weight, pud_finite_t, standard_lz};
use lzcqed::fock::{redfield_propagate, redfield_propagate_from, unitary_propagate, FockDensityMatrix, RedfieldOptions};
use lzcqed::observables::{EigenTables, FockWeights};
use lzcqed::ode::{dopri5, Tolerances};
use lzcqed::phase_space::{initial_state, qubit_reduced, uniform_grid, CoefficientRhs, Spin};
use lzcqed::{Cplx, Diffusion, Params, Spec};

#[test]
fn qubit_matrix_and_populations_match_oracle_at_50_times() {
    let p = Params::new(0.04, 0.01).with_gamma(0.01).with_temperature(0.5).with_n_trunc(8);
    let times = uniform_grid(p.t_start, p.t_end, 50);
    let spec = Spec::new(p.gamma, &Diffusion::from_params(&p));
    let weights = FockWeights::new(&EigenTables::new(spec, p.n_trunc), 3);
    let rhs = CoefficientRhs::new(&p, &spec);

    let mut state = initial_state(&p);
    let mut qubit = Vec::new();
    let mut pops = Vec::new();
    let mut probe = state.clone();
    dopri5(
        |t, y, dy| rhs.eval(t, y, dy),
        p.t_start,
        state.as_mut_slice(),
        &times,
        &Tolerances::default(),
        |t, y| {
            probe.as_mut_slice().copy_from_slice(y);
            probe.t = t;
            qubit.push(qubit_reduced(&probe));
            pops.push([0, 1].map(|s| (0..4).map(|m| weights.population(&probe, s, m).re).collect::<Vec<_>>()));
            Ok(())
        },
    )
    .unwrap();

    let opts = RedfieldOptions {
        samples: 50,
        keep_states: true,
        ..RedfieldOptions::default()
    };
    let oracle = redfield_propagate(&p, &opts).unwrap();
    assert_eq!(oracle.snapshots.len(), times.len());

    let mut worst_qubit: f64 = 0.0;
    let mut worst_pop: f64 = 0.0;
    for (k, rho) in oracle.snapshots.iter().enumerate() {
        assert_eq!(rho.t, times[k]);
        let q = rho.qubit_reduced();
        let ours = qubit[k];
        for (a, b) in [ours[0][0], ours[0][1], ours[1][0], ours[1][1]].iter().zip(q) {
            worst_qubit = worst_qubit.max((a - b).norm());
        }
        for (s, spin) in [Spin::Up, Spin::Down].into_iter().enumerate() {
            for m in 0..4 {
                worst_pop = worst_pop.max((pops[k][s][m] - rho.population(spin, m)).abs());
            }
        }
    }
    assert!(worst_qubit <= 1e-4, "qubit matrix deviation {worst_qubit:e}");
    assert!(worst_pop <= 1e-4, "Fock population deviation {worst_pop:e}");
}

#[test]
fn ground_state_survival_is_the_two_level_result() {
    let (g, v) = (0.04, 0.01);
    let p = Params::new(g, v).with_n_trunc(10);
    let out = unitary_propagate(Spin::Up, 0, &p, &Tolerances::tight()).unwrap();
    let w = standard_lz(2.0 * g, v).unwrap();
    assert!((w - 0.365_931_306_941_293_3).abs() < 1e-12);
    assert!((out.spin_probability(Spin::Up) - w).abs() < 1e-3);
    assert!(out.norm_drift < 1e-8);
}

#[test]
fn thermal_average_of_unitary_outcomes_matches_closed_form() {
    let (g, v, temp) = (0.04, 0.01, 0.5);
    let p = Params::new(g, v).with_n_trunc(12);
    let (mut stay, mut total) = (0.0, 0.0);
    for n in 0..=6 {
        let w = boltzmann_weight(n, temp);
        let out = unitary_propagate(Spin::Up, n, &p, &Tolerances::tight()).unwrap();
        stay += w * out.spin_probability(Spin::Up);
        total += w;
    }
    let flip = 1.0 - stay / total;
    let closed = pud_finite_t(g, v, temp).unwrap();
    assert!((flip - closed).abs() < 0.01, "{flip} vs {closed}");
}

#[test]
fn unitary_oracle_rejects_damping() {
    let p = Params::new(0.04, 0.01).with_gamma(0.01).with_n_trunc(4);
    assert!(unitary_propagate(Spin::Up, 0, &p, &Tolerances::tight()).is_err());
}

#[test]
fn decoupled_oscillator_relaxes_to_thermal_occupation() {
    let temp = 0.5;
    let mut p = Params::new(0.0, 0.01).with_gamma(0.01).with_temperature(temp).with_n_trunc(10);
    p.t_start = -1000.0;
    p.t_end = 1000.0;
    let n = p.n_trunc;
    let mut rho = FockDensityMatrix::zeros(n, p.t_start);
    let d = 2 * n;
    rho.rho[d + 1] = Cplx::new(1.0, 0.0);
    let run = redfield_propagate_from(&p, rho, &RedfieldOptions::default()).unwrap();

    let occupation = run.final_state.photon_number();
    let thermal = 1.0 / (2.0_f64.exp() - 1.0);
    assert!((thermal - 0.156518).abs() < 1e-6);
    assert!((occupation - thermal).abs() < 1e-4, "{occupation} vs {thermal}");
    for &up in &run.p_up {
        assert!((up - 1.0).abs() < 1e-9);
    }
}
