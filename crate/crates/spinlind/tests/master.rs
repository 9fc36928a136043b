use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use spinlind::lineshape::FrequencyDistribution;
use spinlind::master::{
    kraus_audit, lambda_map, liouvillian_matrix, noncp_witness, pauli_rates, propagate, propagate_with, FieldConfig,
    MasterEquationModel, PropagateOptions,
};
use spinlind::presets::{coupled_pair, resonant_qubit, spin_half_spin_one, three_spins};
use spinlind::qubit::{pauli, sigma_minus, sigma_plus, QubitParams};
use spinlind::spin::{max_abs, DensityMatrix, SpinSystem};
use spinlind::{Error, Operator};

fn c(x: f64) -> C64 { C64::new(x, 0.0) }

fn all_models() -> Vec<MasterEquationModel> {
    vec![resonant_qubit(10.0, 0.1, 1.0).unwrap(), coupled_pair().unwrap(), spin_half_spin_one().unwrap(), three_spins().unwrap()]
}

#[test]
fn undriven_state_is_constant() {
    let dist = FrequencyDistribution::lorentzian(5.0, 0.3).unwrap();
    let field = FieldConfig::new(5.0, 0.0, dist).unwrap();
    let model = MasterEquationModel::new(SpinSystem::uncoupled(vec![1, 2], vec![-1.0, -0.4]).unwrap(), field, 0.2).unwrap();
    let rho0 = model.boltzmann();
    let traj = propagate(&model, &rho0, 20.0, 0.05).unwrap();
    assert!(max_abs(&(traj.last() - &rho0.matrix)) == 0.0);
}

#[test]
fn lamb_shift_is_hermitian_and_commutes_with_zeeman() {
    for m in all_models() {
        let h = m.lamb_shift();
        assert!(max_abs(&(h - h.adjoint())) < 1e-14);
        assert!(max_abs(&(h * &m.zo - &m.zo * h)) < 1e-12 * (1.0 + max_abs(&m.zo)));
    }
}

#[test]
fn qubit_lamb_shift_is_half_varpi_sigma3() {
    // detuned Lorentzian so that varpi is sizeable
    let dist = FrequencyDistribution::lorentzian(9.0, 0.5).unwrap();
    let field = FieldConfig::new(10.0, 0.05, dist).unwrap();
    let model = MasterEquationModel::new(SpinSystem::qubit(-1.0), field, 0.1).unwrap();
    let p = QubitParams::from_field(-1.0, &field, 0.1).unwrap();
    assert!(p.varpi.abs() > 1e-5);
    let want = pauli(3) * c(0.5 * p.varpi);
    assert!(max_abs(&(model.lamb_shift() - &want)) < 1e-13);
}

#[test]
fn dissipator_is_traceless_and_identity_is_stationary() {
    for m in all_models() {
        let d = m.dim();
        let id = Operator::identity(d, d);
        assert!(max_abs(&m.liouvillian(&id)) < 1e-14);
        let rho = m.boltzmann().matrix;
        assert!(m.dissipator(&rho).trace().norm() < 1e-15);
        let mut x = Operator::zeros(d, d);
        x[(0, d - 1)] = c(1.0);
        x[(d - 1, 0)] = c(1.0);
        assert!(m.liouvillian(&x).trace().norm() < 1e-14);
    }
}

#[test]
fn qubit_linear_response_hamiltonian() {
    let m = resonant_qubit(10.0, 0.1, 1.0).unwrap();
    let b1 = m.field.b1;
    for &t in &[0.0, 0.3, 2.7, 11.0] {
        let re_phi = m.field.dist.characteristic(t).re;
        let e = C64::from_polar(1.0, -10.0 * t);
        let want = (sigma_minus() * e + sigma_plus() * e.conj()) * c(b1 * re_phi);
        assert!(max_abs(&(m.linear_response_hamiltonian(t) - want)) < 1e-14);
    }
    assert!(max_abs(&m.linear_response_hamiltonian(5000.0)) < 1e-20);
}

#[test]
fn qubit_numerics_follow_closed_forms() {
    let m = resonant_qubit(10.0, 0.1, 1.0).unwrap();
    let p = QubitParams::from_field(-1.0, &m.field, m.beta).unwrap();
    let traj = propagate_with(&m, &m.boltzmann(), 30.0, PropagateOptions { dt: Some(2e-3), record_every: 500, ..Default::default() })
        .unwrap();
    for (t, rho) in traj.times.iter().zip(traj.schrodinger(&m)) {
        let exact = p.trajectory(*t);
        for (i, e) in exact.iter().enumerate() {
            assert!(((&rho * pauli(i + 1)).trace().re - e).abs() < 1e-9, "t = {t}");
        }
    }
}

#[test]
fn lambda_map_agrees_with_rk4() {
    for m in [coupled_pair().unwrap(), spin_half_spin_one().unwrap()] {
        let rho0 = m.boltzmann();
        let t = 25.0;
        let map = lambda_map(&m, t, &rho0).unwrap();
        let dt = m.default_dt() / 4.0;
        let a = propagate(&m, &rho0, t, dt).unwrap();
        let b = propagate(&m, &rho0, t, dt / 2.0).unwrap();
        assert!(max_abs(&(a.last() - b.last())) < 1e-8);
        assert!(max_abs(&(b.last() - &map.matrix)) < 1e-6);
        assert!((map.trace() - c(1.0)).norm() < 1e-12);
    }
}

#[test]
fn foreign_states_are_rejected() {
    let m = coupled_pair().unwrap();
    let d = m.dim();
    let rho = DensityMatrix::new(Operator::identity(d, d) * c(1.0 / d as f64), 1.0);
    assert!(matches!(lambda_map(&m, 1.0, &rho), Err(Error::DomainViolation(_))));
    assert!(matches!(propagate(&m, &rho, 1.0, 0.1), Err(Error::DomainViolation(_))));
}

#[test]
fn kraus_audit_reconstructs_the_map() {
    let m = coupled_pair().unwrap();
    let audit = kraus_audit(&m, 6.0, &m.boltzmann()).unwrap();
    assert!(audit.trace_residual < 1e-10, "{}", audit.trace_residual);
    assert!(audit.phi1_minus_phi2_residual < 1e-10, "{}", audit.phi1_minus_phi2_residual);
    assert!(audit.semigroup_min_choi > -1e-10);
    assert!(audit.phi1_min_choi > -1e-10);
    assert!(audit.phi2_min_choi > -1e-10);
}

#[test]
fn kraus_audit_without_drive_is_the_semigroup() {
    // at infinite temperature ρ₀ ∝ 𝕀 commutes with every ξ, so 𝒜ρ₀ = 0
    let dist = FrequencyDistribution::lorentzian(8.0, 0.2).unwrap();
    let field = FieldConfig::new(8.0, 0.02, dist).unwrap();
    let t12 = 0.6;
    let sys = SpinSystem::new(vec![1, 1], vec![-1.0, -0.35], DMatrix::from_row_slice(2, 2, &[0.0, t12, t12, 0.0])).unwrap();
    let m = MasterEquationModel::new(sys, field, 0.0).unwrap();
    let rho0 = m.boltzmann();
    let audit = kraus_audit(&m, 4.0, &rho0).unwrap();
    let l = liouvillian_matrix(&m).unwrap();
    let s = spinlind::master::superop_exp(&l, 4.0) * spinlind::master::vec(&rho0.matrix);
    let want = spinlind::master::unvec(&s, 4);
    assert!(max_abs(&(&audit.phi1 - &audit.phi2 - want)) < 1e-12);
}

#[test]
fn witness_determinant_is_negative() {
    let m = coupled_pair().unwrap();
    let d = m.dim();
    let psi = DVector::from_fn(d, |k, _| C64::new(1.0 + k as f64, 0.3 * k as f64));
    for &t in &[0.5, 3.0, 10.0] {
        let w = noncp_witness(&m, &psi, t).unwrap();
        assert!(w.det_value < 0.0);
        assert!((w.det_value - w.predicted).abs() < 1e-12 * (1.0 + w.predicted.abs()));
    }
}

#[test]
fn witness_needs_a_nonzero_drive_integral() {
    let dist = FrequencyDistribution::lorentzian(1.0, 0.2).unwrap();
    let field = FieldConfig::new(1.0, 0.1, dist).unwrap();
    let m = MasterEquationModel::new(SpinSystem::uncoupled(vec![0], vec![-1.0]).unwrap(), field, 0.1).unwrap();
    let psi = DVector::from_element(1, c(1.0));
    assert!(matches!(noncp_witness(&m, &psi, 1.0), Err(Error::WitnessInapplicable(_))));
}

#[test]
fn pauli_rates_are_symmetric() {
    for m in all_models() {
        let table = pauli_rates(&m);
        let d = m.dim();
        for a in 0..d {
            for b in 0..d {
                assert_eq!(table.total(a, b), table.total(b, a));
                if let (Some((wa, _)), Some((wb, _))) = (table.rate(a, b), table.rate(b, a)) {
                    assert_eq!(wa, -wb);
                }
            }
        }
        // ξˣ cannot connect states whose total m differs by more than one
        let dims = m.system.local_dims();
        if dims.iter().all(|&n| n == 2) && dims.len() >= 2 {
            assert_eq!(table.total(0, d - 1), 0.0);
        }
    }
}

#[test]
fn averaged_transition_rate_matches_gamma_plus() {
    // for a Lorentzian of half width a the averaged slope is Γ⁺(1 − e^{−at})
    let dist = FrequencyDistribution::lorentzian(10.0, 0.4).unwrap();
    let field = FieldConfig::new(10.0, 0.01, dist).unwrap();
    let m = MasterEquationModel::new(SpinSystem::qubit(-1.0), field, 0.5).unwrap();
    let r = spinlind::verify::qubit_oracle_rate(&m, 40.0, 60.0, 800).unwrap();
    let predicted = 1.0 - ((-8.0f64).exp() - (-12.0f64).exp()) / (0.2 * 20.0);
    assert!((r.oracle / r.gamma_plus - predicted).abs() < 1e-4, "{r:?}");
}

#[test]
fn transition_probabilities_sum_to_one() {
    let m = resonant_qubit(10.0, 0.1, 1.0).unwrap();
    let e = &m.levels.energies;
    let xi = m.xi_x.clone();
    let hp = |t: f64| &xi * c(2.0 * m.field.b1 * (9.7 * t).cos());
    for k0 in 0..2 {
        let total: f64 = (0..2).map(|k| spinlind::master::wavefunction_oracle(e, hp, k0, k, 0.0, 7.0, 80)).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }
    let zero = |_t: f64| Operator::zeros(2, 2);
    assert_eq!(spinlind::master::wavefunction_oracle(e, zero, 0, 1, 0.0, 3.0, 10), 0.0);
    assert_eq!(spinlind::master::wavefunction_oracle(e, zero, 0, 0, 0.0, 3.0, 10), 1.0);
}
