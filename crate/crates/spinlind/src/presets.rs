//! Small ready-made systems used by the examples, the CLI defaults and the
//! test suites.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::lineshape::FrequencyDistribution;
use crate::master::{FieldConfig, MasterEquationModel};
use crate::spin::SpinSystem;

/// Driven qubit with ω₀ = `omega_o`, a resonant Lorentzian drive of half
/// width Γ/5, and B₁ chosen so the transition rate is exactly Γ = `gamma`.
/// γ = −1 so that fields and frequencies coincide numerically.
pub fn resonant_qubit(omega_o: f64, gamma: f64, beta_omega_o: f64) -> Result<MasterEquationModel> {
    let half = gamma / 5.0;
    let dist = FrequencyDistribution::lorentzian(omega_o, 2.0 * half)?;
    // Γ = 2π(ω₁/2)²[ρ(ω₀) + ρ(−ω₀)]
    let dens = dist.density(omega_o) + dist.density(-omega_o);
    let omega_1 = (gamma / (0.5 * PI * dens)).sqrt();
    let field = FieldConfig::new(omega_o, omega_1, dist)?;
    MasterEquationModel::new(SpinSystem::qubit(-1.0), field, beta_omega_o / omega_o)
}

/// Two unlike spin-1/2 with a scalar coupling, driven near the first spin's
/// Larmor frequency.
pub fn coupled_pair() -> Result<MasterEquationModel> {
    let t12 = 0.6;
    let system = SpinSystem::new(vec![1, 1], vec![-1.0, -0.35], DMatrix::from_row_slice(2, 2, &[0.0, t12, t12, 0.0]))?;
    let dist = FrequencyDistribution::lorentzian(8.0, 0.2)?;
    let field = FieldConfig::new(8.0, 0.02, dist)?;
    MasterEquationModel::new(system, field, 0.05)
}

/// Spin-1/2 coupled to a spin-1 nucleus.
pub fn spin_half_spin_one() -> Result<MasterEquationModel> {
    let t = 0.9;
    let system = SpinSystem::new(vec![1, 2], vec![-1.0, 0.1], DMatrix::from_row_slice(2, 2, &[0.0, t, t, 0.0]))?;
    let dist = FrequencyDistribution::gaussian(6.0, 0.5)?;
    let field = FieldConfig::new(6.0, 0.015, dist)?;
    MasterEquationModel::new(system, field, 0.08)
}

/// Three spin-1/2 with unequal couplings.
pub fn three_spins() -> Result<MasterEquationModel> {
    let t = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.2, 0.5, 0.0, 0.3, 0.2, 0.3, 0.0]);
    let system = SpinSystem::new(vec![1, 1, 1], vec![-1.0, -0.8, 0.3], t)?;
    let dist = FrequencyDistribution::lorentzian(5.0, 0.3)?;
    let field = FieldConfig::new(5.0, 0.01, dist)?;
    MasterEquationModel::new(system, field, 0.1)
}
