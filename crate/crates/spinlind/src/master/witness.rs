//! Negativity witness: with ℒ = 0 the map sends a pure state to
//! ϱ = ρ₀ − i[K(t), ρ₀], K(t) = ∫₀ᵗ H_LR(τ)dτ, which has a negative eigenvalue.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::MasterEquationModel;
use crate::error::{Error, Result};
use crate::quad;
use crate::spin::max_abs;
use crate::Operator;

#[derive(Clone, Debug)]
pub struct WitnessReport {
    /// Determinant of ϱ(t) restricted to span{ṽ₀, ṽ₀⊥}.
    pub det_value: f64,
    /// −x²(1 + x²)|β|².
    pub predicted: f64,
    /// ‖K|ψ⟩‖.
    pub x: f64,
    /// ⟨ṽ₀⊥|ṽ₁⟩.
    pub beta: C64,
    pub state: Operator,
}

/// K(t) = ∫₀ᵗ H_LR(τ) dτ.
pub fn drive_integral_operator(model: &MasterEquationModel, t: f64) -> Operator {
    let d = model.dim();
    let b1 = model.field.b1;
    let dist = model.field.dist;
    let mut k = DMatrix::<C64>::zeros(d, d);
    for c in &model.channels {
        let w = c.omega_o;
        let amp: C64 = quad::gauss_kronrod(0.0, t, 1e-15, 1e-14, |s| {
            C64::from_polar(2.0 * b1 * dist.characteristic(s).re, -s * w)
        });
        k += &c.xi * amp;
    }
    let kd = k.adjoint();
    k + kd
}

pub fn noncp_witness(model: &MasterEquationModel, psi: &DVector<C64>, t: f64) -> Result<WitnessReport> {
    let d = model.dim();
    if psi.len() != d {
        return Err(Error::Argument(format!("state has {} components, model dimension {d}", psi.len())));
    }
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::Argument("zero state vector".into()));
    }
    let psi = psi / C64::new(norm, 0.0);
    let k = drive_integral_operator(model, t);
    if max_abs(&k) <= 1e-14 {
        return Err(Error::WitnessInapplicable("K(t) vanishes, so the map is the identity".into()));
    }
    let rho0 = &psi * psi.adjoint();
    let i = C64::new(0.0, 1.0);
    let state = &rho0 - (&k * &rho0 - &rho0 * &k) * i;

    let v0 = &k * &psi;
    let x = v0.norm();
    if x <= 1e-14 {
        return Err(Error::WitnessInapplicable("K(t)|ψ⟩ vanishes for this state".into()));
    }
    let e0 = &v0 / C64::new(x, 0.0);
    let v1 = &psi - &v0 * i;
    let v1n = &v1 / C64::new(v1.norm(), 0.0);
    let mut perp = &v1n - &e0 * e0.dotc(&v1n);
    if perp.norm() < 1e-12 {
        // |ṽ₁⟩ ∥ |ṽ₀⟩: pick any unit vector orthogonal to ṽ₀
        perp = (0..d)
            .map(|j| {
                let mut u = DVector::<C64>::zeros(d);
                u[j] = C64::new(1.0, 0.0);
                &u - &e0 * e0.dotc(&u)
            })
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("dimension at least one");
    }
    let e1 = &perp / C64::new(perp.norm(), 0.0);
    let beta = e1.dotc(&v1n);
    let basis = [e0, e1];
    let r = |a: usize, b: usize| basis[a].dotc(&(&state * &basis[b]));
    let det = r(0, 0) * r(1, 1) - r(0, 1) * r(1, 0);
    Ok(WitnessReport {
        det_value: det.re,
        predicted: -x * x * (1.0 + x * x) * beta.norm_sqr(),
        x,
        beta,
        state,
    })
}
