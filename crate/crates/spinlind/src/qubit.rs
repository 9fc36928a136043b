//! Closed-form continuous-wave solutions for a single spin-1/2, Heisenberg
//! evolution coefficients, dynamic structure factors and the
//! fluctuation–dissipation relations.
//!
//! Basis |0⟩ = m = +1/2, |1⟩ = m = −1/2; σ₊ = |0⟩⟨1|, σ₋ = |1⟩⟨0|.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lineshape::FrequencyDistribution;
use crate::master::FieldConfig;
use crate::quad;
use crate::Operator;

/// Parameters of the driven qubit.
#[derive(Clone, Copy, Debug)]
pub struct QubitParams {
    /// Larmor frequency −γB₀.
    pub omega_o: f64,
    /// −γB₁.
    pub omega_1: f64,
    pub beta: f64,
    pub dist: FrequencyDistribution,
    /// Γ = 2π(ω₁/2)²[ρ_f(ω₀) + ρ_f(−ω₀)].
    pub gamma_rate: f64,
    /// ϖ = 2π(ω₁/2)²[ρ_f^≻(ω₀) − ρ_f^≻(−ω₀)].
    pub varpi: f64,
}

impl QubitParams {
    pub fn new(omega_o: f64, omega_1: f64, beta: f64, dist: FrequencyDistribution) -> Result<Self> {
        if !(omega_o.is_finite() && omega_1.is_finite() && beta.is_finite()) {
            return Err(Error::Argument("qubit parameters must be finite".into()));
        }
        let q = (omega_1 / 2.0).powi(2);
        let gamma_rate = 2.0 * PI * q * (dist.density(omega_o) + dist.density(-omega_o));
        if !gamma_rate.is_finite() {
            return Err(Error::Argument("drive distribution is singular at ±ω₀".into()));
        }
        let varpi = 2.0 * PI * q * (dist.hilbert(omega_o)? - dist.hilbert(-omega_o)?);
        Ok(Self { omega_o, omega_1, beta, dist, gamma_rate, varpi })
    }

    pub fn from_field(gamma: f64, field: &FieldConfig, beta: f64) -> Result<Self> {
        Self::new(-gamma * field.b0, -gamma * field.b1, beta, field.dist)
    }

    /// tanh(βω₀/2) = −⟨σ₃(0)⟩.
    pub fn polarization(&self) -> f64 { (0.5 * self.beta * self.omega_o).tanh() }

    /// Precession frequency of the coherence including the Lamb shift.
    ///
    /// The Lamb-shift Hamiltonian of the master equation is +(ϖ/2)σ₃ for a
    /// qubit, so coherences rotate at ω₀ + ϖ.
    pub fn precession(&self) -> f64 { self.omega_o + self.varpi }

    /// Drive amplitude ω₁ tanh(βω₀/2) Re φ_f(t).
    fn drive(&self, t: f64) -> f64 { self.omega_1 * self.polarization() * self.dist.characteristic(t).re }

    /// ⟨σ₊(t)⟩ in the Schrödinger picture.
    pub fn sigma_plus(&self, t: f64) -> C64 {
        if t <= 0.0 || self.omega_1 == 0.0 || self.polarization() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::new(0.0, 1.0) * self.convolution(0.0, t)
    }

    // ∫_a^b e^{z(b−s)} drive(s) ds on panels a fraction of a period wide
    fn convolution(&self, a: f64, b: f64) -> C64 {
        let z = C64::new(-self.gamma_rate, self.precession());
        let fastest = self.precession().abs() + self.dist.center.abs() + self.gamma_rate + 1.0 / self.dist.tau_f();
        let panels = (((b - a) * fastest / 2.0).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        let tol = 1e-11 * self.omega_1.abs().max(1e-300) / panels as f64;
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            acc += quad::adaptive_simpson(lo, lo + h, tol, |s| (z * (b - s)).exp() * self.drive(s));
        }
        acc
    }

    /// `trajectory` on an ascending grid, carrying the convolution forward
    /// instead of restarting it at every point.
    pub fn trajectory_series(&self, times: &[f64]) -> Result<Vec<[f64; 3]>> {
        if times.windows(2).any(|w| !(w[1] >= w[0])) || times.first().is_some_and(|t| !(*t >= 0.0)) {
            return Err(Error::Argument("times must be non-negative and ascending".into()));
        }
        let z = C64::new(-self.gamma_rate, self.precession());
        let trivial = self.omega_1 == 0.0 || self.polarization() == 0.0;
        let mut acc = C64::new(0.0, 0.0);
        let mut last = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if !trivial && t > last {
                acc = (z * (t - last)).exp() * acc + self.convolution(last, t);
                last = t;
            }
            let sp = C64::new(0.0, 1.0) * acc;
            let s3 = -self.polarization() * (-2.0 * self.gamma_rate * t).exp();
            out.push([2.0 * sp.re, 2.0 * sp.im, s3]);
        }
        Ok(out)
    }

    /// (⟨σ₁⟩, ⟨σ₂⟩, ⟨σ₃⟩) at time t.
    pub fn trajectory(&self, t: f64) -> [f64; 3] {
        let sp = self.sigma_plus(t);
        let s3 = -self.polarization() * (-2.0 * self.gamma_rate * t).exp();
        [2.0 * sp.re, 2.0 * sp.im, s3]
    }

    /// Interaction-picture Bloch vector.
    pub fn trajectory_rotating(&self, t: f64) -> [f64; 3] {
        rotate(self.trajectory(t), self.omega_o * t)
    }

    /// Quasi-stationary coherences ⟨σ±(t)⟩_s = −ω₁ tanh Re φ_f(t)/[(ω₀ + ϖ) ± iΓ];
    /// ⟨σ₃⟩_s = 0.
    pub fn stationary(&self, t: f64) -> Result<(f64, C64, C64)> {
        if self.gamma_rate <= 0.0 {
            return Err(Error::NoStationaryState);
        }
        let a = -self.drive(t);
        let plus = a / C64::new(self.precession(), self.gamma_rate);
        let minus = a / C64::new(self.precession(), -self.gamma_rate);
        Ok((0.0, plus, minus))
    }
}

fn rotate(b: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [c * b[0] + s * b[1], -s * b[0] + c * b[1], b[2]]
}

/// Pauli matrices σ₀..σ₃ in the |0⟩ = up basis.
pub fn pauli(i: usize) -> Operator {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let j = C64::new(0.0, 1.0);
    match i {
        0 => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        1 => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        2 => DMatrix::from_row_slice(2, 2, &[o, -j, j, o]),
        3 => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => panic!("Pauli index {i} out of range"),
    }
}

pub fn sigma_plus() -> Operator { (pauli(1) + pauli(2) * C64::new(0.0, 1.0)) * C64::new(0.5, 0.0) }

pub fn sigma_minus() -> Operator { (pauli(1) - pauli(2) * C64::new(0.0, 1.0)) * C64::new(0.5, 0.0) }

/// c_i = Tr[X σ_i].
pub fn pauli_coefficients(x: &Operator) -> [C64; 4] {
    let mut c = [C64::new(0.0, 0.0); 4];
    for (i, slot) in c.iter_mut().enumerate() {
        *slot = (x * pauli(i)).trace();
    }
    c
}

/// Heisenberg coefficients c(t) with X(t) = ½Σc_i(t)σ_i from a Schrödinger
/// Bloch vector `bloch_t` at time t, the initial ⟨σ₃(0)⟩ and the Larmor
/// frequency.
pub fn heisenberg_from_bloch(omega_o: f64, s3_0: f64, bloch_t: [f64; 3], t: f64, x: &Operator) -> Result<[C64; 4]> {
    let den = 1.0 - s3_0 * s3_0;
    if den.abs() < 1e-14 {
        return Err(Error::Singular("⟨σ₃(0)⟩ = ±1 (zero temperature)".into()));
    }
    let p = rotate(bloch_t, omega_o * t);
    let s = s3_0;
    let i = C64::new(0.0, 1.0);
    let r = |v: f64| C64::new(v, 0.0);
    let k0 = r((1.0 - s * p[2]) / den);
    let k1 = i * (r(p[1] * s) - i * p[0]) / den;
    let k2 = -i * (r(p[0] * s) + i * p[1]) / den;
    let k3 = r((p[2] - s) / den);
    let kappa = [
        [k0, k1, k2, k3],
        [k1, k0, -i * k3, i * k2],
        [k2, i * k3, k0, -i * k1],
        [k3, -i * k2, i * k1, k0],
    ];
    let c = pauli_coefficients(x);
    let (sn, cs) = (omega_o * t).sin_cos();
    let cp = [c[0], c[1] * cs + c[2] * sn, -c[1] * sn + c[2] * cs, c[3]];
    let mut out = [C64::new(0.0, 0.0); 4];
    for (row, o) in kappa.iter().zip(out.iter_mut()) {
        *o = row.iter().zip(&cp).map(|(a, b)| a * b).sum();
    }
    Ok(out)
}

/// Heisenberg coefficients using the closed-form trajectory.
pub fn heisenberg_coefficients(params: &QubitParams, t: f64, x: &Operator) -> Result<[C64; 4]> {
    heisenberg_from_bloch(params.omega_o, -params.polarization(), params.trajectory(t), t, x)
}

/// Which correlation spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correlation {
    /// S_{σ₋σ₊}: absorption side, centred at +ω₀.
    MinusPlus,
    /// S_{σ₊σ₋}: emission side, centred at −ω₀.
    PlusMinus,
}

/// A spectral density split into a Dirac delta (weight, location) and a
/// smooth part evaluated at the requested frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralValue {
    pub delta_weight: f64,
    pub delta_location: f64,
    pub smooth: f64,
}

/// Normalised Lorentzian with half width `hw` centred at `c`.
fn lorentz(x: f64, c: f64, hw: f64) -> f64 { hw / (PI * (hw * hw + (x - c).powi(2))) }

/// S_{σ₋σ₊}(ω′) = ½[δ(ω′−ω₀) + tanh(βω₀/2) L_{2Γ}(ω′−ω₀)] and its mirror.
pub fn structure_factor(params: &QubitParams, which: Correlation, omega_prime: f64) -> SpectralValue {
    let th = params.polarization();
    let w0 = params.omega_o;
    let hw = 2.0 * params.gamma_rate;
    let smooth = |c: f64| if hw > 0.0 { lorentz(omega_prime, c, hw) } else { 0.0 };
    match which {
        Correlation::MinusPlus => SpectralValue { delta_weight: 0.5, delta_location: w0, smooth: 0.5 * th * smooth(w0) },
        Correlation::PlusMinus => {
            SpectralValue { delta_weight: 0.5, delta_location: -w0, smooth: -0.5 * th * smooth(-w0) }
        }
    }
}

/// Residuals of the adiabatic-limit relations, all evaluated on delta
/// weights.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct FdtResiduals {
    /// Weight of S^ad_{σ₋σ₊} at +ω₀.
    pub absorption_weight: f64,
    /// Weight of S^ad_{σ₊σ₋} at −ω₀.
    pub emission_weight: f64,
    /// Weight of Im χ_{σ₋σ₊} at +ω₀.
    pub im_chi_weight: f64,
    /// |S^ad_{+−}(−ω′) − e^{−βω₀} S^ad_{−+}(ω′)|.
    pub adiabatic_detailed_balance: f64,
    /// |Im χ − (−π(1 − e^{−βω₀}) S^ad_{−+})|.
    pub fdt: f64,
}

/// Adiabatic limit Γ, ϖ → 0: the smooth Lorentzian collapses onto the delta,
/// so S^ad_{−+} = ½(1 + tanh)δ(ω′−ω₀) = e^{βω₀/2}/Z δ(ω′−ω₀) and
/// S^ad_{+−} = e^{−βω₀/2}/Z δ(ω′+ω₀).
pub fn fdt_check(params: &QubitParams) -> FdtResiduals {
    let th = params.polarization();
    let x = params.beta * params.omega_o;
    let absorption_weight = 0.5 * (1.0 + th);
    let emission_weight = 0.5 * (1.0 - th);
    let im_chi_weight = -PI * th;
    let boltz = (-x).exp();
    FdtResiduals {
        absorption_weight,
        emission_weight,
        im_chi_weight,
        adiabatic_detailed_balance: (emission_weight - boltz * absorption_weight).abs(),
        fdt: (im_chi_weight + PI * (1.0 - boltz) * absorption_weight).abs(),
    }
}
