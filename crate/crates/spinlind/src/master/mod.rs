//! Zeroth-order master equation in the interaction picture,
//!
//!   dϱ/dt = −i[H_LR(t), ϱ(0)] − i[H_LS, ϱ(t)] + 𝒟[ϱ(t)],
//!
//! assembled from the ξˣ(+1, ω₀) blocks, and its fixed-step propagation.

mod rates;
mod superop;
mod witness;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::eigenops::{decompose_xi_x, Decomposition, DEFAULT_GAP_TOL};
use crate::error::{Error, Result};
use crate::lineshape::{gamma_halfline, FrequencyDistribution};
use crate::spin::{boltzmann_state, build_zo, max_abs, moment_operator, Axis, DensityMatrix, LevelData, SpinSystem};
use crate::Operator;

pub use rates::{absorbed_power_rates, pauli_rates, wavefunction_oracle, RateEntry, RateTable};
pub use superop::{
    choi_matrix, kraus_audit, kraus_operators, lambda_map, liouvillian_matrix, superop_exp, unvec, vec, KrausAudit,
    MAX_MAP_DIM,
};
pub use witness::{noncp_witness, WitnessReport};

/// Static field, drive amplitude and the drive's frequency distribution.
#[derive(Clone, Copy, Debug)]
pub struct FieldConfig {
    pub b0: f64,
    pub b1: f64,
    pub dist: FrequencyDistribution,
}

impl FieldConfig {
    pub fn new(b0: f64, b1: f64, dist: FrequencyDistribution) -> Result<Self> {
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(Error::Argument(format!("static field must be positive, got {b0}")));
        }
        // b1 = 0 is accepted as the undriven limit
        if !(b1 >= 0.0 && b1.is_finite()) {
            return Err(Error::Argument(format!("drive amplitude must be non-negative, got {b1}")));
        }
        Ok(Self { b0, b1, dist })
    }

    /// Warning text when the weak-field assumption B₁/B₀ ≪ 1 looks doubtful.
    pub fn weak_field_warning(&self) -> Option<String> {
        let r = self.b1 / self.b0;
        (r > 0.1).then(|| format!("B1/B0 = {r:.3} is not small; the weak-field expansion may be poor"))
    }
}

/// One absorption channel ξˣ(+1, ω₀) with its rates.
#[derive(Clone, Debug)]
pub struct Channel {
    pub omega_o: f64,
    pub xi: Operator,
    /// 2πB₁²ρ_f(ω₀).
    pub rate_plus: f64,
    /// 2πB₁²ρ_f(−ω₀).
    pub rate_minus: f64,
    /// πB₁²[ρ_f^≻(ω₀) − ρ_f^≻(−ω₀)], the coefficient of [ξ†, ξ] in H_LS.
    pub lamb: f64,
}

impl Channel {
    pub fn rate(&self) -> f64 { self.rate_plus + self.rate_minus }
}

#[derive(Clone, Debug)]
pub struct MasterEquationModel {
    pub system: SpinSystem,
    pub field: FieldConfig,
    pub beta: f64,
    pub levels: LevelData,
    pub zo: Operator,
    pub xi_x: Operator,
    pub dec: Decomposition,
    pub channels: Vec<Channel>,
    pub h_ls: Operator,
    // −iH_LS − ½Σ g(ξ†ξ + ξξ†), so that ℒρ = Kρ + ρK† + Σ g(ξρξ† + ξ†ρξ)
    k_eff: Operator,
}

impl MasterEquationModel {
    pub fn new(system: SpinSystem, field: FieldConfig, beta: f64) -> Result<Self> {
        Self::with_gap_tol(system, field, beta, DEFAULT_GAP_TOL)
    }

    pub fn with_gap_tol(system: SpinSystem, field: FieldConfig, beta: f64, gap_tol: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Argument(format!("inverse temperature must be finite, got {beta}")));
        }
        let levels = LevelData::new(&system, field.b0);
        let zo = build_zo(&system, field.b0);
        let xi_x = moment_operator(&system, Axis::X);
        let dec = decompose_xi_x(&xi_x, &levels, gap_tol)?;
        let hl = gamma_halfline(field.b1);
        let mut channels = Vec::new();
        for b in dec.raising() {
            let w = b.omega_o;
            let (rate_plus, rate_minus, lamb) = if field.b1 == 0.0 {
                (0.0, 0.0, 0.0)
            } else {
                let rp = hl.dissipation_rate(&field.dist, w);
                let rm = hl.dissipation_rate(&field.dist, -w);
                if !(rp.is_finite() && rm.is_finite()) {
                    return Err(Error::Argument(format!(
                        "drive distribution is singular at the gap frequency {w}; rates are infinite"
                    )));
                }
                let lamb = hl.lamb_coefficient(&field.dist, w)? - hl.lamb_coefficient(&field.dist, -w)?;
                (rp, rm, lamb)
            };
            channels.push(Channel { omega_o: w, xi: b.matrix.clone(), rate_plus, rate_minus, lamb });
        }
        let mut model = Self {
            system,
            field,
            beta,
            levels,
            zo,
            xi_x,
            dec,
            channels,
            h_ls: Operator::zeros(0, 0),
            k_eff: Operator::zeros(0, 0),
        };
        model.rebuild_generator();
        Ok(model)
    }

    fn rebuild_generator(&mut self) {
        let d = self.dim();
        let mut h = DMatrix::<C64>::zeros(d, d);
        let mut k = DMatrix::<C64>::zeros(d, d);
        for c in &self.channels {
            let xd = c.xi.adjoint();
            let xdx = &xd * &c.xi;
            let xxd = &c.xi * &xd;
            h += (&xdx - &xxd) * C64::new(c.lamb, 0.0);
            k -= (xdx + xxd) * C64::new(0.5 * c.rate(), 0.0);
        }
        k -= &h * C64::new(0.0, 1.0);
        self.h_ls = h;
        self.k_eff = k;
    }

    /// Same drive term, but with the Lamb shift and dissipator removed.
    pub fn without_relaxation(&self) -> Self {
        let mut m = self.clone();
        for c in &mut m.channels {
            c.rate_plus = 0.0;
            c.rate_minus = 0.0;
            c.lamb = 0.0;
        }
        m.rebuild_generator();
        m
    }

    pub fn dim(&self) -> usize { self.levels.dim() }

    /// Boltzmann state of 𝒵₀ at the model's β.
    pub fn boltzmann(&self) -> DensityMatrix {
        boltzmann_state(&self.zo, self.beta).expect("diagonal Hamiltonian and finite beta")
    }

    /// Largest |ω₀| over the absorption channels.
    pub fn max_gap(&self) -> f64 {
        self.channels.iter().fold(0.0, |m, c| m.max(c.omega_o.abs()))
    }

    /// Default RK4 step: min(2π/(50 ω_max), τ_f/50), where ω_max also counts
    /// the drive's centre frequency that oscillates inside Re φ_f.
    pub fn default_dt(&self) -> f64 {
        let w = self.max_gap() + self.field.dist.center.abs();
        let a = if w > 0.0 { 2.0 * PI / (50.0 * w) } else { f64::INFINITY };
        let b = self.field.dist.tau_f() / 50.0;
        let dt = a.min(b);
        if dt.is_finite() { dt } else { 1.0 }
    }

    /// H_LR(t) = 2B₁ Re φ_f(t) Σ e^{−itω₀} ξˣ(+1, ω₀) + h.c.
    pub fn linear_response_hamiltonian(&self, t: f64) -> Operator {
        let d = self.dim();
        let amp = 2.0 * self.field.b1 * self.field.dist.characteristic(t).re;
        let mut h = DMatrix::<C64>::zeros(d, d);
        for c in &self.channels {
            h += &c.xi * (C64::from_polar(amp, -t * c.omega_o));
        }
        let hd = h.adjoint();
        h + hd
    }

    /// H_LS = Σ_± ±πB₁² Σ ρ_f^≻(±ω₀)[ξ†(+1,ω₀), ξ(+1,ω₀)].
    pub fn lamb_shift(&self) -> &Operator { &self.h_ls }

    /// 𝒟[ρ] summed over channels and both branches.
    pub fn dissipator(&self, rho: &Operator) -> Operator {
        let d = self.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for c in &self.channels {
            let g = c.rate();
            if g == 0.0 {
                continue;
            }
            let xd = c.xi.adjoint();
            let sand = &c.xi * rho * &xd + &xd * rho * &c.xi;
            let anti = &xd * &c.xi + &c.xi * &xd;
            out += (sand - (&anti * rho + rho * &anti) * C64::new(0.5, 0.0)) * C64::new(g, 0.0);
        }
        out
    }

    /// ℒρ = −i[H_LS, ρ] + 𝒟[ρ].
    pub fn liouvillian(&self, rho: &Operator) -> Operator {
        let mut out = &self.k_eff * rho + rho * self.k_eff.adjoint();
        for c in &self.channels {
            let g = c.rate();
            if g == 0.0 {
                continue;
            }
            let xd = c.xi.adjoint();
            out += (&c.xi * rho * &xd + &xd * rho * &c.xi) * C64::new(g, 0.0);
        }
        out
    }

    /// Precomputed pieces of 𝒜(t)ρ₀ = −i[H_LR(t), ρ₀].
    pub fn drive_term(&self, rho0: &Operator) -> DriveTerm {
        let parts = self
            .channels
            .iter()
            .map(|c| {
                let comm = (&c.xi * rho0 - rho0 * &c.xi) * C64::new(0.0, -1.0);
                (c.omega_o, comm)
            })
            .collect();
        DriveTerm { b1: self.field.b1, dist: self.field.dist, parts, dim: self.dim() }
    }

    /// Max-entry distance from the model's Boltzmann state.
    pub fn boltzmann_deviation(&self, rho0: &Operator) -> f64 {
        max_abs(&(rho0 - self.boltzmann().matrix))
    }

    pub fn check_domain(&self, rho0: &Operator) -> Result<()> {
        if rho0.nrows() != self.dim() || rho0.ncols() != self.dim() {
            return Err(Error::Argument(format!(
                "state is {}x{}, model dimension {}",
                rho0.nrows(),
                rho0.ncols(),
                self.dim()
            )));
        }
        let dev = self.boltzmann_deviation(rho0);
        if dev > 1e-10 {
            return Err(Error::DomainViolation(dev));
        }
        Ok(())
    }

    /// Interaction picture → Schrödinger picture: e^{−it𝒵₀} ϱ e^{it𝒵₀}.
    pub fn to_schrodinger(&self, rho: &Operator, t: f64) -> Operator {
        let e = &self.levels.energies;
        Operator::from_fn(rho.nrows(), rho.ncols(), |a, b| rho[(a, b)] * C64::from_polar(1.0, -t * (e[a] - e[b])))
    }

    /// Schrödinger picture → interaction picture.
    pub fn to_interaction(&self, rho: &Operator, t: f64) -> Operator { self.to_schrodinger(rho, -t) }
}

/// 𝒜(t)ρ₀ = 2B₁ Re φ_f(t) Σ (e^{−itω₀} C + h.c.) with C = −i[ξˣ(+1,ω₀), ρ₀].
#[derive(Clone, Debug)]
pub struct DriveTerm {
    b1: f64,
    dist: FrequencyDistribution,
    parts: Vec<(f64, Operator)>,
    dim: usize,
}

impl DriveTerm {
    pub fn eval(&self, t: f64) -> Operator {
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        if self.b1 == 0.0 {
            return out;
        }
        let amp = 2.0 * self.b1 * self.dist.characteristic(t).re;
        for (w, c) in &self.parts {
            out += c * C64::from_polar(amp, -t * w);
        }
        let od = out.adjoint();
        out + od
    }
}

/// Options for RK4 propagation.
#[derive(Clone, Copy, Debug)]
pub struct PropagateOptions {
    /// Step size; `None` uses the model default.
    pub dt: Option<f64>,
    /// Keep every k-th step (the final state is always kept).
    pub record_every: usize,
    /// Skip the Boltzmann-domain check. Only meant for the non-CP witness.
    pub unsafe_allow_any_state: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self { Self { dt: None, record_every: 1, unsafe_allow_any_state: false } }
}

/// Interaction-picture states at the recorded times.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
}

impl Trajectory {
    pub fn last(&self) -> &Operator { self.states.last().expect("trajectory is never empty") }

    pub fn schrodinger(&self, model: &MasterEquationModel) -> Vec<Operator> {
        self.times.iter().zip(&self.states).map(|(&t, s)| model.to_schrodinger(s, t)).collect()
    }
}

/// RK4 from 0 to `t_end` with step `dt` (rounded so the grid ends on t_end).
pub fn propagate(model: &MasterEquationModel, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<Trajectory> {
    propagate_with(model, rho0, t_end, PropagateOptions { dt: Some(dt), ..Default::default() })
}

pub fn propagate_with(
    model: &MasterEquationModel,
    rho0: &DensityMatrix,
    t_end: f64,
    opts: PropagateOptions,
) -> Result<Trajectory> {
    if !opts.unsafe_allow_any_state {
        model.check_domain(&rho0.matrix)?;
    }
    let drive = model.drive_term(&rho0.matrix);
    integrate_affine(model, &rho0.matrix, t_end, opts, |t| Ok(drive.eval(t)))
}

/// RK4 for dϱ/dt = f(t) + ℒϱ starting from `start`.
pub(crate) fn integrate_affine(
    model: &MasterEquationModel,
    start: &Operator,
    t_end: f64,
    opts: PropagateOptions,
    mut source: impl FnMut(f64) -> Result<Operator>,
) -> Result<Trajectory> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Argument(format!("end time must be non-negative, got {t_end}")));
    }
    let dt = opts.dt.unwrap_or_else(|| model.default_dt());
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument(format!("time step must be positive, got {dt}")));
    }
    let steps = (t_end / dt).ceil().max(if t_end > 0.0 { 1.0 } else { 0.0 }) as usize;
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let every = opts.record_every.max(1);
    let mut rho = start.clone();
    let mut times = vec![0.0];
    let mut states = vec![rho.clone()];
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut f_next = source(0.0)?;
    for s in 0..steps {
        let t = s as f64 * h;
        let f0 = f_next;
        let fm = source(t + 0.5 * h)?;
        f_next = source(t + h)?;
        let k1 = &f0 + model.liouvillian(&rho);
        let k2 = &fm + model.liouvillian(&(&rho + &k1 * half));
        let k3 = &fm + model.liouvillian(&(&rho + &k2 * half));
        let k4 = &f_next + model.liouvillian(&(&rho + &k3 * full));
        rho += (k1 + (k2 + k3) * two + k4) * sixth;
        if (s + 1) % every == 0 || s + 1 == steps {
            times.push(t + h);
            states.push(rho.clone());
        }
    }
    Ok(Trajectory { times, states })
}
