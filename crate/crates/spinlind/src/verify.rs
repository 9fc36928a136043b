//! Invariant checks shared by the `verify` run mode and the test suites.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use num_traits::Zero;
use serde::Serialize;

use crate::eigenops::{adjoint_block, decompose_xi_x, DEFAULT_GAP_TOL};
use crate::error::Result;
use crate::master::{kraus_audit, lambda_map, noncp_witness, propagate_with, MasterEquationModel, PropagateOptions};
use crate::qubit::{pauli, QubitParams};
use crate::spectrum::{self, generating_polynomial, Molecule, SpectrumOptions};
use crate::spin::{build_zo, max_abs, moment_operator, total_spin, Axis, DensityMatrix, LevelData, SpinSystem};
use crate::Operator;

/// Largest Liouville-space dimension d² for which the Kraus audit runs.
pub const KRAUS_AUDIT_MAX_DIM: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Measured residual (or the signed quantity for one-sided checks).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when |value| ≤ tolerance.
    pub fn within(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value.abs() <= tolerance }
    }

    /// Passes when value ≥ −tolerance.
    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value >= -tolerance }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), value: if passed { 0.0 } else { 1.0 }, tolerance: 0.0, passed }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool { self.checks.iter().all(|c| c.passed) }

    pub fn failures(&self) -> impl Iterator<Item = &Check> { self.checks.iter().filter(|c| !c.passed) }

    pub fn extend(&mut self, other: Report) { self.checks.extend(other.checks); }

    fn push(&mut self, c: Check) { self.checks.push(c); }
}

/// Residuals of the ξˣ(n, ω₀) decomposition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenopResiduals {
    /// max |Σ ξˣ(n,ω₀) − ξˣ|.
    pub completeness: f64,
    /// max |[𝒵₀, ξ] + ω₀ξ| over blocks.
    pub energy_ladder: f64,
    /// max |[Sᶻ, ξ] + nξ| over blocks.
    pub magnetization_ladder: f64,
    /// Every block's adjoint is stored bit-for-bit as (−n, −ω₀).
    pub adjoint_exact: bool,
    /// Every block has n = ±1.
    pub unit_steps: bool,
}

pub fn eigenop_residuals(system: &SpinSystem, b0: f64) -> Result<EigenopResiduals> {
    let levels = LevelData::new(system, b0);
    let xi = moment_operator(system, Axis::X);
    let dec = decompose_xi_x(&xi, &levels, DEFAULT_GAP_TOL)?;
    let zo = build_zo(system, b0);
    let sz = total_spin(system, Axis::Z);
    let completeness = max_abs(&(dec.sum() - &xi));
    let mut energy_ladder: f64 = 0.0;
    let mut magnetization_ladder: f64 = 0.0;
    let mut adjoint_exact = true;
    let mut unit_steps = true;
    for b in &dec.blocks {
        let m = &b.matrix;
        let scale = max_abs(m).max(1.0);
        let ez = &zo * m - m * &zo + m * C64::new(b.omega_o, 0.0);
        energy_ladder = energy_ladder.max(max_abs(&ez) / scale);
        let mz = &sz * m - m * &sz + m * C64::new(b.n as f64, 0.0);
        magnetization_ladder = magnetization_ladder.max(max_abs(&mz) / scale);
        adjoint_exact &= adjoint_block(&dec, b.n, b.omega_o).is_ok();
        unit_steps &= b.n == 1 || b.n == -1;
    }
    Ok(EigenopResiduals { completeness, energy_ladder, magnetization_ladder, adjoint_exact, unit_steps })
}

pub fn eigenop_checks(system: &SpinSystem, b0: f64) -> Result<Report> {
    let r = eigenop_residuals(system, b0)?;
    let mut rep = Report::default();
    rep.push(Check::within("eigenops: completeness", r.completeness, 1e-12));
    rep.push(Check::within("eigenops: energy ladder commutator", r.energy_ladder, 1e-10));
    rep.push(Check::within("eigenops: magnetization ladder commutator", r.magnetization_ladder, 1e-10));
    rep.push(Check::flag("eigenops: adjoint identity exact", r.adjoint_exact));
    rep.push(Check::flag("eigenops: steps n = ±1 only", r.unit_steps));
    Ok(rep)
}

/// Smallest eigenvalue of ϱ(t) along an RK4 trajectory started from the
/// Boltzmann state, checked at every step.
pub fn trajectory_min_eigenvalue(model: &MasterEquationModel, t_end: f64, dt: Option<f64>) -> Result<f64> {
    let opts = PropagateOptions { dt, record_every: 1, unsafe_allow_any_state: false };
    let traj = propagate_with(model, &model.boltzmann(), t_end, opts)?;
    Ok(traj
        .states
        .iter()
        .map(|s| DensityMatrix::new(s.clone(), 1.0).eigenvalues()[0])
        .fold(f64::INFINITY, f64::min))
}

/// Structural and map-level checks for one master-equation model.
pub fn model_checks(model: &MasterEquationModel, t_end: f64) -> Result<Report> {
    let mut rep = eigenop_checks(&model.system, model.field.b0)?;
    let d = model.dim();
    let h = model.lamb_shift();
    let hs = max_abs(h).max(1.0);
    rep.push(Check::within("lamb shift: Hermitian", max_abs(&(h - h.adjoint())) / hs, 1e-12));
    rep.push(Check::within("lamb shift: commutes with Z0", max_abs(&(h * &model.zo - &model.zo * h)) / hs, 1e-10));
    let id = Operator::identity(d, d);
    rep.push(Check::within("liouvillian: L(I) = 0", max_abs(&model.liouvillian(&id)), 1e-12));
    let probe = Operator::from_fn(d, d, |a, b| C64::new((a + 2 * b) as f64, (a as f64 - b as f64) * 0.5));
    rep.push(Check::within("dissipator: traceless", model.dissipator(&probe).trace().norm(), 1e-10));

    let min_eig = trajectory_min_eigenvalue(model, t_end, None)?;
    rep.push(Check::at_least("trajectory: min eigenvalue", min_eig, 1e-8));

    if d <= KRAUS_AUDIT_MAX_DIM {
        let rho0 = model.boltzmann();
        let map = lambda_map(model, t_end, &rho0)?;
        rep.push(Check::within("map: trace preservation", (map.trace() - C64::new(1.0, 0.0)).norm(), 1e-8));
        let audit = kraus_audit(model, t_end, &rho0)?;
        rep.push(Check::within("map: Kraus trace identity", audit.trace_residual, 1e-8));
        rep.push(Check::within("map: Kraus reconstruction", audit.phi1_minus_phi2_residual, 1e-8));
        rep.push(Check::at_least("map: semigroup Choi min eigenvalue", audit.semigroup_min_choi, 1e-10));
        if model.field.b1 > 0.0 && d > 1 {
            let psi = DVector::from_fn(d, |k, _| C64::new(1.0 + k as f64, 0.3 * k as f64));
            let w = noncp_witness(model, &psi, t_end)?;
            rep.push(Check::flag("witness: determinant negative", w.det_value < 0.0));
            rep.push(Check::within("witness: matches prediction", w.det_value - w.predicted, 1e-8));
        }
    }
    Ok(rep)
}

/// Largest deviation between the RK4 Bloch vector and the closed form.
#[derive(Clone, Debug, Serialize)]
pub struct QubitComparison {
    pub times: Vec<f64>,
    pub numeric: Vec<[f64; 3]>,
    pub analytic: Vec<[f64; 3]>,
    pub max_deviation: f64,
}

pub fn qubit_comparison(model: &MasterEquationModel, t_end: f64, opts: PropagateOptions) -> Result<QubitComparison> {
    let params = QubitParams::from_field(model.system.gammas()[0], &model.field, model.beta)?;
    let traj = propagate_with(model, &model.boltzmann(), t_end, opts)?;
    let analytic = params.trajectory_series(&traj.times)?;
    let mut numeric = Vec::with_capacity(traj.times.len());
    let mut worst: f64 = 0.0;
    for (rho, a) in traj.schrodinger(model).iter().zip(&analytic) {
        let n = [1, 2, 3].map(|i| (rho * pauli(i)).trace().re);
        for i in 0..3 {
            worst = worst.max((n[i] - a[i]).abs());
        }
        numeric.push(n);
    }
    Ok(QubitComparison { times: traj.times, numeric, analytic, max_deviation: worst })
}

/// Combinatorial checks on the stick spectrum of one resonance group.
pub fn molecule_checks(molecule: &Molecule, resonance: &str) -> Result<Report> {
    let mut rep = Report::default();
    let poly = generating_polynomial(molecule, resonance)?;
    let expected = molecule
        .neighbours(resonance)?
        .iter()
        .fold(num_bigint::BigUint::from(1u32), |acc, (g, _)| acc * num_bigint::BigUint::from(g.twice_j + 1).pow(g.count));
    rep.push(Check::flag(format!("spectrum {resonance}: coefficient sum"), poly.coefficient_sum() == expected));

    let spec = spectrum::stick_spectrum(molecule, &[resonance], SpectrumOptions::default())?;
    let mut w: Vec<_> = spec.lines.iter().map(|l| l.weight.clone()).collect();
    let mut rev = w.clone();
    rev.reverse();
    rep.push(Check::flag(format!("spectrum {resonance}: palindromic intensities"), w == rev));
    w.retain(|x| x.is_zero());
    rep.push(Check::flag(format!("spectrum {resonance}: positive weights"), w.is_empty()));

    let mut buf = Vec::new();
    spectrum::write_csv(&spec, &mut buf)?;
    let back = spectrum::read_csv(buf.as_slice(), resonance)?;
    let same = back.len() == spec.lines.len()
        && back.iter().zip(&spec.lines).all(|(a, b)| a.weight == b.weight && a.configs == b.configs && (a.delta_b - b.delta_b).abs() <= 1e-9);
    rep.push(Check::flag(format!("spectrum {resonance}: CSV round trip"), same));
    let mut again = Vec::new();
    let reread = spectrum::StickSpectrum { lines: back, ..spec.clone() };
    spectrum::write_csv(&reread, &mut again)?;
    rep.push(Check::flag(format!("spectrum {resonance}: CSV re-emit byte-identical"), again == buf));
    Ok(rep)
}

/// Growth rate of the ρ_f-averaged second-order transition probability of a
/// qubit under ℋ′(t) = 2B₁cos(ω′t)ξˣ, measured as [P̄(t₂) − P̄(t₁)]/(t₂ − t₁)
/// from the ground level, next to the stimulated rate Γ⁺ it should match.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleRate {
    pub oracle: f64,
    pub gamma_plus: f64,
}

pub fn qubit_oracle_rate(model: &MasterEquationModel, t1: f64, t2: f64, nodes: usize) -> Result<OracleRate> {
    use crate::error::Error;
    if model.dim() != 2 {
        return Err(Error::Argument("the transition-rate oracle is set up for a single spin-1/2".into()));
    }
    if !(0.0 <= t1 && t1 < t2) {
        return Err(Error::Argument(format!("need 0 <= t1 < t2, got {t1}, {t2}")));
    }
    let dist = model.field.dist;
    if dist.kind == crate::lineshape::Kind::Delta {
        return Err(Error::Argument("averaging needs a non-degenerate distribution".into()));
    }
    let e = &model.levels.energies;
    let (k0, k) = if e[0] < e[1] { (0, 1) } else { (1, 0) };
    let b1 = model.field.b1;
    let xi = model.xi_x.clone();
    // ω′ = centre + s·tan θ spreads the nodes over the line and its tails
    let s = 0.5 * dist.width;
    let gl = crate::quad::GaussLegendre::new(8);
    let panels = nodes.div_ceil(8).max(1);
    let half = 0.5 * std::f64::consts::PI;
    let h = 2.0 * half / panels as f64;
    let fastest = |w: f64| w.abs() + model.max_gap();
    let mut avg = [0.0; 2];
    for p in 0..panels {
        let lo = -half + p as f64 * h;
        for (theta, w) in gl.mapped(lo, lo + h) {
            let wp = dist.center + s * theta.tan();
            let jac = s / theta.cos().powi(2);
            let weight = dist.density(wp) * jac * w;
            if weight == 0.0 {
                continue;
            }
            let hp = |t: f64| &xi * C64::new(2.0 * b1 * (wp * t).cos(), 0.0);
            for (slot, &t) in avg.iter_mut().zip(&[t1, t2]) {
                let panels = ((t * fastest(wp) / 2.0).ceil() as usize).max(1);
                *slot += weight * crate::master::wavefunction_oracle(e, hp, k0, k, 0.0, t, panels);
            }
        }
    }
    let rates = crate::master::pauli_rates(model);
    let gamma_plus = rates.entries.iter().map(|r| r.gamma_plus).sum();
    Ok(OracleRate { oracle: (avg[1] - avg[0]) / (t2 - t1), gamma_plus })
}
