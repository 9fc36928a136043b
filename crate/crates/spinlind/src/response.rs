//! Linear response of an observable X to the drive in the ℒ → 0 limit.
//!
//! Each absorption channel ξˣ(+1, ω₀) contributes
//!   χ_{±,ω₀,∞}(ω′) = c / ((±ω′ − ω₀) + i0),   c = ⟨[X, ξˣ(+1, ω₀)]⟩₀,
//! kept symbolically as a principal-value numerator plus a delta weight.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::eigenops::project;
use crate::error::{Error, Result};
use crate::lineshape::{FrequencyDistribution, Kind};
use crate::master::{absorbed_power_rates, MasterEquationModel};
use crate::quad;
use crate::spin::{moment_operator, Axis};
use crate::Operator;

/// Branch of the rotating drive: + for ω′, − for −ω′.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A distribution in ω′: PV[numerator/(±ω′ − ω₀)] + delta_weight·δ(ω′ − pole).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    pub numerator: C64,
    pub denominator_offset: f64,
    pub sign: f64,
    pub delta_weight: C64,
    /// ω′ at which ±ω′ = ω₀.
    pub pole: f64,
}

impl Kernel {
    /// The principal-value part at ω′ (an error on the pole itself).
    pub fn smooth(&self, omega_prime: f64) -> Result<C64> {
        let x = self.sign * omega_prime - self.denominator_offset;
        if x == 0.0 {
            return Err(Error::Pole(omega_prime));
        }
        Ok(self.numerator / x)
    }
}

/// Response of one observable through one channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseFunction {
    pub omega_o: f64,
    /// ⟨[X, ξˣ(+1, ω₀)]⟩₀.
    pub commutator_avg: C64,
}

impl ResponseFunction {
    /// χ_{±,ω₀,∞} = c·PV 1/(±ω′ − ω₀) − iπc·δ(±ω′ − ω₀).
    pub fn chi_infinity(&self, branch: Branch) -> Kernel {
        let s = branch.sign();
        Kernel {
            numerator: self.commutator_avg,
            denominator_offset: self.omega_o,
            sign: s,
            delta_weight: self.commutator_avg * C64::new(0.0, -PI),
            pole: s * self.omega_o,
        }
    }

    /// χ_{±,ω₀,t}(ω′) = −c e^{i(±ω′−ω₀)t}/((±ω′ − ω₀) + i0). The numerator
    /// depends on ω′, so it is evaluated at the given point; the delta weight
    /// is +iπc.
    pub fn chi_transient(&self, branch: Branch, omega_prime: f64, t: f64) -> Result<Kernel> {
        if !(t >= 0.0) {
            return Err(Error::Argument(format!("time must be non-negative, got {t}")));
        }
        let s = branch.sign();
        let x = s * omega_prime - self.omega_o;
        Ok(Kernel {
            numerator: -self.commutator_avg * C64::from_polar(1.0, x * t),
            denominator_offset: self.omega_o,
            sign: s,
            delta_weight: self.commutator_avg * C64::new(0.0, PI),
            pole: s * self.omega_o,
        })
    }

    /// c / ((±ω′ − ω₀) + iη).
    pub fn smoothed(&self, branch: Branch, omega_prime: f64, eta: f64) -> C64 {
        self.commutator_avg / C64::new(branch.sign() * omega_prime - self.omega_o, eta)
    }

    /// ∫ρ_f(ω′)χ_{±,ω₀,∞}(ω′)dω′ = c[PV∫ρ_f/(±ω′ − ω₀) − iπρ_f(±ω₀)].
    pub fn averaged_infinity(&self, branch: Branch, dist: &FrequencyDistribution) -> Result<C64> {
        let s = branch.sign();
        let at = s * self.omega_o;
        let rho = dist.density(at);
        if !rho.is_finite() {
            return Err(Error::Pole(at));
        }
        // PV∫ρ(ω′)/(sω′ − ω₀) = −s·π·ρ^≻(sω₀)
        let pv = -s * PI * dist.hilbert(at)?;
        Ok(self.commutator_avg * C64::new(pv, -PI * rho))
    }

    /// ∫ρ_f(ω′)χ_{±,ω₀,t}(ω′)dω′. Lorentzian drives use the contour result
    /// −c e^{i(±ω_c−ω₀)t}e^{−at}/(±ω_c − ω₀ + ia); others use quadrature.
    pub fn averaged_transient(&self, branch: Branch, dist: &FrequencyDistribution, t: f64) -> Result<C64> {
        if !(t >= 0.0) {
            return Err(Error::Argument(format!("time must be non-negative, got {t}")));
        }
        let s = branch.sign();
        match dist.kind {
            Kind::Lorentzian => {
                let a = 0.5 * dist.width;
                let x = s * dist.center - self.omega_o;
                Ok(-self.commutator_avg * C64::from_polar((-a * t).exp(), x * t) / C64::new(x, a))
            }
            Kind::Delta => {
                let x = s * dist.center - self.omega_o;
                if x == 0.0 {
                    return Err(Error::Pole(dist.center));
                }
                Ok(-self.commutator_avg * C64::from_polar(1.0, x * t) / x)
            }
            Kind::Gaussian => self.averaged_transient_quadrature(branch, dist, t),
        }
    }

    /// Quadrature form of `averaged_transient` for any smooth density.
    pub fn averaged_transient_quadrature(&self, branch: Branch, dist: &FrequencyDistribution, t: f64) -> Result<C64> {
        if dist.kind == Kind::Delta {
            return self.averaged_transient(branch, dist, t);
        }
        let s = branch.sign();
        let w = self.omega_o;
        let at = s * w;
        // with y = sω′ the integrand is ρ(sy)e^{i(y−ω₀)t}/(y − ω₀); the PV
        // routine integrates g(y)/(x − y), hence the overall minus sign
        let rho = |y: f64| dist.density(s * y);
        let scale = dist.width.max(1e-300);
        let h = 0.01 * dist.sigma().max(0.5 * dist.width);
        let tol = 1e-12 / scale;
        let re = -quad::principal_value(|y| rho(y) * ((y - w) * t).cos(), w, h, scale, tol);
        let im = -quad::principal_value(|y| rho(y) * ((y - w) * t).sin(), w, h, scale, tol);
        let pv = C64::new(re, im);
        let rho_pole = dist.density(at);
        Ok(-self.commutator_avg * (pv - C64::new(0.0, PI * rho_pole)))
    }
}

/// ⟨[X, ξˣ(+1, ω₀)]⟩₀ for every channel of the model.
pub fn response_functions(model: &MasterEquationModel, x: &Operator) -> Result<Vec<ResponseFunction>> {
    let d = model.dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::Argument(format!("observable is {}x{}, model dimension {d}", x.nrows(), x.ncols())));
    }
    let rho0 = model.boltzmann().matrix;
    Ok(model
        .channels
        .iter()
        .map(|c| {
            let comm = x * &c.xi - &c.xi * x;
            ResponseFunction { omega_o: c.omega_o, commutator_avg: (comm * &rho0).trace() }
        })
        .collect())
}

/// The component of X that pairs with ξˣ(+1, ω₀) in the thermal average:
/// the block of X with the reversed labels (−1, −ω₀).
pub fn paired_component(model: &MasterEquationModel, x: &Operator, omega_o: f64) -> Operator {
    project(x, &model.levels, -1, -omega_o, model.dec.gap_width)
}

/// Steady-state ⟨X(t)⟩ − ⟨X(0)⟩ in the adiabatic limit:
/// 2B₁ Σ_{ω₀} Re[e^{iω₀t} ∫ρ_f (χ₊ + χ₋)].
pub fn steady_expectation(model: &MasterEquationModel, x: &Operator, t: f64) -> Result<f64> {
    let dist = model.field.dist;
    let mut out = 0.0;
    for r in response_functions(model, x)? {
        if r.commutator_avg == C64::new(0.0, 0.0) {
            continue;
        }
        let chi = r.averaged_infinity(Branch::Plus, &dist)? + r.averaged_infinity(Branch::Minus, &dist)?;
        out += (C64::from_polar(1.0, r.omega_o * t) * chi).re;
    }
    Ok(2.0 * model.field.b1 * out)
}

/// Steady-state ⟨M_x(t)⟩ with M_x = (N/V)μˣ = −(N/V)ξˣ.
pub fn steady_magnetization(model: &MasterEquationModel, t: f64, density: f64) -> Result<f64> {
    let mx = moment_operator(&model.system, Axis::X) * C64::new(-density, 0.0);
    steady_expectation(model, &mx, t)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PowerLine {
    pub omega_o: f64,
    pub power: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PowerReport {
    pub total: f64,
    pub lines: Vec<PowerLine>,
}

/// 𝒫 = (N/V) Σ ω₀ Σ (P_𝕟 − P_𝕟′) Γ_{𝕟,𝕟′}(ω₀), split by channel.
pub fn absorbed_power(model: &MasterEquationModel, density: f64) -> PowerReport {
    let lines: Vec<PowerLine> = absorbed_power_rates(model)
        .into_iter()
        .map(|(omega_o, p)| PowerLine { omega_o, power: density * p })
        .collect();
    let total = lines.iter().map(|l| l.power).sum();
    PowerReport { total, lines }
}

/// Windowed Hilbert transform −(1/π)PV∫_lo^hi Im f(y)/(x − y) dy compared
/// with Re f(x) on every grid point; returns the largest absolute gap.
/// For a response analytic in the upper half plane (a + branch in ω′, or
/// a − branch in −ω′) the gap is the η-dependent window truncation plus
/// quadrature error.
pub fn kramers_kronig_residual(f: impl Fn(f64) -> C64, grid: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Argument(format!("empty window [{lo}, {hi}]")));
    }
    let g = |y: f64| f(y).im;
    let mut worst: f64 = 0.0;
    for &x in grid {
        if !(x > lo && x < hi) {
            return Err(Error::Argument(format!("grid point {x} outside the window ({lo}, {hi})")));
        }
        let gx = g(x);
        // PV∫ g/(x−y) = ∫ (g(y) − g(x))/(x − y) dy + g(x) ln((x − lo)/(hi − x))
        let sub = |y: f64| if y == x { 0.0 } else { (g(y) - gx) / (x - y) };
        let left = quad::gauss_kronrod(lo, x, 1e-13, 1e-12, sub);
        let right = quad::gauss_kronrod(x, hi, 1e-13, 1e-12, sub);
        let pv = left + right + gx * ((x - lo) / (hi - x)).ln();
        let hilbert = -pv / PI;
        worst = worst.max((f(x).re - hilbert).abs());
    }
    Ok(worst)
}
