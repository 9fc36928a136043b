//! Thermal corrections from the flip-flop perturbation.
//!
//! With H₀ = 𝒵₀ + 𝒳 and 𝒳(s) = e^{−is𝒵₀}𝒳e^{is𝒵₀}, the ordered series
//! 𝒴(s) = Σ 𝒴⁽ⁿ⁾(s) solves d𝒴/ds = i𝒳(s)𝒴(s), so e^{−βH₀} = e^{−β𝒵₀}𝒴(iβ)
//! and the Gibbs state expands as ϱ⁽ⁿ⁾(0) = ϱ⁽⁰⁾(0) Σ ζ_{n′} 𝒴⁽ⁿ⁻ⁿ′⁾(iβ).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::master::{MasterEquationModel, PropagateOptions, Trajectory};
use crate::quad::GaussLegendre;
use crate::spin::{boltzmann_from_energies, build_x, max_abs, DensityMatrix, LevelData, SpinSystem};
use crate::Operator;

/// Highest order of 𝒴⁽ⁿ⁾(iβ) evaluated by quadrature.
pub const MAX_ORDER: usize = 4;

const CONVERGENCE_TOL: f64 = 1e-8;
// upper bound on m^n integrand evaluations per refinement
const EVALUATION_CAP: usize = 1 << 22;

/// 𝒵₀ levels and the flip-flop part 𝒳 of one spin system.
#[derive(Clone, Debug)]
pub struct AcpSystem {
    pub system: SpinSystem,
    pub b0: f64,
    pub levels: LevelData,
    pub x: Operator,
}

/// ⟨𝒴⁽ᵏ⁾(iβ)⟩₀ for k = 1..order.
#[derive(Clone, Debug, PartialEq)]
pub struct AcpMoments {
    pub order: usize,
    pub values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZetaCoefficients {
    /// ζ₀..ζₙ with ζ₀ = 1.
    pub zetas: Vec<C64>,
}

impl AcpSystem {
    pub fn new(system: SpinSystem, b0: f64) -> Self {
        let levels = LevelData::new(&system, b0);
        let x = build_x(&system);
        Self { system, b0, levels, x }
    }

    pub fn from_model(model: &MasterEquationModel) -> Self { Self::new(model.system.clone(), model.field.b0) }

    pub fn dim(&self) -> usize { self.levels.dim() }

    /// H₀ = 𝒵₀ + 𝒳.
    pub fn full_hamiltonian(&self) -> Operator {
        let mut h = self.x.clone();
        for (k, e) in self.levels.energies.iter().enumerate() {
            h[(k, k)] += C64::new(*e, 0.0);
        }
        h
    }

    pub fn boltzmann(&self, beta: f64) -> Operator { boltzmann_from_energies(&self.levels.energies, beta) }

    /// 𝒳(s) for complex s; s = iu gives e^{u𝒵₀}𝒳e^{−u𝒵₀}.
    pub fn x_interaction(&self, s: C64) -> Operator {
        let e = &self.levels.energies;
        let i = C64::new(0.0, 1.0);
        Operator::from_fn(self.dim(), self.dim(), |a, b| {
            let x = self.x[(a, b)];
            if x == C64::new(0.0, 0.0) {
                x
            } else {
                x * (-i * s * (e[a] - e[b])).exp()
            }
        })
    }

    // ∫₀^u du₁ 𝒳(iu₁) ∫₀^{u₁} … with k factors, on m Gauss nodes per level
    fn nested(&self, gl: &GaussLegendre, k: usize, u: f64) -> Operator {
        let d = self.dim();
        if k == 0 {
            return Operator::identity(d, d);
        }
        let mut acc = Operator::zeros(d, d);
        for (v, w) in gl.mapped(0.0, 1.0) {
            let s = u * v;
            let inner = self.nested(gl, k - 1, s);
            acc += self.x_interaction(C64::new(0.0, s)) * inner * C64::new(w * u, 0.0);
        }
        acc
    }

    /// 𝒴⁽ⁿ⁾(iβ) = (−1)ⁿ ∫₀^β du₁ ∫₀^{u₁} du₂ … 𝒳(iu₁)…𝒳(iuₙ), with the node
    /// count doubled until successive results agree to 1e−8.
    pub fn y_operator(&self, n: usize, beta: f64) -> Result<Operator> {
        let d = self.dim();
        if n == 0 {
            return Ok(Operator::identity(d, d));
        }
        if n > MAX_ORDER {
            return Err(Error::Argument(format!("order {n} exceeds the quadrature cap {MAX_ORDER}")));
        }
        if !beta.is_finite() {
            return Err(Error::Argument(format!("inverse temperature must be finite, got {beta}")));
        }
        if max_abs(&self.x) == 0.0 || beta == 0.0 {
            return Ok(Operator::zeros(d, d));
        }
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut m = 4;
        let mut prev = self.nested(&GaussLegendre::new(m), n, beta);
        loop {
            m *= 2;
            if m.pow(n as u32) > EVALUATION_CAP {
                return Err(Error::Accuracy(format!(
                    "imaginary-time integral of order {n} did not converge within {} nodes per level",
                    m / 2
                )));
            }
            let next = self.nested(&GaussLegendre::new(m), n, beta);
            let diff = max_abs(&(&next - &prev));
            if diff <= CONVERGENCE_TOL * max_abs(&next).max(1.0) {
                return Ok(next * C64::new(sign, 0.0));
            }
            prev = next;
        }
    }

    /// ⟨𝒴⁽ⁿ⁾(iβ)⟩₀.
    pub fn y_moment(&self, n: usize, beta: f64) -> Result<C64> {
        let y = self.y_operator(n, beta)?;
        Ok((self.boltzmann(beta) * y).trace())
    }

    pub fn moments(&self, order: usize, beta: f64) -> Result<AcpMoments> {
        let values = (1..=order).map(|k| self.y_moment(k, beta)).collect::<Result<_>>()?;
        Ok(AcpMoments { order, values })
    }

    /// ϱ⁽ⁿ⁾(0). Order 0 is the Boltzmann state of 𝒵₀; higher orders are
    /// traceless, and their Hermiticity residual is left for the caller to
    /// inspect via `DensityMatrix::hermiticity_residual`.
    pub fn initial_correction(&self, n: usize, beta: f64) -> Result<DensityMatrix> {
        let rho0 = self.boltzmann(beta);
        if n == 0 {
            return Ok(DensityMatrix::new(rho0, 1.0));
        }
        let ys = (0..=n).map(|k| self.y_operator(k, beta)).collect::<Result<Vec<_>>>()?;
        let moments = AcpMoments { order: n, values: ys[1..].iter().map(|y| (&rho0 * y).trace()).collect() };
        let zeta = zeta_recursive(&moments);
        let d = self.dim();
        let mut sum = Operator::zeros(d, d);
        for (np, z) in zeta.zetas.iter().enumerate() {
            sum += &ys[n - np] * *z;
        }
        let out = DensityMatrix::new(&rho0 * sum, 0.0);
        let tr = out.trace().norm();
        if tr > 1e-9 {
            return Err(Error::InternalConsistency(format!("order-{n} correction has trace {tr:e}")));
        }
        Ok(out)
    }

    /// Σ_{k≤n} ϱ⁽ᵏ⁾(0).
    pub fn truncated_gibbs(&self, n: usize, beta: f64) -> Result<Operator> {
        let mut acc = self.boltzmann(beta);
        for k in 1..=n {
            acc += self.initial_correction(k, beta)?.matrix;
        }
        Ok(acc)
    }

    /// e^{−βH₀}/Tr from a dense eigendecomposition of H₀.
    pub fn exact_gibbs(&self, beta: f64) -> Operator {
        let eig = self.full_hamiltonian().symmetric_eigen();
        let e: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let diag = boltzmann_from_energies(&e, beta);
        &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
    }
}

/// ζ₀ = 1, ζₙ = −Σ_{n′<n} ζ_{n′}⟨𝒴⁽ⁿ⁻ⁿ′⁾⟩₀.
pub fn zeta_recursive(moments: &AcpMoments) -> ZetaCoefficients {
    let m = &moments.values;
    let mut zetas = vec![C64::new(1.0, 0.0)];
    for n in 1..=moments.order.min(m.len()) {
        let mut z = C64::new(0.0, 0.0);
        for (np, zp) in zetas.iter().enumerate() {
            z -= zp * m[n - np - 1];
        }
        zetas.push(z);
    }
    ZetaCoefficients { zetas }
}

/// ζₙ = (−1)ⁿ det H with H upper Hessenberg Toeplitz: H_ij = ⟨𝒴⁽ʲ⁻ⁱ⁺¹⁾⟩₀
/// on and above the diagonal, ones on the subdiagonal.
pub fn zeta_determinant(moments: &AcpMoments, n: usize) -> Result<C64> {
    if n == 0 || n > moments.values.len() {
        return Err(Error::Argument(format!("order must be in 1..={}, got {n}", moments.values.len())));
    }
    let m = &moments.values;
    let h = DMatrix::from_fn(n, n, |i, j| {
        if j >= i {
            m[j - i]
        } else if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(h.determinant() * sign)
}

/// RK4 for dϱ⁽ⁿ⁾/dt = 𝒜(t)ϱ⁽ⁿ⁾(0) + ℒϱ⁽ⁿ⁾(t) + 𝒢⁽ⁿ⁾(t), starting from the
/// traceless correction `start`. `source` supplies 𝒢⁽ⁿ⁾(t), which must be
/// Hermitian and traceless.
pub fn propagate_order_n(
    model: &MasterEquationModel,
    n: usize,
    start: &Operator,
    t_end: f64,
    opts: PropagateOptions,
    mut source: impl FnMut(f64) -> Operator,
) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::Argument("correction order must be at least 1".into()));
    }
    let d = model.dim();
    if start.nrows() != d || start.ncols() != d {
        return Err(Error::Argument(format!("correction is {}x{}, model dimension {d}", start.nrows(), start.ncols())));
    }
    let drive = model.drive_term(start);
    crate::master::integrate_affine(model, start, t_end, opts, |t| {
        let g = source(t);
        if g.nrows() != d || g.ncols() != d {
            return Err(Error::Contract(format!("source at t = {t} has the wrong shape")));
        }
        let scale = max_abs(&g).max(1.0);
        let tr = g.trace().norm();
        if tr > 1e-12 * scale * d as f64 {
            return Err(Error::Contract(format!("source at t = {t} has trace {tr:e}")));
        }
        let herm = max_abs(&(&g - g.adjoint()));
        if herm > 1e-12 * scale {
            return Err(Error::Contract(format!("source at t = {t} is not Hermitian (residual {herm:e})")));
        }
        Ok(drive.eval(t) + g)
    })
}
