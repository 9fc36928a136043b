//! Column-stacked superoperators: the vectorized generator, e^{ℒt}, the map
//! Λ(t) and the Kraus-form audit of Λ(t) as a difference of two CP maps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{DriveTerm, MasterEquationModel};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::spin::{max_abs, DensityMatrix};
use crate::Operator;

/// Hilbert dimension cap for map-level diagnostics.
pub const MAX_MAP_DIM: usize = 64;

const PANEL_ORDER: usize = 10;

pub fn vec(a: &Operator) -> DVector<C64> {
    DVector::from_column_slice(a.as_slice())
}

pub fn unvec(v: &DVector<C64>, d: usize) -> Operator {
    DMatrix::from_column_slice(d, d, v.as_slice())
}

fn check_map_dim(d: usize) -> Result<()> {
    if d > MAX_MAP_DIM {
        return Err(Error::DimensionTooLarge { dim: d, cap: MAX_MAP_DIM });
    }
    Ok(())
}

/// Matrix of ℒ acting on vec(ρ): vec(AXB) = (Bᵀ ⊗ A) vec(X).
pub fn liouvillian_matrix(model: &MasterEquationModel) -> Result<DMatrix<C64>> {
    let d = model.dim();
    check_map_dim(d)?;
    let id = DMatrix::<C64>::identity(d, d);
    let k = &model.k_eff;
    let mut l = id.kronecker(k) + k.conjugate().kronecker(&id);
    for c in &model.channels {
        let g = c.rate();
        if g == 0.0 {
            continue;
        }
        let x = &c.xi;
        l += (x.conjugate().kronecker(x) + x.transpose().kronecker(&x.adjoint())) * C64::new(g, 0.0);
    }
    Ok(l)
}

/// e^{ℒt} by scaling and squaring.
pub fn superop_exp(l: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    (l * C64::new(t, 0.0)).exp()
}

/// Choi matrix C = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|) of a column-stacked superoperator.
pub fn choi_matrix(s: &DMatrix<C64>, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        s[(a + b * d, i + j * d)]
    })
}

fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigen(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Kraus operators of a CP superoperator from its Choi eigendecomposition.
/// Eigenvalues below `-floor` are an error; those in [-floor, 0] are dropped.
pub fn kraus_operators(s: &DMatrix<C64>, d: usize, floor: f64) -> Result<Vec<Operator>> {
    let (vals, vecs) = hermitian_eigen(&choi_matrix(s, d));
    let mut out = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam < -floor {
            return Err(Error::InternalConsistency(format!("Choi matrix has eigenvalue {lam:e}")));
        }
        if lam <= 0.0 {
            continue;
        }
        let r = lam.sqrt();
        out.push(DMatrix::from_fn(d, d, |a, i| vecs[(i * d + a, k)] * r));
    }
    Ok(out)
}

// Composite Gauss–Legendre grid on [0, t]: panel width h with at most ~1 rad
// of the fastest drive phase and a fraction of τ_f per panel.
fn panel_grid(model: &MasterEquationModel, t: f64) -> (usize, f64, GaussLegendre) {
    let dist = model.field.dist;
    let fastest = dist.center.abs() + model.max_gap() + dist.width;
    let mut h = t;
    if fastest > 0.0 {
        h = h.min(1.0 / fastest);
    }
    h = h.min(0.5 * dist.tau_f());
    let panels = if t > 0.0 { (t / h).ceil().max(1.0) as usize } else { 0 };
    let h = if panels > 0 { t / panels as f64 } else { 0.0 };
    (panels, h, GaussLegendre::new(PANEL_ORDER))
}

fn drive_integral(
    model: &MasterEquationModel,
    drive: &DriveTerm,
    l: &DMatrix<C64>,
    t: f64,
) -> DVector<C64> {
    let d = model.dim();
    let (panels, h, gl) = panel_grid(model, t);
    let mut acc = DVector::<C64>::zeros(d * d);
    if panels == 0 {
        return acc;
    }
    let step = superop_exp(l, h);
    let partial: Vec<(f64, f64, DMatrix<C64>)> = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(&x, &w)| {
            let c = 0.5 * (x + 1.0);
            (c, 0.5 * w * h, superop_exp(l, (1.0 - c) * h))
        })
        .collect();
    for p in 0..panels {
        let t0 = p as f64 * h;
        acc = &step * acc;
        for (c, w, e) in &partial {
            let v = vec(&drive.eval(t0 + c * h));
            acc += e * v * C64::new(*w, 0.0);
        }
    }
    acc
}

/// Λ(t)ρ₀ = e^{ℒt}ρ₀ + ∫₀ᵗ e^{ℒ(t−t′)}𝒜(t′)ρ₀ dt′.
pub fn lambda_map(model: &MasterEquationModel, t: f64, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    model.check_domain(&rho0.matrix)?;
    lambda_map_unchecked(model, t, &rho0.matrix)
}

pub(crate) fn lambda_map_unchecked(model: &MasterEquationModel, t: f64, rho0: &Operator) -> Result<DensityMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Argument(format!("time must be non-negative, got {t}")));
    }
    let d = model.dim();
    let l = liouvillian_matrix(model)?;
    let drive = model.drive_term(rho0);
    let out = superop_exp(&l, t) * vec(rho0) + drive_integral(model, &drive, &l, t);
    Ok(DensityMatrix::new(unvec(&out, d), 1.0))
}

/// Residuals of the Kraus-form reconstruction of Λ(t).
#[derive(Clone, Debug)]
pub struct KrausAudit {
    /// Max entry of Σ𝒦†𝒦 + ∫ℳ†𝒦†𝒦ℳ − ∫ℳ𝒦†𝒦ℳ† − 𝕀.
    pub trace_residual: f64,
    /// Max entry of Φ₁[ρ₀] − Φ₂[ρ₀] − Λ(t)ρ₀.
    pub phi1_minus_phi2_residual: f64,
    /// Smallest Choi eigenvalue over every e^{ℒs} used.
    pub semigroup_min_choi: f64,
    pub phi1_min_choi: f64,
    pub phi2_min_choi: f64,
    pub phi1: Operator,
    pub phi2: Operator,
}

/// Reconstruct ϱ(t) = Φ₁[ρ₀] − Φ₂[ρ₀] with
///   Φ₁ρ = e^{ℒt}ρ + ∫ e^{ℒ(t−τ)}[ℳ(τ)ρℳ†(τ)] dτ,
///   Φ₂ρ = ∫ e^{ℒ(t−τ)}[ℳ†(τ)ρℳ(τ)] dτ,
/// ℳ(τ) = (𝕀 − iH_LR(τ))/√2, using Kraus operators of every e^{ℒs}.
pub fn kraus_audit(model: &MasterEquationModel, t: f64, rho0: &DensityMatrix) -> Result<KrausAudit> {
    model.check_domain(&rho0.matrix)?;
    let d = model.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let l = liouvillian_matrix(model)?;
    let floor = 1e-10;
    let s_t = superop_exp(&l, t);
    let kraus_t = kraus_operators(&s_t, d, floor)?;
    let mut semigroup_min_choi = min_eigenvalue(&choi_matrix(&s_t, d));

    let rho = &rho0.matrix;
    let mut phi1 = kraus_t.iter().fold(DMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint());
    let mut phi2 = DMatrix::<C64>::zeros(d, d);
    let mut ident = kraus_t.iter().fold(DMatrix::zeros(d, d), |acc: Operator, k| acc + k.adjoint() * k);
    let mut s1 = s_t.clone();
    let mut s2 = DMatrix::<C64>::zeros(d * d, d * d);

    let (panels, h, gl) = panel_grid(model, t);
    if panels > 0 {
        let step = superop_exp(&l, h);
        let partial: Vec<(f64, f64, DMatrix<C64>)> = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .map(|(&x, &w)| {
                let c = 0.5 * (x + 1.0);
                (c, 0.5 * w * h, superop_exp(&l, (1.0 - c) * h))
            })
            .collect();
        // e^{ℒ(t−τ)} for τ in panel p is step^{panels−1−p} · e^{ℒ(1−c)h}
        let mut power = DMatrix::<C64>::identity(d * d, d * d);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for p in (0..panels).rev() {
            let t0 = p as f64 * h;
            for (c, w, e) in &partial {
                let prop = &power * e;
                let ks = kraus_operators(&prop, d, floor)?;
                semigroup_min_choi = semigroup_min_choi.min(min_eigenvalue(&choi_matrix(&prop, d)));
                let hlr = model.linear_response_hamiltonian(t0 + c * h);
                let m = (&id - &hlr * C64::new(0.0, 1.0)) * C64::new(r, 0.0);
                let md = m.adjoint();
                let a = &m * rho * &md;
                let b = &md * rho * &m;
                let wc = C64::new(*w, 0.0);
                for k in &ks {
                    let kd = k.adjoint();
                    phi1 += k * &a * &kd * wc;
                    phi2 += k * &b * &kd * wc;
                    let kk = &kd * k;
                    ident += (&md * &kk * &m - &m * &kk * &md) * wc;
                }
                s1 += &prop * m.conjugate().kronecker(&m) * wc;
                s2 += &prop * m.transpose().kronecker(&md) * wc;
            }
            power = &power * &step;
        }
    }

    let lam = lambda_map_unchecked(model, t, rho)?;
    Ok(KrausAudit {
        trace_residual: max_abs(&(ident - id)),
        phi1_minus_phi2_residual: max_abs(&(&phi1 - &phi2 - lam.matrix)),
        semigroup_min_choi,
        phi1_min_choi: min_eigenvalue(&choi_matrix(&s1, d)),
        phi2_min_choi: min_eigenvalue(&choi_matrix(&s2, d)),
        phi1,
        phi2,
    })
}
