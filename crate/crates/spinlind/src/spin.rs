//! Multispin Hilbert spaces in the Holstein–Primakoff labelling, spin
//! operators, the diagonal/flip-flop Hamiltonian split and thermal states.
//!
//! Basis states are ordered by the compressed index: occupations
//! n_i = j_i - m_i are read as mixed-radix digits with the first spin most
//! significant, so the all-up state (every n_i = 0) comes first.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::{Operator, MAX_DIM};

/// Spin component selector for single-site operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// A set of spins with gyromagnetic ratios (rad/s/G) and isotropic couplings
/// T_ij (rad/s).
#[derive(Clone, Debug)]
pub struct SpinSystem {
    twice_j: Vec<u32>,
    gammas: Vec<f64>,
    couplings: DMatrix<f64>,
}

impl SpinSystem {
    /// `twice_j[i]` is 2j for spin i, so spin-1/2 is `1` and spin-1 is `2`.
    pub fn new(twice_j: Vec<u32>, gammas: Vec<f64>, couplings: DMatrix<f64>) -> Result<Self> {
        let n = twice_j.len();
        if n == 0 {
            return Err(Error::Argument("spin system needs at least one spin".into()));
        }
        if gammas.len() != n || couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::Argument(format!(
                "{} spins but {} gyromagnetic ratios and a {}x{} coupling matrix",
                n,
                gammas.len(),
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        if gammas.iter().chain(couplings.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite gyromagnetic ratio or coupling".into()));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::Argument(format!("coupling T[{i}][{i}] must be zero")));
            }
            for k in 0..i {
                if couplings[(i, k)] != couplings[(k, i)] {
                    return Err(Error::Argument(format!("coupling matrix not symmetric at ({i}, {k})")));
                }
            }
        }
        let dim = twice_j
            .iter()
            .try_fold(1usize, |acc, &t| acc.checked_mul(t as usize + 1))
            .unwrap_or(usize::MAX);
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge { dim, cap: MAX_DIM });
        }
        Ok(Self { twice_j, gammas, couplings })
    }

    /// Uncoupled system.
    pub fn uncoupled(twice_j: Vec<u32>, gammas: Vec<f64>) -> Result<Self> {
        let n = twice_j.len();
        Self::new(twice_j, gammas, DMatrix::zeros(n, n))
    }

    /// A lone spin-1/2.
    pub fn qubit(gamma: f64) -> Self {
        Self::uncoupled(vec![1], vec![gamma]).expect("a single spin-1/2 is always valid")
    }

    pub fn len(&self) -> usize { self.twice_j.len() }

    pub fn is_empty(&self) -> bool { self.twice_j.is_empty() }

    pub fn twice_j(&self) -> &[u32] { &self.twice_j }

    pub fn j(&self, site: usize) -> f64 { self.twice_j[site] as f64 / 2.0 }

    pub fn gammas(&self) -> &[f64] { &self.gammas }

    pub fn couplings(&self) -> &DMatrix<f64> { &self.couplings }

    /// Local dimensions d_i = 2j_i + 1.
    pub fn local_dims(&self) -> Vec<usize> {
        self.twice_j.iter().map(|&t| t as usize + 1).collect()
    }

    pub fn dim(&self) -> usize { self.local_dims().iter().product() }

    /// Mixed-radix weights W_i = Π_{k>i} d_k.
    pub fn weights(&self) -> Vec<usize> {
        let d = self.local_dims();
        let mut w = vec![1; d.len()];
        for i in (0..d.len().saturating_sub(1)).rev() {
            w[i] = w[i + 1] * d[i + 1];
        }
        w
    }

    /// Same system with every coupling multiplied by `c`.
    pub fn with_coupling_scale(&self, c: f64) -> Self {
        Self { couplings: &self.couplings * c, ..self.clone() }
    }
}

/// Occupation tuple → compressed index.
pub fn compress(tuple: &[u32], twice_j: &[u32]) -> Result<usize> {
    if tuple.len() != twice_j.len() {
        return Err(Error::InvalidLabel(format!(
            "tuple has {} entries for {} spins",
            tuple.len(),
            twice_j.len()
        )));
    }
    let mut idx = 0usize;
    for (i, (&n, &t)) in tuple.iter().zip(twice_j).enumerate() {
        if n > t {
            return Err(Error::InvalidLabel(format!("occupation {n} at site {i} exceeds 2j = {t}")));
        }
        idx = idx * (t as usize + 1) + n as usize;
    }
    Ok(idx)
}

/// Compressed index → occupation tuple.
pub fn decompress(index: usize, twice_j: &[u32]) -> Result<Vec<u32>> {
    let dim: usize = twice_j.iter().map(|&t| t as usize + 1).product();
    if index >= dim {
        return Err(Error::InvalidLabel(format!("index {index} outside 0..{dim}")));
    }
    let mut out = vec![0u32; twice_j.len()];
    let mut rest = index;
    for (slot, &t) in out.iter_mut().zip(twice_j).rev() {
        let d = t as usize + 1;
        *slot = (rest % d) as u32;
        rest /= d;
    }
    Ok(out)
}

/// ⟨m+1|S⁺|m⟩ = sqrt(j(j+1) - m(m+1)).
pub fn ladder_coefficient(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// (2j+1)-dimensional spin matrix, rows/columns ordered by n = j - m.
pub fn local_spin_matrix(twice_j: u32, axis: Axis) -> DMatrix<C64> {
    let d = twice_j as usize + 1;
    let j = twice_j as f64 / 2.0;
    let mut plus = DMatrix::<C64>::zeros(d, d);
    for n in 1..d {
        let m = j - n as f64;
        plus[(n - 1, n)] = C64::new(ladder_coefficient(j, m), 0.0);
    }
    match axis {
        Axis::Plus => plus,
        Axis::Minus => plus.adjoint(),
        Axis::X => (&plus + plus.adjoint()) * C64::new(0.5, 0.0),
        Axis::Y => (&plus - plus.adjoint()) * C64::new(0.0, -0.5),
        Axis::Z => DMatrix::from_fn(d, d, |r, c| {
            if r == c { C64::new(j - r as f64, 0.0) } else { C64::new(0.0, 0.0) }
        }),
    }
}

/// S^axis of one spin embedded in the full space.
pub fn embed_single_spin(system: &SpinSystem, site: usize, axis: Axis) -> Result<Operator> {
    if site >= system.len() {
        return Err(Error::Argument(format!("site {site} out of range for {} spins", system.len())));
    }
    let local = local_spin_matrix(system.twice_j[site], axis);
    let d = local.nrows();
    let w = system.weights()[site];
    let dim = system.dim();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..dim {
        let nb = (b / w) % d;
        let base = b - nb * w;
        for na in 0..d {
            let v = local[(na, nb)];
            if v != C64::new(0.0, 0.0) {
                out[(base + na * w, b)] = v;
            }
        }
    }
    Ok(out)
}

/// Σ_i S^axis_i.
pub fn total_spin(system: &SpinSystem, axis: Axis) -> Operator {
    let dim = system.dim();
    (0..system.len()).fold(DMatrix::zeros(dim, dim), |acc, i| {
        acc + embed_single_spin(system, i, axis).expect("site in range")
    })
}

/// ξ^axis = -Σ_i γ_i S^axis_i.
pub fn moment_operator(system: &SpinSystem, axis: Axis) -> Operator {
    let dim = system.dim();
    (0..system.len()).fold(DMatrix::zeros(dim, dim), |acc, i| {
        acc - embed_single_spin(system, i, axis).expect("site in range") * C64::new(system.gammas[i], 0.0)
    })
}

/// m_i values for every basis state, row-major by index.
fn projections(system: &SpinSystem) -> Vec<Vec<f64>> {
    let tj = system.twice_j();
    (0..system.dim())
        .map(|k| {
            decompress(k, tj)
                .expect("index in range")
                .iter()
                .zip(tj)
                .map(|(&n, &t)| t as f64 / 2.0 - n as f64)
                .collect()
        })
        .collect()
}

/// Diagonal of 𝒵₀ = B₀ξᶻ + Σ_{i>j} T_ij S^z_i S^z_j and the total magnetization.
#[derive(Clone, Debug)]
pub struct LevelData {
    pub energies: Vec<f64>,
    pub magnetizations: Vec<f64>,
}

impl LevelData {
    pub fn new(system: &SpinSystem, b0: f64) -> Self {
        let t = system.couplings();
        let g = system.gammas();
        let mut energies = Vec::with_capacity(system.dim());
        let mut magnetizations = Vec::with_capacity(system.dim());
        for m in projections(system) {
            let mut e = 0.0;
            for i in 0..m.len() {
                e -= b0 * g[i] * m[i];
                for k in 0..i {
                    e += t[(i, k)] * m[i] * m[k];
                }
            }
            energies.push(e);
            magnetizations.push(m.iter().sum());
        }
        Self { energies, magnetizations }
    }

    pub fn dim(&self) -> usize { self.energies.len() }

    pub fn max_abs_energy(&self) -> f64 {
        self.energies.iter().fold(0.0, |a, e| a.max(e.abs()))
    }
}

/// 𝒵₀ as a dense diagonal matrix.
pub fn build_zo(system: &SpinSystem, b0: f64) -> Operator {
    let lv = LevelData::new(system, b0);
    DMatrix::from_diagonal(&DVector::from_iterator(
        lv.dim(),
        lv.energies.iter().map(|&e| C64::new(e, 0.0)),
    ))
}

/// Flip-flop part 𝒳 = ½ Σ_{i>j} T_ij (S⁺_i S⁻_j + S⁻_i S⁺_j).
pub fn build_x(system: &SpinSystem) -> Operator {
    let dim = system.dim();
    let tj = system.twice_j();
    let w = system.weights();
    let t = system.couplings();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..dim {
        let occ = decompress(b, tj).expect("index in range");
        for i in 0..occ.len() {
            for k in 0..occ.len() {
                if i == k || t[(i, k)] == 0.0 {
                    continue;
                }
                // S⁺_i S⁻_k: raise i (n_i - 1), lower k (n_k + 1); both orderings
                // of the pair are visited, which supplies the h.c. term
                if occ[i] == 0 || occ[k] == tj[k] {
                    continue;
                }
                let ji = tj[i] as f64 / 2.0;
                let jk = tj[k] as f64 / 2.0;
                let mi = ji - occ[i] as f64;
                let mk = jk - occ[k] as f64;
                let amp = ladder_coefficient(ji, mi) * ladder_coefficient(jk, mk - 1.0);
                let a = b - w[i] + w[k];
                out[(a, b)] += C64::new(0.5 * t[(i, k)] * amp, 0.0);
            }
        }
    }
    out
}

/// Thermal state of a diagonal Hamiltonian, normalised to unit trace.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: Operator,
    pub trace_target: f64,
}

impl DensityMatrix {
    pub fn new(matrix: Operator, trace_target: f64) -> Self {
        Self { matrix, trace_target }
    }

    pub fn dim(&self) -> usize { self.matrix.nrows() }

    pub fn trace(&self) -> C64 { self.matrix.trace() }

    /// Max entry of the anti-Hermitian part.
    pub fn hermiticity_residual(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint())) * 0.5
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Populations (real parts of the diagonal).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Tr[ρ A].
    pub fn expectation(&self, a: &Operator) -> C64 {
        trace_product(&self.matrix, a)
    }
}

/// Tr[A B] without forming the product.
pub fn trace_product(a: &Operator, b: &Operator) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn max_abs(a: &Operator) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Boltzmann state e^{-β𝒵₀}/Tr for a diagonal 𝒵₀.
pub fn boltzmann_state(zo: &Operator, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::Argument(format!("inverse temperature must be finite, got {beta}")));
    }
    let off = max_abs(&(zo - DMatrix::from_diagonal(&zo.diagonal())));
    if off > 0.0 {
        return Err(Error::Argument(format!("Hamiltonian is not diagonal (off-diagonal entry {off:e})")));
    }
    let e: Vec<f64> = zo.diagonal().iter().map(|z| z.re).collect();
    Ok(DensityMatrix::new(boltzmann_from_energies(&e, beta), 1.0))
}

pub(crate) fn boltzmann_from_energies(e: &[f64], beta: f64) -> Operator {
    // shift by the ground energy to keep the exponentials finite
    let shift = e.iter().fold(f64::INFINITY, |m, &x| m.min(beta * x));
    let w: Vec<f64> = e.iter().map(|&x| (shift - beta * x).exp()).collect();
    let z: f64 = w.iter().sum();
    DMatrix::from_diagonal(&DVector::from_iterator(
        e.len(),
        w.iter().map(|&p| C64::new(p / z, 0.0)),
    ))
}

/// Reduced Planck constant (J·s, CODATA 2018 exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K, exact).
pub const K_B: f64 = 1.380_649e-23;

/// β = ħ/(k_B T) in seconds per radian.
pub fn beta_from_kelvin(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Argument(format!("temperature must be positive, got {temperature}")));
    }
    Ok(HBAR / (K_B * temperature))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 { C64::new(re, 0.0) }

    #[test]
    fn three_qubit_labels() {
        let tj = [1, 1, 1];
        assert_eq!(compress(&[1, 0, 1], &tj).unwrap(), 5);
        assert_eq!(compress(&[0, 0, 0], &tj).unwrap(), 0);
        assert_eq!(decompress(5, &tj).unwrap(), vec![1, 0, 1]);
        assert!(compress(&[2, 0, 0], &tj).is_err());
        assert!(decompress(8, &tj).is_err());
    }

    #[test]
    fn mixed_radix_enumeration() {
        // spins {1, 1/2}: d = (3, 2), weights (2, 1)
        let tj = [2, 1];
        let mut k = 0;
        for a in 0..3 {
            for b in 0..2 {
                assert_eq!(compress(&[a, b], &tj).unwrap(), k);
                assert_eq!(decompress(k, &tj).unwrap(), vec![a, b]);
                k += 1;
            }
        }
        assert_eq!(compress(&[2, 1], &tj).unwrap(), 5);
        let s = SpinSystem::uncoupled(vec![2, 1], vec![1.0, 1.0]).unwrap();
        assert_eq!(s.weights(), vec![2, 1]);
    }

    #[test]
    fn single_spin_z_in_hp_order() {
        let s = SpinSystem::qubit(1.0);
        let z = embed_single_spin(&s, 0, Axis::Z).unwrap();
        assert_eq!(z[(0, 0)], c(0.5));
        assert_eq!(z[(1, 1)], c(-0.5));
    }

    #[test]
    fn three_qubit_total_sz() {
        let s = SpinSystem::uncoupled(vec![1, 1, 1], vec![1.0; 3]).unwrap();
        let sz = total_spin(&s, Axis::Z);
        let want = [1.5, 0.5, 0.5, -0.5, 0.5, -0.5, -0.5, -1.5];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(sz[(k, k)], c(*w));
        }
    }

    #[test]
    fn spin_one_raising_against_ladder_table() {
        // j = 1: ⟨0|S⁺|-1⟩ = ⟨1|S⁺|0⟩ = √2
        let s = SpinSystem::uncoupled(vec![2, 1], vec![1.0, 1.0]).unwrap();
        let sp = embed_single_spin(&s, 0, Axis::Plus).unwrap();
        // lowest state of spin 1 with spin 1/2 up: tuple (2, 0) -> index 4
        let mut v = DVector::<C64>::zeros(6);
        v[4] = c(1.0);
        let once = &sp * &v;
        assert!((once[2] - c(2f64.sqrt())).norm() < 1e-15);
        let twice = &sp * &once;
        assert!((twice[0] - c(2.0)).norm() < 1e-15);
        let thrice = &sp * &twice;
        assert!(thrice.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn two_spin_heisenberg_reconstruction() {
        let g = [-1.3, 0.4];
        let b0 = 0.8;
        let t12 = 1.0;
        let s = SpinSystem::new(vec![1, 1], g.to_vec(), DMatrix::from_row_slice(2, 2, &[0.0, t12, t12, 0.0])).unwrap();
        let h0 = build_zo(&s, b0) + build_x(&s);
        // independent construction from full Pauli/2 matrices and Kronecker products
        let half = C64::new(0.5, 0.0);
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let sx = DMatrix::from_row_slice(2, 2, &[z, half, half, z]);
        let sy = DMatrix::from_row_slice(2, 2, &[z, -i * half, i * half, z]);
        let sz = DMatrix::from_row_slice(2, 2, &[half, z, z, -half]);
        let id = DMatrix::<C64>::identity(2, 2);
        let mut want = (sx.kronecker(&sx) + sy.kronecker(&sy) + sz.kronecker(&sz)) * c(t12);
        for (k, op) in [sz.kronecker(&id), id.kronecker(&sz)].iter().enumerate() {
            want -= op * c(b0 * g[k]);
        }
        assert!(max_abs(&(h0 - want)) < 1e-14);
    }

    #[test]
    fn boltzmann_limits() {
        let s = SpinSystem::qubit(-2.0);
        let zo = build_zo(&s, 1.5);
        let rho = boltzmann_state(&zo, 0.0).unwrap();
        assert!((rho.matrix[(0, 0)] - c(0.5)).norm() < 1e-15);
        let beta = 0.7;
        let w0 = 2.0 * 1.5;
        let rho = boltzmann_state(&zo, beta).unwrap();
        let s3 = (rho.matrix[(0, 0)] - rho.matrix[(1, 1)]).re;
        assert!((s3 + (beta * w0 / 2.0).tanh()).abs() < 1e-15);
        assert!(boltzmann_state(&zo, f64::NAN).is_err());
    }

    #[test]
    fn dimension_cap() {
        let r = SpinSystem::uncoupled(vec![1; 13], vec![1.0; 13]);
        assert!(matches!(r, Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn kelvin_conversion() {
        let b = beta_from_kelvin(300.0).unwrap();
        assert!((b - 2.546_3e-14).abs() < 1e-17);
    }
}
