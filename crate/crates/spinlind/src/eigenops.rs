//! Splitting ξˣ into generalized ladder blocks ξˣ(n, ω₀) that lower the
//! 𝒵₀ eigenvalue by ω₀ and the total magnetization by n.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spin::{max_abs, LevelData};
use crate::Operator;

/// Default relative bin width for gap frequencies.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct EigenOperator {
    pub n: i32,
    pub omega_o: f64,
    pub matrix: Operator,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub blocks: Vec<EigenOperator>,
    /// Relative tolerance used for binning.
    pub gap_tolerance: f64,
    /// Absolute bin width actually applied.
    pub gap_width: f64,
}

/// Absolute bin width for a relative tolerance.
pub fn gap_width(levels: &LevelData, gap_tol: f64) -> f64 {
    let scale = levels.max_abs_energy();
    if scale > 0.0 { gap_tol * scale } else { gap_tol }
}

fn step(levels: &LevelData, row: usize, col: usize) -> Result<(i32, f64)> {
    let dm = levels.magnetizations[col] - levels.magnetizations[row];
    let n = dm.round();
    if (dm - n).abs() > 1e-9 {
        return Err(Error::InternalConsistency(format!("non-integer magnetization step {dm}")));
    }
    Ok((n as i32, levels.energies[col] - levels.energies[row]))
}

/// Decompose a Hermitian operator (normally ξˣ) over the (n, ω₀) labels.
///
/// Pairs with ω₀ > 0, or ω₀ = 0 and n ≥ 0, are binned directly; the mirrored
/// blocks are their exact conjugate transposes so the adjoint identity holds
/// bit-for-bit.
pub fn decompose_xi_x(xi_x: &Operator, levels: &LevelData, gap_tol: f64) -> Result<Decomposition> {
    let dim = levels.dim();
    if xi_x.nrows() != dim || xi_x.ncols() != dim {
        return Err(Error::Argument(format!(
            "operator is {}x{} but there are {} levels",
            xi_x.nrows(),
            xi_x.ncols(),
            dim
        )));
    }
    let scale = max_abs(xi_x);
    if max_abs(&(xi_x - xi_x.adjoint())) > 1e-12 * scale {
        return Err(Error::Argument("operator to decompose must be Hermitian".into()));
    }
    let width = gap_width(levels, gap_tol);

    // canonical half: (n, omega, row, col)
    let mut entries = Vec::new();
    for col in 0..dim {
        for row in 0..dim {
            if xi_x[(row, col)] == C64::new(0.0, 0.0) {
                continue;
            }
            let (n, w) = step(levels, row, col)?;
            let canonical = w > width || (w.abs() <= width && n > 0) || (w.abs() <= width && n == 0 && row <= col);
            if canonical {
                entries.push((n, w, row, col));
            }
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut blocks: Vec<EigenOperator> = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let n = entries[i].0;
        let start = entries[i].1;
        let mut k = i;
        while k < entries.len() && entries[k].0 == n && entries[k].1 - start <= width {
            k += 1;
        }
        let members = &entries[i..k];
        let mut omega = members.iter().map(|e| e.1).sum::<f64>() / members.len() as f64;
        let self_adjoint = n == 0 && omega.abs() <= width;
        if self_adjoint {
            omega = 0.0;
        }
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for &(_, _, row, col) in members {
            m[(row, col)] = xi_x[(row, col)];
            if self_adjoint {
                m[(col, row)] = xi_x[(col, row)];
            }
        }
        if !self_adjoint {
            blocks.push(EigenOperator { n: -n, omega_o: -omega, matrix: m.adjoint() });
        }
        blocks.push(EigenOperator { n, omega_o: omega, matrix: m });
        i = k;
    }
    blocks.sort_by(|a, b| a.n.cmp(&b.n).then(a.omega_o.total_cmp(&b.omega_o)));
    Ok(Decomposition { blocks, gap_tolerance: gap_tol, gap_width: width })
}

impl Decomposition {
    pub fn find(&self, n: i32, omega: f64) -> Option<&EigenOperator> {
        self.blocks
            .iter()
            .find(|b| b.n == n && (b.omega_o - omega).abs() <= self.gap_width)
    }

    pub fn get(&self, n: i32, omega: f64) -> Result<&EigenOperator> {
        self.find(n, omega).ok_or(Error::Lookup { n, omega })
    }

    /// Blocks with magnetization step +1, the ones that drive absorption.
    pub fn raising(&self) -> impl Iterator<Item = &EigenOperator> {
        self.blocks.iter().filter(|b| b.n == 1)
    }

    /// Σ of all blocks.
    pub fn sum(&self) -> Operator {
        let d = self.blocks.first().map_or(0, |b| b.matrix.nrows());
        self.blocks.iter().fold(DMatrix::zeros(d, d), |acc, b| acc + &b.matrix)
    }
}

/// Conjugate transpose of block (n, ω₀), checked against the stored (−n, −ω₀).
pub fn adjoint_block(dec: &Decomposition, n: i32, omega_o: f64) -> Result<EigenOperator> {
    let b = dec.get(n, omega_o)?;
    let mirror = dec.get(-n, -omega_o)?;
    let adj = b.matrix.adjoint();
    if adj != mirror.matrix {
        return Err(Error::InternalConsistency(format!(
            "adjoint of block ({n}, {omega_o}) differs from block ({}, {})",
            -n, -omega_o
        )));
    }
    Ok(EigenOperator { n: -n, omega_o: -b.omega_o, matrix: adj })
}

/// Component of an arbitrary operator with labels (n, ω₀): all entries
/// ⟨a|X|b⟩ with M_b − M_a = n and ε_b − ε_a within `width` of ω₀.
pub fn project(op: &Operator, levels: &LevelData, n: i32, omega_o: f64, width: f64) -> Operator {
    let dim = levels.dim();
    DMatrix::from_fn(dim, dim, |row, col| {
        let dm = levels.magnetizations[col] - levels.magnetizations[row];
        let dw = levels.energies[col] - levels.energies[row];
        if (dm - n as f64).abs() < 1e-9 && (dw - omega_o).abs() <= width {
            op[(row, col)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{moment_operator, Axis, SpinSystem};

    #[test]
    fn qubit_blocks() {
        let gamma = -1.7;
        let b0 = 2.0;
        let s = SpinSystem::qubit(gamma);
        let lv = LevelData::new(&s, b0);
        let xi = moment_operator(&s, Axis::X);
        let dec = decompose_xi_x(&xi, &lv, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        let w0 = -gamma * b0;
        let up = dec.get(1, w0).unwrap();
        // -(γ/2)σ₋ with σ₋ = |1⟩⟨0|
        assert!((up.matrix[(1, 0)] - C64::new(-gamma / 2.0, 0.0)).norm() < 1e-15);
        assert_eq!(up.matrix[(0, 1)], C64::new(0.0, 0.0));
        let down = adjoint_block(&dec, 1, w0).unwrap();
        assert!((down.matrix[(0, 1)] - C64::new(-gamma / 2.0, 0.0)).norm() < 1e-15);
        assert!(dec.get(0, 0.0).is_err());
    }

    #[test]
    fn two_spin_gaps() {
        let (g1, g2, b0, t) = (-2.0, 0.5, 1.0, 0.3);
        let s = SpinSystem::new(vec![1, 1], vec![g1, g2], DMatrix::from_row_slice(2, 2, &[0.0, t, t, 0.0])).unwrap();
        let lv = LevelData::new(&s, b0);
        let dec = decompose_xi_x(&moment_operator(&s, Axis::X), &lv, DEFAULT_GAP_TOL).unwrap();
        let mut pos: Vec<f64> = dec.raising().map(|b| b.omega_o).collect();
        pos.sort_by(f64::total_cmp);
        let mut want = vec![-g1 * b0 - t / 2.0, -g1 * b0 + t / 2.0, -g2 * b0 - t / 2.0, -g2 * b0 + t / 2.0];
        want.sort_by(f64::total_cmp);
        assert_eq!(pos.len(), 4);
        for (p, w) in pos.iter().zip(&want) {
            assert!((p - w).abs() < 1e-14);
        }
        for b in dec.raising() {
            assert_eq!(b.matrix.iter().filter(|z| z.norm() > 0.0).count(), 1);
        }
    }
}
