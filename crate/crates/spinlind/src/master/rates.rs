//! Pauli transition rates between 𝒵₀ eigenstates and the second-order
//! wavefunction transition probability used to cross-check them.

use num_complex::Complex64 as C64;

use super::MasterEquationModel;
use crate::quad::GaussLegendre;
use crate::Operator;

/// Stimulated rates for one allowed pair ⟨row|ξˣ(+1,ω₀)|col⟩ ≠ 0.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RateEntry {
    pub row: usize,
    pub col: usize,
    /// ε_col − ε_row.
    pub omega_o: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl RateEntry {
    pub fn total(&self) -> f64 { self.gamma_plus + self.gamma_minus }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RateTable {
    pub entries: Vec<RateEntry>,
}

impl RateTable {
    /// Γ_{a,b}: stored pairs are looked up in either orientation, the reverse
    /// orientation carrying the opposite frequency.
    pub fn rate(&self, a: usize, b: usize) -> Option<(f64, f64)> {
        self.entries.iter().find_map(|e| {
            if e.row == a && e.col == b {
                Some((e.omega_o, e.total()))
            } else if e.row == b && e.col == a {
                Some((-e.omega_o, e.total()))
            } else {
                None
            }
        })
    }

    /// Γ_{a,b} total, zero for forbidden pairs.
    pub fn total(&self, a: usize, b: usize) -> f64 {
        self.rate(a, b).map_or(0.0, |r| r.1)
    }
}

/// Γ^±_{𝕟,𝕟′}(ω₀) = 2πB₁²ρ_f(±ω₀)|⟨𝕟|ξˣ(+1,ω₀)|𝕟′⟩|².
pub fn pauli_rates(model: &MasterEquationModel) -> RateTable {
    let mut entries = Vec::new();
    for c in &model.channels {
        for col in 0..c.xi.ncols() {
            for row in 0..c.xi.nrows() {
                let m2 = c.xi[(row, col)].norm_sqr();
                if m2 == 0.0 {
                    continue;
                }
                entries.push(RateEntry {
                    row,
                    col,
                    omega_o: c.omega_o,
                    gamma_plus: c.rate_plus * m2,
                    gamma_minus: c.rate_minus * m2,
                });
            }
        }
    }
    RateTable { entries }
}

/// Per-channel absorbed power Σ ω₀ (P_row − P_col) Γ_{row,col} (without N/V).
pub fn absorbed_power_rates(model: &MasterEquationModel) -> Vec<(f64, f64)> {
    let pops = model.boltzmann().populations();
    let table = pauli_rates(model);
    let mut out: Vec<(f64, f64)> = model.channels.iter().map(|c| (c.omega_o, 0.0)).collect();
    for e in &table.entries {
        let slot = out
            .iter_mut()
            .find(|(w, _)| *w == e.omega_o)
            .expect("entry frequency comes from a channel");
        slot.1 += e.omega_o * (pops[e.row] - pops[e.col]) * e.total();
    }
    out
}

const ORACLE_ORDER: usize = 8;

/// Second-order transition probability |a_k(t)|² for a system prepared in
/// eigenstate k0 of H₀ (energies `energies`) and driven by ℋ′(t).
///
/// For k ≠ k0 this is |∫ e^{−i(t₁−t_o)ω_{k0,k}}⟨k|ℋ′(t₁)|k0⟩ dt₁|² with
/// ω_{k0,k} = E_{k0} − E_k. For k = k0 it is the survival probability
/// 1 − 2 Re ∫∫_{t₂<t₁} ⟨k0|V(t₁)V(t₂)|k0⟩ + |∫⟨k0|V|k0⟩|², which keeps Σ_k
/// equal to one at this order. `panels` sets the composite Gauss–Legendre grid.
pub fn wavefunction_oracle(
    energies: &[f64],
    h_prime: impl Fn(f64) -> Operator,
    k0: usize,
    k: usize,
    t_o: f64,
    t: f64,
    panels: usize,
) -> f64 {
    let gl = GaussLegendre::new(ORACLE_ORDER);
    let panels = panels.max(1);
    let h = (t - t_o) / panels as f64;
    // V_{a,k0}(s) in the interaction picture
    let v = |s: f64, a: usize, hp: &Operator| -> C64 {
        hp[(a, k0)] * C64::from_polar(1.0, (energies[a] - energies[k0]) * (s - t_o))
    };
    if k != k0 {
        let mut amp = C64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = t_o + p as f64 * h;
            for (s, w) in gl.mapped(lo, lo + h) {
                amp += v(s, k, &h_prime(s)) * w;
            }
        }
        return amp.norm_sqr();
    }

    let d = energies.len();
    // cumulative G_m(s) = ∫_{t_o}^{s} V_{m,k0}, evaluated at every outer node
    let mut done = vec![C64::new(0.0, 0.0); d];
    let mut double = C64::new(0.0, 0.0);
    let mut diag = C64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = t_o + p as f64 * h;
        for (s1, w1) in gl.mapped(lo, lo + h) {
            let hp1 = h_prime(s1);
            let mut inner = done.clone();
            for (s2, w2) in gl.mapped(lo, s1) {
                let hp2 = h_prime(s2);
                for (m, slot) in inner.iter_mut().enumerate() {
                    *slot += v(s2, m, &hp2) * w2;
                }
            }
            // ⟨k0|V(s1)|m⟩ = conj(V_{m,k0}(s1)) for Hermitian ℋ′
            for (m, g) in inner.iter().enumerate() {
                double += v(s1, m, &hp1).conj() * g * w1;
            }
            diag += v(s1, k0, &hp1) * w1;
        }
        let mut full = vec![C64::new(0.0, 0.0); d];
        for (s2, w2) in gl.mapped(lo, lo + h) {
            let hp2 = h_prime(s2);
            for (m, slot) in full.iter_mut().enumerate() {
                *slot += v(s2, m, &hp2) * w2;
            }
        }
        for (a, b) in done.iter_mut().zip(full) {
            *a += b;
        }
    }
    1.0 - 2.0 * double.re + diag.norm_sqr()
}
