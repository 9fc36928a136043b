//! Qubit structure factors: the Lorentzian of half width 2Γ on top of the
//! delta peak, and the adiabatic detailed-balance relations.

use spinlind::lineshape::FrequencyDistribution;
use spinlind::qubit::{fdt_check, structure_factor, Correlation, QubitParams};

fn main() -> spinlind::Result<()> {
    let dist = FrequencyDistribution::lorentzian(10.0, 0.04)?;
    let p = QubitParams::new(10.0, 0.063, 0.4, dist)?;
    println!("Gamma = {:.6e}, varpi = {:.3e}, tanh = {:.6}", p.gamma_rate, p.varpi, p.polarization());
    println!("{:>10} {:>14} {:>14}", "omega'", "S-+ smooth", "S+- smooth");
    for k in -6..=6 {
        let w = p.omega_o + k as f64 * p.gamma_rate;
        let a = structure_factor(&p, Correlation::MinusPlus, w);
        let b = structure_factor(&p, Correlation::PlusMinus, -w);
        println!("{w:10.4} {:14.6e} {:14.6e}", a.smooth, b.smooth);
    }
    let peak = structure_factor(&p, Correlation::MinusPlus, p.omega_o).smooth;
    let half = structure_factor(&p, Correlation::MinusPlus, p.omega_o + 2.0 * p.gamma_rate).smooth;
    println!("S(omega_o + 2 Gamma) / S(omega_o) = {:.12}", half / peak);

    let r = fdt_check(&p);
    println!("absorption weight {:.6}, emission weight {:.6}", r.absorption_weight, r.emission_weight);
    println!("detailed balance residual {:.1e}, fluctuation-dissipation residual {:.1e}", r.adiabatic_detailed_balance, r.fdt);
    Ok(())
}
