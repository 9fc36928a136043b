//! Linear response of the transverse magnetization: steady ⟨M_x(t)⟩, the
//! decaying transient, and a Kramers–Kronig check on a broadened χ.

use spinlind::lineshape::FrequencyDistribution;
use spinlind::master::{FieldConfig, MasterEquationModel};
use spinlind::response::{kramers_kronig_residual, response_functions, steady_magnetization, Branch};
use spinlind::spin::{moment_operator, Axis, SpinSystem};

fn main() -> spinlind::Result<()> {
    let dist = FrequencyDistribution::lorentzian(10.0, 0.5)?;
    let field = FieldConfig::new(10.0, 0.02, dist)?;
    let model = MasterEquationModel::new(SpinSystem::qubit(-1.0), field, 0.3)?;

    let x = moment_operator(&model.system, Axis::X);
    let chi = response_functions(&model, &x)?;
    for r in &chi {
        println!("omega_o = {}, <[X, xi]> = {:.6}", r.omega_o, r.commutator_avg);
        println!("  averaged chi+ = {:.6e}", r.averaged_infinity(Branch::Plus, &dist)?);
        println!("  averaged chi- = {:.6e}", r.averaged_infinity(Branch::Minus, &dist)?);
        for t in [0.0, 2.0, 8.0] {
            println!("  transient at t = {t}: {:.4e}", r.averaged_transient(Branch::Plus, &dist, t)?);
        }
    }

    println!("{:>6} {:>14}", "t", "<M_x>");
    let period = 2.0 * std::f64::consts::PI / 10.0;
    for k in 0..8 {
        let t = k as f64 * period / 8.0;
        println!("{t:6.3} {:14.6e}", steady_magnetization(&model, t, 1.0)?);
    }

    let r = chi[0];
    let eta = 0.2;
    let grid: Vec<f64> = (0..9).map(|k| 9.0 + 0.25 * k as f64).collect();
    let gap = kramers_kronig_residual(|w| r.smoothed(Branch::Plus, w, eta), &grid, -40.0, 60.0)?;
    println!("Kramers-Kronig gap on [-40, 60] with eta = {eta}: {gap:.2e}");
    Ok(())
}
