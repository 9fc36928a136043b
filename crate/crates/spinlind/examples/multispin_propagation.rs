//! Three coupled spins under a Lorentzian drive: populations, magnetization
//! and the smallest eigenvalue of ϱ(t) along the trajectory.

use spinlind::master::{pauli_rates, propagate_with, PropagateOptions};
use spinlind::presets::three_spins;
use spinlind::response::absorbed_power;
use spinlind::spin::{total_spin, Axis, DensityMatrix};

fn main() -> spinlind::Result<()> {
    let model = three_spins()?;
    println!("dimension {}, {} absorption channels", model.dim(), model.channels.len());
    for c in &model.channels {
        println!("  omega_o = {:9.4}  rate = {:.3e}", c.omega_o, c.rate());
    }

    let opts = PropagateOptions { record_every: 200, ..Default::default() };
    let traj = propagate_with(&model, &model.boltzmann(), 80.0, opts)?;
    let sz = total_spin(&model.system, Axis::Z);
    let sx = total_spin(&model.system, Axis::X);
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "<Sx>", "<Sz>", "min eig");
    for (t, rho) in traj.times.iter().zip(traj.schrodinger(&model)) {
        let d = DensityMatrix::new(rho, 1.0);
        println!("{t:8.2} {:12.3e} {:12.8} {:12.3e}", d.expectation(&sx).re, d.expectation(&sz).re, d.eigenvalues()[0]);
    }

    let table = pauli_rates(&model);
    println!("{} allowed transitions", table.entries.len());
    let power = absorbed_power(&model, 1.0);
    println!("absorbed power {:.4e}", power.total);
    for l in power.lines.iter().filter(|l| l.power.abs() > 1e-3 * power.total.abs()) {
        println!("  at {:9.4}: {:.4e}", l.omega_o, l.power);
    }
    Ok(())
}
