//! Continuous-wave qubit: numerical master equation against the closed forms.

use spinlind::master::propagate;
use spinlind::presets::resonant_qubit;
use spinlind::qubit::{pauli, QubitParams};

fn main() -> spinlind::Result<()> {
    let gamma = 0.1;
    let model = resonant_qubit(10.0, gamma, 1.0)?;
    let params = QubitParams::from_field(-1.0, &model.field, model.beta)?;
    println!("Gamma = {:.6}  varpi = {:.3e}", params.gamma_rate, params.varpi);

    let t_end = 10.0 / gamma;
    let dt = 2.0 * std::f64::consts::PI / (400.0 * 20.0);
    let rho0 = model.boltzmann();
    let traj = propagate(&model, &rho0, t_end, dt)?;
    let every = traj.times.len() / 40;
    let mut worst: f64 = 0.0;
    println!("{:>8} {:>12} {:>12} {:>12}", "t", "<s1>", "<s2>", "<s3>");
    for (k, (t, rho)) in traj.times.iter().zip(traj.schrodinger(&model)).enumerate() {
        if k % every != 0 {
            continue;
        }
        let num: Vec<f64> = (1..4).map(|i| (&rho * pauli(i)).trace().re).collect();
        let exact = params.trajectory(*t);
        for i in 0..3 {
            worst = worst.max((num[i] - exact[i]).abs());
        }
        println!("{t:8.2} {:12.8} {:12.8} {:12.8}", num[0], num[1], num[2]);
    }
    println!("max |numeric - closed form| = {worst:.3e}");
    Ok(())
}
