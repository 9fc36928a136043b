//! The dynamical map of a coupled pair: trace preservation, the Kraus-form
//! reconstruction Φ₁ − Φ₂, and the witness showing the map is not CP.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use spinlind::master::{kraus_audit, lambda_map, noncp_witness, propagate};
use spinlind::presets::coupled_pair;
use spinlind::spin::max_abs;

fn main() -> spinlind::Result<()> {
    let model = coupled_pair()?;
    let rho0 = model.boltzmann();
    for t in [1.0, 5.0, 20.0] {
        let map = lambda_map(&model, t, &rho0)?;
        let rk4 = propagate(&model, &rho0, t, model.default_dt() / 4.0)?;
        println!(
            "t = {t:5.1}: |Tr - 1| = {:.1e}, |map - RK4| = {:.1e}",
            (map.trace() - C64::new(1.0, 0.0)).norm(),
            max_abs(&(&map.matrix - rk4.last()))
        );
    }

    let audit = kraus_audit(&model, 6.0, &rho0)?;
    println!("Kraus trace identity residual   {:.2e}", audit.trace_residual);
    println!("Phi1 - Phi2 - Lambda residual   {:.2e}", audit.phi1_minus_phi2_residual);
    println!("min Choi eigenvalues: semigroup {:.2e}, Phi1 {:.2e}, Phi2 {:.2e}", audit.semigroup_min_choi, audit.phi1_min_choi, audit.phi2_min_choi);

    let psi = DVector::from_fn(model.dim(), |k, _| C64::new(1.0 + k as f64, 0.3 * k as f64));
    for t in [0.5, 3.0, 10.0] {
        let w = noncp_witness(&model, &psi, t)?;
        println!("witness at t = {t:4.1}: det = {:.4e}, predicted {:.4e}", w.det_value, w.predicted);
    }
    Ok(())
}
