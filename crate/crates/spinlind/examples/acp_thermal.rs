//! Thermal corrections from the flip-flop part of the coupling: moments,
//! ζ coefficients, and the truncated Gibbs state against the exact one.

use nalgebra::DMatrix;
use spinlind::acp::{zeta_determinant, zeta_recursive, AcpSystem};
use spinlind::spin::{max_abs, SpinSystem};

fn main() -> spinlind::Result<()> {
    let beta = 0.5;
    let pair = |t: f64| {
        let s = SpinSystem::new(vec![1, 2], vec![-1.0, -0.6], DMatrix::from_row_slice(2, 2, &[0.0, t, t, 0.0]))?;
        Ok::<_, spinlind::Error>(AcpSystem::new(s, 3.0))
    };

    let a = pair(0.4)?;
    let m = a.moments(4, beta)?;
    let z = zeta_recursive(&m);
    println!("{:>3} {:>24} {:>24}", "n", "<Y(n)>", "zeta_n");
    for n in 1..=4 {
        let det = zeta_determinant(&m, n)?;
        println!("{n:>3} {:>24.6e} {:>24.6e}   |det - rec| = {:.1e}", m.values[n - 1], z.zetas[n], (det - z.zetas[n]).norm());
    }
    for n in 1..=2 {
        let c = a.initial_correction(n, beta)?;
        println!("order {n}: trace {:.1e}, hermiticity {:.1e}", c.trace().norm(), c.hermiticity_residual());
    }

    println!("{:>8} {:>12} {:>12} {:>12}", "T", "order 0", "order 1", "order 2");
    for t in [0.05, 0.1, 0.2, 0.4] {
        let a = pair(t)?;
        let exact = a.exact_gibbs(beta);
        let r: Vec<f64> = (0..=2).map(|n| a.truncated_gibbs(n, beta).map(|g| max_abs(&(g - &exact)))).collect::<Result<_, _>>()?;
        println!("{t:8.2} {:12.3e} {:12.3e} {:12.3e}", r[0], r[1], r[2]);
    }
    Ok(())
}
