use nalgebra::DMatrix;
use proptest::prelude::*;
use spinlind::eigenops::{decompose_xi_x, project, DEFAULT_GAP_TOL};
use spinlind::spin::{max_abs, moment_operator, Axis, LevelData, SpinSystem};
use spinlind::verify::eigenop_residuals;

prop_compose! {
    fn system()(twice_j in prop::collection::vec(1u32..=2, 1..=4))
        (gammas in prop::collection::vec(prop_oneof![-3.0f64..-0.2, 0.2f64..3.0], twice_j.len()),
         t in prop::collection::vec(-0.8f64..0.8, 6),
         b0 in 0.5f64..5.0,
         twice_j in Just(twice_j)) -> (SpinSystem, f64)
    {
        let n = twice_j.len();
        let mut m = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in 0..i {
                m[(i, j)] = t[k];
                m[(j, i)] = t[k];
                k += 1;
            }
        }
        (SpinSystem::new(twice_j, gammas, m).unwrap(), b0)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]
    #[test]
    fn decomposition_invariants((sys, b0) in system()) {
        prop_assert!(sys.dim() <= 81);
        let r = eigenop_residuals(&sys, b0).unwrap();
        prop_assert!(r.completeness <= 1e-12, "completeness {}", r.completeness);
        prop_assert!(r.energy_ladder <= 1e-10, "energy ladder {}", r.energy_ladder);
        prop_assert!(r.magnetization_ladder <= 1e-10, "magnetization ladder {}", r.magnetization_ladder);
        prop_assert!(r.adjoint_exact);
        prop_assert!(r.unit_steps);
    }

    #[test]
    fn blocks_are_projections((sys, b0) in system()) {
        let levels = LevelData::new(&sys, b0);
        let xi = moment_operator(&sys, Axis::X);
        let dec = decompose_xi_x(&xi, &levels, DEFAULT_GAP_TOL).unwrap();
        for b in &dec.blocks {
            let p = project(&xi, &levels, b.n, b.omega_o, dec.gap_width);
            prop_assert!(max_abs(&(p - &b.matrix)) == 0.0);
        }
    }
}

#[test]
fn degenerate_gaps_share_a_block() {
    // two identical uncoupled spins: both flips sit at the same frequency
    let sys = SpinSystem::uncoupled(vec![1, 1], vec![-1.0, -1.0]).unwrap();
    let levels = LevelData::new(&sys, 2.0);
    let dec = decompose_xi_x(&moment_operator(&sys, Axis::X), &levels, DEFAULT_GAP_TOL).unwrap();
    assert_eq!(dec.blocks.len(), 2);
    assert_eq!(dec.raising().count(), 1);
}
