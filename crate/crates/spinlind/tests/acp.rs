use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use spinlind::acp::{propagate_order_n, zeta_determinant, zeta_recursive, AcpMoments, AcpSystem};
use spinlind::master::{liouvillian_matrix, unvec, MasterEquationModel, PropagateOptions};
use spinlind::presets::coupled_pair;
use spinlind::spin::{max_abs, SpinSystem};
use spinlind::{Error, Operator};

fn c(x: f64) -> C64 { C64::new(x, 0.0) }

fn pair(t: f64) -> AcpSystem {
    let sys = SpinSystem::new(vec![1, 1], vec![-1.0, -0.35], DMatrix::from_row_slice(2, 2, &[0.0, t, t, 0.0])).unwrap();
    AcpSystem::new(sys, 8.0)
}

fn half_and_one(t: f64) -> AcpSystem {
    let sys = SpinSystem::new(vec![1, 2], vec![-1.0, -0.6], DMatrix::from_row_slice(2, 2, &[0.0, t, t, 0.0])).unwrap();
    AcpSystem::new(sys, 3.0)
}

fn zo(a: &AcpSystem) -> Operator {
    Operator::from_diagonal(&nalgebra::DVector::from_iterator(a.dim(), a.levels.energies.iter().map(|&e| c(e))))
}

// n-th order term of e^{β𝒵₀}e^{−β(𝒵₀+𝒳)} from one block upper-triangular exponential
fn y_oracle(a: &AcpSystem, n: usize, beta: f64) -> Operator {
    let d = a.dim();
    let z = zo(a);
    let mut big = Operator::zeros((n + 1) * d, (n + 1) * d);
    for k in 0..=n {
        big.view_mut((k * d, k * d), (d, d)).copy_from(&(-&z * c(beta)));
        if k < n {
            big.view_mut((k * d, (k + 1) * d), (d, d)).copy_from(&(-&a.x * c(beta)));
        }
    }
    let e = big.exp();
    let corner: Operator = e.view((0, n * d), (d, d)).into_owned();
    (z * c(beta)).exp() * corner
}

#[test]
fn x_interaction_matches_conjugation() {
    let a = pair(0.6);
    assert_eq!(a.x_interaction(c(0.0)), a.x);
    let z = zo(&a);
    let i = C64::new(0.0, 1.0);
    for s in [c(0.7), C64::new(0.0, 0.4), C64::new(0.3, -0.2)] {
        let want = (-&z * i * s).exp() * &a.x * (&z * i * s).exp();
        assert!(max_abs(&(a.x_interaction(s) - want)) < 1e-10);
    }
}

#[test]
fn y_operators_match_block_exponential() {
    for a in [pair(0.6), half_and_one(0.4)] {
        for n in 1..=4 {
            let y = a.y_operator(n, 0.5).unwrap();
            let want = y_oracle(&a, n, 0.5);
            assert!(max_abs(&(&y - &want)) < 1e-8 * max_abs(&want).max(1.0), "n = {n}");
        }
    }
}

#[test]
fn moments_are_real_and_homogeneous() {
    let a = half_and_one(0.4);
    for n in 1..=3 {
        assert!(a.y_moment(n, 0.7).unwrap().im.abs() < 1e-10);
    }
    // scaling T would also move the diagonal coupling in 𝒵₀, so scale 𝒳 alone
    let mut scaled = a.clone();
    scaled.x *= c(3.0);
    for n in 1..=3 {
        let m1 = a.y_moment(n, 0.7).unwrap();
        let m3 = scaled.y_moment(n, 0.7).unwrap();
        assert!((m3 - m1 * 3f64.powi(n as i32)).norm() < 1e-8 * m3.norm().max(1.0));
    }
    // flip-flop 𝒳 has no diagonal, so the first moment vanishes
    assert!(a.y_moment(1, 0.7).unwrap().norm() < 1e-14);
}

#[test]
fn zero_perturbation_gives_zero_moments() {
    let a = pair(0.0);
    for n in 1..=4 {
        assert_eq!(a.y_moment(n, 1.0).unwrap(), c(0.0));
    }
}

#[test]
fn zeta_closed_forms() {
    let m = AcpMoments { order: 3, values: vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5), c(0.7)] };
    let z = zeta_recursive(&m);
    assert_eq!(z.zetas[0], c(1.0));
    assert_eq!(z.zetas[1], -m.values[0]);
    assert!((z.zetas[2] - (m.values[0] * m.values[0] - m.values[1])).norm() < 1e-15);
    assert!((zeta_determinant(&m, 1).unwrap() + m.values[0]).norm() < 1e-15);

    let zero = zeta_recursive(&AcpMoments { order: 4, values: vec![c(0.0); 4] });
    assert_eq!(zero.zetas, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)]);

    // ⟨𝒴⁽ᵏ⁾⟩ = qᵏ sums to 1/(1 − q), whose inverse is 1 − q
    let q = C64::new(0.4, -0.3);
    let geo = AcpMoments { order: 4, values: (1..=4).map(|k| q.powi(k)).collect() };
    let z = zeta_recursive(&geo);
    assert!((z.zetas[1] + q).norm() < 1e-15);
    for k in 2..=4 {
        assert!(z.zetas[k].norm() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn determinant_equals_recursion(re in prop::collection::vec(-2.0f64..2.0, 6), im in prop::collection::vec(-2.0f64..2.0, 6)) {
        let values: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        let m = AcpMoments { order: 6, values };
        let z = zeta_recursive(&m);
        for n in 1..=6 {
            let d = zeta_determinant(&m, n).unwrap();
            prop_assert!((d - z.zetas[n]).norm() < 1e-10);
        }
        for n in 1..=6 {
            let mut s = c(0.0);
            for np in 0..n {
                s += z.zetas[np] * m.values[n - np - 1];
            }
            prop_assert!((z.zetas[n] + s).norm() < 1e-12);
        }
    }
}

#[test]
fn corrections_are_traceless() {
    let a = pair(0.6);
    let r0 = a.initial_correction(0, 0.5).unwrap();
    assert!(max_abs(&(&r0.matrix - a.boltzmann(0.5))) == 0.0);
    for n in 1..=3 {
        let r = a.initial_correction(n, 0.5).unwrap();
        assert!(r.trace().norm() < 1e-9);
        assert!(r.hermiticity_residual() < 1e-8);
    }
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn second_order_gibbs_residual_is_cubic() {
    let scales: Vec<f64> = (0..6).map(|k| 0.1 * 10f64.powf(k as f64 / 5.0)).collect();
    let mut res = Vec::new();
    for &s in &scales {
        let a = pair(2.0 * s);
        let beta = 0.5;
        res.push(max_abs(&(a.truncated_gibbs(2, beta).unwrap() - a.exact_gibbs(beta))));
    }
    let slope = fit_slope(&scales, &res);
    assert!((slope - 3.0).abs() < 0.1, "slope {slope}, residuals {res:?}");
}

#[test]
fn order_n_zero_source_from_zero_stays_zero() {
    let m = coupled_pair().unwrap();
    let z = Operator::zeros(4, 4);
    let traj = propagate_order_n(&m, 1, &z, 5.0, PropagateOptions::default(), |_| Operator::zeros(4, 4)).unwrap();
    assert!(traj.states.iter().all(|s| max_abs(s) == 0.0));
}

#[test]
fn order_n_rejects_traced_source() {
    let m = coupled_pair().unwrap();
    let z = Operator::zeros(4, 4);
    let r = propagate_order_n(&m, 1, &z, 1.0, PropagateOptions::default(), |_| Operator::identity(4, 4));
    assert!(matches!(r, Err(Error::Contract(_))));
}

#[test]
fn order_n_constant_source_matches_duhamel() {
    let m: MasterEquationModel = coupled_pair().unwrap();
    let mut g = Operator::zeros(4, 4);
    g[(0, 0)] = c(0.3);
    g[(3, 3)] = c(-0.3);
    g[(1, 2)] = C64::new(0.1, 0.05);
    g[(2, 1)] = C64::new(0.1, -0.05);
    let t = 12.0;
    let traj = propagate_order_n(&m, 1, &Operator::zeros(4, 4), t, PropagateOptions::default(), |_| g.clone()).unwrap();
    let l = liouvillian_matrix(&m).unwrap();
    let n2 = 16;
    let mut aug = DMatrix::<C64>::zeros(n2 + 1, n2 + 1);
    aug.view_mut((0, 0), (n2, n2)).copy_from(&(l * c(t)));
    for (k, v) in g.as_slice().iter().enumerate() {
        aug[(k, n2)] = v * t;
    }
    let e = aug.exp();
    let want = unvec(&e.view((0, n2), (n2, 1)).into_owned().column(0).into_owned(), 4);
    assert!(max_abs(&(traj.last() - want)) < 1e-9);
    assert!(traj.last().trace().norm() < 1e-12);
}

#[test]
fn order_n_without_source_follows_order_zero_equation() {
    let m = coupled_pair().unwrap();
    let a = AcpSystem::from_model(&m);
    let start = a.initial_correction(2, m.beta).unwrap().matrix;
    let opts = PropagateOptions { dt: Some(0.01), ..Default::default() };
    let traj = propagate_order_n(&m, 2, &start, 3.0, opts, |_| Operator::zeros(4, 4)).unwrap();
    let direct = spinlind::master::propagate_with(
        &m,
        &spinlind::spin::DensityMatrix::new(start.clone(), 0.0),
        3.0,
        PropagateOptions { unsafe_allow_any_state: true, ..opts },
    )
    .unwrap();
    assert!(max_abs(&(traj.last() - direct.last())) < 1e-15);
    assert!(traj.last().trace().norm() < 1e-9);
}
