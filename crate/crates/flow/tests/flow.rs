mod common;

use common::*;
use itlog_core::dag::{dag_flow_rhs, Dag};
use itlog_core::rational::q;
use itlog_flow::flow::*;
use itlog_flow::quiver::thin_quadruple;
use itlog_flow::staralg::Quadruple;
use itlog_flow::Error;
use nalgebra::Complex;
use proptest::prelude::*;
use rand::Rng;

fn a2(phi: f64) -> Quadruple {
    let g = Dag::path(vec![q(1), q(1)]);
    let mut quad = thin_quadruple(&g).unwrap();
    quad.phi.0[0][(0, 0)] = Complex::new(phi, 0.0);
    quad
}

fn scalar(h: &itlog_flow::staralg::BElem, i: usize) -> f64 {
    h.0[i][(0, 0)].re
}

#[test]
fn zero_data_is_stationary() {
    let mut quad = random_quadruple(1, false);
    quad.phi = quad.amb.m_zero();
    let mut r = rng(2);
    let h0 = random_metric(&mut r, &quad.amb);
    assert_eq!(flow_rhs(&quad, &h0).unwrap().max_abs(), 0.0);
    let traj = integrate(&quad, &h0, (1.0, 1e3), &IntegrateOptions::default()).unwrap();
    assert!(traj.states.iter().all(|h| h.sub(&h0.hermitian_part()).max_abs() < 1e-12));
}

#[test]
fn a2_exact_solution() {
    let quad = a2(0.5f64.sqrt());
    let traj = integrate(&quad, &quad.amb.b_identity(), (1.0, 1e6), &IntegrateOptions::default()).unwrap();
    let h = traj.last();
    assert!((scalar(h, 0) / 1e3 - 1.0).abs() < 1e-6);
    assert!((scalar(h, 1) * 1e3 - 1.0).abs() < 1e-6);
}

#[test]
fn a2_sandwich_between_one_and_two() {
    let quad = a2(0.5f64.sqrt());
    let h1 = quad.amb.b_identity();
    let h2 = h1.scale_re(2.0);
    let opts = IntegrateOptions::default();
    assert!(monotonicity_check(&quad, &h1, &h2, (1.0, 1e4), &opts).unwrap());
    let a = integrate(&quad, &h1, (1.0, 1e4), &opts).unwrap();
    let b = integrate(&quad, &h2, (1.0, 1e4), &opts).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        for i in 0..2 {
            let ratio = scalar(y, i) / scalar(x, i);
            assert!((1.0 - 1e-9..=2.0 + 1e-9).contains(&ratio), "{ratio}");
        }
    }
}

#[test]
fn identical_starts_are_monotone() {
    let quad = random_quadruple(9, false);
    let h = random_metric(&mut rng(4), &quad.amb);
    assert!(monotonicity_check(&quad, &h, &h, (1.0, 1e2), &IntegrateOptions::default()).unwrap());
}

#[test]
fn homogeneity_under_scalar_shift() {
    let quad = random_quadruple(21, false);
    let h0 = random_metric(&mut rng(5), &quad.amb);
    let opts = IntegrateOptions { rtol: 1e-12, atol: 1e-14, samples_per_decade: 10, ..Default::default() };
    let plain = integrate(&quad, &h0, (1.0, 1e3), &opts).unwrap();
    let shifted = integrate(&quad, &h0, (1.0, 1e3), &IntegrateOptions { shift: Some(|t| 1.0 / (1.0 + t)), ..opts }).unwrap();
    for ((t, a), b) in plain.times.iter().zip(&plain.states).zip(&shifted.states) {
        let factor = ((1.0 + t) / 2.0).ln().exp();
        let diff = a.scale_re(factor).sub(b).max_abs() / b.max_abs();
        assert!(diff < 1e-8, "t = {t}: {diff}");
    }
}

#[test]
fn fixed_point_of_polystable_quiver() {
    // One arrow with θ = (1, −1): polystable, fixed point h₂/h₁ = 1/c.
    let mut quad = a2(2.0);
    quad.rho = quad.amb.b_scalars(&[1.0, -1.0]);
    let h = flow_to_fixed_point(&quad, &quad.amb.b_identity(), &FixedPointOptions::default()).unwrap();
    assert!((scalar(&h, 1) / scalar(&h, 0) - 0.25).abs() < 1e-9);
    // θ = 0 is semistable but not polystable.
    let quad = a2(1.0);
    assert!(matches!(
        flow_to_fixed_point(&quad, &quad.amb.b_identity(), &FixedPointOptions::default()),
        Err(Error::NotSemistable(_))
    ));
}

#[test]
fn bad_inputs_rejected() {
    let quad = a2(1.0);
    let bad = quad.amb.b_scalars(&[1.0, -1.0]);
    assert!(integrate(&quad, &bad, (1.0, 10.0), &IntegrateOptions::default()).is_err());
    assert!(integrate(&quad, &quad.amb.b_identity(), (0.0, 10.0), &IntegrateOptions::default()).is_err());
    assert!(matches!(flow_rhs(&quad, &quad.amb.b_zero()), Err(Error::SingularMetric)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn thin_rhs_matches_dag_flow(g in dag_strategy(6, false), seed in any::<u64>()) {
        let quad = thin_quadruple(&g).unwrap();
        let mut r = rng(seed);
        let x: Vec<f64> = (0..g.n()).map(|_| r.gen_range(-2.0..2.0)).collect();
        let h = quad.amb.b_scalars(&x.iter().map(|v| v.exp()).collect::<Vec<_>>());
        let v = log_velocity(&quad, &h, 0.0).unwrap();
        let expected = dag_flow_rhs(&g, &x);
        for i in 0..g.n() {
            let got = v.0[i][(0, 0)];
            prop_assert!((got.re - expected[i]).abs() <= 1e-12 * (1.0 + expected[i].abs()) && got.im == 0.0);
        }
    }

    #[test]
    fn gradient_consistency(seed in any::<u64>()) {
        let quad = random_quadruple(seed, true);
        let mut r = rng(seed ^ 0xabc);
        let h = random_metric(&mut r, &quad.amb);
        let w = random_hermitian(&mut r, &quad.amb);
        let eps = 1e-5;
        let fd = (energy(&quad, &h.add(&w.scale_re(eps))).unwrap() - energy(&quad, &h.sub(&w.scale_re(eps))).unwrap()) / (2.0 * eps);
        let grad = -metric(&quad, &h, &flow_rhs(&quad, &h).unwrap(), &w).unwrap();
        prop_assert!((fd - grad).abs() <= 1e-6 * (1.0 + grad.abs()), "fd {} grad {}", fd, grad);
    }

    #[test]
    fn energy_non_increasing(seed in any::<u64>()) {
        let quad = random_quadruple(seed, false);
        let h0 = random_metric(&mut rng(seed ^ 1), &quad.amb);
        let opts = IntegrateOptions { samples_per_decade: 10, ..Default::default() };
        let traj = integrate(&quad, &h0, (1.0, 1e3), &opts).unwrap();
        for w in traj.energies.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-8 * (1.0 + w[0].abs()), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn sandwich_holds(seed in any::<u64>()) {
        let quad = random_quadruple(seed, false);
        let mut r = rng(seed ^ 2);
        let (h1, h2) = (random_metric(&mut r, &quad.amb), random_metric(&mut r, &quad.amb));
        let opts = IntegrateOptions { samples_per_decade: 10, ..Default::default() };
        prop_assert!(sandwich_check(&quad, &h1, &h2, (1.0, 1e3), &opts).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monotonicity(seed in any::<u64>()) {
        let quad = random_quadruple(seed, false);
        let mut r = rng(seed ^ 3);
        let h1 = random_metric(&mut r, &quad.amb);
        let bump = random_b(&mut r, &quad.amb);
        let h2 = h1.add(&bump.adjoint().mul(&bump));
        let opts = IntegrateOptions { samples_per_decade: 10, ..Default::default() };
        prop_assert!(monotonicity_check(&quad, &h1, &h2, (1.0, 1e3), &opts).unwrap());
    }
}
