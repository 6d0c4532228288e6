mod common;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use atorus_core::exterior::{
    antisymmetry_defect, codifferential, exterior_derivative, flat, form_inner, interior_product, wedge,
    ExteriorDerivative,
};
use atorus_core::field::max_abs;
use atorus_core::sampling::sample_points;
use atorus_core::zoo;
use atorus_core::{Chart, ComponentField, Expr, FieldRef, TensorField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{form_from, random_form, random_form_values, zoo_charts};

#[test]
fn d_squared_vanishes_on_zoo_charts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for chart in zoo_charts() {
        let n = chart.dim();
        let pts = sample_points(chart.domain(), 100, 5);
        for p in 0..=n - 2 {
            let phi: FieldRef = random_form(&mut rng, n, p).into_ref();
            let dphi = ExteriorDerivative(phi);
            for x in &pts {
                let dd = exterior_derivative(&dphi, x).unwrap();
                assert_eq!(dd.degree, p + 2);
                assert!(
                    max_abs(&dd.components) <= 1e-10,
                    "{} degree {p} at {x:?}: {}",
                    chart.name(),
                    max_abs(&dd.components)
                );
            }
        }
    }
}

#[test]
fn random_forms_are_antisymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=4 {
        for p in 1..=n {
            let phi = random_form(&mut rng, n, p);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = phi.values(&x).unwrap();
            assert!(antisymmetry_defect(&v, n, p) <= 1e-12);
            let d = exterior_derivative(&phi, &x).unwrap();
            if p < n {
                assert!(antisymmetry_defect(&d.components, n, p + 1) <= 1e-12);
            } else {
                assert!(d.overflow);
            }
        }
    }
}

fn degrees() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..=5)
        .prop_flat_map(|n| (Just(n), 1..n))
        .prop_flat_map(|(n, p)| (Just(n), Just(p), 1..=n - p, any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interior_product_is_an_antiderivation((n, p, q, seed) in degrees()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = random_form_values(&mut rng, n, p);
        let beta = random_form_values(&mut rng, n, q);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lhs = interior_product(&x, &wedge(&alpha, p, &beta, q, n).components, n, p + q).unwrap();
        let first = wedge(&interior_product(&x, &alpha, n, p).unwrap(), p - 1, &beta, q, n).components;
        let second = wedge(&alpha, p, &interior_product(&x, &beta, n, q).unwrap(), q - 1, n).components;
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        for ((l, a), b) in lhs.iter().zip(&first).zip(&second) {
            prop_assert!((l - a - sign * b).abs() <= 1e-10);
        }
        let xx = interior_product(&x, &interior_product(&x, &alpha, n, p).unwrap(), n, p - 1);
        if p >= 2 {
            prop_assert!(max_abs(&xx.unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn one_form_squares_to_zero(n in 2usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        prop_assert!(max_abs(&wedge(&a, 1, &a, 1, n).components) <= 1e-15);
    }
}

/// Both sides of `X⌟(X♭∧δφ) = g(X,X)δφ − X♭∧(X⌟δφ)`, paired with `X⌟ψ`.
fn contraction_sides(chart: &Chart, phi: &dyn TensorField, psi: &[f64], x: &[f64], point: &[f64], p: usize) -> (f64, f64) {
    let n = chart.dim();
    let g = chart.metric_values(point).unwrap();
    let ginv = {
        let m = nalgebra::DMatrix::from_row_slice(n, n, &g);
        m.try_inverse().unwrap().as_slice().to_vec()
    };
    let xb = flat(&g, n, x);
    let gxx: f64 = xb.iter().zip(x).map(|(a, b)| a * b).sum();
    let delta = codifferential(chart, phi, point).unwrap().components;
    let xpsi = interior_product(x, psi, n, p).unwrap();
    let lhs_form = interior_product(x, &wedge(&xb, 1, &delta, p - 1, n).components, n, p).unwrap();
    let lhs = form_inner(&ginv, n, &lhs_form, &xpsi, p - 1);
    let x_delta = interior_product(x, &delta, n, p - 1).unwrap();
    let tail = wedge(&xb, 1, &x_delta, p - 2, n).components;
    let rhs = gxx * form_inner(&ginv, n, &delta, &xpsi, p - 1) - form_inner(&ginv, n, &tail, &xpsi, p - 1);
    (lhs, rhs)
}

#[test]
fn contraction_identity_on_zoo_charts() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for chart in zoo_charts() {
        let n = chart.dim();
        for p in 2..=n.min(3) {
            let phi = random_form(&mut rng, n, p);
            let pts = sample_points(chart.domain(), 100, 23);
            for point in &pts {
                let psi = random_form_values(&mut rng, n, p);
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (lhs, rhs) = contraction_sides(&chart, &phi, &psi, &x, point, p);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
                    "{} p={p}: {lhs} vs {rhs}",
                    chart.name()
                );
            }
        }
    }
}

#[test]
fn contraction_example_on_flat_space() {
    let chart = Chart::new(
        "r3",
        vec!["x".into(), "y".into(), "z".into()],
        vec![(-1.0, 1.0); 3],
        vec![
            vec![Expr::one(), Expr::zero(), Expr::zero()],
            vec![Expr::zero(), Expr::one(), Expr::zero()],
            vec![Expr::zero(), Expr::zero(), Expr::one()],
        ],
    )
    .unwrap();
    let phi = ComponentField::two_form(3, &[((0, 1), Expr::var(0))]).unwrap();
    let point = [0.3, -0.2, 0.5];
    let delta = codifferential(&chart, &phi, &point).unwrap().components;
    assert_eq!(delta, vec![0.0, -1.0, 0.0]);
    let x = [1.0, 0.0, 0.0];
    let xw = wedge(&x, 1, &delta, 1, 3).components;
    assert_eq!(xw[1], -1.0);
    assert_eq!(interior_product(&x, &xw, 3, 2).unwrap(), vec![0.0, -1.0, 0.0]);
    let psi = ComponentField::two_form(3, &[((0, 1), Expr::one()), ((1, 2), Expr::var(2))]).unwrap();
    let (lhs, rhs) = contraction_sides(&chart, &phi, &psi.values(&point).unwrap(), &x, &point, 2);
    assert_eq!(lhs, rhs);
    assert_eq!(lhs, -1.0);
}

#[test]
fn theta_contracts_sphere_area_form_to_dphi() {
    let s2 = zoo::round_s2(1.0);
    let omega = s2.kahler_form();
    let w = omega.values(&[FRAC_PI_2, 0.4]).unwrap();
    let c = interior_product(&[1.0, 0.0], &w, 2, 2).unwrap();
    assert!((c[1] - 1.0).abs() < 1e-15 && c[0] == 0.0, "{c:?}");
}

#[test]
fn kahler_forms_of_factors_are_closed_and_coclosed() {
    for f in zoo::base_factors() {
        let omega = f.kahler_form();
        for p in sample_points(f.chart.domain(), 100, 9) {
            let d = exterior_derivative(omega.as_ref(), &p).unwrap();
            assert!(d.overflow && max_abs(&d.components) <= 1e-10);
            let delta = codifferential(&f.chart, omega.as_ref(), &p).unwrap();
            assert!(max_abs(&delta.components) <= 1e-10, "{} at {p:?}: {:?}", f.name, delta);
        }
    }
}

#[test]
fn products_of_forms_match_hand_values() {
    // (x dx + dy) ∧ (y dx) = −y dx∧dy at (x, y) = (2, 3)
    let a = form_from(2, 1, |i| if i[0] == 0 { Expr::var(0) } else { Expr::one() });
    let b = form_from(2, 1, |i| if i[0] == 0 { Expr::var(1) } else { Expr::zero() });
    let w = wedge(&a.values(&[2.0, 3.0]).unwrap(), 1, &b.values(&[2.0, 3.0]).unwrap(), 1, 2);
    assert_eq!(w.components, vec![0.0, -3.0, 3.0, 0.0]);
    let sum: FieldRef = Arc::new(a);
    assert_eq!(exterior_derivative(sum.as_ref(), &[2.0, 3.0]).unwrap().components, vec![0.0; 4]);
}
