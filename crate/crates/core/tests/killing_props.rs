mod common;

use std::sync::Arc;

use atorus_core::field::{max_abs, MetricField, ScaledField, SumField};
use atorus_core::geometry::RicciField;
use atorus_core::killing::{
    conformal_form_residual, conformal_p, cyclic_frame_residual, sum_tensor, CyclicData, PairTensor, PChoice,
};
use atorus_core::sampling::sample_points;
use atorus_core::zoo;
use atorus_core::{Chart, ComponentField, Expr, FieldRef, GeomError, ProductChart, TensorField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_polynomial, zoo_charts};

fn random_symmetric(rng: &mut impl Rng, n: usize) -> ComponentField {
    let mut rows = vec![vec![Expr::zero(); n]; n];
    for a in 0..n {
        for b in a..n {
            let e = random_polynomial(rng, n);
            rows[a][b] = e.clone();
            rows[b][a] = e;
        }
    }
    ComponentField::covariant2(rows).unwrap()
}

fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn single_vector_form_is_the_cyclic_form_on_the_diagonal(chart_idx in 0usize..9, seed in any::<u64>()) {
        let charts = zoo_charts();
        let chart = &charts[chart_idx % charts.len()];
        let n = chart.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_symmetric(&mut rng, n);
        let point = &sample_points(chart.domain(), 1, seed)[0];
        let x = random_vector(&mut rng, n);
        for choice in [PChoice::Zero, PChoice::Conformal] {
            let data = CyclicData::at(chart, &k, &choice, point).unwrap();
            let cyc = data.defect(&x, &x, &x);
            let single = data.single_vector_defect(&x);
            prop_assert!((cyc - 3.0 * single).abs() <= 1e-10 * (1.0 + single.abs()), "{cyc} vs 3·{single}");
        }
    }

    #[test]
    fn p_form_is_linear_and_residual_homogeneous(chart_idx in 0usize..9, seed in any::<u64>(), lambda in -3.0f64..3.0) {
        let charts = zoo_charts();
        let chart = &charts[chart_idx % charts.len()];
        let n = chart.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k1: FieldRef = random_symmetric(&mut rng, n).into_ref();
        let k2: FieldRef = random_symmetric(&mut rng, n).into_ref();
        let point = &sample_points(chart.domain(), 1, seed)[0];
        let sum = SumField::new(vec![k1.clone(), k2.clone()]).unwrap();
        let p1 = conformal_p(chart, k1.as_ref(), point).unwrap();
        let p2 = conformal_p(chart, k2.as_ref(), point).unwrap();
        let ps = conformal_p(chart, &sum, point).unwrap();
        let scale = 1.0 + max_abs(&p1).max(max_abs(&p2));
        for a in 0..n {
            prop_assert!((ps[a] - p1[a] - p2[a]).abs() <= 1e-12 * scale);
        }
        let scaled = ScaledField::new(k1.clone(), lambda);
        let pl = conformal_p(chart, &scaled, point).unwrap();
        for a in 0..n {
            prop_assert!((pl[a] - lambda * p1[a]).abs() <= 1e-12 * scale);
        }
        let (r1, s1) = cyclic_frame_residual(chart, k1.as_ref(), &PChoice::Conformal, point).unwrap();
        let (rl, _) = cyclic_frame_residual(chart, &scaled, &PChoice::Conformal, point).unwrap();
        prop_assert!((rl - lambda.abs() * r1).abs() <= 1e-12 * (1.0 + s1) * (1.0 + lambda.abs()));
    }
}

#[test]
fn killing_ricci_has_vanishing_p_form_on_zoo_charts() {
    for chart in zoo_charts().into_iter().filter(|c| c.name() != "perturbed-flat") {
        let ric = RicciField(chart.clone());
        for p in sample_points(chart.domain(), 30, 4) {
            let (killing, _) = cyclic_frame_residual(&chart, &ric, &PChoice::Zero, &p).unwrap();
            assert!(killing <= 1e-8, "{}", chart.name());
            assert!(max_abs(&conformal_p(&chart, &ric, &p).unwrap()) <= 1e-8, "{}", chart.name());
        }
    }
}

fn sphere_forms() -> (Chart, FieldRef, FieldRef) {
    let chart = zoo::round_s2(1.0).chart;
    let th = Expr::var(0);
    // g(∂_φ, ·) and d cos θ
    let rot = ComponentField::covector(vec![Expr::zero(), th.clone().sin().powi(2)]).into_ref();
    let grad = ComponentField::covector(vec![-th.sin(), Expr::zero()]).into_ref();
    (chart, rot, grad)
}

#[test]
fn pair_of_conformal_killing_forms_is_conformal_with_predicted_p() {
    let (chart, rot, grad) = sphere_forms();
    let pts = sample_points(chart.domain(), 100, 7);
    for p in &pts {
        assert!(conformal_form_residual(&chart, rot.as_ref(), p).unwrap() <= 1e-10);
        assert!(conformal_form_residual(&chart, grad.as_ref(), p).unwrap() <= 1e-10);
    }
    for (phi, psi) in [(&rot, &grad), (&grad, &grad), (&rot, &rot)] {
        let k = PairTensor::new(&chart, phi.clone(), psi.clone()).unwrap();
        let predicted = PChoice::Given(k.predicted_p_field());
        let mut worst = 0.0_f64;
        for p in &pts {
            let (r, _) = cyclic_frame_residual(&chart, &k, &predicted, p).unwrap();
            worst = worst.max(r);
            // The P-form is determined by K, so the prediction must match it.
            let from_k = conformal_p(&chart, &k, p).unwrap();
            let pred = k.predicted_p(p).unwrap();
            for (a, b) in from_k.iter().zip(&pred) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
        assert!(worst <= 1e-8, "{worst}");
    }
    // The gradient pair has a genuinely nonzero P.
    let k = PairTensor::new(&chart, grad.clone(), grad).unwrap();
    assert!(max_abs(&k.predicted_p(&[1.0, 0.0]).unwrap()) > 0.1);
}

#[test]
fn coclosed_inputs_predict_zero_p() {
    let (chart, rot, _) = sphere_forms();
    let vol = zoo::round_s2(1.0).kahler_form();
    for (phi, psi) in [(rot.clone(), rot), (vol.clone(), vol)] {
        let k = PairTensor::new(&chart, phi, psi).unwrap();
        for p in sample_points(chart.domain(), 100, 8) {
            assert!(max_abs(&k.predicted_p(&p).unwrap()) <= 1e-10);
            assert!(cyclic_frame_residual(&chart, &k, &PChoice::Zero, &p).unwrap().0 <= 1e-8);
        }
    }
}

#[test]
fn flat_pair_of_dx_is_twice_dx_squared() {
    let chart = zoo::flat_torus2().chart;
    let dx = ComponentField::covector(vec![Expr::one(), Expr::zero()]).into_ref();
    let k = PairTensor::new(&chart, dx.clone(), dx).unwrap();
    assert_eq!(k.values(&[0.1, 0.2]).unwrap(), vec![2.0, 0.0, 0.0, 0.0]);
    assert_eq!(k.predicted_p(&[0.1, 0.2]).unwrap(), vec![0.0, 0.0]);
}

fn s2_pair() -> (ProductChart, Chart, Chart) {
    let a = zoo::round_s2_named(1.0, "1").chart;
    let b = zoo::round_s2_named(1.0, "2").chart;
    (ProductChart::new("s2xs2", &[a.clone(), b.clone()]).unwrap(), a, b)
}

#[test]
fn sum_of_metrics_is_the_product_metric() {
    let (prod, a, b) = s2_pair();
    let k = sum_tensor(&prod, &[Arc::new(MetricField(a)), Arc::new(MetricField(b))]).unwrap();
    for p in sample_points(prod.chart.domain(), 20, 1) {
        assert_eq!(k.values(&p).unwrap(), prod.chart.metric_values(&p).unwrap());
        assert!(cyclic_frame_residual(&prod.chart, &k, &PChoice::Zero, &p).unwrap().0 <= 1e-14);
    }
}

#[test]
fn sum_of_factor_riccis_is_killing_and_matches_factor_residuals() {
    let s2 = zoo::round_s2(1.0).chart;
    let t2 = zoo::flat_torus2().chart;
    let prod = ProductChart::new("s2xt2", &[s2.clone(), t2.clone()]).unwrap();
    let k = sum_tensor(&prod, &[Arc::new(RicciField(s2.clone())), Arc::new(RicciField(t2.clone()))]).unwrap();
    for p in sample_points(prod.chart.domain(), 50, 2) {
        let (r, _) = cyclic_frame_residual(&prod.chart, &k, &PChoice::Zero, &p).unwrap();
        let (r1, _) = cyclic_frame_residual(&s2, &RicciField(s2.clone()), &PChoice::Zero, &p[..2]).unwrap();
        let (r2, _) = cyclic_frame_residual(&t2, &RicciField(t2.clone()), &PChoice::Zero, &p[2..]).unwrap();
        assert!(r <= 1e-8);
        assert!((r - r1.max(r2)).abs() <= 1e-12);
    }
}

#[test]
fn sum_of_a_conformal_tensor_with_zero_is_not_conformal() {
    // f·g₁ with f = cos θ₁ is conformal on S² with P = df, but on the product
    // the g₂ block forces P(∂θ₁) = 0. The product P is (2/3) df, so the
    // cyclic defect on (e_θ₁, e, e) with e unit in the second factor equals
    // −(2/3) df(e_θ₁) = (2/3) sin θ₁.
    let (prod, a, _) = s2_pair();
    let th = Expr::var(0);
    let fg = ComponentField::covariant2(vec![
        vec![th.clone().cos(), Expr::zero()],
        vec![Expr::zero(), th.clone().cos() * th.sin().powi(2)],
    ])
    .unwrap()
    .into_ref();
    let zero = ComponentField::covariant2(vec![vec![Expr::zero(); 2]; 2]).unwrap().into_ref();
    let k = sum_tensor(&prod, &[fg.clone(), zero]).unwrap();
    for p in sample_points(prod.chart.domain(), 50, 3) {
        let (alone, _) = cyclic_frame_residual(&a, fg.as_ref(), &PChoice::Conformal, &p[..2]).unwrap();
        assert!(alone <= 1e-8);
        let (sum, _) = cyclic_frame_residual(&prod.chart, &k, &PChoice::Conformal, &p).unwrap();
        assert!(sum >= 2.0 / 3.0 * p[0].sin() - 1e-10, "{sum} at {p:?}");
        let data = CyclicData::at(&prod.chart, &k, &PChoice::Conformal, &p).unwrap();
        let e = [0.0, 0.0, 1.0, 0.0];
        let d = data.defect(&[1.0, 0.0, 0.0, 0.0], &e, &e);
        assert!((d - 2.0 / 3.0 * p[0].sin()).abs() <= 1e-12, "{d}");
    }
}

#[test]
fn sum_tensor_rejects_mismatched_summands() {
    let (prod, a, _) = s2_pair();
    let g: FieldRef = Arc::new(MetricField(a));
    assert!(matches!(sum_tensor(&prod, &[g.clone()]), Err(GeomError::RankMismatch(_))));
    let three = ComponentField::covariant2(vec![vec![Expr::zero(); 3]; 3]).unwrap().into_ref();
    assert!(matches!(sum_tensor(&prod, &[g, three]), Err(GeomError::RankMismatch(_))));
}
