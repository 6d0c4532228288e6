#![allow(dead_code)]

use atorus_core::bundle::build_total_chart;
use atorus_core::zoo::{self, Target};
use atorus_core::{Chart, ComponentField, Expr};
use rand::Rng;

/// Every chart the zoo exposes, plus the perturbed control.
pub fn zoo_charts() -> Vec<Chart> {
    let mut out: Vec<Chart> = zoo::entries()
        .into_iter()
        .map(|e| match e.target {
            Target::Chart(c) => c,
            Target::Bundle(s) => build_total_chart(&s).unwrap().chart().clone(),
        })
        .collect();
    out.push(zoo::perturbed_flat());
    out
}

/// Random polynomial of total degree ≤ 3 with a handful of terms.
pub fn random_polynomial(rng: &mut impl Rng, n: usize) -> Expr {
    let terms: Vec<(f64, Vec<u32>)> = (0..4)
        .map(|_| {
            let mut powers = vec![0u32; n];
            for _ in 0..rng.gen_range(0..=3) {
                powers[rng.gen_range(0..n)] += 1;
            }
            (rng.gen_range(-1.0..1.0), powers)
        })
        .collect();
    Expr::polynomial(&terms)
}

/// The `p`-form `Σ_{I increasing} f_I dx^I` with `f_I` from `coefficient`.
pub fn form_from(n: usize, p: usize, mut coefficient: impl FnMut(&[usize]) -> Expr) -> ComponentField {
    let len = n.pow(p as u32);
    let mut comps = vec![Expr::zero(); len];
    let mut idx = vec![0; p];
    let mut sorted_cache = std::collections::BTreeMap::new();
    for (flat, slot) in comps.iter_mut().enumerate() {
        atorus_core::field::unflatten(flat, n, &mut idx);
        let (sign, sorted) = sort_with_sign(&idx);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let f = sorted_cache
            .entry(sorted.clone())
            .or_insert_with(|| coefficient(&sorted))
            .clone();
        *slot = if sign > 0.0 { f } else { -f };
    }
    ComponentField::new(n, 0, p, comps).unwrap()
}

pub fn random_form(rng: &mut impl Rng, n: usize, p: usize) -> ComponentField {
    form_from(n, p, |_| random_polynomial(rng, n))
}

/// Random antisymmetric array of degree `p`.
pub fn random_form_values(rng: &mut impl Rng, n: usize, p: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n.pow(p as u32)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    atorus_core::killing::antisymmetrize(&raw, n, p)
}

fn sort_with_sign(idx: &[usize]) -> (f64, Vec<usize>) {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (sign, v)
}
