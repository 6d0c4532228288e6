//! Differential forms as antisymmetric covariant fields.
//!
//! Conventions:
//! - `(α∧β)(v_1..v_{p+q}) = Σ_{shuffles σ} sgn σ · α(v_σ..) β(v_σ..)`, so
//!   `(dx∧dy)_{01} = 1` and first-slot contraction is an antiderivation.
//! - `dφ(v_0..v_p) = Σ_i (−1)^i ∂_{v_i} φ(..v̂_i..)` in coordinates.
//! - `δφ = −Σ_a E_a ⌟ ∇_{E_a} φ`, hence `δ = −div` on 1-forms.
//! - `g(α, β) = (1/p!) α_{a..} β^{a..}`, making `dx^I` orthonormal in an
//!   orthonormal coframe.

use crate::chart::Chart;
use crate::error::{GeomError, Result};
use crate::field::{flatten, unflatten, FieldRef, TensorField};
use crate::geometry::{check_dim, LocalGeometry};
use crate::jet::Jet;

/// Components of a form at a point, with the degree they represent.
#[derive(Clone, Debug, PartialEq)]
pub struct FormValue {
    pub degree: usize,
    pub components: Vec<f64>,
    /// Set when the degree exceeds the dimension and the result is the zero
    /// form by convention.
    pub overflow: bool,
}

fn form_degree(field: &dyn TensorField) -> Result<usize> {
    if field.contravariant_rank() != 0 {
        return Err(GeomError::RankMismatch(
            "differential forms must be purely covariant".into(),
        ));
    }
    Ok(field.covariant_rank())
}

/// Largest `|φ_I + φ_{I with slots i,j swapped}|` over all index tuples.
pub fn antisymmetry_defect(values: &[f64], n: usize, degree: usize) -> f64 {
    let mut idx = vec![0; degree];
    let mut worst = 0.0_f64;
    for (flat, v) in values.iter().enumerate() {
        unflatten(flat, n, &mut idx);
        for i in 0..degree {
            for j in i + 1..degree {
                idx.swap(i, j);
                worst = worst.max((v + values[flatten(&idx, n)]).abs());
                idx.swap(i, j);
            }
        }
    }
    worst
}

/// `dφ` from component jets of order `k + 1`; result has order `k`.
pub fn exterior_derivative_jets(components: &[Jet], n: usize, degree: usize) -> Vec<Jet> {
    let order = components[0].order() - 1;
    let out_len = n.pow(degree as u32 + 1);
    let mut out = Vec::with_capacity(out_len);
    let mut idx = vec![0; degree + 1];
    let mut rest = vec![0; degree];
    for flat in 0..out_len {
        unflatten(flat, n, &mut idx);
        let mut acc = Jet::zero(n, order);
        for i in 0..=degree {
            let mut r = 0;
            for (l, &a) in idx.iter().enumerate() {
                if l != i {
                    rest[r] = a;
                    r += 1;
                }
            }
            let term = components[flatten(&rest, n)].partial(idx[i]);
            if i % 2 == 0 {
                acc += &term;
            } else {
                acc -= &term;
            }
        }
        out.push(acc);
    }
    out
}

/// `dφ` at a point.
pub fn exterior_derivative(phi: &dyn TensorField, point: &[f64]) -> Result<FormValue> {
    let p = form_degree(phi)?;
    let n = phi.dim();
    let comps = phi.jet(point, 1)?;
    let d = exterior_derivative_jets(&comps, n, p);
    Ok(FormValue {
        degree: p + 1,
        components: d.iter().map(Jet::value).collect(),
        overflow: p >= n,
    })
}

/// `dφ` as a field, so derivatives of `dφ` stay available.
#[derive(Clone)]
pub struct ExteriorDerivative(pub FieldRef);

impl TensorField for ExteriorDerivative {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn contravariant_rank(&self) -> usize {
        0
    }
    fn covariant_rank(&self) -> usize {
        self.0.covariant_rank() + 1
    }
    fn jet(&self, point: &[f64], order: usize) -> Result<Vec<Jet>> {
        let p = form_degree(self.0.as_ref())?;
        let comps = self.0.jet(point, order + 1)?;
        Ok(exterior_derivative_jets(&comps, self.dim(), p))
    }
}

/// `δφ` from precomputed geometry and `φ` jets of order ≥ 1.
pub fn codifferential_from(geom: &LocalGeometry, phi: &[Jet], degree: usize) -> Result<Vec<f64>> {
    if degree == 0 {
        return Err(GeomError::DegreeOutOfRange(
            "the codifferential of a function is undefined".into(),
        ));
    }
    let n = geom.dim();
    let nabla = geom.covariant_derivative(phi, 0, degree)?;
    let ginv = geom.inverse();
    let out_len = n.pow(degree as u32 - 1);
    let stride = out_len; // component (a, c, B) lives at (a*n + c)*stride + B
    Ok((0..out_len)
        .map(|b| {
            let mut s = 0.0;
            for a in 0..n {
                for c in 0..n {
                    s += ginv[a * n + c].value() * nabla[(a * n + c) * stride + b].value();
                }
            }
            -s
        })
        .collect())
}

pub fn codifferential(chart: &Chart, phi: &dyn TensorField, point: &[f64]) -> Result<FormValue> {
    check_dim(chart, phi)?;
    let p = form_degree(phi)?;
    if p == 0 {
        return Err(GeomError::DegreeOutOfRange(
            "the codifferential of a function is undefined".into(),
        ));
    }
    let geom = LocalGeometry::at(chart, point, 1)?;
    Ok(FormValue {
        degree: p - 1,
        components: codifferential_from(&geom, &phi.jet(point, 1)?, p)?,
        overflow: false,
    })
}

/// `X ⌟ φ`, contraction in the first slot.
pub fn interior_product(x: &[f64], phi: &[f64], n: usize, degree: usize) -> Result<Vec<f64>> {
    if degree == 0 {
        return Err(GeomError::DegreeOutOfRange(
            "interior product needs a form of degree at least 1".into(),
        ));
    }
    let stride = n.pow(degree as u32 - 1);
    Ok((0..stride)
        .map(|b| (0..n).map(|a| x[a] * phi[a * stride + b]).sum())
        .collect())
}

/// `α ∧ β` for forms of degrees `p` and `q`.
pub fn wedge(alpha: &[f64], p: usize, beta: &[f64], q: usize, n: usize) -> FormValue {
    let deg = p + q;
    let len = n.pow(deg as u32);
    if deg > n {
        return FormValue {
            degree: deg,
            components: vec![0.0; len],
            overflow: true,
        };
    }
    let shuffles = shuffles(p, q);
    let mut idx = vec![0; deg];
    let mut ia = vec![0; p];
    let mut ib = vec![0; q];
    let components = (0..len)
        .map(|flat| {
            unflatten(flat, n, &mut idx);
            shuffles
                .iter()
                .map(|(sign, first, second)| {
                    for (slot, &pos) in first.iter().enumerate() {
                        ia[slot] = idx[pos];
                    }
                    for (slot, &pos) in second.iter().enumerate() {
                        ib[slot] = idx[pos];
                    }
                    sign * alpha[flatten(&ia, n)] * beta[flatten(&ib, n)]
                })
                .sum()
        })
        .collect();
    FormValue {
        degree: deg,
        components,
        overflow: false,
    }
}

/// All `(p,q)`-shuffles as (sign, first positions, second positions).
fn shuffles(p: usize, q: usize) -> Vec<(f64, Vec<usize>, Vec<usize>)> {
    let total = p + q;
    let mut out = Vec::new();
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != p {
            continue;
        }
        let first: Vec<usize> = (0..total).filter(|i| mask & (1 << i) != 0).collect();
        let second: Vec<usize> = (0..total).filter(|i| mask & (1 << i) == 0).collect();
        let inversions: usize = first.iter().enumerate().map(|(k, &pos)| pos - k).sum();
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        out.push((sign, first, second));
    }
    out
}

/// `g(α, β)` for `p`-forms with the inverse metric `ginv` (values).
pub fn form_inner(ginv: &[f64], n: usize, alpha: &[f64], beta: &[f64], degree: usize) -> f64 {
    if degree == 0 {
        return alpha[0] * beta[0];
    }
    // Raise every index of β, then contract.
    let raised = raise_all(ginv, n, beta, degree);
    let factorial: f64 = (1..=degree).map(|k| k as f64).product();
    alpha.iter().zip(&raised).map(|(a, b)| a * b).sum::<f64>() / factorial
}

fn raise_all(ginv: &[f64], n: usize, t: &[f64], rank: usize) -> Vec<f64> {
    let mut cur = t.to_vec();
    for s in 0..rank {
        let stride = n.pow((rank - 1 - s) as u32);
        let mut next = vec![0.0; cur.len()];
        for (flat, out) in next.iter_mut().enumerate() {
            let a = (flat / stride) % n;
            let base = flat - a * stride;
            *out = (0..n).map(|c| ginv[a * n + c] * cur[base + c * stride]).sum();
        }
        cur = next;
    }
    cur
}

/// The metric dual `X♭` of a vector.
pub fn flat(g: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    crate::geometry::lower(g, n, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::field::ComponentField;
    use approx::assert_abs_diff_eq;

    fn plane() -> Chart {
        Chart::new(
            "r2",
            vec!["x".into(), "y".into()],
            vec![(-2.0, 2.0), (-2.0, 2.0)],
            vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]],
        )
        .unwrap()
    }

    #[test]
    fn d_of_x_dy_is_area_form() {
        let a = ComponentField::covector(vec![Expr::zero(), Expr::var(0)]);
        let d = exterior_derivative(&a, &[0.3, -0.4]).unwrap();
        assert_eq!(d.degree, 2);
        assert_abs_diff_eq!(d.components[1], 1.0);
        assert_abs_diff_eq!(d.components[2], -1.0);
        assert!(!d.overflow);
    }

    #[test]
    fn top_degree_derivative_is_flagged_zero() {
        let vol = ComponentField::two_form(2, &[((0, 1), Expr::var(0) * Expr::var(1))]).unwrap();
        let d = exterior_derivative(&vol, &[0.2, 0.3]).unwrap();
        assert!(d.overflow);
        assert!(d.components.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn codifferential_of_x_dx() {
        let a = ComponentField::covector(vec![Expr::var(0), Expr::zero()]);
        let d = codifferential(&plane(), &a, &[0.5, 0.5]).unwrap();
        assert_eq!(d.degree, 0);
        assert_abs_diff_eq!(d.components[0], -1.0, epsilon = 1e-15);
        let f = ComponentField::scalar(2, Expr::var(0));
        assert!(matches!(
            codifferential(&plane(), &f, &[0.5, 0.5]),
            Err(GeomError::DegreeOutOfRange(_))
        ));
    }

    #[test]
    fn interior_and_wedge_basics() {
        let dxdy = [0.0, 1.0, -1.0, 0.0];
        let i = interior_product(&[1.0, 0.0], &dxdy, 2, 2).unwrap();
        assert_eq!(i, vec![0.0, 1.0]);
        let w = wedge(&[1.0, 0.0], 1, &[0.0, 1.0], 1, 2);
        assert_eq!(w.components, dxdy.to_vec());
        let a = [0.3, -0.7];
        let aa = wedge(&a, 1, &a, 1, 2);
        assert!(aa.components.iter().all(|c| c.abs() < 1e-15));
        let over = wedge(&dxdy, 2, &a, 1, 2);
        assert!(over.overflow);
        assert!(interior_product(&[1.0], &[2.0], 1, 0).is_err());
    }

    #[test]
    fn basis_two_form_has_unit_norm() {
        let ginv = [1.0, 0.0, 0.0, 1.0];
        let dxdy = [0.0, 1.0, -1.0, 0.0];
        assert_abs_diff_eq!(form_inner(&ginv, 2, &dxdy, &dxdy, 2), 1.0);
    }
}
