//! Bundle specifications written in TOML.
//!
//! ```toml
//! name = "heisenberg"
//! b = [[1.0]]
//! a = [[1]]
//! potentials = [["0", "x"]]
//! expected_labels = ["a", "strict-a", "ac-perp"]
//!
//! [[factors]]
//! zoo = "flat-torus2"
//! ```
//!
//! A factor is either a zoo factor (`zoo`, optional `radius` and coordinate
//! `suffix`) or inline, with `coords`, `domain`, `metric`,
//! `complex_structure`, `kahler_scale` and an optional `curvature_form`,
//! each component an expression in the factor's coordinates. Potentials are
//! expressions in the concatenated base coordinates, one row per torus
//! direction.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use atorus_core::bundle::build_total_chart;
use atorus_core::{BundleSpec, Chart, ComponentField, Expr, FactorSpec, GeomError, Label, TotalChart};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{origin}:{} field `{field}`: {message}", line.map(|l| format!("{l}:")).unwrap_or_default())]
pub struct SpecError {
    pub origin: String,
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: Option<String>,
    factors: Spanned<Vec<Spanned<RawFactor>>>,
    b: Spanned<Vec<Vec<f64>>>,
    a: Spanned<Vec<Vec<Spanned<toml::Value>>>>,
    potentials: Spanned<Vec<Vec<String>>>,
    expected_labels: Option<Vec<Label>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactor {
    zoo: Option<String>,
    radius: Option<f64>,
    suffix: Option<String>,
    name: Option<String>,
    coords: Option<Vec<String>>,
    domain: Option<Vec<(f64, f64)>>,
    metric: Option<Vec<Vec<String>>>,
    complex_structure: Option<Vec<Vec<String>>>,
    kahler_scale: Option<f64>,
    curvature_form: Option<Vec<Vec<String>>>,
}

/// A validated specification with its total chart.
#[derive(Clone)]
pub struct LoadedSpec {
    pub spec: BundleSpec,
    pub total: TotalChart,
    pub expected_labels: Option<BTreeSet<Label>>,
}

pub fn parse_spec(path: &Path) -> Result<LoadedSpec, SpecError> {
    let origin = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| SpecError {
        origin: origin.clone(),
        line: None,
        field: "file".into(),
        message: e.to_string(),
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("spec");
    parse_spec_str(&src, &origin, stem)
}

struct Ctx<'a> {
    src: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Option<std::ops::Range<usize>>, field: impl Into<String>, message: impl Into<String>) -> SpecError {
        SpecError {
            origin: self.origin.to_string(),
            line: span.map(|s| self.src[..s.start.min(self.src.len())].matches('\n').count() + 1),
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Parses and validates a specification; `default_name` is used when the
/// document has no `name`.
pub fn parse_spec_str(src: &str, origin: &str, default_name: &str) -> Result<LoadedSpec, SpecError> {
    let ctx = Ctx { src, origin };
    let raw: RawSpec = toml::from_str(src).map_err(|e| ctx.err(e.span(), "document", e.message().trim()))?;

    let mut factors = Vec::new();
    for (k, f) in raw.factors.get_ref().iter().enumerate() {
        factors.push(factor(&ctx, k, f)?);
    }
    if factors.is_empty() {
        return Err(ctx.err(Some(raw.factors.span()), "factors", "at least one base factor is required"));
    }

    let b = raw.b.get_ref();
    let r = b.len();
    if r == 0 || b.iter().any(|row| row.len() != r) {
        return Err(ctx.err(Some(raw.b.span()), "b", "b must be a non-empty square matrix"));
    }
    for i in 0..r {
        for j in 0..i {
            if b[i][j] != b[j][i] {
                return Err(ctx.err(
                    Some(raw.b.span()),
                    "b",
                    format!(
                        "b must be symmetric (b_ij = b_ji): b[{i}][{j}] = {} but b[{j}][{i}] = {}",
                        b[i][j], b[j][i]
                    ),
                ));
            }
        }
    }

    let a_rows = raw.a.get_ref();
    if a_rows.len() != r || a_rows.iter().any(|row| row.len() != factors.len()) {
        return Err(ctx.err(
            Some(raw.a.span()),
            "a",
            format!("a must be {r}×{} (torus rank × number of factors)", factors.len()),
        ));
    }
    let mut a = Vec::with_capacity(r);
    for (j, row) in a_rows.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (k, v) in row.iter().enumerate() {
            match v.get_ref() {
                toml::Value::Integer(i) => out.push(*i),
                other => {
                    return Err(ctx.err(
                        Some(v.span()),
                        format!("a[{j}][{k}]"),
                        format!("a must be a matrix with integer coefficients (Chern numbers), found {other}"),
                    ))
                }
            }
        }
        a.push(out);
    }

    let names: Vec<String> = factors.iter().flat_map(|f| f.chart.coords().to_vec()).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let pots = raw.potentials.get_ref();
    if pots.len() != r || pots.iter().any(|p| p.len() != names.len()) {
        return Err(ctx.err(
            Some(raw.potentials.span()),
            "potentials",
            format!(
                "expected {r} rows of {} components over coordinates ({})",
                names.len(),
                names.join(", ")
            ),
        ));
    }
    let mut potentials = Vec::with_capacity(r);
    for (j, row) in pots.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (mu, s) in row.iter().enumerate() {
            out.push(Expr::parse(s, &name_refs).map_err(|e| {
                ctx.err(Some(raw.potentials.span()), format!("potentials[{j}][{mu}]"), e.to_string())
            })?);
        }
        potentials.push(out);
    }

    let spec = BundleSpec {
        name: raw.name.clone().unwrap_or_else(|| default_name.to_string()),
        factors,
        b: b.clone(),
        a,
        potentials,
    };
    let total = build_total_chart(&spec).map_err(|e| {
        let (field, span) = blame(&e, &raw);
        ctx.err(Some(span), field, e.to_string())
    })?;
    Ok(LoadedSpec {
        spec,
        total,
        expected_labels: raw.expected_labels.map(|v| v.into_iter().collect()),
    })
}

/// The field a construction error is attributed to.
fn blame(e: &GeomError, raw: &RawSpec) -> (&'static str, std::ops::Range<usize>) {
    let text = e.to_string();
    if text.contains("curvature equation") || text.contains("potential") {
        ("potentials", raw.potentials.span())
    } else if text.contains("b must") || text.contains("torus rank") {
        ("b", raw.b.span())
    } else if text.contains("a must") {
        ("a", raw.a.span())
    } else {
        ("factors", raw.factors.span())
    }
}

fn factor(ctx: &Ctx<'_>, k: usize, raw: &Spanned<RawFactor>) -> Result<FactorSpec, SpecError> {
    let span = raw.span();
    let f = raw.get_ref();
    let field = |s: &str| format!("factors[{k}].{s}");
    if let Some(name) = &f.zoo {
        let inline = f.coords.is_some() || f.metric.is_some() || f.complex_structure.is_some();
        if inline {
            return Err(ctx.err(Some(span.clone()), field("zoo"), "a zoo factor cannot also give inline components"));
        }
        if f.radius.is_some() && name != "round-s2" {
            return Err(ctx.err(Some(span.clone()), field("radius"), "only round-s2 takes a radius"));
        }
        if f.radius.is_some_and(|r| !(r > 0.0)) {
            return Err(ctx.err(Some(span.clone()), field("radius"), "radius must be positive"));
        }
        let suffix = f.suffix.clone().unwrap_or_default();
        return atorus_core::zoo::factor(name, f.radius, &suffix).ok_or_else(|| {
            ctx.err(
                Some(span.clone()),
                field("zoo"),
                format!("unknown zoo factor `{name}`; known: round-s2, flat-torus2, fubini-study-cp1"),
            )
        });
    }
    let missing = |s: &str| ctx.err(Some(span.clone()), field(s), "required for inline factors");
    let coords = f.coords.clone().ok_or_else(|| missing("coords"))?;
    let n = coords.len();
    let names: Vec<&str> = coords.iter().map(String::as_str).collect();
    let domain = f.domain.clone().ok_or_else(|| missing("domain"))?;
    if domain.len() != n {
        return Err(ctx.err(Some(span.clone()), field("domain"), format!("{n} intervals expected")));
    }
    let matrix = |key: &str, rows: &[Vec<String>]| -> Result<Vec<Vec<Expr>>, SpecError> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(ctx.err(Some(span.clone()), field(key), format!("{n}×{n} matrix expected")));
        }
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| {
                        Expr::parse(s, &names).map_err(|e| ctx.err(Some(span.clone()), field(&format!("{key}[{i}][{j}]")), e.to_string()))
                    })
                    .collect()
            })
            .collect()
    };
    let metric = matrix("metric", f.metric.as_deref().ok_or_else(|| missing("metric"))?)?;
    let j = matrix(
        "complex_structure",
        f.complex_structure.as_deref().ok_or_else(|| missing("complex_structure"))?,
    )?;
    let c = f.kahler_scale.ok_or_else(|| missing("kahler_scale"))?;
    let name = f.name.clone().unwrap_or_else(|| format!("factor{k}"));
    let chart = Chart::new(name.clone(), coords.clone(), domain, metric).map_err(|e| ctx.err(Some(span.clone()), field("metric"), e.to_string()))?;
    let j = ComponentField::endomorphism(j).map_err(|e| ctx.err(Some(span.clone()), field("complex_structure"), e.to_string()))?;
    let mut out = FactorSpec::new(name, chart, j.into_ref(), c);
    if let Some(rows) = &f.curvature_form {
        let alpha = ComponentField::covariant2(matrix("curvature_form", rows)?)
            .map_err(|e| ctx.err(Some(span.clone()), field("curvature_form"), e.to_string()))?;
        out = out.with_curvature_form(alpha.into_ref());
    }
    Ok(out)
}
