//! JSON manifold specs: a zoo reference or explicit tensor components.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use weakcontact::expr::parse_expr;
use weakcontact::structure::{validate_wacs, vector_field};
use weakcontact::{BundleFields, Chart, Expr, GeometryError, Params, SolitonData, Tensor, WacsBundle, ZooSpec};

use crate::error::{CliError, Result};

/// Points used for the axiom pre-check at load time.
const PRECHECK_POINTS: usize = 8;
const PRECHECK_SEED: u64 = 0;
const PRECHECK_TOL: f64 = 1e-8;

/// Keys that only an explicit block may carry.
const EXPLICIT_KEYS: [&str; 7] = ["dimension", "coordinates", "metric", "f", "Q", "xi", "eta"];

#[derive(Debug)]
pub struct LoadedSpec {
    pub bundle: WacsBundle,
    pub soliton: Option<SolitonData>,
    /// Axioms that fail at load time; the bundle is still usable.
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Component {
    Text(String),
    Number(f64),
}

impl Component {
    fn parse(&self, path: &str, coords: &[String], params: &[String]) -> Result<Expr> {
        match self {
            Component::Number(v) => Ok(Expr::constant(*v)),
            Component::Text(s) => {
                parse_expr(s, coords, params).map_err(|source| CliError::Expr { path: path.to_string(), source })
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitSpec {
    dimension: usize,
    coordinates: Vec<String>,
    metric: Vec<Vec<Component>>,
    f: Vec<Vec<Component>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<Component>>,
    xi: Vec<Component>,
    eta: Vec<Component>,
    #[serde(default)]
    beta: Option<Component>,
    /// Named constants usable inside the expressions.
    #[serde(default)]
    params: Params,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolitonSpec {
    #[serde(rename = "V", default)]
    v: Option<Vec<Component>>,
    #[serde(default)]
    potential: Option<Component>,
    lambda: f64,
    mu: f64,
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        CliError::schema(path, e.into_inner().to_string())
    })
}

fn geometry_error(e: GeometryError, prefix: &str) -> CliError {
    match e {
        GeometryError::Range { field, message } => {
            let path = if prefix.is_empty() { field } else { format!("{prefix}.{field}") };
            CliError::schema(path, message)
        }
        // The only expression inside a zoo spec is the warping function.
        GeometryError::Parse(source) => CliError::Expr { path: "sigma".into(), source },
        other => CliError::Geometry(other),
    }
}

fn matrix(rows: &[Vec<Component>], lower: usize, name: &str, dim: usize, coords: &[String], params: &[String]) -> Result<Tensor<Expr>> {
    if rows.len() != dim {
        return Err(CliError::schema(name, format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut out = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(CliError::schema(format!("{name}[{i}]"), format!("expected {dim} entries, found {}", row.len())));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, c)| c.parse(&format!("{name}[{i}][{j}]"), coords, params))
            .collect::<Result<Vec<_>>>()?;
        out.push(parsed);
    }
    Ok(Tensor::from_rows(2 - lower, lower, out)?)
}

fn components(v: &[Component], name: &str, dim: usize, coords: &[String], params: &[String]) -> Result<Vec<Expr>> {
    if v.len() != dim {
        return Err(CliError::schema(name, format!("expected {dim} entries, found {}", v.len())));
    }
    v.iter().enumerate().map(|(i, c)| c.parse(&format!("{name}[{i}]"), coords, params)).collect()
}

fn explicit_bundle(spec: ExplicitSpec, id: String, domain: Option<Vec<(f64, f64)>>) -> Result<WacsBundle> {
    let dim = spec.dimension;
    if dim == 0 {
        return Err(CliError::schema("dimension", "must be positive"));
    }
    if spec.coordinates.len() != dim {
        return Err(CliError::schema("coordinates", format!("expected {dim} names, found {}", spec.coordinates.len())));
    }
    let coords = &spec.coordinates;
    let pnames: Vec<String> = spec.params.keys().cloned().collect();
    let g = matrix(&spec.metric, 2, "metric", dim, coords, &pnames)?;
    let f = matrix(&spec.f, 1, "f", dim, coords, &pnames)?;
    let q = matrix(&spec.q, 1, "Q", dim, coords, &pnames)?;
    let xi = Tensor::from_vector(1, 0, components(&spec.xi, "xi", dim, coords, &pnames)?)?;
    let eta = Tensor::from_vector(0, 1, components(&spec.eta, "eta", dim, coords, &pnames)?)?;
    let beta = spec.beta.as_ref().map(|b| b.parse("beta", coords, &pnames)).transpose()?;
    let chart = Chart::new(coords.clone(), domain).map_err(|e| match e {
        GeometryError::Chart(m) => CliError::schema("coordinates", m),
        other => CliError::Geometry(other),
    })?;
    let fields = BundleFields { g, f, q, xi, eta, beta };
    Ok(WacsBundle::new(id, chart, fields, spec.params)?)
}

fn soliton(spec: SolitonSpec, bundle: &WacsBundle) -> Result<SolitonData> {
    let coords = bundle.chart().names();
    let pnames: Vec<String> = bundle.params().keys().cloned().collect();
    match (spec.v, spec.potential) {
        (Some(v), None) => {
            let comps = components(&v, "soliton.V", bundle.dim(), coords, &pnames)?;
            Ok(SolitonData::vector(vector_field(comps), spec.lambda, spec.mu))
        }
        (None, Some(p)) => {
            let e = p.parse("soliton.potential", coords, &pnames)?;
            Ok(SolitonData::potential(e, spec.lambda, spec.mu))
        }
        _ => Err(CliError::schema("soliton", "give exactly one of `V` and `potential`")),
    }
}

fn domain(value: Value) -> Result<Vec<(f64, f64)>> {
    let pairs: Vec<[f64; 2]> = typed(value, "domain")?;
    for (i, [lo, hi]) in pairs.iter().enumerate() {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CliError::schema(format!("domain[{i}]"), "expected finite [lo, hi] with lo < hi"));
        }
    }
    Ok(pairs.into_iter().map(|[a, b]| (a, b)).collect())
}

/// Parses a spec from JSON text; no pre-check is run.
pub fn parse_spec(text: &str) -> Result<(WacsBundle, Option<SolitonData>)> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Json { line: e.line(), column: e.column(), message: e.to_string() })?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::schema(".", "expected a JSON object"));
    };
    let id = match obj.remove("id") {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(CliError::schema("id", "expected a string")),
    };
    let sol = obj.remove("soliton");
    let dom = obj.remove("domain").map(domain).transpose()?;
    let has_kind = obj.contains_key("kind");
    let explicit: Vec<&str> = EXPLICIT_KEYS.iter().copied().filter(|k| obj.contains_key(*k)).collect();
    let (mut bundle, attached) = if has_kind {
        if let Some(k) = explicit.first() {
            return Err(CliError::schema(*k, "`kind` and an explicit block are mutually exclusive"));
        }
        let zoo: ZooSpec = typed(Value::Object(obj), "")?;
        zoo.build(dom).map_err(|e| geometry_error(e, ""))?
    } else if explicit.is_empty() {
        return Err(CliError::schema(".", "expected `kind` or an explicit block (`dimension`, `coordinates`, `metric`, …)"));
    } else {
        let spec: ExplicitSpec = typed(Value::Object(obj), "")?;
        let id = id.clone().unwrap_or_else(|| format!("explicit(dim={})", spec.dimension));
        (explicit_bundle(spec, id, dom)?, None)
    };
    if let Some(id) = id {
        bundle = bundle.with_id(id);
    }
    let soliton = match sol {
        Some(v) => Some(soliton(typed::<SolitonSpec>(v, "soliton")?, &bundle)?),
        None => attached,
    };
    Ok((bundle, soliton))
}

/// Warnings for weak almost contact axioms that fail on a few sample points.
pub fn precheck(bundle: &WacsBundle) -> Result<Vec<String>> {
    let points = bundle.sample_points(PRECHECK_POINTS, PRECHECK_SEED)?;
    let geos = bundle.locals(&points)?;
    let checks = match validate_wacs(bundle, &geos, PRECHECK_TOL) {
        Ok(c) => c,
        Err(e) => return Ok(vec![format!("axioms cannot be checked: {e}")]),
    };
    Ok(checks
        .iter()
        .filter(|c| c.status == weakcontact::Status::Fail)
        .map(|c| format!("axiom `{}` fails ({}): residual {:.3e}", c.name, c.identity, c.max_residual))
        .collect())
}

/// Reads and parses a spec file, then pre-checks the axioms. Failing axioms
/// are reported as warnings so that negative controls stay loadable.
pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let (bundle, soliton) = parse_spec(&text)?;
    let warnings = precheck(&bundle)?;
    Ok(LoadedSpec { bundle, soliton, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_strings_are_both_components() {
        let names = vec!["x".to_string()];
        let n: Component = serde_json::from_str("2.5").unwrap();
        let s: Component = serde_json::from_str("\"2*x\"").unwrap();
        assert_eq!(n.parse("a", &names, &[]).unwrap().as_const(), Some(2.5));
        assert!(s.parse("a", &names, &[]).unwrap().as_const().is_none());
    }

    #[test]
    fn top_level_must_be_an_object_with_a_kind_or_block() {
        assert!(matches!(parse_spec("[]"), Err(CliError::Schema { path, .. }) if path == "."));
        assert!(matches!(parse_spec("{}"), Err(CliError::Schema { path, .. }) if path == "."));
        assert!(matches!(parse_spec(r#"{"kind":"kenmotsu_model","n":1,"beta":1,"c":0,"id":3}"#), Err(CliError::Schema { path, .. }) if path == "id"));
    }

    #[test]
    fn unknown_zoo_fields_are_rejected() {
        let err = parse_spec(r#"{"kind":"kenmotsu_model","n":1,"beta":1,"c":0,"extra":1}"#).unwrap_err();
        assert!(matches!(err, CliError::Schema { .. }), "{err}");
    }
}
