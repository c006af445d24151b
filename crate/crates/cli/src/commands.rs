//! The subcommands, each returning an [`Outcome`].

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use bf_core::bv::{BVContext, Status};
use bf_core::gl2::gl2_check;
use bf_core::loops::{
    auxiliary_reports, build_observable, family_sequences, required_mu, theorem4_conditions, verify_closedness, CoefficientSequences,
    Family, ObservableSeries, Parity, SeriesGroup,
};
use bf_core::Coeff;
use bf_numeric::{holonomy, iterated_integral, linking_with, LoopCurve, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{check_dimension, coeff_strings, Backend, Outcome, RunConfig, SCHEMA};
use crate::crosscheck::h1_crosscheck;
use crate::error::{CliError, Result};
use crate::fixture::Fixture;

/// Bound on the `gl(2)` residual norms.
pub const GL2_BOUND: f64 = 1e-12;

/// Bound on the linking-integral deviation from the nearest integer.
pub const LINKING_BOUND: f64 = 1e-3;

/// Bound on the symbolic/numeric `h_1` difference.
pub const H1_BOUND: f64 = 1e-6;

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::ExpectedFailure => "expected-failure",
    }
}

pub fn verify_master(dims: &[u32], backend: Backend) -> Result<Outcome> {
    let mut passed = true;
    let mut summary = Vec::new();
    let mut results = Vec::new();
    for &n in dims {
        check_dimension(n)?;
        let start = Instant::now();
        let ctx = BVContext::new(n)?;
        match backend {
            Backend::Abstract => {
                let reports = ctx.identity_reports()?;
                let brst = ctx.brst_tower_check()?;
                for r in &reports {
                    passed &= r.passed();
                    summary.push(format!("n={n} {}: {} ({} residual terms)", r.identity, status_word(r.status), r.residual_terms));
                }
                let tower = brst.all_match() && brst.squares_vanish_on_shell();
                passed &= tower;
                summary.push(format!(
                    "n={n} BRST tower: {} (matches {}, squares vanish on shell {})",
                    if tower { "pass" } else { "FAIL" },
                    brst.all_match(),
                    brst.squares_vanish_on_shell()
                ));
                results.push(json!({
                    "n": n,
                    "identities": reports,
                    "brst": brst,
                    "seconds": start.elapsed().as_secs_f64(),
                }));
            }
            Backend::Gl2 => {
                let check = gl2_check(&ctx)?;
                let ok = check.max_norm() < GL2_BOUND;
                passed &= ok;
                summary.push(format!(
                    "n={n} gl(2) residual norms: master {:.1e}, variation {:.1e}, square {:.1e}: {}",
                    check.master_norm,
                    check.variation_norm,
                    check.square_norm,
                    if ok { "pass" } else { "FAIL" }
                ));
                results.push(json!({
                    "n": n,
                    "gl2": check,
                    "bound": GL2_BOUND,
                    "seconds": start.elapsed().as_secs_f64(),
                }));
            }
        }
    }
    Ok(Outcome { passed, summary, results: Value::Array(results) })
}

/// How `μ` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum MuSpec {
    /// Family default, or the closedness conditions if `λ` was given.
    Default,
    /// The closedness conditions for `λ`.
    Auto,
    Explicit(Vec<Coeff>),
}

/// Coefficient sequences from the family defaults and the overrides.
pub fn sequences(n: u32, family: Family, lambda: Option<Vec<Coeff>>, mu: MuSpec) -> Result<CoefficientSequences> {
    let mut seqs = family_sequences(n, family)?;
    let given = lambda.is_some();
    if let Some(l) = lambda {
        seqs.lambda = l;
    }
    match mu {
        MuSpec::Explicit(m) => seqs.mu = m,
        MuSpec::Auto => seqs.mu = required_mu(&seqs.lambda, Parity::of(n)),
        MuSpec::Default if given => seqs.mu = required_mu(&seqs.lambda, Parity::of(n)),
        MuSpec::Default => {}
    }
    Ok(seqs)
}

/// Serialized form of an expanded observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SeriesJson {
    pub n: u32,
    pub family: String,
    pub order: usize,
    pub lambda: Vec<String>,
    pub mu: Vec<String>,
    pub term_count: usize,
    pub ghost_numbers: Vec<i32>,
    pub groups: Vec<GroupJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GroupJson {
    pub order: usize,
    pub gh: i32,
    pub lm_degree: i32,
    pub terms: Vec<String>,
}

impl From<SeriesGroup> for GroupJson {
    fn from(g: SeriesGroup) -> Self {
        GroupJson { order: g.order, gh: g.gh, lm_degree: g.lm_degree, terms: g.terms }
    }
}

impl SeriesJson {
    pub fn new(s: &ObservableSeries, seqs: &CoefficientSequences) -> Self {
        let ghost_numbers: BTreeSet<i32> = s.terms().map(|(k, _)| k.gh()).collect();
        SeriesJson {
            n: s.n,
            family: s.family.name().into(),
            order: s.order,
            lambda: coeff_strings(&seqs.lambda),
            mu: coeff_strings(&seqs.mu),
            term_count: s.len(),
            ghost_numbers: ghost_numbers.into_iter().collect(),
            groups: s.grouped().into_iter().map(GroupJson::from).collect(),
        }
    }

    fn term_set(&self) -> BTreeSet<String> {
        self.groups.iter().flat_map(|g| g.terms.iter().cloned()).collect()
    }
}

/// Snapshot comparison against a golden file keyed by schema version.
pub enum Golden<'a> {
    None,
    Compare(&'a Path, &'a str),
    Bless(&'a Path),
}

pub fn expand(n: u32, family: Family, k: usize, seqs: &CoefficientSequences, golden: Golden) -> Result<Outcome> {
    check_dimension(n)?;
    let ctx = BVContext::new(n)?;
    let series = build_observable(&ctx, family, seqs, k)?;
    let json = SeriesJson::new(&series, seqs);
    let gh_zero = json.ghost_numbers.iter().all(|&g| g == 0);
    let mut summary = vec![
        format!("{family} n={n} K={k}: {} terms, ghost numbers {:?}", json.term_count, json.ghost_numbers),
        format!("lambda = ({}), mu = ({})", json.lambda.join(", "), json.mu.join(", ")),
    ];
    let mut passed = gh_zero;
    let mut snapshot = Value::Null;
    match golden {
        Golden::None => {}
        Golden::Bless(path) => {
            let mut doc = read_golden(path).unwrap_or_else(|_| json!({}));
            doc[SCHEMA] = serde_json::to_value(&json)?;
            let text = serde_json::to_string_pretty(&doc)? + "\n";
            std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            summary.push(format!("wrote snapshot to {}", path.display()));
        }
        Golden::Compare(path, text) => {
            let doc: Value = serde_json::from_str(text)?;
            let want: SeriesJson = serde_json::from_value(
                doc.get(SCHEMA)
                    .cloned()
                    .ok_or_else(|| CliError::Argument(format!("{} has no snapshot for {SCHEMA}", path.display())))?,
            )?;
            let (have_terms, want_terms) = (json.term_set(), want.term_set());
            let missing: Vec<&String> = want_terms.difference(&have_terms).collect();
            let extra: Vec<&String> = have_terms.difference(&want_terms).collect();
            let same = want == json;
            passed &= same;
            summary.push(format!(
                "snapshot {}: {} ({} missing, {} unexpected terms)",
                path.display(),
                if same { "match" } else { "DIFFERS" },
                missing.len(),
                extra.len()
            ));
            snapshot = json!({ "path": path.display().to_string(), "matches": same, "missing": missing, "unexpected": extra });
        }
    }
    Ok(Outcome { passed, summary, results: json!({ "series": json, "snapshot": snapshot }) })
}

fn read_golden(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn closedness(n: u32, family: Family, k: usize, seqs: &CoefficientSequences) -> Result<Outcome> {
    check_dimension(n)?;
    let report = verify_closedness(n, family, seqs, k)?;
    let ctx = BVContext::new(n)?;
    let aux = auxiliary_reports(&ctx, family, seqs, k)?;
    let mut passed = report.passed();
    let mut summary = vec![format!(
        "{family} n={n} K={k}: {} ({} observable terms, {} residual terms{})",
        status_word(report.status),
        report.observable_terms,
        report.residual_terms.len(),
        if report.residual_terms.is_empty() {
            String::new()
        } else if report.endpoint_only {
            ", all on endpoint faces".into()
        } else {
            ", not confined to endpoint faces".into()
        }
    )];
    for r in &report.residual_terms {
        summary.push(format!("  residual ({}) {} faces {:?}", r.coefficient, r.term, r.faces));
    }
    for r in &aux {
        passed &= r.passed();
        summary.push(format!("{}: {}", r.identity, status_word(r.status)));
    }
    Ok(Outcome { passed, summary, results: json!({ "closedness": report, "auxiliary": aux }) })
}

pub fn theorem4(parity: Parity, lambda: Vec<Coeff>, mu: Option<Vec<Coeff>>) -> Result<Outcome> {
    let required = required_mu(&lambda, parity);
    let seqs = CoefficientSequences { mu: mu.clone().unwrap_or_else(|| required.clone()), lambda };
    let check = theorem4_conditions(&seqs, parity);
    let mut summary = vec![format!("required mu = ({})", check.required_mu.join(", "))];
    if mu.is_some() {
        summary.push(format!("given mu = ({})", coeff_strings(&seqs.mu).join(", ")));
    }
    summary.extend(check.violations.iter().map(|v| format!("violation: {v}")));
    summary.push(if check.satisfied { "conditions satisfied".into() } else { "conditions VIOLATED".into() });
    Ok(Outcome { passed: check.satisfied, summary, results: serde_json::to_value(&check)? })
}

pub fn load_curve(cfg: &mut RunConfig, path: &Path, tol: &Tolerances) -> Result<LoopCurve> {
    let text = cfg.read_input(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(LoopCurve::read_csv(&name, text.as_bytes(), tol)?)
}

pub fn load_fixture(cfg: &mut RunConfig, path: &Path) -> Result<Fixture> {
    let text = cfg.read_input(path)?;
    Fixture::parse(&text).map_err(|source| CliError::Fixture { path: path.display().to_string(), source })
}

fn matrix_rows(m: &bf_numeric::Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn holonomy_cmd(curve: &LoopCurve, fixture: &Fixture, k: usize, tol: &Tolerances) -> Result<Outcome> {
    let conn = fixture.connection()?;
    if curve.dim() != conn.n() {
        return Err(CliError::Argument(format!("curve lives in R^{}, fixture on R^{}", curve.dim(), conn.n())));
    }
    let points: Vec<Vec<f64>> = curve.samples().iter().map(|p| p.as_slice().to_vec()).collect();
    let flags = conn.check(&points, tol)?;
    let hol = holonomy(curve, &conn.a, tol.transport_steps)?;
    let mut summary = vec![
        format!("flags: flat {}, covariantly closed {}", conn.flat, conn.covariantly_closed),
        format!("hol trace = {:.12}", hol.trace()),
    ];
    let mut h = Vec::new();
    if k > 0 && conn.n() != 3 {
        return Err(CliError::Argument("h_k needs loop-space directions for n > 3; use --k 0".into()));
    }
    for j in 1..=k {
        let v = iterated_integral(curve, &conn, j, &[], tol)?;
        summary.push(format!("h_{j} = {v:.12}"));
        h.push(v);
    }
    Ok(Outcome {
        passed: hol.iter().all(|x| x.is_finite()) && h.iter().all(|x| x.is_finite()),
        summary,
        results: json!({ "flag-check": flags, "holonomy": matrix_rows(&hol), "trace": hol.trace(), "h": h }),
    })
}

pub fn linking(curve: &LoopCurve, epsilon: Option<f64>, grid: Option<usize>, tol: &Tolerances) -> Result<Outcome> {
    let eps = epsilon.unwrap_or(tol.framing_fraction * curve.diameter());
    let r = linking_with(curve, eps, grid.unwrap_or(tol.linking_grid), false)?;
    let passed = r.deviation.abs() < LINKING_BOUND;
    let summary = vec![format!(
        "linking integral = {:.9} (nearest integer {}, deviation {:.2e}, eps {:.4e}, grid {})",
        r.value, r.rounded, r.deviation, r.epsilon, r.grid
    )];
    Ok(Outcome { passed, summary, results: serde_json::to_value(r)? })
}

pub fn crosscheck(curve: &LoopCurve, fixture: &Fixture, tol: &Tolerances) -> Result<Outcome> {
    let conn = fixture.connection()?;
    let c = h1_crosscheck(curve, &conn, tol)?;
    let passed = c.difference < H1_BOUND;
    let summary = vec![format!("h_1 symbolic {:.12}, numeric {:.12}, difference {:.2e}", c.symbolic, c.numeric, c.difference)];
    Ok(Outcome { passed, summary, results: serde_json::to_value(&c)? })
}
