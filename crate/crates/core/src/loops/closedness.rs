//! `(d + 𝛅_κ) 𝓗 = 0` on the superfield level.
//!
//! Slots hold words in the superfield letters `𝖺` (total degree 1) and `𝖡`
//! (total degree `n - 2`). The operator acting inside a slot is `d_{A₀}`
//! plus the interaction-deformed variation
//!
//! ```text
//! 𝛅_κ 𝖺 = (-1)^n (𝖥 + Σ_r μ_r 𝖡^r),   𝛅_κ 𝖡 = (-1)^n d_𝖠 𝖡,
//! ```
//!
//! combined as `d + (-1)^{n+1} 𝛅_κ`. All signs depend on `n` through
//! parities only, so the check is exact in the ℤ₂-reduced algebra.
//!
//! The interaction enters as `exp[(i/ℏ) σ_n Σ_r μ_r O_{r+1}]` with
//! `σ_n = (-1)^{n+1}`. A collapse of two `𝖡`-slots carries
//! `(-1)^{|𝖡|-1}`, so with this orientation the closedness conditions on
//! `(λ, μ)` read the same for both parities of `n`.

use serde::Serialize;

use crate::bv::{Status, REPORT_SCHEMA};
use crate::coeff::Coeff;
use crate::error::{CoreError, Result};
use crate::grading::{Generator, Kind};

use super::family::{project_coeff, CoefficientSequences, Family, Parity};
use super::iterated::{total_degree, words_up_to, BarDifferential, Face, IteratedTerm, LoopExpr, SlotPoly};

/// The superfield letters `𝖺` and `𝖡` for dimension `n`.
pub fn superfield_letters(n: u32) -> (Generator, Generator) {
    (
        Generator::matrix("𝖺", 1, 0, Kind::Superfield),
        Generator::matrix("𝖡", n as i32 - 2, 0, Kind::Superfield),
    )
}

fn sgn(odd: bool) -> Coeff {
    Coeff::one().signed(odd)
}

/// `𝒜 = 𝖺 + Σ_s λ_s 𝖡^s` as a slot polynomial.
pub fn connection_slot(n: u32, seqs: &CoefficientSequences) -> SlotPoly {
    let (a, b) = superfield_letters(n);
    let mut poly = vec![(Coeff::one(), vec![a])];
    for (i, l) in seqs.lambda.iter().enumerate() {
        if !l.is_zero() {
            poly.push((l.clone(), vec![b.clone(); i + 1]));
        }
    }
    poly
}

/// Sign `σ_n` of the interaction exponent.
pub fn interaction_sign(n: u32) -> Coeff {
    sgn(n.is_multiple_of(2))
}

/// The slot operator `d + (-1)^{n+1} 𝛅_κ` on superfield letters. Terms are
/// emitted separately so that the `d`-parts cancel visibly.
pub fn slot_operator(n: u32, seqs: &CoefficientSequences) -> impl Fn(&Generator) -> SlotPoly {
    let (a, b) = superfield_letters(n);
    let (da, db) = (a.with_level(1), b.with_level(1));
    let pn = sgn(n % 2 == 1);
    let flip = sgn(n.is_multiple_of(2));
    let b_odd = (n as i32 - 2) % 2 != 0;
    let mu = seqs.mu.clone();
    let sigma = interaction_sign(n);
    move |g: &Generator| -> SlotPoly {
        let s = &pn * &flip;
        if *g == a {
            // d𝖺 and 𝛅𝖺 = (-1)^n (d𝖺 + 𝖺𝖺 + σ_n Σ μ_r 𝖡^r)
            let mut out = vec![(Coeff::one(), vec![da.clone()]), (s.clone(), vec![da.clone()]), (s.clone(), vec![a.clone(), a.clone()])];
            for (i, m) in mu.iter().enumerate() {
                if !m.is_zero() {
                    out.push((&(&s * &sigma) * m, vec![b.clone(); i + 1]));
                }
            }
            out
        } else if *g == b {
            // d𝖡 and 𝛅𝖡 = (-1)^n (d𝖡 + 𝖺𝖡 - (-1)^{|𝖡|} 𝖡𝖺)
            vec![
                (Coeff::one(), vec![db.clone()]),
                (s.clone(), vec![db.clone()]),
                (s.clone(), vec![a.clone(), b.clone()]),
                ((&s * &sgn(!b_odd)), vec![b.clone(), a.clone()]),
            ]
        } else {
            Vec::new()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ResidualTerm {
    pub term: String,
    pub coefficient: String,
    pub faces: Vec<Face>,
    pub slots: usize,
    pub based: bool,
    /// Total degree of all letters; integer grading kept for audit.
    pub total_degree: i32,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClosednessReport {
    pub schema: String,
    pub identity: String,
    pub dimension: u32,
    pub family: Family,
    pub order: usize,
    pub status: Status,
    pub observable_terms: usize,
    pub boundary_terms: usize,
    pub residual_terms: Vec<ResidualTerm>,
    /// Every surviving term comes from an endpoint face.
    pub endpoint_only: bool,
}

impl ClosednessReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn residual_is_zero(&self) -> bool {
        self.residual_terms.is_empty()
    }
}

/// The truncated superfield-level observable `Σ_{l ≤ k} ⟨𝒜|…|𝒜⟩`, projected.
pub fn superfield_observable(n: u32, family: Family, seqs: &CoefficientSequences, k: usize) -> LoopExpr {
    let poly = connection_slot(n, seqs);
    let proj = family.projection();
    words_up_to(&poly, k).map_coeffs(|c| project_coeff(c, proj))
}

/// Default sequences of a family.
pub fn family_sequences(n: u32, family: Family) -> Result<CoefficientSequences> {
    match family {
        Family::Hhat if n.is_multiple_of(2) => Err(CoreError::VanishingInteraction(format!(
            "the cubic term ⟨𝖡,[𝖡,𝖡]·⟩· vanishes for even n = {n}; use hhat-odd"
        ))),
        Family::Hhat | Family::HhatOdd | Family::HhatEven => Ok(CoefficientSequences::hhat()),
        Family::Htilde | Family::HtildeOdd => Ok(CoefficientSequences::formal(3, Parity::of(n))),
    }
}

/// Apply `d + 𝛅_κ` to the order-`k` truncation and keep the part that is
/// complete at that order: terms with at most `k - 1` slots.
pub fn verify_closedness(n: u32, family: Family, seqs: &CoefficientSequences, k: usize) -> Result<ClosednessReport> {
    if n < 3 {
        return Err(CoreError::Argument(format!("dimension must be at least 3, got {n}")));
    }
    if k == 0 {
        return Err(CoreError::Argument("truncation order must be positive".into()));
    }
    if family == Family::Hhat && n.is_multiple_of(2) {
        family_sequences(n, family)?;
    }
    let h = superfield_observable(n, family, seqs, k);
    let q = slot_operator(n, seqs);
    let bar = BarDifferential { q: &q, top_degree: None };
    let faces = bar.apply(&h);
    let complete = |t: &IteratedTerm| t.slots.len() < k;
    let residual = faces.total.filter(complete);
    let boundary_terms = faces.faces.keys().filter(|t| complete(t)).count();

    let mut terms = Vec::new();
    for (t, c) in residual.terms() {
        let total: i32 = t.based.as_deref().map(total_degree).unwrap_or(0) + t.slots.iter().map(|w| total_degree(w)).sum::<i32>();
        terms.push(ResidualTerm {
            term: t.to_string(),
            coefficient: c.to_string(),
            faces: faces.faces_of(t),
            slots: t.slots.len(),
            based: t.based.is_some(),
            total_degree: total,
        });
    }
    let endpoint_only = terms.iter().all(|r| r.faces.iter().all(|f| f.is_endpoint()));
    let documented_failure = family == Family::HhatEven && n.is_multiple_of(2);
    let status = match (terms.is_empty(), documented_failure) {
        (true, false) => Status::Pass,
        (false, true) if endpoint_only => Status::ExpectedFailure,
        _ => Status::Fail,
    };
    Ok(ClosednessReport {
        schema: REPORT_SCHEMA.to_string(),
        identity: "(d + delta_kappa) H = 0".into(),
        dimension: n,
        family,
        order: k,
        status,
        observable_terms: h.len(),
        boundary_terms,
        residual_terms: terms,
        endpoint_only,
    })
}

/// `d h_k` for `h_k = ∫ Tr⟨B|…|B⟩` on shell: `A` is the flat transport
/// connection, `d_A B = 0`, antifields vanish. Slot words above the top form
/// degree vanish.
pub fn onshell_differential(n: u32, k: usize) -> LoopExpr {
    let b = Generator::matrix("B", n as i32 - 2, 0, Kind::Field);
    let mut h = LoopExpr::new();
    h.add(IteratedTerm::unbased(vec![vec![b]; k]), &Coeff::one());
    let q = |_: &Generator| -> SlotPoly { Vec::new() };
    let bar = BarDifferential { q: &q, top_degree: Some(n as i32) };
    bar.apply(&h).total
}
