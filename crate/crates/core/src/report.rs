//! Structured JSON reports for every computation.
//!
//! A report is an ordered JSON object:
//! `command`, `inputs`, `parameters`, the result fields (`verdict` or
//! `data`, then `checked_rank`, `counterexample`, `basis` when they apply),
//! `diagnostics`, and `timing_ms` last. Inputs are identified by name and
//! by the SHA-256 of their canonical model text, so two reports agree byte
//! for byte whenever their inputs do, apart from the timing field.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{Elem, FiniteAlgebra, Signature};
use crate::dsl::{render_algebra, render_system, render_words};
use crate::error::Result;
use crate::geometry::{
    presentation, ClosedCongruence, CoordinateAlgebra, GeomVerdict, PointSet, QuotientHom, Side,
};
use crate::terms::{EquationSystem, PointBudget, Term, TermMorphism};
use crate::verbal::{
    ApplicabilityReport, ApplicabilityStatus, AutoEqVerdict, BasisSummary, InnerWitness,
    WordSystem,
};

/// A named model item together with the digest of its canonical text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Input {
    pub kind: &'static str,
    pub name: String,
    pub sha256: String,
}

impl Input {
    fn new(kind: &'static str, name: &str, canonical: &str) -> Self {
        let digest = Sha256::digest(canonical.as_bytes());
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Input {
            kind,
            name: name.to_string(),
            sha256,
        }
    }

    pub fn algebra(name: &str, alg: &FiniteAlgebra) -> Self {
        Input::new("algebra", name, &render_algebra(name, alg))
    }

    pub fn system(name: &str, sys: &EquationSystem) -> Self {
        Input::new("system", name, &render_system(name, sys))
    }

    pub fn words(name: &str, w: &WordSystem) -> Self {
        Input::new("words", name, &render_words(name, w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    command: String,
    inputs: Vec<Input>,
    parameters: Map<String, Value>,
    body: Map<String, Value>,
    diagnostics: Vec<String>,
    timing_ms: Option<u128>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            inputs: Vec::new(),
            parameters: Map::new(),
            body: Map::new(),
            diagnostics: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn input(mut self, input: Input) -> Self {
        self.inputs.push(input);
        self
    }

    pub fn parameter(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.body.insert(key.to_string(), value.into());
        self
    }

    pub fn diagnostic(mut self, message: impl Into<String>) -> Self {
        self.diagnostics.push(message.into());
        self
    }

    pub fn with_timing(mut self, ms: u128) -> Self {
        self.timing_ms = Some(ms);
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// The boolean verdict of a decision command.
    pub fn verdict(&self) -> Option<bool> {
        self.body.get("verdict").and_then(Value::as_bool)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.body.get(key)
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), json!(self.command));
        out.insert(
            "inputs".into(),
            serde_json::to_value(&self.inputs).expect("inputs serialize"),
        );
        if !self.parameters.is_empty() {
            out.insert("parameters".into(), Value::Object(self.parameters.clone()));
        }
        out.extend(self.body.clone());
        out.insert("diagnostics".into(), json!(self.diagnostics));
        if let Some(ms) = self.timing_ms {
            out.insert("timing_ms".into(), json!(ms as u64));
        }
        Value::Object(out)
    }

    /// Pretty-printed JSON followed by a newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    /// One `key: value` line per field, values in compact JSON.
    pub fn render_text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        for (k, v) in &self.body {
            out.push_str(&format!("{k}: {v}\n"));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("note: {d}\n"));
        }
        out
    }
}

pub fn term_text(t: &Term, sig: &Signature) -> String {
    t.display(sig).to_string()
}

/// Sorted array of assignment arrays.
pub fn points_json(s: &PointSet) -> Value {
    json!(s.assignments().collect::<Vec<_>>())
}

pub fn congruence_json(t: &ClosedCongruence) -> Value {
    json!({
        "rank": t.rank(),
        "points": points_json(t.base()),
        "coordinate_size": t.coordinate_algebra().len(),
    })
}

fn nested_table(table: &[Elem], size: usize, arity: usize) -> Value {
    if arity == 0 {
        return json!(table[0]);
    }
    let stride = table.len() / size;
    Value::Array(
        (0..size)
            .map(|i| nested_table(&table[i * stride..(i + 1) * stride], size, arity - 1))
            .collect(),
    )
}

pub fn algebra_json(alg: &FiniteAlgebra) -> Value {
    let sig = alg.signature();
    let tables: Map<String, Value> = (0..sig.len())
        .map(|op| {
            (
                sig.symbol(op).to_string(),
                nested_table(alg.table(op), alg.size(), sig.arity(op)),
            )
        })
        .collect();
    json!({ "size": alg.size(), "tables": tables })
}

pub fn system_json(sys: &EquationSystem) -> Value {
    let sig = sys.signature();
    json!({
        "generators": (1..=sys.rank()).map(|i| format!("x{i}")).collect::<Vec<_>>(),
        "equations": sys
            .pairs()
            .iter()
            .map(|(l, r)| format!("{} = {}", term_text(l, sig), term_text(r, sig)))
            .collect::<Vec<_>>(),
    })
}

pub fn free_json(free: &CoordinateAlgebra) -> Value {
    let sig = free.signature();
    json!({
        "rank": free.rank(),
        "size": free.len(),
        "generators": free.generator_images(),
        "elements": (0..free.len())
            .map(|i| term_text(&free.witness(i), sig))
            .collect::<Vec<_>>(),
    })
}

pub fn closure_report(
    alg_name: &str,
    alg: &FiniteAlgebra,
    sys_name: &str,
    sys: &EquationSystem,
    t: &ClosedCongruence,
) -> Report {
    Report::new("closure")
        .input(Input::algebra(alg_name, alg))
        .input(Input::system(sys_name, sys))
        .field("data", congruence_json(t))
}

pub fn closed_sets_report(
    alg_name: &str,
    alg: &FiniteAlgebra,
    rank: usize,
    sets: &[ClosedCongruence],
) -> Report {
    Report::new("closed-sets")
        .input(Input::algebra(alg_name, alg))
        .parameter("rank", rank)
        .field(
            "data",
            json!({
                "count": sets.len(),
                "sets": sets.iter().map(congruence_json).collect::<Vec<_>>(),
            }),
        )
}

pub fn free_report(alg_name: &str, alg: &FiniteAlgebra, free: &CoordinateAlgebra) -> Report {
    Report::new("free")
        .input(Input::algebra(alg_name, alg))
        .parameter("rank", free.rank())
        .field("data", free_json(free))
}

fn counterexample_json(
    verdict: &GeomVerdict,
    names: [&str; 2],
    algebras: [&Arc<FiniteAlgebra>; 2],
    budget: PointBudget,
) -> Result<Option<Value>> {
    let Some(c) = &verdict.counterexample else {
        return Ok(None);
    };
    let (here, there) = match c.closed_in {
        Side::First => (0, 1),
        Side::Second => (1, 0),
    };
    let system = presentation(&c.congruence, &[algebras[there].clone()], budget)?;
    Ok(Some(json!({
        "rank": c.rank,
        "closed_in": names[here],
        "not_closed_in": names[there],
        "points": points_json(c.congruence.base()),
        "coordinate_size": c.congruence.coordinate_algebra().len(),
        "system": system_json(&system),
    })))
}

fn with_geom(
    mut report: Report,
    verdict: &GeomVerdict,
    names: [&str; 2],
    algebras: [&Arc<FiniteAlgebra>; 2],
    budget: PointBudget,
) -> Result<Report> {
    report = report
        .field("verdict", verdict.equivalent_up_to_rank)
        .field("checked_rank", verdict.checked_rank);
    if let Some(c) = counterexample_json(verdict, names, algebras, budget)? {
        report = report.field("counterexample", c);
    }
    if let Some(r) = verdict.budget_exhausted_at {
        report = report.diagnostic(format!(
            "point budget exhausted at rank {r}; verdict covers ranks up to {}",
            verdict.checked_rank
        ));
    }
    Ok(report)
}

pub fn geomeq_report(
    a_name: &str,
    a: &Arc<FiniteAlgebra>,
    b_name: &str,
    b: &Arc<FiniteAlgebra>,
    max_rank: usize,
    verdict: &GeomVerdict,
    budget: PointBudget,
) -> Result<Report> {
    let report = Report::new("geomeq")
        .input(Input::algebra(a_name, a))
        .input(Input::algebra(b_name, b))
        .parameter("max_rank", max_rank);
    with_geom(report, verdict, [a_name, b_name], [a, b], budget)
}

pub fn derive_report(
    alg_name: &str,
    alg: &FiniteAlgebra,
    words_name: &str,
    w: &WordSystem,
    derived: &FiniteAlgebra,
) -> Report {
    Report::new("derive")
        .input(Input::algebra(alg_name, alg))
        .input(Input::words(words_name, w))
        .field("data", algebra_json(derived))
}

fn status_json(status: &ApplicabilityStatus, sig: &Signature) -> Value {
    match status {
        ApplicabilityStatus::IsoFound { s_map } => json!({
            "status": "iso_found",
            "s_map": s_map,
        }),
        ApplicabilityStatus::NotHomomorphism {
            element,
            first,
            second,
            first_witness,
            second_witness,
        } => json!({
            "status": "not_homomorphism",
            "element": element,
            "first": first,
            "second": second,
            "first_witness": term_text(first_witness, sig),
            "second_witness": term_text(second_witness, sig),
        }),
        ApplicabilityStatus::NotBijective {
            first,
            second,
            image,
        } => json!({
            "status": "not_bijective",
            "first": first,
            "second": second,
            "image": image,
        }),
    }
}

pub fn applicable_report(
    h0_name: &str,
    words_name: &str,
    max_rank: usize,
    report: &ApplicabilityReport,
) -> Report {
    let sig = report.h0.signature();
    let ranks: Vec<Value> = report
        .ranks
        .iter()
        .map(|e| {
            let mut v = json!({ "rank": e.rank, "free_size": e.free.len() });
            if let (Value::Object(m), Value::Object(s)) = (&mut v, status_json(&e.status, sig)) {
                m.extend(s);
            }
            v
        })
        .collect();
    let mut out = Report::new("applicable")
        .input(Input::algebra(h0_name, &report.h0))
        .input(Input::words(words_name, &report.words))
        .parameter("max_rank", max_rank)
        .field("verdict", report.is_successful())
        .field("checked_rank", report.max_rank())
        .field("ranks", ranks);
    if let Some(r) = report.budget_exhausted_at {
        out = out.diagnostic(format!("point budget exhausted at rank {r}"));
    }
    out
}

/// Report of `auto_equiv(a, b, w)`; the second compared algebra is
/// `b*_W`, named `b*W` in the counterexample.
#[allow(clippy::too_many_arguments)]
pub fn autoeq_report(
    a_name: &str,
    a: &Arc<FiniteAlgebra>,
    b_name: &str,
    b: &Arc<FiniteAlgebra>,
    words_name: &str,
    w: &WordSystem,
    h0_name: Option<&str>,
    verdict: &AutoEqVerdict,
    derived: &Arc<FiniteAlgebra>,
    budget: PointBudget,
) -> Result<Report> {
    let mut report = Report::new("autoeq")
        .input(Input::algebra(a_name, a))
        .input(Input::algebra(b_name, b))
        .input(Input::words(words_name, w));
    if let (Some(name), BasisSummary::RelativeEvidence { h0, .. }) = (h0_name, &verdict.basis) {
        report = report.input(Input::algebra(name, h0));
    }
    report = report.parameter("max_rank", verdict.max_rank);
    let derived_name = format!("{b_name}*{words_name}");
    let mut report = with_geom(
        report,
        &verdict.geom,
        [a_name, &derived_name],
        [a, derived],
        budget,
    )?;
    let basis = match &verdict.basis {
        BasisSummary::UserAsserted => json!({ "kind": "user_asserted" }),
        BasisSummary::RelativeEvidence { rank, .. } => json!({
            "kind": "relative_evidence",
            "h0": h0_name.unwrap_or("h0"),
            "rank": rank,
        }),
    };
    report = report.field("basis", basis);
    Ok(report)
}

pub fn inner_search_report(
    h0_name: &str,
    h0: &FiniteAlgebra,
    words_name: &str,
    w: &WordSystem,
    max_rank: usize,
    max_depth: usize,
    found: Option<&InnerWitness>,
) -> Report {
    let sig = h0.signature();
    Report::new("inner-search")
        .input(Input::algebra(h0_name, h0))
        .input(Input::words(words_name, w))
        .parameter("max_rank", max_rank)
        .parameter("max_depth", max_depth)
        .field("verdict", found.is_some())
        .field("checked_rank", max_rank)
        .field(
            "data",
            match found {
                Some(c) => json!({
                    "term": term_text(&c.term, sig),
                    "verified_ranks": c.verified_ranks,
                }),
                None => Value::Null,
            },
        )
}

fn morphism_json(m: &TermMorphism) -> Value {
    let sig = m.signature();
    json!({
        "source_rank": m.source_rank(),
        "target_rank": m.target_rank(),
        "images": m.images().iter().map(|t| term_text(t, sig)).collect::<Vec<_>>(),
    })
}

/// Report of a closed-morphism check; `induced` is the quotient map when
/// the morphism is admissible.
#[allow(clippy::too_many_arguments)]
pub fn check_hom_report(
    alg_name: &str,
    alg: &FiniteAlgebra,
    source_name: &str,
    source: &EquationSystem,
    target_name: &str,
    target: &EquationSystem,
    m: &TermMorphism,
    induced: Option<&QuotientHom>,
) -> Report {
    Report::new("check-hom")
        .input(Input::algebra(alg_name, alg))
        .input(Input::system(source_name, source))
        .input(Input::system(target_name, target))
        .parameter("morphism", morphism_json(m))
        .field("verdict", induced.is_some())
        .field(
            "data",
            match induced {
                Some(h) => json!({
                    "source_size": h.source().len(),
                    "target_size": h.target().len(),
                    "map": h.map(),
                }),
                None => Value::Null,
            },
        )
}

#[allow(clippy::too_many_arguments)]
pub fn lift_report(
    alg_name: &str,
    alg: &FiniteAlgebra,
    source_name: &str,
    source: &EquationSystem,
    target_name: &str,
    target: &EquationSystem,
    images: &[usize],
    lifted: &TermMorphism,
) -> Report {
    Report::new("lift")
        .input(Input::algebra(alg_name, alg))
        .input(Input::system(source_name, source))
        .input(Input::system(target_name, target))
        .parameter("images", images)
        .field("data", morphism_json(lifted))
}

/// A report for a failed invocation. `kind` is `usage`, `parse` or
/// `semantic`.
pub fn error_report(command: &str, kind: &str, message: &str) -> Report {
    Report::new(command).field("error", json!({ "kind": kind, "message": message }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_follow_a_fixed_order() {
        let r = Report::new("demo")
            .field("verdict", false)
            .parameter("rank", 2)
            .diagnostic("partial")
            .with_timing(5)
            .field("checked_rank", 1);
        let v = r.to_json();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            ["command", "inputs", "parameters", "verdict", "checked_rank", "diagnostics", "timing_ms"]
        );
        assert_eq!(r.verdict(), Some(false));
        assert_eq!(
            r.render_text(),
            "demo\nverdict: false\nchecked_rank: 1\nnote: partial\n"
        );
    }

    #[test]
    fn input_hashes_are_hex_sha256() {
        let i = Input::new("algebra", "A", "");
        assert_eq!(
            i.sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
