//! Machine-readable report documents.
//!
//! Every invocation emits one JSON object
//! `{"provenance": {...}, "command": "...", "result": ...}`. Rationals are
//! strings such as `"-3/4"`, vectors are arrays of such strings and complex
//! numbers are `{"re": .., "im": ..}` objects.

use levitype_core::disks::DiskJet;
use levitype_core::engine::{TypeReport, ValidationRecord};
use levitype_core::geometry::FieldJet;
use levitype_core::levi::{Classification, LeviReport};
use levitype_core::{ComplexRational, Rational};
use serde_json::{json, Value};

pub fn rational(c: &Rational) -> Value {
    Value::String(c.to_string())
}

pub fn vector(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn complex(c: &ComplexRational) -> Value {
    json!({ "re": rational(&c.re), "im": rational(&c.im) })
}

pub fn disk(u: &DiskJet) -> Value {
    let mut coefficients = Vec::new();
    for total in 1..=u.order() {
        for q in 0..=total {
            let p = total - q;
            coefficients.push(json!({ "p": p, "q": q, "derivative": vector(&u.derivative(p, q)) }));
        }
    }
    json!({ "order": u.order(), "x_jet": u.x_jet().iter().map(|v| vector(v)).collect::<Vec<_>>(), "derivatives": coefficients })
}

pub fn field_jet(jet: &FieldJet) -> Value {
    let entries: Vec<Value> = jet
        .entries()
        .iter()
        .map(|(&(p, q), v)| json!({ "p": p, "q": q, "value": vector(v) }))
        .collect();
    json!({ "order": jet.order(), "entries": entries })
}

pub fn type_report(r: &TypeReport) -> Value {
    json!({
        "point": vector(&r.point),
        "k_max": r.k_max,
        "strategy": r.strategy,
        "levi_class": r.levi_class.as_str(),
        "lower_bound": r.lower_bound,
        "certified_exact": r.certified_exact,
        "cap_reached": r.cap_reached,
        "witness_x_jet": r.witness_x_jet.iter().map(|v| vector(v)).collect::<Vec<_>>(),
        "witness_disk": r.witness_disk.as_ref().map(disk),
        "witness_field_jet": r.witness_field_jet.as_ref().map(field_jet),
        "obstruction": r.obstruction.as_ref().map(|o| json!({ "stage": o.stage, "description": o.description })),
        "stages": r.stages.iter().map(|s| json!({
            "stage": s.stage,
            "unknowns": s.unknowns,
            "equations": s.equations,
            "rank": s.rank,
            "solved": s.solved,
        })).collect::<Vec<_>>(),
    })
}

pub fn classification(c: &Classification) -> Value {
    let (pos, neg, zero) = c.inertia;
    json!({
        "class": c.class.as_str(),
        "pseudoconvex": c.class.is_pseudoconvex(),
        "inertia": { "positive": pos, "negative": neg, "zero": zero },
        "basis": c.matrix.basis.iter().map(|v| vector(v)).collect::<Vec<_>>(),
        "matrix": c.matrix.entries.iter().map(|row| row.iter().map(complex).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn levi_report(r: &LeviReport) -> Value {
    json!({
        "route": r.route.to_string(),
        "value": rational(&r.value),
        "correction_term": rational(&r.correction_term),
    })
}

pub fn validation(v: &ValidationRecord) -> Value {
    json!({
        "k": v.k,
        "passed": v.passed(),
        "field_realized": v.field_realized,
        "brackets_vanish": v.brackets_vanish,
        "bracket_order": v.bracket_order,
        "levi_vanish": v.levi_vanish,
        "derivatives_match": v.derivatives_match,
    })
}
