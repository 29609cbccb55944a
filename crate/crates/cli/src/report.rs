//! The analysis report document and its text form.

use std::fmt::Write;

use posinv::structure::{AnalysisReport, ImplicationStatus};
use posinv::{Algebra, Status, Tolerances, Verdict, Witness};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL: &str = "posinv";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A property the input form guarantees, checked against the analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub property: String,
    pub source: String,
    /// `false` when the analysis refutes the property.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub samples: usize,
    pub horizon: u32,
    pub recurrence_eps: f64,
    pub recurrence_budget: u64,
    pub density_supplied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub settings: Settings,
    pub input_kind: String,
    pub certificates: Vec<CertificateCheck>,
    /// Copied from the input document, untouched.
    pub metadata: Value,
    pub consistent: bool,
    pub report: AnalysisReport,
}

pub fn certificate_check(property: &str, report: &AnalysisReport) -> CertificateCheck {
    let verdict = match property {
        "completely_positive" => &report.completely_positive,
        "positive" => &report.positive,
        _ => unreachable!("unknown certificate {property}"),
    };
    CertificateCheck { property: property.into(), source: "kraus form".into(), consistent: !verdict.is_refuted() }
}

pub fn algebra_name(alg: &Algebra) -> String {
    alg.block_dims().iter().map(|&n| if n == 1 { "ℂ".to_string() } else { format!("M_{n}") }).collect::<Vec<_>>().join(" ⊕ ")
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Certified => "certified",
        Status::Refuted => "refuted",
        Status::Unknown => "unknown",
    }
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Note { text } => text.clone(),
        Witness::Eigenvalue { value } => format!("eigenvalue {:.6}{:+.6}i", value[0], value[1]),
        Witness::Entry { row, col, value } => format!("entry ({row}, {col}) = {:.6}{:+.6}i", value[0], value[1]),
        Witness::Input { .. } => "input x (see --json)".into(),
        Witness::Pair { .. } => "pair (x, y) (see --json)".into(),
        Witness::Vector { v } => format!("vector of length {} (see --json)", v.len()),
    }
}

fn verdict_line(out: &mut String, name: &str, v: &Verdict) {
    let why = match v.status {
        Status::Certified => v.certificate.clone().unwrap_or_default(),
        Status::Refuted => v.witness.as_ref().map(witness_text).unwrap_or_default(),
        Status::Unknown => String::new(),
    };
    let _ = writeln!(out, "  {name:<22} {:<10} {why}", status_word(v.status));
}

pub fn render_text(doc: &ReportDocument) -> String {
    let r = &doc.report;
    let mut out = String::new();
    let _ = writeln!(out, "{} {}  seed {}", doc.tool, doc.version, doc.seed);
    let _ = writeln!(out, "algebra {} ({} map, dimension {})", algebra_name(&r.algebra), doc.input_kind, r.algebra.total_dim());
    let _ = writeln!(out, "verdicts");
    for (name, v) in [
        ("unital", &r.unital),
        ("positive", &r.positive),
        ("schwarz", &r.schwarz),
        ("2-positive", &r.two_positive),
        ("completely positive", &r.completely_positive),
        ("power bounded", &r.power_bounded),
        ("doubly power bounded", &r.doubly_power_bounded),
        ("invertible", &r.inverse_exists),
        ("inverse positive", &r.inverse_positive),
        ("jordan automorphism", &r.jordan_automorphism),
        ("*-automorphism", &r.star_automorphism),
        ("isometry", &r.isometry),
    ] {
        verdict_line(&mut out, name, v);
    }
    if let Some(v) = &r.inverse_schwarz {
        verdict_line(&mut out, "inverse schwarz", v);
    }
    if let Some(v) = &r.permutation {
        verdict_line(&mut out, "permutation", v);
    }
    let _ = writeln!(out, "norm ‖T‖ in [{:.9}, {:.9}]", r.norm.lower(), r.norm.upper());
    if let Some(n) = &r.inverse_norm {
        let _ = writeln!(out, "norm ‖T⁻¹‖ in [{:.9}, {:.9}]", n.lower(), n.upper());
    }
    let s = &r.spectrum;
    let _ = writeln!(
        out,
        "spectrum radius {:.9}, in unit circle {}, in disk {}, 0 in spectrum {}",
        s.spectral_radius, s.in_unit_circle, s.in_disk, s.zero_in_spectrum
    );
    if let Some(rec) = &r.recurrence {
        let _ = writeln!(
            out,
            "recurrence n = {} reached {} inverse error {:.3e}",
            rec.index, rec.reached, rec.inverse_error
        );
    }
    if let Some(j) = &r.jdlg {
        let _ = writeln!(
            out,
            "splitting reversible dimension {}, ‖P²−P‖ {:.3e}, ‖PT−TP‖ {:.3e}, decay {:.3e}",
            j.reversible_dim, j.idempotence_defect, j.commutation_defect, j.kernel_decay
        );
    }
    let d = &r.density;
    let _ = writeln!(
        out,
        "density found {} faithful {} source {}",
        d.found,
        d.faithful,
        d.source.as_deref().unwrap_or("-")
    );
    for c in &doc.certificates {
        let _ = writeln!(out, "certificate {} from {}: {}", c.property, c.source, if c.consistent { "consistent" } else { "REFUTED" });
    }
    let _ = writeln!(out, "implications");
    for i in &r.implications {
        let tag = match i.status {
            ImplicationStatus::Pass => "pass",
            ImplicationStatus::Inconsistent => "INCONSISTENT",
            ImplicationStatus::NotApplicable => "n/a",
            ImplicationStatus::NotEvaluated => "not evaluated",
        };
        let _ = writeln!(out, "  {:>2} {tag:<14} {}", i.id, i.statement);
    }
    for n in &r.notes {
        let _ = writeln!(out, "note {n}");
    }
    let _ = writeln!(out, "{}", if doc.consistent { "consistent" } else { "INCONSISTENT" });
    out
}
