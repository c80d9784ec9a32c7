//! Report assembly: every command produces both a text rendering and
//! a structured JSON document; rationals always appear as "p/q"
//! strings so reports re-parse exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use graphshift::cauchydual::DualCertificate;
use graphshift::exactmath::format_rational;
use graphshift::misometry::{ChReport, ChViolation, DefectReport, RankCertificate};
use graphshift::shift::MeasuredGraph;

use crate::instance::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Structured,
}

pub struct Rendered {
    pub text: String,
    pub json: Value,
}

impl Rendered {
    pub fn emit(&self, format: OutputFormat, out: Option<&Path>) -> Result<(), CliError> {
        let body = match format {
            OutputFormat::Text => self.text.clone(),
            OutputFormat::Structured => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                s
            }
        };
        match out {
            Some(path) => std::fs::write(path, body)
                .map_err(|e| CliError::msg(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

/// One-line structural summary of a component.
pub fn summary_line(index: usize, mg: &MeasuredGraph) -> String {
    let s = mg.structure();
    format!(
        "component {index}: vertices={} kappa={} trees={} tails={}",
        mg.graph().len(),
        s.kappa(),
        s.trees.len(),
        mg.tails().len()
    )
}

pub fn summary_json(index: usize, mg: &MeasuredGraph) -> Value {
    let s = mg.structure();
    json!({
        "component": index,
        "vertices": mg.graph().len(),
        "kappa": s.kappa(),
        "cycle": s.cycle.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
        "trees": s.trees.iter().map(|t| json!({
            "root": t.root.as_str(),
            "attachment": t.attachment,
            "size": t.members.len(),
        })).collect::<Vec<_>>(),
        "tails": mg.tails().iter().map(|t| json!({
            "attach": t.attach.as_str(),
            "mu_poly": t.mu_poly.coeffs().iter().map(format_rational).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn defect_text(report: &DefectReport) -> String {
    let mut out = String::new();
    let worst = report
        .vertices
        .iter()
        .filter_map(|(v, d)| d.first_nonzero.as_ref().map(|(n, value)| (v, *n, value)))
        .next();
    match worst {
        None => {
            let _ = writeln!(
                out,
                "  defect oracle m={}: all defects vanish up to power {}",
                report.m, report.horizon
            );
        }
        Some((v, n, value)) => {
            let _ = writeln!(
                out,
                "  defect oracle m={}: nonzero defect {} at vertex {v}, power {n}",
                report.m,
                format_rational(value)
            );
        }
    }
    for tail in &report.tails {
        if !tail.vanishes {
            let _ = writeln!(
                out,
                "  tail at {}: measure degree {:?} exceeds m-1",
                tail.attach, tail.mu_degree
            );
        }
    }
    let _ = writeln!(out, "  defect verdict: {}", report.verdict);
    out
}

pub fn defect_json(report: &DefectReport) -> Value {
    json!({
        "m": report.m,
        "horizon": report.horizon,
        "verdict": report.verdict,
        "vertices": report.vertices.iter().map(|(v, d)| json!({
            "vertex": v.as_str(),
            "max_abs": format_rational(&d.max_abs),
            "first_nonzero": d.first_nonzero.as_ref().map(|(n, value)| json!({
                "power": n,
                "value": format_rational(value),
            })),
        })).collect::<Vec<_>>(),
        "tails": report.tails.iter().map(|t| json!({
            "attach": t.attach.as_str(),
            "mu_degree": t.mu_degree,
            "vanishes": t.vanishes,
        })).collect::<Vec<_>>(),
    })
}

pub fn rank_text(cert: &RankCertificate) -> String {
    let mut out = String::new();
    match &cert.tree_failure {
        Some(failure) => {
            let _ = writeln!(out, "  rank criterion m={}: {failure}", cert.m);
        }
        None => {
            let _ = write!(
                out,
                "  rank criterion m={}: rank[A|b]={}",
                cert.m,
                cert.rank_a_tilde.unwrap_or(0)
            );
            match cert.rank_b_tilde {
                Some(r) => {
                    let _ = writeln!(out, " rank[[A|b],[B|a]]={r}");
                }
                None => {
                    let _ = writeln!(out, " (kappa=1: no cycle consistency block)");
                }
            }
            if let Some(q) = &cert.q {
                let _ = writeln!(out, "  q = {q}");
            }
        }
    }
    if let Some(p0) = &cert.p0 {
        let _ = writeln!(out, "  p0 = {p0}");
    }
    let _ = writeln!(out, "  rank verdict: {}", cert.verdict);
    out
}

pub fn rank_json(cert: &RankCertificate) -> Value {
    json!({
        "m": cert.m,
        "kappa": cert.kappa,
        "a_matrix": matrix_json(&cert.a_matrix),
        "cycle_norms": cert.a_values.iter().map(format_rational).collect::<Vec<_>>(),
        "tree_failure": cert.tree_failure.as_ref().map(|f| f.to_string()),
        "q": cert.q.as_ref().map(|q| q.coeffs().iter().map(format_rational).collect::<Vec<_>>()),
        "b_vector": cert.b_vector.as_ref().map(|b| b.iter().map(format_rational).collect::<Vec<_>>()),
        "rank_a_tilde": cert.rank_a_tilde,
        "rank_b_tilde": cert.rank_b_tilde,
        "p0": cert.p0.as_ref().map(|p| p.coeffs().iter().map(format_rational).collect::<Vec<_>>()),
        "verdict": cert.verdict,
    })
}

fn matrix_json(m: &graphshift::exactmath::RationalMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|x| Value::String(format_rational(x)))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn ch_text(report: &ChReport) -> String {
    let mut out = String::new();
    match &report.first_violation {
        None => {
            let _ = writeln!(
                out,
                "  alternating sums stay nonpositive through order {}",
                report.max_order
            );
        }
        Some(ChViolation::Vertex { vertex, order, value }) => {
            let _ = writeln!(
                out,
                "  violation at vertex {vertex}, order {order}: theta = {}",
                format_rational(value)
            );
        }
        Some(ChViolation::TailPosition { attach, order, position, value }) => {
            let _ = writeln!(
                out,
                "  violation on tail at {attach}, order {order}, position {position}: theta = {}",
                format_rational(value)
            );
        }
        Some(ChViolation::TailAsymptotic { attach, order }) => {
            let _ = writeln!(
                out,
                "  violation on tail at {attach}, order {order}: wrong sign for all large positions"
            );
        }
    }
    let _ = writeln!(out, "  hyperexpansivity verdict: {}", report.verdict);
    out
}

pub fn ch_json(report: &ChReport) -> Value {
    let violation = report.first_violation.as_ref().map(|v| match v {
        ChViolation::Vertex { vertex, order, value } => json!({
            "kind": "vertex",
            "vertex": vertex.as_str(),
            "order": order,
            "value": format_rational(value),
        }),
        ChViolation::TailPosition { attach, order, position, value } => json!({
            "kind": "tail-position",
            "attach": attach.as_str(),
            "order": order,
            "position": position,
            "value": format_rational(value),
        }),
        ChViolation::TailAsymptotic { attach, order } => json!({
            "kind": "tail-asymptotic",
            "attach": attach.as_str(),
            "order": order,
        }),
    });
    json!({
        "max_order": report.max_order,
        "first_violation": violation,
        "verdict": report.verdict,
    })
}

pub fn dual_text(cert: &DualCertificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "  D = {}", format_rational(&cert.d));
    if cert.pure_cycle {
        let _ = writeln!(out, "  pure cycle: unitary, dual trivially subnormal");
    } else {
        for check in &cert.checks {
            let _ = write!(
                out,
                "  cycle position {}: C = {}, alpha = {}",
                check.cycle_index,
                format_rational(&check.cm),
                format_rational(&check.alpha)
            );
            if !check.alpha_in_range {
                let _ = write!(out, " (outside [0,1])");
            }
            for p in &check.powers {
                if !p.residual_nonneg {
                    let _ = write!(out, "; moment {} below the atom", p.n);
                } else if !p.identity_holds {
                    let _ = write!(out, "; moment {} misses the two-atom form", p.n);
                }
            }
            let _ = writeln!(out);
        }
    }
    let _ = writeln!(out, "  subnormal: {}", cert.verdict);
    out
}

pub fn dual_json(cert: &DualCertificate) -> Value {
    json!({
        "kappa": cert.kappa,
        "pure_cycle": cert.pure_cycle,
        "d": format_rational(&cert.d),
        "cm": cert.cm.values().map(format_rational).collect::<Vec<_>>(),
        "alpha": cert.alpha.values().map(format_rational).collect::<Vec<_>>(),
        "checks": cert.checks.iter().map(|c| json!({
            "cycle_index": c.cycle_index,
            "alpha_in_range": c.alpha_in_range,
            "powers": c.powers.iter().map(|p| json!({
                "n": p.n,
                "s": format_rational(&p.s),
                "residual_nonneg": p.residual_nonneg,
                "identity_holds": p.identity_holds,
            })).collect::<Vec<_>>(),
            "ok": c.ok,
        })).collect::<Vec<_>>(),
        "verdict": cert.verdict,
    })
}
