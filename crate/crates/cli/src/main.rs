//! Command-line front end: reads instance files, runs the
//! classification / m-isometry / hyperexpansivity / dual-subnormality
//! pipelines on every connected component, and prints exact reports.
//!
//! Exit codes: 0 when the queried property holds, 1 when the input is
//! well formed but the property fails, 2 on input errors.

mod instance;
mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use graphshift::cauchydual::{
    builtin_example_report, dual_squared_norms, dual_weights, subnormality_check, DualError,
};
use graphshift::exactmath::{format_rational, Rational};
use graphshift::misometry::{
    ch_sweep, cross_validate, default_horizon, family3_generate, is_m_isometric_oracle,
    rank_criterion, FamilySpec,
};
use graphshift::shift::MeasuredGraph;

use crate::instance::{parse_field_rational, CliError, InstanceFile};
use crate::report::{OutputFormat, Rendered};

#[derive(Parser)]
#[command(
    name = "graphshift",
    version,
    about = "Exact weighted-shift analysis on functional graphs"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Describe the cycle-and-trees structure of each component.
    Classify {
        path: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide m-isometricity by two independent routes.
    Check {
        path: PathBuf,
        /// Isometry order (1 runs the defect sweep alone).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Norm-table horizon override.
        #[arg(long)]
        horizon: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check complete hyperexpansivity of the shift.
    CheckCh {
        path: PathBuf,
        /// Largest alternating-sum order to test.
        #[arg(long, default_value_t = 15)]
        max_order: usize,
        /// Norm-table horizon override.
        #[arg(long)]
        horizon: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether the Cauchy dual is subnormal.
    CheckDual {
        path: PathBuf,
        /// Dual norm-table horizon override.
        #[arg(long)]
        horizon: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a 3-isometric instance with affine branch measures.
    Family3 {
        /// Cycle length.
        #[arg(long)]
        kappa: usize,
        /// Measure at the cycle start, as "p/q".
        #[arg(long, default_value = "1")]
        mu0: String,
        /// Branch at cycle position I with first two measures A and B
        /// (B >= A > 0); repeatable.
        #[arg(long = "branch", value_name = "I:A:B")]
        branches: Vec<String>,
        /// Instance file destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the built-in worked example and verify every pinned value.
    PaperExample {
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    let result = match cli.cmd {
        Cmd::Classify { path, out } => cmd_classify(&path, format, out.as_deref()),
        Cmd::Check { path, m, horizon, out } => cmd_check(&path, m, horizon, format, out.as_deref()),
        Cmd::CheckCh { path, max_order, horizon, out } => {
            cmd_check_ch(&path, max_order, horizon, format, out.as_deref())
        }
        Cmd::CheckDual { path, horizon, out } => {
            cmd_check_dual(&path, horizon, format, out.as_deref())
        }
        Cmd::Family3 { kappa, mu0, branches, out } => {
            cmd_family3(kappa, &mu0, &branches, format, out.as_deref())
        }
        Cmd::PaperExample { out } => cmd_paper_example(format, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_components(path: &Path) -> Result<Vec<MeasuredGraph>, CliError> {
    InstanceFile::load(path)?.build()
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::msg(e.to_string())
}

fn cmd_classify(path: &Path, format: OutputFormat, out: Option<&Path>) -> Result<u8, CliError> {
    let components = load_components(path)?;
    let mut text = String::new();
    let mut docs = Vec::new();
    for (i, mg) in components.iter().enumerate() {
        let s = mg.structure();
        let _ = writeln!(text, "{}", report::summary_line(i, mg));
        let cycle: Vec<&str> = s.cycle.iter().map(|v| v.as_str()).collect();
        let _ = writeln!(text, "  cycle: {}", cycle.join(" -> "));
        if s.trees.is_empty() {
            let _ = writeln!(text, "  trees: none");
        }
        for t in &s.trees {
            let _ = writeln!(
                text,
                "  tree rooted at {} (attached to {}): {} vertices",
                t.root,
                s.cycle[t.attachment],
                t.members.len()
            );
        }
        for tail in mg.tails() {
            let _ = writeln!(text, "  tail at {}: measure ray {}", tail.attach, tail.mu_poly);
        }
        docs.push(report::summary_json(i, mg));
    }
    let rendered = Rendered {
        text,
        json: json!({ "command": "classify", "components": docs }),
    };
    rendered.emit(format, out)?;
    Ok(0)
}

fn cmd_check(
    path: &Path,
    m: usize,
    horizon: Option<usize>,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    if m == 0 {
        return Err(CliError::msg("--m must be at least 1"));
    }
    let components = load_components(path)?;
    let mut text = String::new();
    let mut docs = Vec::new();
    let mut all_hold = true;
    let mut disagreement = false;
    for (i, mg) in components.iter().enumerate() {
        let kappa = mg.structure().kappa();
        let h = horizon.unwrap_or_else(|| default_horizon(m, kappa));
        let _ = writeln!(text, "{}", report::summary_line(i, mg));
        if m == 1 {
            let oracle = is_m_isometric_oracle(mg, 1, h).map_err(input_err)?;
            text.push_str(&report::defect_text(&oracle));
            all_hold &= oracle.verdict;
            docs.push(json!({
                "component": i,
                "oracle": report::defect_json(&oracle),
                "verdict": oracle.verdict,
            }));
        } else {
            let cv = cross_validate(mg, m, Some(h)).map_err(input_err)?;
            text.push_str(&report::defect_text(&cv.oracle));
            text.push_str(&report::rank_text(&cv.rank));
            let _ = writeln!(text, "  routes agree: {}", cv.agree);
            disagreement |= !cv.agree;
            all_hold &= cv.oracle.verdict && cv.rank.verdict;
            docs.push(json!({
                "component": i,
                "oracle": report::defect_json(&cv.oracle),
                "rank": report::rank_json(&cv.rank),
                "agree": cv.agree,
                "verdict": cv.oracle.verdict && cv.rank.verdict,
            }));
        }
    }
    let verdict = all_hold && !disagreement;
    let _ = writeln!(text, "m-isometric (m={m}): {verdict}");
    let rendered = Rendered {
        text,
        json: json!({
            "command": "check",
            "m": m,
            "components": docs,
            "disagreement": disagreement,
            "verdict": verdict,
        }),
    };
    rendered.emit(format, out)?;
    Ok(u8::from(!verdict))
}

fn cmd_check_ch(
    path: &Path,
    max_order: usize,
    horizon: Option<usize>,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let components = load_components(path)?;
    let mut text = String::new();
    let mut docs = Vec::new();
    let mut all_ch = true;
    let mut mismatch = false;
    for (i, mg) in components.iter().enumerate() {
        let kappa = mg.structure().kappa();
        let h = horizon.unwrap_or_else(|| default_horizon(2, kappa).max(max_order));
        let table = mg.squared_norms(h);
        let ch = ch_sweep(mg, &table, max_order).map_err(input_err)?;
        let rank = rank_criterion(mg, &table, 2).map_err(input_err)?;
        let _ = writeln!(text, "{}", report::summary_line(i, mg));
        text.push_str(&report::ch_text(&ch));
        let _ = writeln!(text, "  2-isometric (rank route): {}", rank.verdict);
        let _ = writeln!(text, "  equivalence holds: {}", ch.verdict == rank.verdict);
        all_ch &= ch.verdict;
        mismatch |= ch.verdict != rank.verdict;
        docs.push(json!({
            "component": i,
            "ch": report::ch_json(&ch),
            "two_isometric": rank.verdict,
            "equivalent": ch.verdict == rank.verdict,
        }));
    }
    let verdict = all_ch && !mismatch;
    let _ = writeln!(text, "completely hyperexpansive: {all_ch}");
    let rendered = Rendered {
        text,
        json: json!({
            "command": "check-ch",
            "max_order": max_order,
            "components": docs,
            "mismatch": mismatch,
            "verdict": verdict,
        }),
    };
    rendered.emit(format, out)?;
    Ok(u8::from(!verdict))
}

fn cmd_check_dual(
    path: &Path,
    horizon: Option<usize>,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let components = load_components(path)?;
    let mut text = String::new();
    let mut docs = Vec::new();
    let mut all_subnormal = true;
    let mut gate_failed = false;
    for (i, mg) in components.iter().enumerate() {
        let kappa = mg.structure().kappa();
        let _ = writeln!(text, "{}", report::summary_line(i, mg));
        let table = mg.squared_norms(default_horizon(2, kappa));
        let rank = rank_criterion(mg, &table, 2).map_err(input_err)?;
        if !rank.verdict {
            let _ = writeln!(text, "  dual check requires 2-isometry");
            gate_failed = true;
            docs.push(json!({
                "component": i,
                "two_isometric": false,
                "error": "dual check requires 2-isometry",
            }));
            continue;
        }
        let dw = dual_weights(mg, &table).map_err(input_err)?;
        let dual_h = horizon.unwrap_or(2 * kappa.max(1));
        let dual_table = dual_squared_norms(mg, &dw, dual_h).map_err(input_err)?;
        let cert = match subnormality_check(mg, &dw, &dual_table) {
            Ok(cert) => cert,
            Err(DualError::NotTwoIsometric) => {
                let _ = writeln!(text, "  dual check requires 2-isometry");
                gate_failed = true;
                docs.push(json!({
                    "component": i,
                    "two_isometric": false,
                    "error": "dual check requires 2-isometry",
                }));
                continue;
            }
            Err(e) => return Err(input_err(e)),
        };
        text.push_str(&report::dual_text(&cert));
        all_subnormal &= cert.verdict;
        docs.push(json!({
            "component": i,
            "two_isometric": true,
            "dual": report::dual_json(&cert),
        }));
    }
    let verdict = all_subnormal && !gate_failed;
    let _ = writeln!(text, "dual subnormal: {verdict}");
    let rendered = Rendered {
        text,
        json: json!({
            "command": "check-dual",
            "components": docs,
            "verdict": verdict,
        }),
    };
    rendered.emit(format, out)?;
    Ok(u8::from(!verdict))
}

fn parse_branch(spec: &str) -> Result<(usize, Rational, Rational), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [pos, first, second] = parts.as_slice() else {
        return Err(CliError::msg(format!(
            "branch spec \"{spec}\" must look like I:A:B"
        )));
    };
    let pos: usize = pos
        .parse()
        .map_err(|_| CliError::msg(format!("branch position \"{pos}\" is not an integer")))?;
    let first = parse_field_rational("branch first value", first)?;
    let second = parse_field_rational("branch second value", second)?;
    Ok((pos, first, second))
}

fn cmd_family3(
    kappa: usize,
    mu0: &str,
    branches: &[String],
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let mu0 = parse_field_rational("mu0", mu0)?;
    let mut by_position: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); kappa];
    for spec in branches {
        let (pos, first, second) = parse_branch(spec)?;
        let slot = by_position.get_mut(pos).ok_or_else(|| {
            CliError::msg(format!(
                "branch position {pos} outside cycle of length {kappa}"
            ))
        })?;
        slot.push((first, second));
    }
    let spec = FamilySpec { kappa, mu0, branches: by_position };
    let family = family3_generate(&spec).map_err(input_err)?;
    let file = InstanceFile::from_instance(&family.instance);

    let mut text = String::new();
    let _ = writeln!(text, "q0 = {}", family.q0);
    for (i, mu) in family.cycle_measures.iter().enumerate() {
        let _ = writeln!(text, "mu(c{i}) = {}", format_rational(mu));
    }
    let json = json!({
        "command": "family3",
        "q0": family.q0.coeffs().iter().map(format_rational).collect::<Vec<_>>(),
        "cycle_measures": family.cycle_measures.iter().map(format_rational).collect::<Vec<_>>(),
    });

    match out {
        Some(path) => {
            file.save(path)?;
            let _ = writeln!(text, "instance written to {}", path.display());
            Rendered { text, json }.emit(format, None)?;
        }
        None => {
            // Instance JSON on stdout so it can be piped into a file;
            // the summary goes to stderr.
            let mut body = serde_json::to_string_pretty(&file)?;
            body.push('\n');
            print!("{body}");
            eprint!("{text}");
        }
    }
    Ok(0)
}

fn cmd_paper_example(format: OutputFormat, out: Option<&Path>) -> Result<u8, CliError> {
    let rep = builtin_example_report();
    let mut text = String::new();
    for check in &rep.checks {
        let status = if check.passed { "ok" } else { "MISMATCH" };
        let _ = writeln!(
            text,
            "  {}: {} (expected {}) [{status}]",
            check.name, check.got, check.expected
        );
    }
    let find = |name: &str| {
        rep.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.got.clone())
            .unwrap_or_default()
    };
    let _ = writeln!(text, "D = {}", find("dual cycle product D"));
    let _ = writeln!(text, "subnormal: {}", find("dual subnormal"));
    let _ = writeln!(text, "all checks passed: {}", rep.passed);
    let checks: Vec<Value> = rep
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "expected": c.expected,
                "got": c.got,
                "passed": c.passed,
            })
        })
        .collect();
    let rendered = Rendered {
        text,
        json: json!({
            "command": "paper-example",
            "checks": checks,
            "D": find("dual cycle product D"),
            "subnormal": find("dual subnormal"),
            "passed": rep.passed,
        }),
    };
    rendered.emit(format, out)?;
    Ok(u8::from(!rep.passed))
}
