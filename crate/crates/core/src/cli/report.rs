//! Human-readable tables of audit reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::audit::AuditReport;
use crate::descent::Init;

use super::CliError;

const REPORT_SUFFIX: &str = ".report.json";

fn collect(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let meta = fs::metadata(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if meta.is_dir() {
        let entries = fs::read_dir(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut found: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with(REPORT_SUFFIX))
            })
            .collect();
        found.sort();
        out.extend(found);
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

pub fn load_report(path: &Path) -> Result<AuditReport, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: not an audit report: {e}", path.display())))
}

/// Four decimals, or three significant digits for tiny positive values
/// that would otherwise print as zero.
fn bound(x: f64) -> String {
    if x > 0.0 && x < 5e-5 {
        format!("{x:.2e}")
    } else {
        format!("{x:.4}")
    }
}

/// One block per report: identity, parameters, estimates with bounds,
/// certificate, theory bounds and verdict.
pub fn format_report(r: &AuditReport) -> String {
    let p = &r.params;
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", r.experiment_id, r.theorem, r.estimator);
    let mut line = format!("  n={} d={} L={}", p.n, p.dim, p.lipschitz);
    if r.theorem != crate::audit::Theorem::Thm1 {
        let _ = write!(
            line,
            " T={} eta={} D={} {:?}",
            p.descent.iterations, p.descent.eta, p.descent.radius, p.descent.projection
        );
        if let Init::Gaussian { sigma } = p.descent.init {
            let _ = write!(line, " sigma={sigma}");
        }
    }
    let _ = write!(line, " trials={} gamma={} seed={}", p.trials, p.gamma, r.seed);
    let _ = writeln!(s, "{line}");
    let _ = writeln!(
        s,
        "  p={:.3} [lo {}], q={:.3} [hi {}]  (p side {:?}, hits {}/{})",
        r.p.p_hat,
        bound(r.p.lo),
        r.q.p_hat,
        bound(r.q.hi),
        r.p_side,
        r.p.hits,
        r.q.hits
    );
    let eps = r.eps_lb.map_or("none".to_string(), |e| format!("{e:.4}"));
    let _ = writeln!(s, "  delta={} eps_lb={}", r.delta, eps);
    if let Some(b) = &r.theory {
        let _ = writeln!(
            s,
            "  theory: {:?} s={} c1={} c2={:e} delta_max={} eps_max={}",
            b.case, b.s_threshold, b.c1, b.c2, b.delta_max, b.eps_max
        );
    }
    let _ = writeln!(s, "  verdict {}", r.verdict);
    s
}

/// Table for every report file named in `paths`; directories contribute
/// their `*.report.json` files.
pub fn report_table(paths: &[PathBuf]) -> Result<String, CliError> {
    let mut files = Vec::new();
    for p in paths {
        collect(p, &mut files)?;
    }
    if files.is_empty() {
        return Err(CliError::Config("no reports found".into()));
    }
    let mut out = String::new();
    for f in files {
        out.push_str(&format_report(&load_report(&f)?));
    }
    Ok(out)
}
