use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use vcausal_core::geometry::{fm_project_with, HRep, HRepFile};

use crate::{fm_options, parse_input, Outcome, UsageError};

#[derive(Debug, Clone)]
pub struct ProjectArgs {
    pub input: PathBuf,
    /// Coordinates kept, in output order.
    pub keep: Vec<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectReport {
    pub projection: HRepFile,
    pub eliminated_by_equalities: usize,
    pub eliminated_by_combination: usize,
    pub peak_rows: usize,
    pub lp_tests: usize,
    pub lp_removed: usize,
}

pub fn project_file(input: &Path, keep: &[usize]) -> anyhow::Result<ProjectReport> {
    let h = parse_input(input, |t| HRep::from_json(&serde_json::from_str::<HRepFile>(t)?))?;
    if let Some(&bad) = keep.iter().find(|&&k| k >= h.dim()) {
        return Err(UsageError(format!("coordinate {bad} out of range for dimension {}", h.dim())).into());
    }
    let (p, stats) = fm_project_with(&h, keep, fm_options()?)?;
    Ok(ProjectReport {
        projection: p.to_json(),
        eliminated_by_equalities: stats.eliminated_by_equalities,
        eliminated_by_combination: stats.eliminated_by_combination,
        peak_rows: stats.peak_rows,
        lp_tests: stats.lp_tests,
        lp_removed: stats.lp_removed,
    })
}

fn render_rows(text: &mut String, rows: &[vcausal_core::geometry::RowFile], op: &str) {
    for r in rows {
        let mut lhs = String::new();
        for (k, c) in r.coeffs.iter().enumerate().filter(|(_, c)| c.as_str() != "0") {
            let (sign, mag) = match c.strip_prefix('-') {
                Some(m) => ("-", m),
                None => ("+", c.as_str()),
            };
            if lhs.is_empty() {
                lhs += if sign == "-" { "-" } else { "" };
            } else {
                lhs += &format!(" {sign} ");
            }
            if mag != "1" {
                lhs += &format!("{mag}*");
            }
            lhs += &format!("x{k}");
        }
        if lhs.is_empty() {
            lhs.push('0');
        }
        *text += &format!("{lhs} {op} {}\n", r.rhs);
    }
}

pub fn run(args: &ProjectArgs) -> anyhow::Result<Outcome> {
    let r = project_file(&args.input, &args.keep)?;
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&r.projection)? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
    }
    let mut text = format!(
        "{} inequalities, {} equalities in dimension {} (peak {} rows, {} removed by LP)\n",
        r.projection.inequalities.len(),
        r.projection.equalities.len(),
        r.projection.dim,
        r.peak_rows,
        r.lp_removed
    );
    render_rows(&mut text, &r.projection.inequalities, ">=");
    render_rows(&mut text, &r.projection.equalities, "=");
    Outcome::new(true, text, &r)
}
