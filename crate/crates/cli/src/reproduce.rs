use std::path::PathBuf;

use serde::Serialize;
use vcausal_core::geometry::{local_vertices, membership_lp_f64, Membership};
use vcausal_core::inequalities::{evaluate, functional_s};
use vcausal_core::quantum::{shipped_point, behavior_from_quantum, load_measurements, load_state};

use crate::{fmt_sig, parse_input, Outcome, UsageError};

pub const DEFICIT_TOLERANCE: f64 = 1e-10;
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct ReproduceArgs {
    pub state: Option<PathBuf>,
    pub measurements: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub s_value: f64,
    pub violates: bool,
    pub ns_deficit: f64,
    pub ab_local: bool,
    /// Largest deviation of the local model from the AB marginal.
    pub ab_residual: Option<f64>,
    pub ab_model_support: Option<usize>,
    pub ab_vertices: usize,
}

pub fn reproduce_report(args: &ReproduceArgs) -> anyhow::Result<ReproduceReport> {
    let (psi, parties) = match (&args.state, &args.measurements) {
        (None, None) => shipped_point()?,
        (Some(s), Some(m)) => (
            parse_input(s, |t| load_state(t).map(|(_, psi)| psi))?,
            parse_input(m, load_measurements)?,
        ),
        _ => return Err(UsageError("--state and --measurements must be given together".into()).into()),
    };
    let beh = behavior_from_quantum(&psi, &parties)?;
    let s_value = evaluate(&functional_s(), &beh)?;
    let ns_deficit = beh.nonsignaling_deficit();
    let ab = beh.marginal_behavior(&[0, 1])?;
    let vertices = local_vertices(ab.scenario())?;
    let (ab_local, ab_residual, ab_model_support) =
        match membership_lp_f64(ab.table(), &vertices, RESIDUAL_TOLERANCE)? {
            Membership::Member { model, residual } => {
                (residual <= RESIDUAL_TOLERANCE, Some(residual), Some(model.weights.len()))
            }
            Membership::Refused(_) => (false, None, None),
        };
    Ok(ReproduceReport {
        s_value,
        violates: s_value < -2.0,
        ns_deficit,
        ab_local,
        ab_residual,
        ab_model_support,
        ab_vertices: vertices.len(),
    })
}

pub fn run(args: &ReproduceArgs) -> anyhow::Result<Outcome> {
    let r = reproduce_report(args)?;
    let passed = r.violates && r.ns_deficit <= DEFICIT_TOLERANCE && r.ab_local;
    let mut text = format!("S = {}\n", fmt_sig(r.s_value));
    text += &format!(
        "local bound -2 {}\n",
        if r.violates { "violated" } else { "NOT violated" }
    );
    text += &format!("non-signaling deficit = {}\n", fmt_sig(r.ns_deficit));
    match (r.ab_residual, r.ab_model_support) {
        (Some(res), Some(k)) if r.ab_local => {
            text += &format!(
                "AB marginal is local: {k} of {} deterministic vertices, residual {}\n",
                r.ab_vertices,
                fmt_sig(res)
            )
        }
        _ => text += "AB marginal is NOT local\n",
    }
    Outcome::new(passed, text, &r)
}
