use serde::Serialize;
use vcausal_core::geometry::{scenario_battery, BatteryOptions, BatteryReport, MarginalMap, Verdict};
use vcausal_core::inequalities::functional_s;
use vcausal_core::quantum::{shipped_point, behavior_from_quantum};
use vcausal_core::Scenario;

use crate::{fm_options, Outcome, UsageError};

/// Rows decided at desk scale.
pub const DEFAULT_ROWS: [&str; 3] = ["{[2 2][2 2][2 2]}", "{[3 2][2 2][2 2]}", "{[2 2][3 3 3][2 2]}"];

/// Further rows, attempted only on request and under the size guards.
pub const EXTRA_ROWS: [&str; 5] = [
    "{[3 3][3 3][3 3]}",
    "{[2 2][3 2][2 2]}",
    "{[2 2][3 3][2 2]}",
    "{[2 2][3 2][3 2]}",
    "{[2 2][3 3][3 2]}",
];

#[derive(Debug, Clone, Default)]
pub struct BatteryArgs {
    /// Explicit rows; empty means [`DEFAULT_ROWS`].
    pub rows: Vec<String>,
    pub all: bool,
    /// Random LP directions tried when a projection hits a size guard.
    pub directions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryRow {
    pub scenario: String,
    pub ns_violation: Verdict,
    pub quantum_violation: Verdict,
    pub method: &'static str,
    pub separating_inequalities: usize,
    pub diagnostics: Vec<String>,
}

impl From<&BatteryReport> for BatteryRow {
    fn from(r: &BatteryReport) -> Self {
        BatteryRow {
            scenario: r.scenario.to_string(),
            ns_violation: r.ns_violation,
            quantum_violation: r.quantum_violation,
            method: r.method,
            separating_inequalities: r.separating.len(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

/// One row, conditioned on the middle party. The tripartite scenario with
/// a three-input middle party also gets the inequality S as a direction and
/// the shipped quantum point.
pub fn battery_row(scenario: &Scenario, options: BatteryOptions) -> anyhow::Result<BatteryReport> {
    let mut directions = Vec::new();
    let mut quantum = None;
    if *scenario == Scenario::tripartite_2_333_2() {
        let map = MarginalMap::new(scenario, 1)?;
        if let Some(d) = map.push_forward(&functional_s().joint_vector()) {
            directions.push(d);
        }
        let (psi, parties) = shipped_point()?;
        quantum = Some(behavior_from_quantum(&psi, &parties)?);
    }
    Ok(scenario_battery(scenario, 1, &directions, quantum.as_ref(), options)?)
}

pub fn run(args: &BatteryArgs) -> anyhow::Result<Outcome> {
    let mut names: Vec<String> = if args.rows.is_empty() {
        DEFAULT_ROWS.iter().map(|s| s.to_string()).collect()
    } else {
        args.rows.clone()
    };
    if args.all {
        names.extend(EXTRA_ROWS.iter().map(|s| s.to_string()));
    }
    let scenarios = names
        .iter()
        .map(|n| Scenario::parse_notation(n).map_err(|e| UsageError(format!("row {n:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let options = BatteryOptions {
        fm: fm_options()?,
        directions: args.directions,
        seed: args.seed,
    };
    let mut rows = Vec::new();
    for s in &scenarios {
        rows.push(BatteryRow::from(&battery_row(s, options)?));
    }
    let width = rows.iter().map(|r| r.scenario.len()).max().unwrap_or(8).max(8);
    let mut text = format!("{:width$}  N-S  Quantum  method\n", "Scenario");
    for r in &rows {
        text += &format!(
            "{:width$}  {}    {}        {}\n",
            r.scenario,
            r.ns_violation.mark(),
            r.quantum_violation.mark(),
            r.method
        );
        for d in &r.diagnostics {
            text += &format!("    {d}\n");
        }
    }
    Outcome::new(true, text, &rows)
}
