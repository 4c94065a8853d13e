use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;
use vcausal_core::inequalities::functional_s;
use vcausal_core::optimizer::{bases_from_measurements, seesaw, seesaw_from, SearchConfig, SeesawRun};
use vcausal_core::quantum::{shipped_point, measurements_to_json, state_to_json};

use crate::{fmt_sig, Outcome};

#[derive(Debug, Clone)]
pub struct OptimizeArgs {
    pub config: SearchConfig,
    /// Start from the shipped measurements instead of random bases.
    pub from_shipped: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeReport {
    pub best: f64,
    pub start: &'static str,
    pub seeds: usize,
    pub per_seed: Vec<f64>,
    /// S after every round of the best run.
    pub history: Vec<f64>,
}

pub fn optimize_run(args: &OptimizeArgs) -> anyhow::Result<(SeesawRun, OptimizeReport)> {
    let f = functional_s();
    let (best, per_seed, start) = if args.from_shipped {
        let (_, parties) = shipped_point()?;
        let run = seesaw_from(&f, bases_from_measurements(&parties)?, &args.config)?;
        let v = run.value;
        (run, vec![v], "shipped")
    } else {
        let res = seesaw(&f, &args.config)?;
        (res.best, res.per_seed, "random")
    };
    let report = OptimizeReport {
        best: best.value,
        start,
        seeds: per_seed.len(),
        per_seed,
        history: best.history.clone(),
    };
    Ok((best, report))
}

fn write_outputs(dir: &PathBuf, run: &SeesawRun, report: &OptimizeReport) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let dims: Vec<usize> = run.measurements.iter().map(|m| m.local_dim()).collect();
    let state = state_to_json(&dims, &run.state);
    let meas: Vec<_> = run
        .bases
        .iter()
        .enumerate()
        .map(|(p, b)| measurements_to_json(p, b))
        .collect();
    for (name, value) in [
        ("state.json", serde_json::to_string_pretty(&state)?),
        ("measurements.json", serde_json::to_string_pretty(&meas)?),
        ("log.json", serde_json::to_string_pretty(report)?),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, value + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn run(args: &OptimizeArgs) -> anyhow::Result<Outcome> {
    let (best, report) = optimize_run(args)?;
    if let Some(dir) = &args.out {
        write_outputs(dir, &best, &report)?;
    }
    let mut text = format!("best S = {} over {} {} start(s)\n", fmt_sig(report.best), report.seeds, report.start);
    text += &format!("rounds in best run: {}\n", report.history.len().saturating_sub(1));
    let line: Vec<String> = report.history.iter().map(|v| fmt_sig(*v)).collect();
    text += &format!("history: {}\n", line.join(" "));
    if let Some(dir) = &args.out {
        text += &format!("wrote state, measurements and log to {}\n", dir.display());
    }
    Outcome::new(report.best < -2.0, text, &report)
}
