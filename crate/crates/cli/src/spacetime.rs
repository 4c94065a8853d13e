use std::path::Path;

use serde::{Deserialize, Serialize};
use vcausal_core::spacetime::{relation_matrix, validate_configuration, ConfigurationReport, Event, Frame, Pattern};

use crate::{parse_input, Outcome, UsageError};

#[derive(Debug, Clone, Deserialize)]
pub struct EventsFile {
    pub events: Vec<Event>,
    pub c: f64,
    pub v: f64,
    #[serde(default)]
    pub pattern: Option<Pattern>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpacetimeReport {
    pub labels: Vec<String>,
    /// `relations[i][j]` is `<`, `>` or `~` for event `i` against `j`.
    pub relations: Vec<Vec<String>>,
    pub configuration: Option<ConfigurationReport>,
}

pub fn spacetime_report(file: &EventsFile) -> anyhow::Result<SpacetimeReport> {
    let frame = Frame::new(file.c, file.v).map_err(|e| UsageError(e.to_string()))?;
    let relations = relation_matrix(&file.events, &frame)
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|r| r.map_or("-", |r| r.symbol()).to_string())
                .collect()
        })
        .collect();
    let configuration = match file.pattern {
        None => None,
        Some(pattern) => {
            let find = |label: &str| {
                file.events
                    .iter()
                    .find(|e| e.label == label)
                    .ok_or_else(|| UsageError(format!("pattern {pattern} needs an event labelled {label}")))
            };
            Some(validate_configuration(find("A")?, find("B")?, find("C")?, &frame, pattern))
        }
    };
    Ok(SpacetimeReport {
        labels: file.events.iter().map(|e| e.label.clone()).collect(),
        relations,
        configuration,
    })
}

pub fn run(path: &Path) -> anyhow::Result<Outcome> {
    let file: EventsFile = parse_input(path, |t| Ok(serde_json::from_str(t)?))?;
    let r = spacetime_report(&file)?;
    let width = r.labels.iter().map(String::len).max().unwrap_or(1);
    let mut text = format!("{:width$}", "");
    for l in &r.labels {
        text += &format!(" {l:>width$}");
    }
    text.push('\n');
    for (l, row) in r.labels.iter().zip(&r.relations) {
        text += &format!("{l:width$}");
        for cell in row {
            text += &format!(" {cell:>width$}");
        }
        text.push('\n');
    }
    let mut passed = true;
    if let Some(c) = &r.configuration {
        passed = c.passed;
        text += &format!("pattern {}: {}\n", c.pattern, if c.passed { "pass" } else { "FAIL" });
        if let Some(v) = &c.violation {
            text += &format!("  {v}\n");
        }
        if let Some(p) = &c.evaluation_point {
            text += &format!(
                "  evaluation point t = {}, x = {}, margin outside B's light cone {}\n",
                crate::fmt_sig(p.t),
                crate::fmt_sig(p.x),
                crate::fmt_sig(p.margin)
            );
            if let (true, Some(speed)) = (c.passed, p.signaling_speed) {
                text += &format!("  signaling speed {}\n", crate::fmt_sig(speed));
            }
        }
    }
    Outcome::new(passed, text, &r)
}
