//! Event ordering in a preferred frame where hidden influences travel at a
//! finite speed `v > c`, in one spatial dimension.
//!
//! Cones are closed: an event on the boundary of another's v-cone counts as
//! connected.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    c: f64,
    v: f64,
}

impl Frame {
    pub fn new(c: f64, v: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0 && v > c) {
            return Err(Error::InvalidFrame(format!("need v > c > 0, got c = {c}, v = {v}")));
        }
        Ok(Frame { c, v })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub label: String,
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub fn new(label: impl Into<String>, t: f64, x: f64) -> Self {
        Event {
            label: label.into(),
            t,
            x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// The first event can influence the second.
    Before,
    /// The second event can influence the first.
    After,
    Disconnected,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Before => "<",
            Relation::After => ">",
            Relation::Disconnected => "~",
        }
    }
}

/// `true` when `to` lies in the closed future cone of `from` at `speed`.
fn in_future_cone(from: &Event, to: &Event, speed: f64) -> bool {
    let dt = to.t - from.t;
    dt > 0.0 && (to.x - from.x).abs() <= speed * dt
}

pub fn classify(e1: &Event, e2: &Event, f: &Frame) -> Relation {
    if in_future_cone(e1, e2, f.v) {
        Relation::Before
    } else if in_future_cone(e2, e1, f.v) {
        Relation::After
    } else {
        Relation::Disconnected
    }
}

/// Relation of every ordered pair.
pub fn relation_matrix(events: &[Event], f: &Frame) -> Vec<Vec<Option<Relation>>> {
    events
        .iter()
        .enumerate()
        .map(|(i, a)| {
            events
                .iter()
                .enumerate()
                .map(|(j, b)| (i != j).then(|| classify(a, b, f)))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    /// B measures after A and C.
    Fig2a,
    /// B measures before A and C.
    Fig2b,
    /// B before A and C, with somewhere outside B's light cone to read the
    /// AC statistics.
    Fig3,
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2a" => Ok(Pattern::Fig2a),
            "fig2b" => Ok(Pattern::Fig2b),
            "fig3" => Ok(Pattern::Fig3),
            other => Err(Error::Parse(format!("unknown pattern {other:?}"))),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Fig2a => "fig2a",
            Pattern::Fig2b => "fig2b",
            Pattern::Fig3 => "fig3",
        })
    }
}

/// Earliest point where A's and C's outcomes can meet by light signals,
/// how far outside B's light cone it sits, and the resulting B-to-point
/// signaling speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationPoint {
    pub t: f64,
    pub x: f64,
    /// `|x - x_B| - c (t - t_B)`; positive means outside B's light cone.
    pub margin: f64,
    pub signaling_speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigurationReport {
    pub pattern: Pattern,
    pub passed: bool,
    /// First relation that failed, if any.
    pub violation: Option<String>,
    pub evaluation_point: Option<EvaluationPoint>,
}

/// Apex of the intersection of the future light cones of `a` and `b`.
fn light_cone_meet(a: &Event, b: &Event, c: f64) -> (f64, f64) {
    let (l, r) = if a.x <= b.x { (a, b) } else { (b, a) };
    // Right-going ray from l meets left-going ray from r.
    let x = (l.x + r.x + c * (r.t - l.t)) / 2.0;
    let t = l.t + (x - l.x) / c;
    if x < l.x {
        (r.t, r.x)
    } else if x > r.x {
        (l.t, l.x)
    } else {
        (t, x)
    }
}

/// The point maximizing `|x - x_B| - c (t - t_B)` over the region where the
/// AC statistics can be assembled is its apex, since moving inside a light
/// cone can only shrink that margin.
pub fn evaluation_point(a: &Event, b: &Event, c: &Event, f: &Frame) -> EvaluationPoint {
    let (t, x) = light_cone_meet(a, c, f.c);
    let dt = t - b.t;
    let dx = (x - b.x).abs();
    EvaluationPoint {
        t,
        x,
        margin: dx - f.c * dt,
        signaling_speed: (dt > 0.0).then(|| dx / dt),
    }
}

fn require(a: &Event, b: &Event, want: Relation, f: &Frame) -> Option<String> {
    let got = classify(a, b, f);
    (got != want).then(|| {
        format!(
            "expected {} {} {}, found {} {} {}",
            a.label,
            want.symbol(),
            b.label,
            a.label,
            got.symbol(),
            b.label
        )
    })
}

pub fn validate_configuration(a: &Event, b: &Event, c: &Event, f: &Frame, pattern: Pattern) -> ConfigurationReport {
    let checks: [(&Event, &Event, Relation); 3] = match pattern {
        Pattern::Fig2a => [(a, b, Relation::Before), (c, b, Relation::Before), (a, c, Relation::Disconnected)],
        Pattern::Fig2b | Pattern::Fig3 => {
            [(b, a, Relation::Before), (b, c, Relation::Before), (a, c, Relation::Disconnected)]
        }
    };
    let mut violation = checks.iter().find_map(|(p, q, r)| require(p, q, *r, f));
    let mut evaluation = None;
    if pattern == Pattern::Fig3 {
        let point = evaluation_point(a, b, c, f);
        if violation.is_none() && point.margin <= 0.0 {
            violation = Some(format!(
                "no point outside the light cone of {} sees both {} and {}",
                b.label, a.label, c.label
            ));
        }
        evaluation = Some(point);
    }
    ConfigurationReport {
        pattern,
        passed: violation.is_none(),
        violation,
        evaluation_point: evaluation,
    }
}
