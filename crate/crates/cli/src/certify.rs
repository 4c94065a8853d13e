use serde::Serialize;
use vcausal_core::geometry::{hi_hrep, lp_optimize, ns_hrep, Direction, HRep, LpStatus};
use vcausal_core::inequalities::{functional_s, verify_decomposition};
use vcausal_core::{Rational, Scenario};

use crate::Outcome;

#[derive(Debug, Clone, Serialize)]
pub struct LpBound {
    /// Exact optimum as `p/q`, absent when the LP was not optimal.
    pub minimum: Option<String>,
    pub certificate_verified: bool,
    #[serde(skip)]
    pub value: Option<Rational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub identity_verified: bool,
    pub identity_error: Option<String>,
    pub identity_terms: usize,
    pub hidden_influence: LpBound,
    pub non_signaling: LpBound,
}

fn minimize_s(h: &HRep) -> anyhow::Result<LpBound> {
    let objective = functional_s().joint_vector();
    let res = lp_optimize(&objective, h, Direction::Min)?;
    let certificate_verified = res.verify(&objective, h).is_ok();
    let value = (res.status == LpStatus::Optimal).then(|| res.optimum.clone()).flatten();
    Ok(LpBound {
        minimum: value.as_ref().map(ToString::to_string),
        certificate_verified,
        value,
    })
}

pub fn certify_report() -> anyhow::Result<CertifyReport> {
    let (identity_verified, identity_error, identity_terms) = match verify_decomposition() {
        Ok(cert) => (cert.check().is_ok(), None, cert.terms.len()),
        Err(e) => (false, Some(e.to_string()), 0),
    };
    let scenario = Scenario::tripartite_2_333_2();
    Ok(CertifyReport {
        identity_verified,
        identity_error,
        identity_terms,
        hidden_influence: minimize_s(&hi_hrep(&scenario, 1)?)?,
        non_signaling: minimize_s(&ns_hrep(&scenario))?,
    })
}

pub fn run() -> anyhow::Result<Outcome> {
    let r = certify_report()?;
    let minus_two = Rational::from_integer((-2).into());
    let hi_ok = r.hidden_influence.certificate_verified && r.hidden_influence.value.as_ref() == Some(&minus_two);
    let ns_ok = r.non_signaling.certificate_verified
        && r.non_signaling.value.as_ref().is_some_and(|v| *v < minus_two);
    let mut text = String::new();
    if r.identity_verified {
        text += &format!("I = S + 2 verified ({} terms)", r.identity_terms);
    } else {
        text += &format!(
            "I = S + 2 FAILED: {}",
            r.identity_error.as_deref().unwrap_or("certificate check failed")
        );
    }
    let show = |b: &LpBound| b.minimum.clone().unwrap_or_else(|| "none".into());
    text += &format!("; LP min over HI polytope = {}\n", show(&r.hidden_influence));
    text += &format!("LP min over NS polytope = {}\n", show(&r.non_signaling));
    for (name, b) in [("HI", &r.hidden_influence), ("NS", &r.non_signaling)] {
        if !b.certificate_verified {
            text += &format!("{name} certificate did NOT verify\n");
        }
    }
    Outcome::new(r.identity_verified && hi_ok && ns_ok, text, &r)
}
