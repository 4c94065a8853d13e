//! End-to-end acceptance checks, one line per criterion. Exits nonzero if
//! any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vcausal_cli::battery::battery_row;
use vcausal_cli::certify::certify_report;
use vcausal_cli::reproduce::{reproduce_report, ReproduceArgs};
use vcausal_core::geometry::fm::lifts;
use vcausal_core::geometry::{
    facet_enumeration, fm_project, lp_optimize, vertex_enumeration, BatteryOptions, Direction, HRep,
    LpStatus, NsSampler, Row, VRep, Verdict,
};
use vcausal_core::inequalities::{evaluate, evaluate_i, functional_s, verify_decomposition};
use vcausal_core::optimizer::{bases_from_measurements, seesaw, seesaw_from, SearchConfig, MONOTONE_SLACK, SANITY_BOUND};
use vcausal_core::quantum::{shipped_point, behavior_from_quantum};
use vcausal_core::scalar::int;
use vcausal_core::spacetime::{classify, validate_configuration, Event, Frame, Pattern, Relation};
use vcausal_core::{DeterministicStrategy, Rational, Scenario};

type Check = anyhow::Result<String>;

fn ensure(cond: bool, msg: impl Into<String>) -> anyhow::Result<()> {
    if cond {
        Ok(())
    } else {
        Err(anyhow::anyhow!(msg.into()))
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> anyhow::Result<()> {
    ensure(
        elapsed < limit,
        format!("{what} took {elapsed:.2?}, limit {limit:?}"),
    )
}

fn headline() -> Check {
    let t = Instant::now();
    let r = reproduce_report(&ReproduceArgs::default())?;
    within(t.elapsed(), Duration::from_secs(1), "reproduce")?;
    ensure(r.s_value < -2.0, format!("S = {} is not below -2", r.s_value))?;
    ensure(
        (r.s_value + 2.00015).abs() <= 2e-4,
        format!("S = {} is more than 2e-4 from -2.00015", r.s_value),
    )?;
    Ok(format!("S = {:.7}", r.s_value))
}

fn quantum_nonsignaling() -> Check {
    let t = Instant::now();
    let (psi, parties) = shipped_point()?;
    let deficit = behavior_from_quantum(&psi, &parties)?.nonsignaling_deficit();
    within(t.elapsed(), Duration::from_secs(1), "deficit")?;
    ensure(deficit <= 1e-10, format!("deficit {deficit:e}"))?;
    Ok(format!("deficit {deficit:.2e}"))
}

fn ab_locality() -> Check {
    let r = reproduce_report(&ReproduceArgs::default())?;
    ensure(r.ab_vertices == 108, format!("{} AB vertices", r.ab_vertices))?;
    ensure(r.ab_local, "AB marginal has no local model")?;
    let residual = r.ab_residual.unwrap_or(f64::INFINITY);
    ensure(residual <= 1e-9, format!("residual {residual:e}"))?;
    Ok(format!(
        "{} of 108 vertices, residual {residual:.2e}",
        r.ab_model_support.unwrap_or(0)
    ))
}

fn identity() -> Check {
    let cert = verify_decomposition()?;
    cert.check()?;
    let s = functional_s();
    let (psi, parties) = shipped_point()?;
    let q = behavior_from_quantum(&psi, &parties)?;
    let gap = evaluate_i(&q)? - evaluate(&s, &q)? - 2.0;
    ensure(gap.abs() <= 1e-9, format!("I - S - 2 = {gap:e} on the quantum point"))?;
    let scenario = Scenario::tripartite_2_333_2();
    let sampler = NsSampler::new(&scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let two = int(2);
    for k in 0..100 {
        let p = sampler.sample(&mut rng);
        let exact = evaluate_i(&p)? - evaluate(&s, &p)? - &two;
        ensure(exact == int(0), format!("I - S - 2 = {exact} on sample {k}"))?;
    }
    Ok(format!("certificate checked; quantum gap {gap:.1e}; 100 exact samples"))
}

fn s_bound_by_lp() -> Check {
    let r = certify_report()?;
    let hi = &r.hidden_influence;
    let ns = &r.non_signaling;
    ensure(hi.certificate_verified && ns.certificate_verified, "certificate failed")?;
    ensure(hi.value == Some(int(-2)), format!("HI minimum {:?}", hi.minimum))?;
    ensure(
        ns.value.as_ref().is_some_and(|v| *v < int(-2)),
        format!("NS minimum {:?}", ns.minimum),
    )?;
    Ok(format!(
        "HI min {}, NS min {}",
        hi.minimum.as_deref().unwrap_or("?"),
        ns.minimum.as_deref().unwrap_or("?")
    ))
}

fn extreme_points() -> Check {
    let t = Instant::now();
    let scenario = Scenario::tripartite_2_333_2();
    let s = functional_s();
    let strategies = DeterministicStrategy::enumerate(&scenario);
    ensure(strategies.len() == 432, format!("{} strategies", strategies.len()))?;
    let mut min = None::<Rational>;
    for d in &strategies {
        let v = evaluate(&s, &d.behavior::<Rational>(&scenario))?;
        ensure(v >= int(-2), format!("strategy {:?} gives {v}", d.outputs()))?;
        if d.outputs().iter().flatten().all(|&o| o == 0) {
            ensure(v == int(2), format!("all-zeros strategy gives {v}"))?;
        }
        min = Some(min.map_or(v.clone(), |m| m.min(v)));
    }
    within(t.elapsed(), Duration::from_secs(10), "sweep")?;
    Ok(format!("432 strategies, minimum {}", min.unwrap()))
}

fn table_rows() -> Check {
    let options = BatteryOptions::default();
    let mut summary = Vec::new();
    for name in ["{[2 2][2 2][2 2]}", "{[3 2][2 2][2 2]}"] {
        let r = battery_row(&Scenario::parse_notation(name)?, options)?;
        ensure(
            r.method == "projection" && r.ns_violation == Verdict::No && r.quantum_violation == Verdict::No,
            format!("{name}: {:?} {:?} via {}", r.ns_violation, r.quantum_violation, r.method),
        )?;
        summary.push(format!("{name} equal"));
    }
    let r = battery_row(&Scenario::tripartite_2_333_2(), options)?;
    ensure(
        r.ns_violation == Verdict::Yes && r.quantum_violation == Verdict::Yes,
        format!("2-333-2: {:?} {:?}", r.ns_violation, r.quantum_violation),
    )?;
    summary.push("{[2 2][3 3 3][2 2]} NS and quantum violating".into());
    Ok(summary.join("; "))
}

fn optimizer() -> Check {
    let s = functional_s();
    let (_, parties) = shipped_point()?;
    let run = seesaw_from(&s, bases_from_measurements(&parties)?, &SearchConfig::default())?;
    for w in run.history.windows(2) {
        ensure(w[1] <= w[0] + MONOTONE_SLACK, format!("history rose from {} to {}", w[0], w[1]))?;
    }
    ensure(
        run.value <= -2.00015 + 1e-9,
        format!("seeded run ended at {}", run.value),
    )?;
    let cfg = SearchConfig {
        seeds: 50,
        ..SearchConfig::default()
    };
    let res = seesaw(&s, &cfg)?;
    ensure(res.per_seed.len() >= 50, "fewer than 50 seeds")?;
    ensure(
        res.per_seed.iter().all(|&v| v >= SANITY_BOUND),
        "a seed went below the sanity bound",
    )?;
    let best = res.best.value;
    ensure(
        (-2.0004..=-2.0001).contains(&best),
        format!("best over seeds {best}"),
    )?;
    Ok(format!("seeded {:.7}, best of 50 random {best:.7}", run.value))
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn random_polytope(rng: &mut ChaCha8Rng, d: usize) -> anyhow::Result<HRep> {
    let mut rows = Vec::new();
    for j in 0..d {
        let mut up = vec![0; d];
        up[j] = -1;
        rows.push(Row::new(ints(&up), int(-3)));
        let mut lo = vec![0; d];
        lo[j] = 1;
        rows.push(Row::new(ints(&lo), int(-3)));
    }
    for _ in 0..rng.gen_range(0..=3) {
        let c: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
        rows.push(Row::new(ints(&c), int(rng.gen_range(-4..=0))));
    }
    Ok(HRep::new_pruned(d, rows, Vec::new())?)
}

fn geometry_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fm_cases = 0;
    let mut lp_solves = 0;
    while fm_cases < 50 {
        let d = rng.gen_range(2..=8);
        let h = random_polytope(&mut rng, d)?;
        if !lifts(&h, &[], &[])? {
            continue;
        }
        let keep: Vec<usize> = (0..rng.gen_range(1..d.min(4)))
            .map(|_| rng.gen_range(0..d))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let p = fm_project(&h, &keep)?;
        for _ in 0..8 {
            let y: Vec<Rational> = keep
                .iter()
                .map(|_| Rational::new(rng.gen_range(-8i64..=8).into(), 2.into()))
                .collect();
            ensure(
                p.contains(&y) == lifts(&h, &keep, &y)?,
                format!("FM and lift oracle disagree at {y:?}"),
            )?;
        }
        fm_cases += 1;
        for dir in [Direction::Min, Direction::Max] {
            let c: Vec<Rational> = (0..d).map(|_| int(rng.gen_range(-3..=3))).collect();
            let res = lp_optimize(&c, &h, dir)?;
            res.verify(&c, &h)?;
            ensure(res.status == LpStatus::Optimal, "bounded LP not optimal")?;
            lp_solves += 1;
        }
    }
    let mut round_trips = 0;
    while round_trips < 50 {
        let d = rng.gen_range(1..=4);
        let pts: Vec<Vec<Rational>> = (0..rng.gen_range(1..=40))
            .map(|_| (0..d).map(|_| int(rng.gen_range(-5..=5))).collect())
            .collect();
        let v = VRep::new(d, pts.clone())?;
        if v.len() > 120 {
            continue;
        }
        let h = facet_enumeration(&v)?;
        let back = vertex_enumeration(&h)?;
        let again = facet_enumeration(&back)?;
        let canon = |h: &HRep| {
            h.inequalities()
                .iter()
                .map(|r| r.normalized())
                .map(|r| (r.coeffs, r.rhs))
                .collect::<BTreeSet<_>>()
        };
        ensure(pts.iter().all(|p| h.contains(p)), "input point outside its hull")?;
        ensure(canon(&h) == canon(&again), "facets changed across a round trip")?;
        round_trips += 1;
    }
    Ok(format!(
        "{fm_cases} FM cases, {lp_solves} certified LPs, {round_trips} round trips"
    ))
}

fn spacetime_suite() -> Check {
    let f = Frame::new(1.0, 3.0)?;
    let o = Event::new("o", 0.0, 0.0);
    ensure(classify(&o, &Event::new("p", 1.0, 0.0), &f) == Relation::Before, "colocated")?;
    ensure(classify(&o, &Event::new("p", 0.0, 5.0), &f) == Relation::Disconnected, "simultaneous")?;
    ensure(classify(&o, &Event::new("p", 1.0, f.v()), &f) == Relation::Before, "cone boundary")?;
    let a = Event::new("A", 1.0, -1.0);
    let b = Event::new("B", 0.0, 0.0);
    let c = Event::new("C", 1.0, 1.0);
    ensure(validate_configuration(&a, &b, &c, &f, Pattern::Fig2b).passed, "fig2b")?;
    ensure(!validate_configuration(&a, &b, &c, &f, Pattern::Fig2a).passed, "fig2a accepted")?;
    let mut speeds = Vec::new();
    for gap in [0.5, 0.1, 0.01, 0.001] {
        let a = Event::new("A", 1.0, f.v() - 2.0 * gap);
        let c = Event::new("C", 1.0, f.v() - gap);
        let r = validate_configuration(&a, &b, &c, &f, Pattern::Fig3);
        ensure(r.passed, format!("fig3 at gap {gap}: {:?}", r.violation))?;
        speeds.push(r.evaluation_point.and_then(|p| p.signaling_speed).unwrap_or(0.0));
    }
    ensure(speeds.windows(2).all(|w| w[1] > w[0]), "speed not increasing")?;
    let last = *speeds.last().unwrap();
    ensure(last > f.c() && f.v() - last < 0.01, format!("speed {last}"))?;
    Ok(format!("signaling speeds {speeds:.4?} toward v = 3"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("headline violation", headline),
        ("quantum point is non-signaling", quantum_nonsignaling),
        ("AB marginal is local", ab_locality),
        ("identity certificate", identity),
        ("S bound by exact LP", s_bound_by_lp),
        ("extreme-point sweep", extreme_points),
        ("desk-scale battery rows", table_rows),
        ("optimizer calibration", optimizer),
        ("geometry property suite", geometry_suite),
        ("spacetime suite", spacetime_suite),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err(anyhow::anyhow!("panicked")));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(e) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {e:#} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
