use std::collections::BTreeSet;

use proptest::prelude::*;
use vcausal_core::geometry::fm::{lifts, project_point};
use vcausal_core::geometry::{
    facet_enumeration, fm_project, lp_optimize, membership_lp, vertex_enumeration, Direction, HRep, LpStatus, Row,
    VRep,
};
use vcausal_core::scalar::int;
use vcausal_core::Rational;

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// The box `[-3, 3]^d` cut by extra rows `c.x >= r`, all passing through a
/// neighborhood of the origin so the result is rarely empty.
fn polytope(d: usize, cuts: &[(Vec<i64>, i64)]) -> HRep {
    let mut rows = Vec::new();
    for j in 0..d {
        let mut up = vec![0; d];
        up[j] = -1;
        rows.push(Row::new(ints(&up), int(-3)));
        let mut lo = vec![0; d];
        lo[j] = 1;
        rows.push(Row::new(ints(&lo), int(-3)));
    }
    for (c, r) in cuts {
        rows.push(Row::new(ints(&c[..d]), int(*r)));
    }
    // Cuts whose coefficients vanish on the first d coordinates hold
    // trivially and are dropped.
    HRep::new_pruned(d, rows, Vec::new()).unwrap()
}

fn cut() -> impl Strategy<Value = (Vec<i64>, i64)> {
    (prop::collection::vec(-2i64..=2, 8), -4i64..=0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// A point is in the FM projection exactly when an LP can lift it.
    #[test]
    fn fm_agrees_with_lift_oracle(
        d in 2usize..=8,
        keep_len in 1usize..=3,
        cuts in prop::collection::vec(cut(), 0..=3),
        probes in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 8),
    ) {
        let keep_len = keep_len.min(d - 1);
        let h = polytope(d, &cuts);
        // The origin's neighborhood may be cut away; skip empty polytopes.
        prop_assume!(lifts(&h, &[], &[]).unwrap());
        let keep: Vec<usize> = (0..keep_len).map(|k| (k * 3 + 1) % d).collect::<BTreeSet<_>>().into_iter().collect();
        let p = fm_project(&h, &keep).unwrap();
        for probe in &probes {
            let y: Vec<Rational> = probe[..keep.len()].iter().map(|&v| Rational::new(v.into(), 2.into())).collect();
            prop_assert_eq!(p.contains(&y), lifts(&h, &keep, &y).unwrap(), "probe {:?}", y);
        }
        // Optimal points of the full polytope project inside.
        let objective: Vec<Rational> = (0..d).map(|j| int(j as i64 % 3 - 1)).collect();
        let res = lp_optimize(&objective, &h, Direction::Min).unwrap();
        let x = res.primal.unwrap();
        prop_assert!(p.contains(&project_point(&x, &keep)));
    }

    /// Every certificate verifies exactly, and bounded optima agree with the
    /// best vertex.
    #[test]
    fn lp_certificates_verify(
        d in 1usize..=4,
        cuts in prop::collection::vec(cut(), 0..=4),
        objective in prop::collection::vec(-3i64..=3, 4),
        unbounded in any::<bool>(),
    ) {
        let mut h = polytope(d, &cuts);
        if unbounded {
            // Drop the upper bound on the first coordinate.
            let rows: Vec<Row> = h.inequalities()[1..].to_vec();
            h = HRep::new(d, rows, Vec::new()).unwrap();
        }
        let c = ints(&objective[..d]);
        for dir in [Direction::Min, Direction::Max] {
            let res = lp_optimize(&c, &h, dir).unwrap();
            prop_assert!(res.verify(&c, &h).is_ok());
            if res.status == LpStatus::Optimal && !unbounded {
                let best = vertex_enumeration(&h)
                    .unwrap()
                    .vertices()
                    .iter()
                    .map(|v| v.iter().zip(&c).map(|(a, b)| a * b).sum::<Rational>())
                    .reduce(|a, b| if (dir == Direction::Min) == (a < b) { a } else { b })
                    .unwrap();
                prop_assert_eq!(res.optimum.unwrap(), best);
            }
        }
    }

    /// V -> H -> V returns the extreme points of the input, and every input
    /// point is a convex combination of them.
    #[test]
    fn facet_vertex_round_trip(
        d in 1usize..=4,
        points in prop::collection::vec(prop::collection::vec(-5i64..=5, 4), 1..=40),
    ) {
        let pts: Vec<Vec<Rational>> = points.iter().map(|p| ints(&p[..d])).collect();
        let v = VRep::new(d, pts.clone()).unwrap();
        prop_assume!(v.len() <= 120);
        let h = facet_enumeration(&v).unwrap();
        for p in &pts {
            prop_assert!(h.contains(p));
        }
        let back = vertex_enumeration(&h).unwrap();
        let input: BTreeSet<Vec<Rational>> = pts.iter().cloned().collect();
        for w in back.vertices() {
            prop_assert!(input.contains(w));
        }
        for p in &pts {
            prop_assert!(membership_lp(p, &back).unwrap().is_member());
        }
        let again = facet_enumeration(&back).unwrap();
        let canon = |h: &HRep| h.inequalities().iter().map(|r| r.normalized()).map(|r| (r.coeffs, r.rhs)).collect::<BTreeSet<_>>();
        prop_assert_eq!(canon(&h), canon(&again));
    }
}
