//! Exact convex geometry of behavior polytopes.

pub mod battery;
pub mod dd;
pub mod fm;
pub mod hrep;
pub mod linalg;
pub mod lp;
pub mod membership;
pub mod polytopes;
pub mod projection;
pub(crate) mod simplex;

pub use hrep::{HRep, HRepFile, Row, RowFile, VRep, VRepFile};
pub use lp::{feasible_point, lp_optimize, Direction, DualCertificate, LpResult, LpStatus};
pub use dd::{extreme_rays, facet_enumeration, vertex_enumeration};
pub use fm::{fm_project, fm_project_preferring, fm_project_with, FmOptions, FmStats, DEFAULT_ROW_CAP};
pub use polytopes::{
    hi_hrep, lifted_locality_rows, local_vertices, nontrivial_local_facets, ns_hrep, NsSampler,
};
pub use membership::{
    inclusion_witness, membership_lp, membership_lp_f64, polytope_equal, LocalModel, Membership,
    PolytopeComparison, Separation,
};
pub use projection::{projected_polytopes, MarginalMap};
pub use battery::{
    directional_gap, lift_marginals, projection_coincidence, scenario_battery, BatteryOptions,
    BatteryReport, Coincidence, DirectionalGap, MarginalInequality, Verdict,
};
