//! Compatibility of fundamental matrices.
//!
//! Given a complete set `{F^ij}` of fundamental matrices for `n` views, this
//! crate decides whether the set is realizable by a common list of cameras,
//! classifies the camera-center geometry from the epipole configuration, and
//! builds witness cameras when the set is compatible.
//!
//! Views are numbered from 1 everywhere in the public API, so `set.get(1, 2)`
//! is `F^12` and `set.epipole(1, 2)` is `e_2^1`, the image of camera 1's center
//! in image 2.
//!
//! Module map:
//!
//! * [`projective`]: normalization, projective equality, `[t]_x`, nullspaces,
//!   lines in P^3 and camera fitting from point constraints.
//! * [`fundamental`]: `psi`, fundamental sets, epipoles, epipolar numbers, the
//!   fundamental action and two-view solutions.
//! * [`classify`]: the non-collinear/collinear triple cases and Cases 1-4 for
//!   quadruples.
//! * [`compatibility`]: triplewise, quadruplewise and n-view checks.
//! * [`reconstruction`]: witness cameras and skew-symmetry certificates.
//! * [`synth`]: seeded camera generators and corruption helpers.

pub mod classify;
pub mod compatibility;
mod error;
pub mod fundamental;
mod linalg;
pub mod projective;
pub mod reconstruction;
pub mod synth;
mod tolerances;

pub use classify::{classify_quadruple, classify_triple, QuadCase, QuadClass, TripleClass, TripleLabel};
pub use compatibility::{
    check_case1, check_case1_geometric, check_case2, check_case2_simpler, check_case3, check_case4,
    check_multiview, check_quadruple, check_triple, AuxStrategy, Case2Options, CheckOptions,
    Classification, CompatibilityReport, LongFormMode, SubsetOutcome, Verdict,
};
pub use error::{Error, Result};
pub use fundamental::{
    apply_action, epipolar_line, epipolar_number, is_skew_certified, make_set, psi, two_view_cameras,
    AuxiliaryPoints5, FundamentalMatrix, FundamentalSet, Source,
};
pub use projective::{Camera, Line3, Point2, Point3};
pub use reconstruction::{
    reconstruct_case1, reconstruct_case2, reconstruct_case3, reconstruct_case4, reconstruct_multiview,
    reconstruct_triple, reconstruct_two, verify_solution, CameraSolution, Certificate, Uniqueness,
};
pub use synth::{generate_cameras, perturb_set, random_rank2_set, set_from_cameras, CaseLabel, CaseSpec};
pub use tolerances::Tolerances;
