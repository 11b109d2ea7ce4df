//! Numerical laboratory for spherically symmetric Finsler metrics
//! `F = |y|·φ(|x|, ⟨x,y⟩/|y|)`.
//!
//! Profiles are evaluated as truncated Taylor jets, so every partial of `φ`
//! up to total order three is exact to rounding. On top of that sit the
//! spray coefficients, volume densities, the reduced S-curvature, the
//! Douglas test, Randers formulas, solution families and a geodesic oracle.

// `!(x > 0.0)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod douglas;
pub mod error;
pub mod expr;
pub mod families;
pub mod geometry;
pub mod grid;
pub mod oracle;
pub mod quadrature;
pub mod randers;
pub mod scurvature;
pub mod volume;
pub mod zoo;

pub use douglas::{douglas_verdict, fit_q, DouglasFit, QFit};
pub use error::{Error, Result};
pub use expr::{
    eval_jet, parse_expression, ExpressionTree, HermiteTable, Jet3, ScalarFunction, Var,
};
pub use families::{
    bh_solve_g, bh_system_residual, build_berwald_family, ht_condition_residual, ht_solve_h,
    lemma33_residual, system31_residual, BhSystemResidual, FamilyBuildResult, OdeSolution,
};
pub use geometry::{
    assemble_metric_matrix, metric_determinant, phi_jet, regularity_scan, spray_values,
    BerwaldProfile, MetricKind, MetricSpec, RegularityReport, SprayValues,
};
pub use grid::{r_grid, s_grid, RDomain};
pub use oracle::{distortion, integrate_geodesic, s_by_distortion, GeodesicState, Trajectory};
pub use quadrature::{GaussLegendre, QuadratureRule};
pub use randers::{
    christoffel_coefficients, covariant_b_coefficients, lemma42_check, randers_reduced_s,
    randers_reduced_s_as_printed, Lemma42Report, RandersCoefficients,
};
pub use scurvature::{isotropy_profile, reduced_s, IsotropyReport};
pub use volume::{density, density_jet, f_coefficient, sigma_bh, sigma_ht, VolumeKind, VolumeSpec};
