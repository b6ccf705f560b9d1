//! Hahn quantum calculus and the spectral theory of the q,omega-Dirac
//! system: lattice calculus, q,omega-trigonometric functions, a Picard
//! solver for the system and an eigenvalue finder for its boundary-value
//! problem.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod function;
pub mod hahn;
pub mod roots;
pub mod solver;
pub mod spectrum;
pub mod sum;
pub mod trig;
pub mod verify;

pub use error::{Error, Result};
pub use function::{Polynomial, RealFunction};
pub use hahn::{
    dual_derivative, h_apply, hahn_derivative, inner_product, jn_integral, jn_integral_from_fixed_point, q_bracket,
    q_pochhammer, vector_inner_product, HahnParams, LatticeGrid, SeriesSum,
};
pub use solver::{
    convergence_bound, fundamental_pair, picard_solve, picard_solve_with, residual, solve_free, wronskian,
    ConvergenceReport, PicardForm, PicardOptions, Potentials, VectorSolution,
};
pub use spectrum::{
    asymptotic_eigenvalue, characteristic, find_eigenvalues, find_eigenvalues_with, norm_identity_defect,
    orthogonality_defect, phi_solution, BoundarySpec, FreeExample, SpectrumOptions, SpectrumResult,
};
pub use trig::{cos_qw, sin_qw, trig_zero, trig_zero_report, TrigEval, TrigKind, ZeroReport};
