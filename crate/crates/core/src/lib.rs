//! Matrix representations of composition operators on `L^2[0,1]` and the
//! two rectangular finite-section methods for solving `C x = y`:
//! overdetermined least squares and underdetermined minimum norm.
//!
//! ```
//! use finsec_core::{represent, Basis, Diffeomorphism, Rhs, Solver};
//!
//! let rep = represent(Diffeomorphism::poly_quadratic(), Basis::Fourier).unwrap();
//! let sol = Solver::new(&rep).solve_underdetermined(&Rhs::unit(1), 4, 8).unwrap();
//! assert!(sol.residual_norm < 1e-12);
//! ```

pub mod basis;
pub mod comp_op;
pub mod det_theorem;
pub mod error;
pub mod finite_section;
pub mod linalg;
pub mod matrix_rep;
pub mod verify;

pub use basis::{coefficients, inner_product, inner_product_with_estimate, Basis, Estimate, QuadratureRule};
pub use comp_op::{Catalog, CompositionOperator, Diffeomorphism, NormBounds};
pub use det_theorem::{check_det_inequality, minor_sum_identity, DetCheckResult, MinorSumIdentity};
pub use error::{Error, Result};
pub use finite_section::{
    converge_over, converge_under, manufacture, solve_overdetermined, solve_underdetermined, ConvergenceRecord,
    Manufactured, Method, Schedule, SectionSolution, Solver, TrueSolution,
};
pub use linalg::{least_squares, min_norm_solve, svd, DenseMatrix, Svd, DEFAULT_RANK_TOL};
pub use matrix_rep::{represent, InfiniteMatrixRep, Rhs, SchurReport};
pub use verify::{CheckRow, Suite};
