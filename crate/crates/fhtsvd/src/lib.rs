//! Spectral asymptotics of the finite Hilbert transform on several intervals.
//!
//! The operator couples a union of interior intervals to a pair of exterior
//! ones.  Its singular values decay geometrically with a rate controlled by
//! the `(1,1)` entry of the period matrix of the hyperelliptic surface whose
//! branch points are the interval endpoints, and the singular values
//! themselves are located by intersections of a straight line with the theta
//! divisor in the Jacobian.  This crate computes both sides of that story:
//!
//! * [`surface`] builds the interval geometry, the radical, the normalized
//!   differentials and the period matrix;
//! * [`theta`] evaluates the Riemann theta function, its gradient and theta
//!   with integer characteristics;
//! * [`abel`] provides the Abel map, Riemann constants and the spectral line;
//! * [`gfun`] assembles the scalar g- and d-functions, their jump constants
//!   and the prefactor data for the model problem;
//! * [`spectrum`] finds the approximate singular values as theta zeros,
//!   solves for the divisor points and evaluates asymptotic singular
//!   functions and the model matrix;
//! * [`oracle`] cross-validates everything with exact singular values from a
//!   high-relative-accuracy discretization of the integral kernels.

pub mod abel;
pub mod error;
pub mod gfun;
pub mod oracle;
pub mod quad;
pub mod spectrum;
pub mod surface;
pub mod svd;
pub mod theta;

pub use abel::{abel_infinity, abel_map, build_abel_data, lattice_reduce, spectral_line, AbelData};
pub use error::{Error, Result};
pub use gfun::{build_jump_data, JumpData};
pub use oracle::{DiscretizedOperator, ExactSpectrum};
pub use spectrum::{
    asymptotic_singular_functions, build_model_psi, find_eigenvalues, norm_constants,
    real_line_indicator, solve_divisor, theta_line, SpectralAsymptotics, SpectralContext,
};
pub use surface::{build_period_data, IntervalSystem, PeriodData, Sheet, Shore, SurfacePoint};
pub use theta::ThetaContext;
