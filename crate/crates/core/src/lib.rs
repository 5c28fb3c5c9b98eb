//! Norm estimates for generalised Airy operators A = -d/dx + W(x) on the
//! real line, with W nonnegative, even and unbounded.
//!
//! The crate computes, bounds and cross-validates the resolvent norm
//! ||(A - lambda)^{-1}|| (asymptotic formula, Nystrom discretization,
//! Schur-test upper bound, witness lower bound) and the contraction
//! semigroup norm ||S_t||, and emits the pseudospectral level curves these
//! norms induce for Schrodinger and damped-wave operators.
//!
//! Norm-scale values are natural logarithms throughout: the norms grow
//! like exp(2 f_lambda(x_lambda)) and overflow any binary float long
//! before the asymptotic regime is reached.

pub mod applications;
pub mod cli;
pub mod numerics;
pub mod potential;
pub mod resolvent;
pub mod semigroup;
pub mod spectral;

pub use potential::{Family, Potential, ValidationReport};
pub use resolvent::{KernelDiscretization, ResolventEstimate};
pub use spectral::SpectralProfile;
