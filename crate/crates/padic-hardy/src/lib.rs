//! Exact analysis toolkit for averaging operators on the p-adic line and
//! its n-fold products.
//!
//! The crate provides, from the ground up:
//!
//! - canonical p-adic scalars, vectors, balls and spheres with exact
//!   rational Haar measures ([`scalar`], [`geometry`]);
//! - radial shell functions with closed-form tails, over exact rational or
//!   fixed-precision real coefficients ([`shell`]);
//! - weighted Lebesgue, Herz and mean-oscillation norms evaluated in closed
//!   form wherever the tail class allows it ([`norms`]);
//! - the Hardy-type averaging operator, its diagonal-inclusive adjoint, the
//!   one-dimensional Hardy-Littlewood-Pólya operator, the centered maximal
//!   operator, and their commutators with radial symbols ([`operators`]);
//! - closed-form sharp operator constants together with near-extremal
//!   families, Rayleigh quotients and finite-section spectral estimates
//!   ([`sharp`]);
//! - reproducible verification suites behind a command-line interface
//!   ([`verify`], [`report`], [`cli`]).
//!
//! Simple bounded functions (finite combinations of ball indicators) tie the
//! shell picture back to genuine functions on the space ([`sb`]).

pub mod cli;
pub mod error;
pub mod geometry;
pub mod norms;
pub mod operators;
pub mod rational;
pub mod real;
pub mod report;
pub mod sb;
pub mod scalar;
pub mod sharp;
pub mod shell;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{ball_relation, ball_sphere_intersection_measure, Ball, BallRelation, PAdicVector, Sphere};
pub use rational::Rat;
pub use real::Real;
pub use scalar::PAdicScalar;
pub use shell::{make_extremizer, Coeff, ExtremizerSpec, PowerTerm, RadialShellFunction, Tail};
