//! Renormalized vacuum electromagnetic energy densities around polarizable
//! sources.
//!
//! The crate computes the electric and magnetic parts of the vacuum energy
//! density induced by a small polarizable body — either point-like or with an
//! extended coupling profile — together with the regularized global energies
//! and the distributional bookkeeping of the point-like singularity.
//!
//! Everything numerical flows through [`quadrature`], a deterministic
//! adaptive Gauss–Kronrod engine with series acceleration for oscillatory
//! tails and Richardson extrapolation for regulator removal.  [`kernels`]
//! holds the spherical Bessel mode-coupling kernels and their exponential
//! transforms; [`pointlike`] the closed forms, cutoff-regularized densities
//! and singular expansion for the point source; [`extsource`] the
//! finite-size generalization.  [`cli`] wires the lot into a command-line
//! tool.
//!
//! Densities are quoted in units of the static polarizability times
//! hbar*c (so a length^-7 power times a dimensionless number), with the
//! speed of light and hbar set to one internally.

pub mod cli;
pub mod error;
pub mod extsource;
pub mod kernels;
pub mod pointlike;
pub mod quadrature;

pub use error::{Error, Result};
pub use kernels::{kernel_qe, kernel_qm, KernelArgs};
pub use extsource::{ExtendedSource, FormFactor, Polarizability};
pub use pointlike::{Component, CutoffParams};
pub use quadrature::{QuadratureConfig, QuadratureResult};
