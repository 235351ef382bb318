//! Numerical toolkit for measuring how strongly a function localizes inside
//! its domain.
//!
//! The crate provides three families of localization measures for nonnegative
//! densities on 1D intervals and masked 2D grids:
//!
//! - classical ones built from the distribution function: decreasing and
//!   spherical rearrangements, `L^p` norms, participation ratios
//!   `alpha_{p,q}`, and the mass-concentration preorder ([`density`]);
//! - the Wasserstein-2 distance to the uniform density, computed in 1D
//!   through the CDF/quantile closed form ([`transport1d`]) and in any
//!   supported dimension through an exact transport LP ([`ot`]);
//! - the homogeneous Sobolev `H^-1` distance to uniform, computed by solving
//!   a Neumann-Poisson problem ([`poisson`]), together with the lower/upper
//!   bounds sandwiching the Wasserstein distance.
//!
//! Two spectral applications drive the measures: Dirichlet Sturm-Liouville
//! eigenfunctions on an interval ([`sturm`]) and Neumann-Poincare
//! eigenfunctions on smooth closed curves ([`neumann_poincare`]).
//!
//! All computations are deterministic: no randomized initialization, no
//! thread-order-dependent reductions.

pub mod density;
pub mod error;
pub mod io;
pub mod neumann_poincare;
pub mod ot;
pub mod poisson;
pub mod rng;
pub mod sturm;
pub mod transport1d;

pub use error::{Error, Result};
