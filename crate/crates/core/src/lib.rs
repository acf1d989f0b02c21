//! Limited-aperture MUSIC imaging of small two-dimensional inhomogeneities.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: integer-order Bessel, Neumann and Hankel functions and the
//!   Helmholtz fundamental solution.
//! - [`scene`]: inhomogeneities, background, wavenumber and aperture arcs.
//! - [`forward`]: far-field data from the small-volume asymptotics or from a
//!   Foldy–Lax point-scatterer solver, plus seeded white Gaussian noise.
//! - [`subspace`]: multistatic response (MSR) matrix, SVD, signal-dimension
//!   selection and noise-subspace projection.
//! - [`imaging`]: test vectors and the dual-projection MUSIC imaging function
//!   over a grid.
//! - [`analytic`]: arc-restricted Bessel series, their correction terms and the
//!   predicted imaging profiles, with a quadrature oracle.
//! - [`runner`]: JSON configuration, the built-in case catalogue and file
//!   emission used by the `music` binary.

pub mod analytic;
pub mod error;
pub mod forward;
pub mod imaging;
pub mod runner;
pub mod scene;
pub mod specfun;
pub mod subspace;

pub use error::{MusicError, Result};
pub use num_complex::Complex64;
pub use scene::{ApertureArc, ArcPair, Background, Inhomogeneity, Scene, Vec2};
