//! Multimode squeezed light in Laguerre-Gauss bases.
//!
//! The pipeline runs from beam geometry to statistics:
//!
//! 1. [`modes`] evaluates LG amplitudes and fixes the canonical mode ordering.
//! 2. [`coupling`] integrates pump × signal × idler overlaps over the medium into
//!    the squeezing matrix ξ.
//! 3. [`squeeze`] polar-decomposes ξ and produces closed-form variances,
//!    photon statistics and the pair-creation matrix.
//! 4. [`eigenmodes`] diagonalizes normal ξ into independent two-mode squeezers.
//! 5. [`fock`] is a brute-force truncated Fock-space check of all of the above.
//! 6. [`scenarios`] packages the PSR/FWM and PDC studies; [`io`] and [`cli`]
//!    handle configs and output files.
//!
//! All lengths are in micrometres.

pub mod cli;
pub mod coupling;
pub mod eigenmodes;
pub mod error;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod modes;
pub mod quadrature;
pub mod scenarios;
pub mod squeeze;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
