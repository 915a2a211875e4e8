//! Extended dynamic mode decomposition (EDMD) for analytic circle maps and
//! analytic torus diffeomorphisms.
//!
//! The crate builds EDMD matrices from Fourier dictionaries, solves the
//! resulting non-Hermitian eigenproblems and compares the spectra with
//! closed-form transfer-operator eigenvalues of Blaschke products and of a
//! deformed cat map.

pub mod dynamics;
pub mod edmd;
pub mod error;
pub mod harness;
pub mod observables;
pub mod oracle;
pub mod sampling;
pub mod spectral;

pub use error::{EdmdError, Result};
