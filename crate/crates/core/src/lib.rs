//! Vibrational spectra of two atoms coupled through a waveguide photon.
//!
//! The relative vibration coordinate moves in the complex potential
//! `V(x) = Ωx²/2 − iΓ₀ s e^{iφ} e^{iηx}` produced by the exchange of a single
//! excitation. The crate provides
//!
//! * a finite-difference eigensolver for the real-space Hamiltonian ([`fd`]),
//! * an independent phonon Fock-basis representation used as an oracle ([`fock`]),
//! * Bohr–Sommerfeld quasiclassics, phase maps and the side-minimum
//!   thresholds ([`quasi`]),
//! * mode classification, 𝒫𝒯-breaking detection and coupling sweeps
//!   ([`analysis`]),
//! * a shared validation suite ([`validate`]).

pub mod analysis;
pub mod error;
pub mod fd;
pub mod fock;
pub mod model;
pub mod quasi;
pub mod tridiag;
pub mod validate;

pub use error::{AnalysisError, FockError, GridError, ParamError, QuasiError, SolveError};
pub use model::{potential_full, potential_hermitian, Branch, ComplexEnergy, Mode, ModelParams};

pub use num_complex::Complex64;
