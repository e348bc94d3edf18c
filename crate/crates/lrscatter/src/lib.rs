//! Transfer matrices and reflection/transmission amplitudes for
//! one-dimensional Schrodinger scattering, including complex potentials with
//! slowly decaying (1/x-type) tails.
//!
//! The crate is organised bottom-up:
//!
//! - [`mat2`]: complex 2x2 matrices and the sigma/K generator algebra;
//! - [`quad`]: Gauss-Kronrod panels, decaying and oscillatory tail
//!   integrals, and limit extrapolation;
//! - [`ode`]: an embedded Dormand-Prince 5(4) integrator over small complex
//!   states;
//! - [`potential`]: potential models, metadata, truncation and dissection;
//! - [`phase`]: accumulated phase integrals and asymptotic phase limits;
//! - [`evolution`]: transfer matrices in the plane-wave, phase-corrected and
//!   intensity-normalized conventions, their conversions, composition and
//!   amplitudes;
//! - [`decomp`]: the WKB-style split of a slowly decaying tail into an
//!   exactly solvable part and a faster-decaying remainder;
//! - [`perturb`]: Dyson-series approximants and their a priori error model;
//! - [`solvable`]: closed forms for the pure `1/x + 1/x^2` tail.

pub mod decomp;
pub mod error;
pub mod evolution;
pub mod mat2;
pub mod ode;
pub mod phase;
pub mod potential;
pub mod perturb;
pub mod quad;
pub mod solvable;

pub use decomp::{select_a0, SolvableDecomposition, WkbPair};
pub use perturb::{
    dyson_term, error_model, script_u_integrals, transfer_plus_perturbative, ErrorModel,
    PerturbationResult, PhaseTreatment, ScriptIntegrals,
};

pub use error::{Error, Result};
pub use evolution::{
    amplitudes, compose, convert, from_amplitudes, fundamental_to_transfer, transfer_numeric,
    Amplitudes, Convention, Frame, NumericOpts, Provenance, TransferMatrix, TwoComponentState,
};
pub use mat2::{C64, Mat2};
pub use phase::PhaseProfile;
pub use potential::PotentialModel;
