//! Mean-field quench dynamics of the BCS (Richardson-Gaudin) spin model as
//! realized with atoms in an optical cavity.
//!
//! The crate is organized by capability:
//!
//! * [`specfun`] elliptic integrals, Jacobi functions, Bessel `J1`, Laguerre
//! * [`model`] dispersions, couplings, initial states and the order parameter
//! * [`dynamics`] dissipative mean-field evolution and staged quenches
//! * [`lax`] Lax-vector roots, closed-form phase boundaries, phase labels
//! * [`twospin`] exact solution of the two-collective-spin model
//! * [`motion`] axial-motion extension with Lamb-Dicke sidebands
//! * [`analysis`] windowed metrics, spectra, decay fits, Higgs regression
//! * [`config`] and [`run`] JSON-configured runs and CSV/JSON output
//!
//! Rates and frequencies are angular (rad/s) everywhere inside the library.
//! The config layer accepts ordinary frequencies in MHz.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod lax;
pub mod model;
pub mod motion;
pub mod run;
pub mod specfun;
pub mod twospin;

pub use error::{Error, Result};
