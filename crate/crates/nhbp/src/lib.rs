//! Non-Hermitian two-band chains: spectra under open boundaries, generalized
//! Brillouin zones, non-Bloch winding, vorticity and biorthogonal polarization.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! `f64`, which is what the sweeps and the CLI use.

pub mod error;
pub mod gbz;
pub mod invariants;
pub mod linalg;
pub mod model;
pub mod phase_diagram;
pub mod realspace;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{Variant, ModelSpec as ModelSpecG};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type ModelSpec = model::ModelSpec<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
