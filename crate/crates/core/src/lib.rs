//! Symmetrized multi-particle ket algebra.
//!
//! * [`hilbert`]: labeled orthonormal bases, direct products, exchange and
//!   boson/fermion symmetrization, internal x location factorization.
//! * [`cloning`]: the cloning map defined on symmetrized `|phi_h, 0_t>`
//!   states, its linear extension, and the fidelity gap for superpositions.
//! * [`entanglement`]: Schmidt decomposition, the polarization-entangled
//!   photon pair, projective measurement with collapse.
//! * [`density`]: one-particle probability densities on uniform grids.
//! * [`scenario`]: the named, reproducible experiments behind the CLI.

pub mod cloning;
pub mod density;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod hilbert;
mod linalg;
pub mod scenario;

pub use error::{Error, Result};
pub use exec::Exec;
pub use hilbert::{BasisLabel, NParticleState, ParticleStatistics};
pub use num_complex::Complex64;
