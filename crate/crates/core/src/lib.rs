//! Direct measurement of individual density-matrix elements by logical-qubit
//! teleportation.
//!
//! The element `ρ_mn` of an `N`-qubit state, together with `ρ_mm`, `ρ_nn` and
//! `ρ_nm`, forms a virtual logical qubit. Measuring the system qubits where
//! `m` and `n` agree in Z, and Bell-measuring the others against the ancillas
//! of a GHZ register, teleports that logical qubit onto one prober qubit whose
//! X and Y expectations read out the real and imaginary parts of `ρ_mn`.
//!
//! Modules, bottom up:
//!
//! - [`state`], [`pauli`]: dense states, Pauli strings, named states.
//! - [`plan`]: element indices, measurement plans, teleporter classes.
//! - [`engine`]: exact branch enumeration of one teleporter run.
//! - [`estimator`]: exact and shot-sampled element recovery.
//! - [`scan`]: the two-step sparse reconstruction.
//! - [`tomography`]: Pauli linear-inversion baseline.
//! - [`bench`], [`noise`]: teleporter characterization and noise knobs.
//!
//! Qubit 1 is the most significant bit of every basis index.

#![forbid(unsafe_code)]

pub mod bench;
pub mod complex_serde;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod noise;
pub mod pauli;
pub mod plan;
pub mod policy;
pub mod rng;
pub mod scan;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use pauli::{Pauli, PauliString};
pub use plan::{ElementIndex, MeasurementPlan, TeleporterClass};
pub use policy::NumericPolicy;
pub use state::{DensityMatrix, PureState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/plans.md")]
    mod plans {}
    #[doc = include_str!("../../../book/src/teleportation.md")]
    mod teleportation {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/sparse-scan.md")]
    mod sparse_scan {}
    #[doc = include_str!("../../../book/src/tomography.md")]
    mod tomography {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
