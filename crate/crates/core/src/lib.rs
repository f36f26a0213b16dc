//! Gaussian wave-packet dynamics for one-dimensional quadratic Hamiltonians
//! `H = p²/2m + mω²(t)x²/2`.
//!
//! The packet width is tracked through a complex Riccati variable `C(t)`,
//! its real Ermakov amplitude `α(t)`, the second moments, and a complex
//! Newton solution `λ(t)`. All numerics are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the scalar type.
//!
//! ```
//! use riccati_dynamics::{riccati_from_ermakov, ErmakovState64};
//!
//! let c = riccati_from_ermakov(ErmakovState64::new(2.0, 1.0)).unwrap();
//! assert_eq!((c.c_r, c.c_i), (0.5, 0.25));
//! ```

// `!(x > 0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ermakov;
pub mod error;
pub mod integrate;
pub mod model;
pub mod newton;
pub mod profile;
pub mod propagator;
pub mod riccati;
pub mod scalar;
pub mod scenario;
pub mod uncertainty;
pub mod wigner;

pub use error::{Error, Result};
pub use integrate::{integrate, IntegratorConfig, Method};
pub use model::*;
pub use profile::FrequencyProfile;
pub use scalar::Scalar;

pub type SystemSpec64 = SystemSpec<f64>;
pub type FrequencyProfile64 = FrequencyProfile<f64>;
pub type IntegratorConfig64 = IntegratorConfig<f64>;
pub type RiccatiState64 = RiccatiState<f64>;
pub type ErmakovState64 = ErmakovState<f64>;
pub type Centroid64 = Centroid<f64>;
pub type UncertaintyTriple64 = UncertaintyTriple<f64>;
pub type LambdaState64 = LambdaState<f64>;
pub type GaussianWavePacket64 = GaussianWavePacket<f64>;
pub type PhaseSpaceGrid64 = wigner::PhaseSpaceGrid<f64>;

pub type SystemSpec32 = SystemSpec<f32>;
pub type RiccatiState32 = RiccatiState<f32>;
pub type ErmakovState32 = ErmakovState<f32>;
pub type UncertaintyTriple32 = UncertaintyTriple<f32>;
pub type LambdaState32 = LambdaState<f32>;
