//! Positivity of inverses of positive maps on finite-dimensional C*-algebras.
//!
//! The algebras are finite direct sums `M_{n_1} ⊕ … ⊕ M_{n_k}` and linear maps
//! are dense matrices over the coordinate basis. On top of that sit three-valued
//! positivity checks, spectral tools (recurrence indices, the reversible/decaying
//! splitting), structure checks (Jordan and C*-automorphisms, isometries) and an
//! exact simulator for the perturbed bilateral shift on `ℓ∞(ℤ) × ℂ`.

pub mod algebra;
pub mod config;
pub mod error;
pub mod exact;
pub mod positivity;
pub mod random;
pub mod shiftlab;
pub mod spectral;
pub mod structure;
pub mod superop;

pub use algebra::{Algebra, Element, C64};
pub use config::{Config, Tolerances};
pub use error::{Error, Result};
pub use positivity::{Status, Verdict, Witness};
pub use superop::{MapNorm, Superoperator};
