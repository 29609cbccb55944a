//! Exact simulator for the perturbed bilateral shift on `ℓ∞(ℤ) × ℂ`, whose
//! inverse is not positive although it is doubly power bounded, together with
//! the `ℓᵖ` splitting `x = yz` and finite truncations of the shift.

pub mod eigen;
pub mod seq;
pub mod split;
pub mod truncation;

pub use eigen::{shift_eigenvector, EigenReport, UnitRoot};
pub use seq::{shift_apply, shift_inverse_apply, shift_positivity_report, shift_power_norm, ExtSeq, ShiftElement, ShiftOperator};
pub use split::{audit_split, lp_split, SplitResult};
pub use truncation::{finite_truncation, truncation_experiment};
