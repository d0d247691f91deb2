//! Radial eigenproblems `-u'' + C u/r² = λu` on piecewise-conical profiles.

pub mod banded;
pub mod bessel;
pub mod fem;
pub mod quadrature;
pub mod sturm_liouville;
pub mod system;
pub mod transfer;

pub use fem::{fem_spectrum, MeshSpec};
pub use transfer::{transfer_mode, transfer_spectrum, zero_mode_count, TransferMode};
pub use system::{
    channel_fundamental, radial_systems, BoundaryCondition, EigEntry, EigList, End, RadialProblem, RadialSystem,
};
