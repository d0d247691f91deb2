//! Spectra of whole manifolds, ε-sweeps and the diagnostic bounds.

pub mod diagnostics;
pub mod mcgowan;
pub mod spectrum;
pub mod sweep;

pub use diagnostics::{boundary_diagnostics, xi_eps, xi_one, BoundaryDiagnostics};
pub use mcgowan::{mcgowan_bound, mcgowan_for, partition_c_rho, McGowanReport};
pub use spectrum::{
    assemble_spectrum, exact_spectrum, first_exact_eigenvalue, Method, SolverOptions, SpectrumEntry, SpectrumResult,
};
pub use sweep::{sweep_epsilon, Check, SweepConfig, SweepReport, SweepRow};
