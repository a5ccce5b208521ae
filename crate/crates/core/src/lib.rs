//! Ground- and thermal-state correlation toolkit for harmonic lattices.
//!
//! The crate builds coupling (potential) matrices for oscillators on cubic
//! lattices, evaluates functions of those matrices through their spectral
//! decomposition, and computes exact entanglement and correlation measures
//! for arbitrary site regions together with the analytic area-law bounds
//! that constrain them.
//!
//! Module map:
//! - [`lattice`]: cubic lattice geometry, regions, distances, surface counts;
//! - [`potential`]: coupling matrix models (nearest-neighbour, finite-ranged,
//!   disordered, long-ranged, squared);
//! - [`spectral`]: matrix functions, thermal weights and entry-decay
//!   constants;
//! - [`entanglement`]: symplectic spectra, entropy of entanglement,
//!   logarithmic negativity and their classical analogues;
//! - [`bounds`]: area-law bounds, entry bounds and the entanglement
//!   critical temperature.

pub mod bounds;
pub mod entanglement;
pub mod error;
pub mod lattice;
pub mod potential;
pub mod spectral;

pub use bounds::{bound_report, riemann_zeta, BoundReport, EntryBounds};
pub use entanglement::{
    classical_entropy, classical_mutual_information, entanglement_entropy, log_negativity,
    reduced_symplectic_spectrum, SymplecticSpectrum,
};
pub use error::{Error, Result};
pub use lattice::{shell_count_bound, Boundary, LatticeSpec, Region, Site};
pub use potential::{Bandwidth, ModelKind, PotentialMatrix, SpectralBounds};
pub use spectral::{decay_constants, DecayConstants, HalfPower};
