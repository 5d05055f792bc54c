//! Steady-state transport engine for fermionic many-body open quantum systems.
//!
//! Builds Born–Markov master-equation generators (canonical Redfield–Bloch,
//! PERLind, Davies–Lindblad) in the eigenbasis of an interacting lattice system
//! coupled to semi-infinite tight-binding leads, truncates them energy-resolved
//! with quality-factor monitoring, solves for the nonequilibrium steady state
//! and computes per-lead particle currents. An exact non-interacting NEGF
//! solver serves as an independent cross-check in the weak-coupling limit.
//!
//! Pipeline: [`fockspace`] (occupation basis, sector structure, fermionic
//! operators) → [`spectrum`] (sector diagonalization, eigenbasis jump
//! operators) → [`bath`] (lead kernels: surface Green functions, occupation
//! functions, principal-value integrals) → [`generators`] (Γ tensors, Lamb
//! shift, generator assembly) → [`ermea`] (energy-resolved growth loop,
//! quality factors, steady-state solve) → [`observables`] (currents, purity,
//! coherences). [`negf`] is the standalone exact oracle.
//!
//! Energies are in eV throughout; ħ = 1 internally. The e/ħ factor is restored
//! only when converting currents to amperes (see [`observables::EV_PER_HBAR_TO_AMPERE`]).

pub mod bath;
pub mod error;
pub mod ermea;
pub mod fockspace;
pub mod generators;
pub mod linalg;
pub mod negf;
pub mod observables;
pub mod spectrum;

pub use bath::{BathKernel, LeadSpec};
pub use error::CoreError;
pub use ermea::{ErmeaConfig, QualityReport, SteadyStateResult, Variant};
pub use fockspace::{SectorBasis, SystemSpec};
pub use generators::{Generator, GeneratorParams, IndexSet};
pub use spectrum::{JumpOperators, Spectrum};
