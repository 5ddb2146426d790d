//! Simulation and verification toolkit for a one-dimensional quantum particle
//! in a Dirac-comb potential driven by frictionless momentum kicks.
//!
//! The library has three layers:
//!
//! - **Spectral core** ([`bloch`]): the Krönig-Penney dispersion solver for the
//!   periodic δ-potential, band/reflection coordinates, the plane-wave expansion
//!   coefficients η(k,n) of the Bloch eigenkets, and the kick coefficients
//!   κ_v(k,n) that govern lattice-valued momentum jumps, with an independent
//!   quadrature oracle.
//! - **Stochastic processes** ([`kick`], [`rates`], [`process`]): jump-rate
//!   densities j(v), the master-equation kernel J(k,k′), and event-driven Monte
//!   Carlo of the momentum process under the exact law and several idealized
//!   variants, including sign-flip and excursion tracking.
//! - **Quantum trajectories and statistics** ([`lindblad`], [`stats`]): a pure
//!   state unraveling of the Lindblad dynamics on branching superpositions in
//!   the extended-zone basis, plus the statistical kit (KS/χ² tests, scaling
//!   fits, Brownian targets) used by the verification suite ([`verify`]).

pub mod bloch;
pub mod kick;
pub mod lindblad;
pub mod process;
pub mod quad;
pub mod rates;
pub mod report;
pub mod rng;
pub mod stats;
pub mod verify;

pub use bloch::{BandCoords, CombParams, EtaRow, KappaRow, ReflectionQuantities, TruncationPolicy};
pub use kick::KickLaw;
pub use process::{EnsembleSummary, ProcessLaw, TrajectoryState};
