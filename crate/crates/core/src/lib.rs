//! Shannon information entropies of shell-filled fermion systems.
//!
//! The library solves the single-particle radial Schrödinger equation for a
//! spherical well (Woods-Saxon for the valence electrons of a metallic
//! cluster, harmonic oscillator for nucleons), fills shells up to a closed
//! configuration, Fourier-Bessel transforms the occupied orbitals, and
//! evaluates the position- and momentum-space information entropies
//!
//! ```text
//! S_r = -4 pi Int rho(r) ln rho(r) r^2 dr,
//! S_k = -4 pi Int n(k)  ln n(k)  k^2 dk,
//! ```
//!
//! together with the entropic uncertainty bound S_r + S_k >= 3(1 + ln pi)
//! for unit-normalized densities. Externally tabulated density pairs can be
//! ingested as well. Over a set of systems the total entropy follows
//! S = a + b ln N; the [`scaling`] module fits the law and compares the
//! coefficients against published values for atoms, nuclei and clusters,
//! and [`pipeline`] wires the whole chain into reproducible runs with CSV
//! and JSON outputs.
//!
//! Radial quantities live on uniform grids from the origin ([`grid`]);
//! orbitals are represented by u(r) = r R(r) sampled on such a grid.

pub mod bessel;
pub mod bound_states;
pub mod constants;
pub mod density;
pub mod error;
pub mod format;
pub mod grid;
pub mod ingest;
pub mod momentum;
pub mod pipeline;
pub mod potentials;
pub mod scaling;

pub use bessel::{spherical_jl, spherical_jl_upto};
pub use bound_states::{
    bound_level_count, default_search_ceiling, enumerate_bound_levels,
    enumerate_bound_levels_below, fill_shells, solve_bound_state, solve_bound_state_below,
    FillingMode, LevelScheme, OrbitalState, ShellFilling,
};
pub use density::{
    build_density, convert_normalization, entropy_report, shannon_entropy,
    ConversionDirection, DensityPair, EntropyResult, Normalization,
};
pub use error::{Error, Result};
pub use format::format_g6;
pub use grid::RadialGrid;
pub use ingest::{
    ingest_external_density, parse_density_tables, DeclaredNorm, DensityTable, Space, TableUnit,
};
pub use momentum::{transform_orbitals, transform_to_momentum, MomentumOrbital};
pub use pipeline::{
    compute_external_system, compute_model_system, run_pipeline, ExternalSystem, GridSettings,
    Mode, ModelSystem, RunConfig, RunFits, RunReport, SystemFailure, SystemResult,
};
pub use potentials::{PotentialKind, PotentialSpec};
pub use scaling::{
    boltzmann_analogy, fit_log_linear, reference_fit, BoltzmannAnalogy, FitConvention,
    ReferenceFit, ScalingFit, REFERENCE_FITS, REFERENCE_INV_N0,
};
