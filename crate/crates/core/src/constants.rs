//! Physical constants and default model parameters, kept in one place.

/// hbar^2 / 2m_e in eV * Angstrom^2.
pub const HBAR2_OVER_2ME_EV_A2: f64 = 3.80998;

/// hbar^2 / 2m_nucleon in MeV * fm^2.
pub const HBAR2_OVER_2M_NUCLEON_MEV_FM2: f64 = 20.7355;

/// Woods-Saxon depth for neutral Na clusters, eV.
pub const CLUSTER_V0_EV: f64 = 6.0;

/// Woods-Saxon radius parameter r0 for Na clusters, Angstrom (R = r0 N^{1/3}).
pub const CLUSTER_R0_A: f64 = 2.25;

/// Woods-Saxon surface diffuseness for Na clusters, Angstrom.
pub const CLUSTER_DIFFUSENESS_A: f64 = 0.74;

/// Coefficient of the empirical oscillator quantum hbar*omega = 41 A^{-1/3} MeV.
pub const HO_OMEGA_COEFF_MEV: f64 = 41.0;

/// Lower bound of S_r + S_k for a pair of unit-normalized conjugate
/// three-dimensional densities: 3 (1 + ln pi).
pub fn eur_bound_unit() -> f64 {
    3.0 * (1.0 + std::f64::consts::PI.ln())
}

/// Same bound when both densities are normalized to the particle number N:
/// 3N (1 + ln pi) - 2N ln N.
pub fn eur_bound_particle_number(n: f64) -> f64 {
    3.0 * n * (1.0 + std::f64::consts::PI.ln()) - 2.0 * n * n.ln()
}

/// Spin degeneracy factor per (2l+1) orbital for electrons.
pub const ELECTRON_DEGENERACY_FACTOR: u32 = 2;

/// Spin-isospin degeneracy factor per (2l+1) orbital for nucleons.
pub const NUCLEON_DEGENERACY_FACTOR: u32 = 4;
