//! One-body densities and their Shannon information entropies.
//!
//! From a shell filling the position density is
//!
//! ```text
//! rho(r) = (1/4πN) Σ occ_i (u_i(r)/r)^2,   n(k) = (1/4πN) Σ occ_i phi_i(k)^2,
//! ```
//!
//! both normalized to one (4π ∫ rho r^2 dr = 1) so systems of different size
//! are directly comparable; the particle-number convention (integral = N) is
//! available as a conversion. The entropies are
//!
//! ```text
//! S_r = -4π ∫ rho ln(rho) r^2 dr,   S_k = -4π ∫ n ln(n) k^2 dk,
//! ```
//!
//! and their sum obeys S_r + S_k >= 3(1 + ln π) in the unit convention.

use std::sync::Arc;

use crate::bound_states::ShellFilling;
use crate::constants;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::momentum::MomentumOrbital;

/// Which integral convention the densities carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// 4π ∫ rho r^2 dr = 1.
    Unit,
    /// 4π ∫ rho r^2 dr = N.
    ParticleNumber,
}

/// Matched position- and momentum-space densities of one system.
#[derive(Debug, Clone)]
pub struct DensityPair {
    rho: Vec<f64>,
    nk: Vec<f64>,
    r_grid: Arc<RadialGrid>,
    k_grid: Arc<RadialGrid>,
    pub n_particles: u32,
    pub normalization: Normalization,
}

/// Entropies of one density pair with its uncertainty-relation accounting.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EntropyResult {
    pub s_r: f64,
    pub s_k: f64,
    pub s_sum: f64,
    /// Lower bound on s_sum in the pair's normalization convention.
    pub eur_bound: f64,
    /// s_sum - eur_bound; non-negative up to quadrature error.
    pub eur_margin: f64,
}

/// Direction for [`convert_normalization`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConversionDirection {
    ToUnit,
    ToParticleNumber,
}

impl DensityPair {
    /// Wraps density samples directly (used by external-density ingestion).
    /// The samples must already integrate to the declared convention within
    /// 0.1%; callers rescale first if they accept looser input.
    pub fn from_samples(
        rho: Vec<f64>,
        nk: Vec<f64>,
        r_grid: Arc<RadialGrid>,
        k_grid: Arc<RadialGrid>,
        n_particles: u32,
        normalization: Normalization,
    ) -> Result<Self> {
        if rho.len() != r_grid.len() || nk.len() != k_grid.len() {
            return Err(Error::InvalidArgument(
                "density samples do not match their grids".into(),
            ));
        }
        if n_particles < 1 {
            return Err(Error::InvalidArgument(
                "particle count must be at least 1".into(),
            ));
        }
        let pair = Self {
            rho,
            nk,
            r_grid,
            k_grid,
            n_particles,
            normalization,
        };
        let expected = match normalization {
            Normalization::Unit => 1.0,
            Normalization::ParticleNumber => n_particles as f64,
        };
        for (name, norm) in [
            ("position", pair.position_norm()?),
            ("momentum", pair.momentum_norm()?),
        ] {
            if (norm / expected - 1.0).abs() > 1e-3 {
                return Err(Error::DataIntegrity(format!(
                    "{name} density integrates to {norm:.6} where {expected} was declared"
                )));
            }
        }
        Ok(pair)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn nk(&self) -> &[f64] {
        &self.nk
    }

    pub fn r_grid(&self) -> &Arc<RadialGrid> {
        &self.r_grid
    }

    pub fn k_grid(&self) -> &Arc<RadialGrid> {
        &self.k_grid
    }

    /// 4π ∫ rho r^2 dr.
    pub fn position_norm(&self) -> Result<f64> {
        radial_norm(&self.rho, &self.r_grid)
    }

    /// 4π ∫ n k^2 dk.
    pub fn momentum_norm(&self) -> Result<f64> {
        radial_norm(&self.nk, &self.k_grid)
    }

    /// The same pair rescaled to the other convention (a copy when the
    /// target matches).
    pub fn with_normalization(&self, target: Normalization) -> Self {
        if self.normalization == target {
            return self.clone();
        }
        let factor = match target {
            Normalization::ParticleNumber => self.n_particles as f64,
            Normalization::Unit => 1.0 / self.n_particles as f64,
        };
        let mut out = self.clone();
        for v in out.rho.iter_mut() {
            *v *= factor;
        }
        for v in out.nk.iter_mut() {
            *v *= factor;
        }
        out.normalization = target;
        out
    }
}

fn radial_norm(values: &[f64], grid: &RadialGrid) -> Result<f64> {
    let integrand: Vec<f64> = values
        .iter()
        .zip(grid.points())
        .map(|(&v, &r)| v * r * r)
        .collect();
    Ok(4.0 * std::f64::consts::PI * grid.integrate(&integrand)?)
}

/// Builds the matched unit-normalized density pair of a filled system.
///
/// `momenta` must be the transforms of `filling.occupied` in the same order
/// (checked by angular momentum and grid identity).
pub fn build_density(
    filling: &ShellFilling,
    momenta: &[MomentumOrbital],
) -> Result<DensityPair> {
    if filling.occupied.is_empty() {
        return Err(Error::InvalidArgument("no occupied orbitals".into()));
    }
    if filling.occupied.len() != momenta.len() {
        return Err(Error::InvalidArgument(format!(
            "{} occupied orbitals but {} momentum orbitals",
            filling.occupied.len(),
            momenta.len()
        )));
    }
    for ((orb, _), mom) in filling.occupied.iter().zip(momenta) {
        if orb.l != mom.l {
            return Err(Error::InvalidArgument(
                "momentum orbitals out of step with the filling (l mismatch)".into(),
            ));
        }
    }
    let r_grid = Arc::clone(filling.occupied[0].0.grid());
    let k_grid = Arc::clone(momenta[0].k_grid());
    for (orb, _) in &filling.occupied {
        if !Arc::ptr_eq(orb.grid(), &r_grid) && orb.grid().points() != r_grid.points() {
            return Err(Error::InvalidArgument(
                "occupied orbitals live on different position grids".into(),
            ));
        }
    }
    for mom in momenta {
        if !Arc::ptr_eq(mom.k_grid(), &k_grid) && mom.k_grid().points() != k_grid.points() {
            return Err(Error::InvalidArgument(
                "momentum orbitals live on different k-grids".into(),
            ));
        }
    }

    let n = filling.n_particles as f64;
    let pref = 1.0 / (4.0 * std::f64::consts::PI * n);
    let h = r_grid.spacing();

    let mut rho = vec![0.0; r_grid.len()];
    for (orb, occ) in &filling.occupied {
        let u = orb.u();
        for (i, &r) in r_grid.points().iter().enumerate() {
            if i == 0 {
                // R(0) = u'(0), nonzero only for s states; one-sided
                // second-order difference with u(0) = 0.
                if orb.l == 0 {
                    let du0 = (4.0 * u[1] - u[2]) / (2.0 * h);
                    rho[0] += pref * occ * du0 * du0;
                }
            } else {
                let ratio = u[i] / r;
                rho[i] += pref * occ * ratio * ratio;
            }
        }
    }

    let mut nk = vec![0.0; k_grid.len()];
    for ((_, occ), mom) in filling.occupied.iter().zip(momenta) {
        for (acc, &p) in nk.iter_mut().zip(mom.phi()) {
            *acc += pref * occ * p * p;
        }
    }

    DensityPair::from_samples(
        rho,
        nk,
        r_grid,
        k_grid,
        filling.n_particles,
        Normalization::Unit,
    )
}

/// Shannon entropy -4π ∫ d ln(d) x^2 dx of radial density samples.
///
/// Samples below 1e-300 contribute zero (the 0·ln 0 = 0 convention);
/// negative samples beyond a roundoff allowance are a numeric-domain error.
pub fn shannon_entropy(density: &[f64], grid: &RadialGrid) -> Result<f64> {
    if density.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "density samples ({}) do not match the grid ({})",
            density.len(),
            grid.len()
        )));
    }
    let peak = density.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let floor = -1e-12 * peak;
    let mut integrand = Vec::with_capacity(density.len());
    for (i, (&d, &x)) in density.iter().zip(grid.points()).enumerate() {
        if !d.is_finite() {
            return Err(Error::NumericDomain(format!(
                "density sample {i} is not finite"
            )));
        }
        if d < floor {
            return Err(Error::NumericDomain(format!(
                "negative density sample {d:.3e} at index {i}"
            )));
        }
        let term = if d < 1e-300 { 0.0 } else { d * d.ln() };
        integrand.push(term * x * x);
    }
    Ok(-4.0 * std::f64::consts::PI * grid.integrate(&integrand)?)
}

/// Entropies and uncertainty-relation margin of a density pair, with the
/// bound matching the pair's normalization convention.
pub fn entropy_report(pair: &DensityPair) -> Result<EntropyResult> {
    let s_r = shannon_entropy(pair.rho(), pair.r_grid())?;
    let s_k = shannon_entropy(pair.nk(), pair.k_grid())?;
    let s_sum = s_r + s_k;
    let eur_bound = match pair.normalization {
        Normalization::Unit => constants::eur_bound_unit(),
        Normalization::ParticleNumber => {
            constants::eur_bound_particle_number(pair.n_particles as f64)
        }
    };
    Ok(EntropyResult {
        s_r,
        s_k,
        s_sum,
        eur_bound,
        eur_margin: s_sum - eur_bound,
    })
}

/// Converts an entropy value between the unit and particle-number
/// conventions: per space, S_unit = S_N / N + ln N. `spaces` is 1 for a
/// single-space entropy, 2 for the position+momentum sum (which picks up
/// 2 ln N).
pub fn convert_normalization(
    s: f64,
    n_particles: u32,
    direction: ConversionDirection,
    spaces: u8,
) -> Result<f64> {
    if n_particles < 1 {
        return Err(Error::InvalidArgument(
            "particle count must be at least 1".into(),
        ));
    }
    if !(spaces == 1 || spaces == 2) {
        return Err(Error::InvalidArgument(format!(
            "spaces must be 1 or 2, got {spaces}"
        )));
    }
    let n = n_particles as f64;
    let shift = spaces as f64 * n.ln();
    Ok(match direction {
        ConversionDirection::ToUnit => s / n + shift,
        ConversionDirection::ToParticleNumber => n * (s - shift),
    })
}
