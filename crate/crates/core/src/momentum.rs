//! Momentum-space orbitals via the spherical Bessel transform.
//!
//! For a reduced radial wavefunction u(r) with angular momentum l,
//!
//! ```text
//! phi_l(k) = sqrt(2/pi) * integral u(r) j_l(kr) r dr,
//! ```
//!
//! which preserves the radial norm: ∫ phi^2 k^2 dk = ∫ u^2 dr. The transform
//! is evaluated by direct quadrature on the position grid. All orbitals of a
//! system are transformed together so each (k, r) pair computes its Bessel
//! row j_0..j_lmax once and feeds every orbital from it.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bessel::spherical_jl_upto;
use crate::bound_states::OrbitalState;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Tolerance on the position-space norm of an orbital handed to the
/// transform; solver output is exact to quadrature, so a miss means the
/// caller passed unnormalized samples.
const NORM_TOLERANCE: f64 = 1e-6;

/// Decay required of |phi| at k_max relative to its peak.
const TAIL_LIMIT: f64 = 1e-6;

/// A momentum-space orbital phi(k) on a uniform k-grid.
#[derive(Debug, Clone)]
pub struct MomentumOrbital {
    pub l: u32,
    phi: Vec<f64>,
    k_grid: Arc<RadialGrid>,
}

impl MomentumOrbital {
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn k_grid(&self) -> &Arc<RadialGrid> {
        &self.k_grid
    }

    /// ∫ phi^2 k^2 dk; equals 1 up to quadrature and tail truncation error
    /// when the source orbital was normalized (Parseval).
    pub fn norm_squared(&self) -> f64 {
        let integrand: Vec<f64> = self
            .phi
            .iter()
            .zip(self.k_grid.points())
            .map(|(&p, &k)| p * p * k * k)
            .collect();
        self.k_grid
            .integrate(&integrand)
            .expect("transform output is finite")
    }
}

/// Transforms one orbital; see [`transform_orbitals`] for batches.
pub fn transform_to_momentum(
    orbital: &OrbitalState,
    k_grid: &Arc<RadialGrid>,
) -> Result<MomentumOrbital> {
    let mut batch = transform_orbitals(std::slice::from_ref(orbital), k_grid)?;
    Ok(batch.pop().expect("one orbital in, one out"))
}

/// Transforms a batch of orbitals sharing one position grid onto `k_grid`.
///
/// Errors: `InvalidArgument` for an unnormalized orbital or mixed position
/// grids; `DomainCoverage` when any |phi| has not decayed below 1e-6 of its
/// peak at k_max (k_max too small for that orbital).
pub fn transform_orbitals(
    orbitals: &[OrbitalState],
    k_grid: &Arc<RadialGrid>,
) -> Result<Vec<MomentumOrbital>> {
    if orbitals.is_empty() {
        return Ok(Vec::new());
    }
    let r_grid = orbitals[0].grid();
    for orb in orbitals {
        let same = Arc::ptr_eq(orb.grid(), r_grid) || {
            let (a, b) = (orb.grid(), r_grid);
            a.len() == b.len() && a.r_max() == b.r_max()
        };
        if !same {
            return Err(Error::InvalidArgument(
                "all orbitals in a transform batch must share one position grid".into(),
            ));
        }
        let norm = {
            let sq: Vec<f64> = orb.u().iter().map(|&v| v * v).collect();
            r_grid.integrate(&sq)?
        };
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "orbital l = {}, n_radial = {} is not normalized (∫u² = {norm:.8})",
                orb.l, orb.n_radial
            )));
        }
    }

    let l_max = orbitals.iter().map(|o| o.l).max().expect("non-empty") as usize;
    let r = r_grid.points();
    let n_r = r.len();
    // Pre-fold the quadrature weight and the measure factor r into each
    // orbital's samples: the k-loop then only multiplies by j_l(kr).
    let folded: Vec<Vec<f64>> = orbitals
        .iter()
        .map(|orb| {
            (0..n_r)
                .map(|i| orb.u()[i] * r_grid.weights()[i] * r[i])
                .collect()
        })
        .collect();
    let ls: Vec<usize> = orbitals.iter().map(|o| o.l as usize).collect();
    let scale = (2.0 / std::f64::consts::PI).sqrt();

    // Each k is independent; the per-k Bessel row serves every orbital.
    let rows: Vec<Vec<f64>> = k_grid
        .points()
        .par_iter()
        .map(|&k| {
            let mut bess = vec![0.0; l_max + 1];
            let mut row = vec![0.0; orbitals.len()];
            for i in 0..n_r {
                spherical_jl_upto(l_max as u32, k * r[i], &mut bess);
                for (acc, (fold, &l)) in row.iter_mut().zip(folded.iter().zip(&ls)) {
                    *acc += fold[i] * bess[l];
                }
            }
            for v in row.iter_mut() {
                *v *= scale;
            }
            row
        })
        .collect();

    let mut out = Vec::with_capacity(orbitals.len());
    for (o, orb) in orbitals.iter().enumerate() {
        let phi: Vec<f64> = rows.iter().map(|row| row[o]).collect();
        let peak = phi.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let edge = phi[phi.len() - 1].abs();
        if !(peak > 0.0) {
            return Err(Error::NumericalFailure(format!(
                "transform of orbital l = {} vanished identically",
                orb.l
            )));
        }
        if edge > TAIL_LIMIT * peak {
            return Err(Error::DomainCoverage(format!(
                "phi(k_max) is {:.2e} of its peak for l = {}, n_radial = {} \
                 (limit {TAIL_LIMIT:.0e}); increase k_max",
                edge / peak,
                orb.l,
                orb.n_radial
            )));
        }
        out.push(MomentumOrbital {
            l: orb.l,
            phi,
            k_grid: Arc::clone(k_grid),
        });
    }
    Ok(out)
}
