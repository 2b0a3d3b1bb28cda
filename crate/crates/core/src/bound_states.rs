//! Bound levels of the radial Schroedinger equation.
//!
//! Works on the reduced radial wavefunction u(r) = r R(r), which obeys
//!
//! ```text
//! u'' = ((V_eff - E)/c) u,   V_eff = V + c l(l+1)/r^2,   c = hbar^2/2m,
//! ```
//!
//! with u(0) = 0 and a decaying tail at r_max. Integration is Numerov
//! (fourth order); eigenvalues are located by counting the nodes of the
//! outward solution (a Sturm count: the number of nodes below E equals the
//! number of eigenvalues below E) and refined by matching inward and outward
//! sweeps at the outer classical turning point until the log-derivative is
//! continuous. Solutions are rescaled during integration when the forbidden
//! region makes them grow, so deep wells cannot overflow.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::potentials::{PotentialKind, PotentialSpec};

/// Relative energy window within which two levels count as degenerate (used
/// for ordering ties and shell grouping). Numerov leaves exact oscillator
/// degeneracies agreeing far more tightly than this, and genuinely distinct
/// levels of the potentials here are separated far more widely.
const TIE_EPS_REL: f64 = 1e-8;

/// Rescale threshold while integrating through classically forbidden zones.
const RESCALE_LIMIT: f64 = 1e250;

/// A normalized bound orbital: quantum numbers, energy, and u(r) on its grid.
#[derive(Debug, Clone)]
pub struct OrbitalState {
    pub l: u32,
    /// Number of radial nodes, n_r = 0, 1, 2, ...
    pub n_radial: u32,
    /// Eigenvalue in the energy unit of the potential spec.
    pub energy: f64,
    u: Vec<f64>,
    grid: Arc<RadialGrid>,
}

impl OrbitalState {
    /// Reduced radial wavefunction samples, normalized to ∫ u^2 dr = 1,
    /// positive near the origin.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// ∫ u^2 dr on the orbital's own grid (1 up to quadrature error).
    pub fn norm_squared(&self) -> f64 {
        let sq: Vec<f64> = self.u.iter().map(|&v| v * v).collect();
        self.grid.integrate(&sq).expect("orbital samples are finite")
    }

    /// Wraps externally supplied samples (an analytic wavefunction, say) as
    /// an orbital, normalizing them on the grid.
    pub fn from_samples(
        l: u32,
        n_radial: u32,
        energy: f64,
        mut u: Vec<f64>,
        grid: Arc<RadialGrid>,
    ) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "samples ({}) do not match the grid ({})",
                u.len(),
                grid.len()
            )));
        }
        let sq: Vec<f64> = u.iter().map(|&v| v * v).collect();
        let norm2 = grid.integrate(&sq)?;
        if !(norm2 > 0.0) {
            return Err(Error::InvalidArgument(
                "samples have vanishing norm".into(),
            ));
        }
        let inv = 1.0 / norm2.sqrt();
        for v in u.iter_mut() {
            *v *= inv;
        }
        Ok(Self {
            l,
            n_radial,
            energy,
            u,
            grid,
        })
    }

    /// Like [`from_samples`](Self::from_samples) but keeps the samples
    /// exactly as given — for diagnostics that need unnormalized input.
    pub fn from_samples_unchecked(
        l: u32,
        n_radial: u32,
        energy: f64,
        u: Vec<f64>,
        grid: Arc<RadialGrid>,
    ) -> Self {
        Self {
            l,
            n_radial,
            energy,
            u,
            grid,
        }
    }

    /// Spectroscopic label in the 1s, 2p, ... convention (count = n_r + 1).
    pub fn label(&self) -> String {
        const LETTERS: &[char] = &['s', 'p', 'd', 'f', 'g', 'h', 'i', 'k', 'l', 'm'];
        let letter = LETTERS
            .get(self.l as usize)
            .copied()
            .unwrap_or('?');
        format!("{}{letter}", self.n_radial + 1)
    }
}

/// How to distribute particles over levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillingMode {
    /// Only exact shell closures are accepted; anything else is an error
    /// naming the nearest closures.
    StrictClosed,
    /// A partially filled outer shell is spread uniformly over its
    /// degenerate level set.
    UniformFractional,
}

/// Levels of one potential in increasing energy order, with the species
/// degeneracy factor needed to turn them into shell capacities.
#[derive(Debug, Clone)]
pub struct LevelScheme {
    levels: Vec<OrbitalState>,
    degeneracy_factor: u32,
    /// Levels that exist below the search ceiling but whose tails do not fit
    /// on the grid; recorded as (l, n_radial) so callers can report them.
    skipped: Vec<(u32, u32)>,
}

/// One populated orbital and how many particles sit in it.
#[derive(Debug, Clone)]
pub struct ShellFilling {
    pub occupied: Vec<(OrbitalState, f64)>,
    pub n_particles: u32,
}

impl ShellFilling {
    pub fn total_occupancy(&self) -> f64 {
        self.occupied.iter().map(|(_, occ)| occ).sum()
    }
}

/// Scaled potential (V_eff / c) on the grid; the r = 0 entry is sanitized to
/// zero because u(0) = 0 removes it from every recurrence.
fn scaled_effective_potential(spec: &PotentialSpec, grid: &RadialGrid, l: u32) -> Vec<f64> {
    let c = spec.kinetic_constant;
    let lf = (l * (l + 1)) as f64;
    grid.points()
        .iter()
        .map(|&r| {
            if r == 0.0 {
                0.0
            } else {
                (spec.evaluate_unchecked(r) + c * lf / (r * r)) / c
            }
        })
        .collect()
}

/// Outward Numerov sweep over the whole grid. Fills `u` (length n) starting
/// from u(0) = 0, u(h) ~ h^(l+1), and returns the node count.
fn sweep_outward(base: &[f64], ec: f64, h: f64, l: u32, u: &mut [f64]) -> usize {
    let n = base.len();
    let h2_12 = h * h / 12.0;
    let w = |i: usize| 1.0 - h2_12 * (base[i] - ec);
    u[0] = 0.0;
    u[1] = h.powi(l as i32 + 1).max(1e-200);
    let mut nodes = 0;
    for i in 1..n - 1 {
        u[i + 1] = ((12.0 - 10.0 * w(i)) * u[i] - w(i - 1) * u[i - 1]) / w(i + 1);
        if u[i] * u[i + 1] < 0.0 {
            nodes += 1;
        }
        if u[i + 1].abs() > RESCALE_LIMIT {
            let s = 1.0 / RESCALE_LIMIT;
            for v in u[..=i + 1].iter_mut() {
                *v *= s;
            }
        }
    }
    nodes
}

/// Inward Numerov sweep from the Dirichlet edge u(r_max) = 0 down to index
/// `stop`; entries below `stop` are untouched.
fn sweep_inward(base: &[f64], ec: f64, h: f64, stop: usize, u: &mut [f64]) {
    let n = base.len();
    let h2_12 = h * h / 12.0;
    let w = |i: usize| 1.0 - h2_12 * (base[i] - ec);
    u[n - 1] = 0.0;
    u[n - 2] = 1e-200;
    for i in (stop + 1..n - 1).rev() {
        u[i - 1] = ((12.0 - 10.0 * w(i)) * u[i] - w(i + 1) * u[i + 1]) / w(i - 1);
        if u[i - 1].abs() > RESCALE_LIMIT {
            let s = 1.0 / RESCALE_LIMIT;
            for v in u[i - 1..].iter_mut() {
                *v *= s;
            }
        }
    }
}

/// Index of the outer classical turning point: the largest i with
/// V_eff(r_i) < E. None when no classically allowed region exists.
fn turning_index(base: &[f64], ec: f64) -> Option<usize> {
    base.iter().rposition(|&b| b < ec)
}

/// Node count of the outward solution at energy E; by the Sturm property
/// this equals the number of eigenvalues below E.
fn node_count(base: &[f64], ec: f64, h: f64, l: u32, scratch: &mut [f64]) -> usize {
    if turning_index(base, ec).is_none() {
        return 0;
    }
    sweep_outward(base, ec, h, l, scratch)
}

/// Log-derivative mismatch at the turning point, scale-invariant in both
/// branches; zero exactly at a discrete eigenvalue. NaN signals a degenerate
/// matching configuration and sends the caller back to node bisection.
fn matching_defect(
    base: &[f64],
    ec: f64,
    h: f64,
    l: u32,
    out_buf: &mut [f64],
    in_buf: &mut [f64],
) -> f64 {
    let n = base.len();
    let m = match turning_index(base, ec) {
        Some(m) if m >= 2 && m <= n - 3 => m,
        _ => return f64::NAN,
    };
    sweep_outward(base, ec, h, l, out_buf);
    in_buf[..n].fill(0.0);
    sweep_inward(base, ec, h, m - 1, in_buf);
    if out_buf[m] == 0.0 || in_buf[m] == 0.0 {
        return f64::NAN;
    }
    let s = out_buf[m] / in_buf[m];
    let num = (out_buf[m + 1] - out_buf[m - 1]) - s * (in_buf[m + 1] - in_buf[m - 1]);
    num / out_buf[m]
}

/// Default upper edge of the eigenvalue search: just below threshold for a
/// Woods-Saxon well (every state above is unbound), half the wall height at
/// r_max for the oscillator (which binds everything; the cap keeps a
/// forbidden region on the grid).
pub fn default_search_ceiling(spec: &PotentialSpec, grid: &RadialGrid) -> f64 {
    match spec.kind {
        PotentialKind::WoodsSaxon { depth, .. } => -1e-9 * depth,
        PotentialKind::HarmonicOscillator { .. } => {
            0.5 * spec.evaluate_unchecked(grid.r_max())
        }
    }
}

fn check_solver_inputs(spec: &PotentialSpec, grid: &RadialGrid) -> Result<()> {
    spec.validate()?;
    if grid.len() < 32 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue solver needs at least 32 grid points, got {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Number of levels with angular momentum l below the default search ceiling.
pub fn bound_level_count(spec: &PotentialSpec, grid: &RadialGrid, l: u32) -> Result<usize> {
    check_solver_inputs(spec, grid)?;
    let base = scaled_effective_potential(spec, grid, l);
    let ceiling = default_search_ceiling(spec, grid) / spec.kinetic_constant;
    let mut scratch = vec![0.0; grid.len()];
    Ok(node_count(&base, ceiling, grid.spacing(), l, &mut scratch))
}

/// Solves for the bound level with the given quantum numbers.
///
/// Errors: `NotFound` when no such level exists below the search ceiling;
/// `NumericalFailure` when the level exists but its tail has not decayed
/// below 1e-6 of the peak at r_max (the grid is too short for it).
pub fn solve_bound_state(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    l: u32,
    n_radial: u32,
) -> Result<OrbitalState> {
    solve_bound_state_below(spec, grid, l, n_radial, default_search_ceiling(spec, grid))
}

/// Same as [`solve_bound_state`] with an explicit search ceiling.
pub fn solve_bound_state_below(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    l: u32,
    n_radial: u32,
    ceiling: f64,
) -> Result<OrbitalState> {
    check_solver_inputs(spec, grid)?;
    let c = spec.kinetic_constant;
    let h = grid.spacing();
    let n = grid.len();
    let base = scaled_effective_potential(spec, grid, l);
    let ec_ceiling = ceiling / c;

    // Search floor: the minimum of the effective potential (skipping the
    // sanitized origin entry).
    let ec_floor = base[1..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(ec_floor < ec_ceiling) {
        return Err(Error::NotFound(format!(
            "no classically allowed region below the search ceiling for l = {l}"
        )));
    }

    let mut out_buf = vec![0.0; n];
    let mut in_buf = vec![0.0; n];

    let available = node_count(&base, ec_ceiling, h, l, &mut out_buf);
    if available <= n_radial as usize {
        return Err(Error::NotFound(format!(
            "no bound level with l = {l}, n_radial = {n_radial}: only {available} level(s) \
             below the search ceiling"
        )));
    }

    let scale_ref = ec_ceiling.abs().max(ec_floor.abs());
    let target = n_radial as usize;

    // Phase 1: bisect on the Sturm node count until the window isolates the
    // target eigenvalue.
    let mut lo = ec_floor;
    let mut hi = ec_ceiling;
    let coarse_tol = 1e-4 * scale_ref;
    for _ in 0..200 {
        if hi - lo < coarse_tol
            && node_count(&base, lo, h, l, &mut out_buf) == target
            && node_count(&base, hi, h, l, &mut out_buf) == target + 1
        {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if node_count(&base, mid, h, l, &mut out_buf) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Phase 2: refine on the matching defect when it brackets a sign change;
    // otherwise keep narrowing by node count (which converges to the same
    // discrete eigenvalue, just without the defect's smoothness).
    let fine_tol = |lo: f64, hi: f64| {
        1e-9 * lo.abs().max(hi.abs()).max(1e-3 * scale_ref)
    };
    let mut d_lo = matching_defect(&base, lo, h, l, &mut out_buf, &mut in_buf);
    let mut d_hi = matching_defect(&base, hi, h, l, &mut out_buf, &mut in_buf);
    for _ in 0..200 {
        if hi - lo <= fine_tol(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at floating-point resolution
        }
        if d_lo.is_finite() && d_hi.is_finite() && d_lo.signum() != d_hi.signum() {
            let d_mid = matching_defect(&base, mid, h, l, &mut out_buf, &mut in_buf);
            if !d_mid.is_finite() {
                // Fall back to a node-count step for this iteration.
                if node_count(&base, mid, h, l, &mut out_buf) <= target {
                    lo = mid;
                    d_lo = d_mid;
                } else {
                    hi = mid;
                    d_hi = d_mid;
                }
            } else if d_mid.signum() == d_lo.signum() {
                lo = mid;
                d_lo = d_mid;
            } else {
                hi = mid;
                d_hi = d_mid;
            }
        } else if node_count(&base, mid, h, l, &mut out_buf) <= target {
            lo = mid;
            d_lo = matching_defect(&base, mid, h, l, &mut out_buf, &mut in_buf);
        } else {
            hi = mid;
            d_hi = matching_defect(&base, mid, h, l, &mut out_buf, &mut in_buf);
        }
    }
    let ec = 0.5 * (lo + hi);

    // Assemble the eigenfunction from matched sweeps at the converged energy.
    let m = turning_index(&base, ec).ok_or_else(|| {
        Error::NumericalFailure("turning point vanished during refinement".into())
    })?;
    if m > n - 3 {
        return Err(Error::NumericalFailure(
            "classically allowed region touches r_max; increase r_max".into(),
        ));
    }
    sweep_outward(&base, ec, h, l, &mut out_buf);
    in_buf.fill(0.0);
    sweep_inward(&base, ec, h, m.saturating_sub(1), &mut in_buf);
    if in_buf[m] == 0.0 {
        return Err(Error::NumericalFailure(
            "inward sweep vanished at the matching point".into(),
        ));
    }
    let s = out_buf[m] / in_buf[m];
    let mut u: Vec<f64> = (0..n)
        .map(|i| if i <= m { out_buf[i] } else { s * in_buf[i] })
        .collect();

    // Validate the construction before normalizing.
    let nodes = u
        .windows(2)
        .filter(|p| p[0] * p[1] < 0.0)
        .count();
    if nodes != target {
        return Err(Error::NumericalFailure(format!(
            "assembled wavefunction has {nodes} node(s), expected {target} \
             (l = {l}, E = {:.6e})",
            ec * c
        )));
    }
    let peak = u.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let tail = u[n - 2].abs().max(u[n - 1].abs());
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::NumericalFailure(
            "wavefunction degenerate after matching".into(),
        ));
    }
    if tail > 1e-6 * peak {
        return Err(Error::NumericalFailure(format!(
            "wavefunction tail at r_max is {:.2e} of the peak (limit 1e-6) for l = {l}, \
             n_radial = {n_radial}; increase r_max",
            tail / peak
        )));
    }

    let sq: Vec<f64> = u.iter().map(|&v| v * v).collect();
    let norm2 = grid.integrate(&sq)?;
    if !(norm2 > 0.0) {
        return Err(Error::NumericalFailure("vanishing norm after matching".into()));
    }
    let inv = 1.0 / norm2.sqrt();
    for v in u.iter_mut() {
        *v *= inv;
    }
    // Sign convention: positive leaving the origin.
    if let Some(&first) = u.iter().find(|v| v.abs() > 1e-3 * peak * inv) {
        if first < 0.0 {
            for v in u.iter_mut() {
                *v = -*v;
            }
        }
    }

    Ok(OrbitalState {
        l,
        n_radial,
        energy: ec * c,
        u,
        grid: Arc::clone(grid),
    })
}

/// Enumerates every bound level with l <= l_max below the default ceiling,
/// sorted by energy (ties broken by l, then n_radial). Levels whose tails
/// cannot decay on the grid are skipped and recorded on the scheme.
pub fn enumerate_bound_levels(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    l_max: u32,
) -> Result<LevelScheme> {
    enumerate_bound_levels_below(spec, grid, l_max, default_search_ceiling(spec, grid))
}

/// [`enumerate_bound_levels`] with an explicit energy ceiling.
pub fn enumerate_bound_levels_below(
    spec: &PotentialSpec,
    grid: &Arc<RadialGrid>,
    l_max: u32,
    ceiling: f64,
) -> Result<LevelScheme> {
    check_solver_inputs(spec, grid)?;
    let mut levels = Vec::new();
    let mut skipped = Vec::new();
    let mut scratch = vec![0.0; grid.len()];
    for l in 0..=l_max {
        let base = scaled_effective_potential(spec, grid, l);
        let available = node_count(
            &base,
            ceiling / spec.kinetic_constant,
            grid.spacing(),
            l,
            &mut scratch,
        );
        for n_radial in 0..available as u32 {
            match solve_bound_state_below(spec, grid, l, n_radial, ceiling) {
                Ok(state) => levels.push(state),
                Err(Error::NumericalFailure(_)) => {
                    // A tail that does not fit on the grid; every higher level
                    // of this l sits closer to the ceiling and fits worse.
                    skipped.push((l, n_radial));
                    break;
                }
                Err(other) => return Err(other),
            }
        }
    }
    levels.sort_by(|a, b| {
        let scale = a.energy.abs().max(b.energy.abs()).max(f64::MIN_POSITIVE);
        if (a.energy - b.energy).abs() <= TIE_EPS_REL * scale {
            (a.l, a.n_radial).cmp(&(b.l, b.n_radial))
        } else {
            a.energy.partial_cmp(&b.energy).expect("energies are finite")
        }
    });
    Ok(LevelScheme {
        levels,
        degeneracy_factor: spec.degeneracy_factor,
        skipped,
    })
}

impl LevelScheme {
    pub fn levels(&self) -> &[OrbitalState] {
        &self.levels
    }

    pub fn degeneracy_factor(&self) -> u32 {
        self.degeneracy_factor
    }

    pub fn skipped(&self) -> &[(u32, u32)] {
        &self.skipped
    }

    /// Capacity g * (2l + 1) of level i.
    pub fn capacity(&self, i: usize) -> u32 {
        self.degeneracy_factor * (2 * self.levels[i].l + 1)
    }

    pub fn total_capacity(&self) -> u32 {
        (0..self.levels.len()).map(|i| self.capacity(i)).sum()
    }

    /// Maximal runs of energy-degenerate levels, in order.
    fn energy_groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.levels.len() {
            let split = i == self.levels.len() || {
                let (a, b) = (&self.levels[i - 1], &self.levels[i]);
                let scale = a.energy.abs().max(b.energy.abs()).max(f64::MIN_POSITIVE);
                (b.energy - a.energy).abs() > TIE_EPS_REL * scale
            };
            if split {
                groups.push(start..i);
                start = i;
            }
        }
        groups
    }

    /// Particle counts at which every level group up to some energy is
    /// exactly full — the shell closures of this scheme.
    pub fn closures(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut cum = 0;
        for g in self.energy_groups() {
            cum += g.map(|i| self.capacity(i)).sum::<u32>();
            out.push(cum);
        }
        out
    }

    /// Level table as CSV: l, n_radial, energy, degeneracy, cumulative_N.
    pub fn to_csv(&self) -> String {
        use crate::format::format_g6;
        let mut out = String::from("l,n_radial,energy,degeneracy,cumulative_N\n");
        let mut cum = 0;
        for (i, level) in self.levels.iter().enumerate() {
            cum += self.capacity(i);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                level.l,
                level.n_radial,
                format_g6(level.energy),
                self.capacity(i),
                cum
            ));
        }
        out
    }
}

/// Distributes `n_particles` over the scheme's levels in energy order.
pub fn fill_shells(
    scheme: &LevelScheme,
    n_particles: u32,
    mode: FillingMode,
) -> Result<ShellFilling> {
    if n_particles < 1 {
        return Err(Error::InvalidArgument(
            "particle count must be at least 1".into(),
        ));
    }
    let total = scheme.total_capacity();
    if n_particles > total {
        return Err(Error::InvalidArgument(format!(
            "N = {n_particles} exceeds the capacity {total} of the enumerated levels; \
             raise l_max or the search ceiling"
        )));
    }

    let mut occupied: Vec<(OrbitalState, f64)> = Vec::new();
    match mode {
        FillingMode::StrictClosed => {
            let mut cum = 0u32;
            for g in scheme.energy_groups() {
                if cum == n_particles {
                    break;
                }
                let gcap: u32 = g.clone().map(|i| scheme.capacity(i)).sum();
                if cum + gcap > n_particles {
                    return Err(Error::OpenShell {
                        n: n_particles,
                        below: cum,
                        above: cum + gcap,
                    });
                }
                for i in g {
                    occupied.push((scheme.levels[i].clone(), scheme.capacity(i) as f64));
                }
                cum += gcap;
            }
        }
        FillingMode::UniformFractional => {
            let mut rem = n_particles as f64;
            for g in scheme.energy_groups() {
                if rem <= 0.0 {
                    break;
                }
                let gcap: u32 = g.clone().map(|i| scheme.capacity(i)).sum();
                if rem >= gcap as f64 {
                    for i in g {
                        occupied.push((scheme.levels[i].clone(), scheme.capacity(i) as f64));
                    }
                    rem -= gcap as f64;
                } else {
                    // Spread the remainder over the group in proportion to
                    // capacity; the last share closes the sum exactly.
                    let mut assigned = 0.0;
                    let last = g.end - 1;
                    for i in g {
                        let occ = if i == last {
                            rem - assigned
                        } else {
                            rem * scheme.capacity(i) as f64 / gcap as f64
                        };
                        assigned += occ;
                        occupied.push((scheme.levels[i].clone(), occ));
                    }
                    rem = 0.0;
                }
            }
        }
    }

    Ok(ShellFilling {
        occupied,
        n_particles,
    })
}
