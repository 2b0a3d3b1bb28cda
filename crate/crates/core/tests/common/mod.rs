//! Shared fixtures for the integration suite: an independent eigenvalue
//! oracle and the cached default runs.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use entroshell::density::entropy_report;
use entroshell::ingest::{ingest_external_density, parse_density_tables};
use entroshell::pipeline::{run_pipeline, RunConfig, RunReport};
use entroshell::{EntropyResult, PotentialSpec};

/// Dense finite-difference eigenvalue of the radial problem, independent of
/// the production solver: the Dirichlet three-point Hamiltonian on the same
/// box is symmetric tridiagonal, and Sturm-sequence bisection finds its k-th
/// eigenvalue directly. Second-order discretization error is removed by
/// Richardson extrapolation from step h and h/2.
pub fn fd_oracle_eigenvalue(
    spec: &PotentialSpec,
    r_max: f64,
    n_points: usize,
    l: u32,
    k: usize,
) -> f64 {
    let coarse = fd_single(spec, r_max, n_points, l, k);
    let fine = fd_single(spec, r_max, 2 * n_points - 1, l, k);
    (4.0 * fine - coarse) / 3.0
}

fn fd_single(spec: &PotentialSpec, r_max: f64, n_points: usize, l: u32, k: usize) -> f64 {
    let h = r_max / (n_points - 1) as f64;
    let c = spec.kinetic_constant;
    let centrifugal = c * (l * (l + 1)) as f64;
    // Interior points only: u(0) = u(r_max) = 0.
    let diag: Vec<f64> = (1..n_points - 1)
        .map(|i| {
            let r = i as f64 * h;
            2.0 * c / (h * h) + spec.evaluate_unchecked(r) + centrifugal / (r * r)
        })
        .collect();
    let off2 = (c / (h * h)) * (c / (h * h));

    // Gershgorin lower bound; anything above 1 is continuum for our wells.
    let mut lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * c / (h * h) - 1.0;
    let mut hi = diag
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .min(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(&diag, off2, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Number of eigenvalues of the tridiagonal matrix below x.
fn sturm_count(diag: &[f64], off2: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q < 0.0 {
            count += 1;
        } else if q == 0.0 {
            q = 1e-300;
        }
    }
    count
}

/// A normalized Gaussian density table in the external exchange format:
/// rho(x) = (pi s^2)^(-3/2) exp(-x^2/s^2), entropy 1.5 (1 + ln pi) + 3 ln s.
pub fn gaussian_table(space: &str, unit: &str, sigma: f64, rows: usize) -> String {
    let x_max = 9.0 * sigma;
    let mut out = format!("# space: {space}\n# unit: {unit}\n# norm: 1\n");
    let amp = (PI * sigma * sigma).powf(-1.5);
    for i in 0..rows {
        let x = x_max * i as f64 / (rows - 1) as f64;
        let v = amp * (-x * x / (sigma * sigma)).exp();
        out.push_str(&format!("{x:.12e} {v:.12e}\n"));
    }
    out
}

/// Closed-form entropy of the table above.
pub fn gaussian_entropy(sigma: f64) -> f64 {
    1.5 * (1.0 + PI.ln()) + 3.0 * sigma.ln()
}

pub struct Baseline {
    pub cluster: RunReport,
    pub cluster_runtime: Duration,
    pub nucleus: RunReport,
    /// Ingested analytic fixtures: (id, position width, momentum width in
    /// the reconciled unit, entropies).
    pub ingested: Vec<(String, f64, f64, EntropyResult)>,
    _dir: tempfile::TempDir,
}

/// The default cluster and nucleus runs plus the ingestion fixtures,
/// computed once and shared by all acceptance criteria.
pub fn baseline() -> &'static Baseline {
    static CELL: OnceLock<Baseline> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");

        let mut cluster_cfg = RunConfig::default_cluster();
        cluster_cfg.output_dir = dir.path().join("cluster");
        let start = Instant::now();
        let cluster = run_pipeline(&cluster_cfg).expect("default cluster run");
        let cluster_runtime = start.elapsed();

        let mut nucleus_cfg = RunConfig::default_nucleus();
        nucleus_cfg.output_dir = dir.path().join("nucleus");
        let nucleus = run_pipeline(&nucleus_cfg).expect("default nucleus run");

        let position = gaussian_table("position", "angstrom", 1.0, 1200);
        let momentum_aa = gaussian_table("momentum", "inverse_angstrom", 1.3, 1200);
        // The same momentum density tabulated in fm^-1; ingestion has to
        // reconcile it back to inverse angstroms.
        let momentum_fm = gaussian_table("momentum", "inverse_fm", 1.3e-5, 1200);
        let mut ingested = Vec::new();
        for (id, text) in [
            ("gauss_aa", format!("{position}{momentum_aa}")),
            ("gauss_fm", format!("{position}{momentum_fm}")),
        ] {
            let tables = parse_density_tables(&text).expect("fixture parses");
            let pair = ingest_external_density(&tables, 4001, 4001).expect("fixture ingests");
            let entropy = entropy_report(&pair).expect("fixture entropy");
            ingested.push((id.to_string(), 1.0, 1.3, entropy));
        }

        Baseline {
            cluster,
            cluster_runtime,
            nucleus,
            ingested,
            _dir: dir,
        }
    })
}
