//! End-to-end runs through the pipeline: outputs on disk, determinism,
//! failure modes, external ingestion.

mod common;

use std::path::Path;

use common::gaussian_table;
use entroshell::bound_states::FillingMode;
use entroshell::pipeline::{run_pipeline, ExternalSystem, Mode, RunConfig};
use entroshell::Error;

/// A light cluster configuration that keeps the integration tests quick.
fn small_cluster_config(dir: &Path) -> RunConfig {
    let mut config = RunConfig::default_cluster();
    config.particle_counts = vec![8, 18, 20];
    config.grid.n_points = 3001;
    config.grid.n_k = 1501;
    config.grid.l_max = 4;
    config.output_dir = dir.to_path_buf();
    config
}

#[test]
fn run_writes_the_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_cluster_config(dir.path());
    let report = run_pipeline(&config).unwrap();

    assert_eq!(report.systems.len(), 3);
    assert!(report.failures.is_empty());
    assert!(report.fits.is_some());
    assert!(report.fit_skip_reason.is_none());

    for name in [
        "entropy.csv",
        "levels_N8.csv",
        "levels_N18.csv",
        "levels_N20.csv",
        "fits.json",
        "comparison.csv",
        "figure.csv",
    ] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }

    let entropy = std::fs::read_to_string(dir.path().join("entropy.csv")).unwrap();
    let mut lines = entropy.lines();
    assert_eq!(lines.next().unwrap(), "system_id,N,S_r,S_k,S_sum,eur_margin");
    assert_eq!(lines.clone().count(), 3);
    assert!(lines.next().unwrap().starts_with("N8,8,"));

    // The fits document is valid JSON with the three laws.
    let fits: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fits.json")).unwrap())
            .unwrap();
    for key in ["s_r", "s_k", "s_sum"] {
        assert!(fits[key]["a"].is_number(), "{key} missing from fits.json");
        assert_eq!(fits[key]["points"].as_array().unwrap().len(), 3);
    }
    assert!(fits["boltzmann"]["inv_n0"].is_number());

    // The comparison table pairs the computed laws with the published ones.
    let comparison = std::fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert!(comparison.contains("clusters_WS_sum"));

    // Level tables carry the closure bookkeeping.
    let levels = std::fs::read_to_string(dir.path().join("levels_N8.csv")).unwrap();
    assert!(levels.starts_with("l,n_radial,energy,degeneracy,cumulative_N"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_pipeline(&small_cluster_config(dir_a.path())).unwrap();
    run_pipeline(&small_cluster_config(dir_b.path())).unwrap();
    for name in ["entropy.csv", "levels_N8.csv", "fits.json", "comparison.csv", "figure.csv"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn open_shell_count_aborts_a_strict_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_cluster_config(dir.path());
    config.particle_counts = vec![8, 19];
    match run_pipeline(&config) {
        Err(Error::OpenShell { n, below, above }) => {
            assert_eq!((n, below, above), (19, 18, 20));
        }
        other => panic!("expected an open-shell error, got {other:?}"),
    }
    // The run aborted before any entropy work: no entropy table.
    assert!(!dir.path().join("entropy.csv").exists());
}

#[test]
fn fractional_filling_accepts_open_shells() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_cluster_config(dir.path());
    config.particle_counts = vec![19];
    config.filling = FillingMode::UniformFractional;
    let report = run_pipeline(&config).unwrap();
    assert_eq!(report.systems.len(), 1);
    assert_eq!(report.systems[0].n_particles, 19);
    // One system is not enough for a fit, and the report says so.
    assert!(report.fits.is_none());
    assert!(report.fit_skip_reason.as_deref().unwrap().contains("needs at least 2"));
    // Entropy lies between the N = 18 and N = 20 closed-shell values.
    let s = report.systems[0].entropy.s_sum;
    assert!(s > 8.0 && s < 8.8, "S_sum = {s}");
}

#[test]
fn external_run_ingests_tables_from_config_text() {
    let dir = tempfile::tempdir().unwrap();
    let table_path = dir.path().join("gauss_pair.dat");
    let text = format!(
        "{}{}",
        gaussian_table("position", "angstrom", 1.0, 800),
        gaussian_table("momentum", "inverse_angstrom", 1.3, 800)
    );
    std::fs::write(&table_path, text).unwrap();

    let config_text = format!(
        "mode = external\noutput_dir = {}\n\n[grid]\nn_points = 2001\nn_k = 2001\n\n\
         [external]\nsystem = {}\n",
        dir.path().join("out").display(),
        table_path.display()
    );
    let config = RunConfig::parse(&config_text).unwrap();
    assert_eq!(config.external_systems[0].id, "gauss_pair");

    let report = run_pipeline(&config).unwrap();
    assert_eq!(report.systems.len(), 1);
    assert_eq!(report.systems[0].id, "gauss_pair");
    assert_eq!(report.systems[0].n_particles, 1);
    let entropy = &report.systems[0].entropy;
    assert!((entropy.s_r - common::gaussian_entropy(1.0)).abs() < 1e-3);
    assert!((entropy.s_k - common::gaussian_entropy(1.3)).abs() < 1e-3);
    assert!(dir.path().join("out/entropy.csv").is_file());
    // No levels files for external systems, no fit from one point.
    assert!(!dir.path().join("out/levels_gauss_pair.csv").exists());
    assert!(report.fits.is_none());
}

#[test]
fn unreadable_external_file_fails_that_system_only() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.dat");
    std::fs::write(
        &good,
        format!(
            "{}{}",
            gaussian_table("position", "angstrom", 1.0, 600),
            gaussian_table("momentum", "inverse_angstrom", 1.3, 600)
        ),
    )
    .unwrap();
    let mut config = RunConfig::default_cluster();
    config.mode = Mode::External;
    config.particle_counts.clear();
    config.grid.n_points = 1501;
    config.grid.n_k = 1501;
    config.output_dir = dir.path().join("out");
    config.external_systems = vec![
        ExternalSystem {
            id: "missing".into(),
            files: vec![dir.path().join("nope.dat")],
        },
        ExternalSystem {
            id: "good".into(),
            files: vec![good],
        },
    ];
    let report = run_pipeline(&config).unwrap();
    assert_eq!(report.systems.len(), 1);
    assert_eq!(report.systems[0].id, "good");
    assert_eq!(report.failures.len(), 1);
    assert_eq!(report.failures[0].id, "missing");
    assert_eq!(report.failures[0].exit_code, 2);
}

#[test]
fn nucleus_run_matches_the_cluster_layout() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::default_nucleus();
    config.particle_counts = vec![4, 16];
    config.grid.n_points = 3001;
    config.grid.n_k = 1501;
    config.output_dir = dir.path().to_path_buf();
    let report = run_pipeline(&config).unwrap();
    assert_eq!(report.systems.len(), 2);
    assert!(dir.path().join("levels_A4.csv").is_file());
    assert!(dir.path().join("levels_A16.csv").is_file());
    // Two systems are enough for a (trivial) fit.
    assert!(report.fits.is_some());
    let comparison = std::fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert!(comparison.contains("nuclei_HO_sum"));
}
