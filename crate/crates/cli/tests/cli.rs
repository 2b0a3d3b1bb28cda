//! Exercises the binary end to end: verbs, flags, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn entroshell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entroshell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Small but real cluster grids so the tests stay fast.
const LIGHT: &[&str] = &["--n-points", "2001", "--n-k", "1201", "--l-max", "3"];

fn write_gaussian_tables(path: &Path) {
    use std::fmt::Write as _;
    let mut text = String::new();
    for (space, unit, sigma) in [
        ("position", "angstrom", 1.0f64),
        ("momentum", "inverse_angstrom", 1.3),
    ] {
        write!(text, "# space: {space}\n# unit: {unit}\n# norm: 1\n").unwrap();
        let amp = (std::f64::consts::PI * sigma * sigma).powf(-1.5);
        for i in 0..700 {
            let x = 9.0 * sigma * i as f64 / 699.0;
            let v = amp * (-x * x / (sigma * sigma)).exp();
            writeln!(text, "{x:.12e} {v:.12e}").unwrap();
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn entropy_verb_prints_one_system() {
    let out = entroshell(&[["entropy"].as_slice(), &["--mode", "cluster_ws", "--n", "8"], LIGHT].concat());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "system_id,N,S_r,S_k,S_sum,eur_margin");
    let row = lines.next().unwrap();
    assert!(row.starts_with("N8,8,6.16"), "row: {row}");
}

#[test]
fn levels_verb_lists_the_spectrum() {
    let out = entroshell(&[
        ["levels"].as_slice(),
        &["--mode", "cluster_ws", "--n", "40"],
        LIGHT,
    ]
    .concat());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("l,n_radial,energy,degeneracy,cumulative_N"));
    // The 1s level of the N = 40 well sits near -5.30 eV.
    assert!(text.lines().nth(1).unwrap().starts_with("0,0,-5.30"), "{text}");
}

#[test]
fn run_verb_writes_outputs_and_reports_them() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let out = entroshell(&[
        ["run"].as_slice(),
        &[
            "--mode",
            "cluster_ws",
            "--counts",
            "8,18",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        LIGHT,
    ]
    .concat());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("N8,8,"));
    assert!(text.contains("S_sum: a = "));
    assert!(text.contains("wrote "));
    assert!(out_dir.join("entropy.csv").is_file());
    assert!(out_dir.join("fits.json").is_file());
}

#[test]
fn run_verb_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.conf");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &config_path,
        format!(
            "mode = cluster_ws\nparticle_counts = 8\noutput_dir = {}\n\n\
             [grid]\nn_points = 2001\nn_k = 1201\nl_max = 3\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = entroshell(&["run", "--config", config_path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(out_dir.join("levels_N8.csv").is_file());
    // One system: the fit is skipped, and honestly reported.
    assert!(stdout(&out).contains("fit skipped"));
}

#[test]
fn fit_and_figure_verbs_work_from_an_entropy_table() {
    let dir = tempfile::tempdir().unwrap();
    let entropy_path = dir.path().join("entropy.csv");
    // A synthetic table lying exactly on S = 1 + 2 ln N (and S_r/S_k made up).
    let mut table = String::from("system_id,N,S_r,S_k,S_sum,eur_margin\n");
    for n in [8u32, 20, 40, 70] {
        let s = 1.0 + 2.0 * (n as f64).ln();
        table.push_str(&format!("N{n},{n},{s},{s},{s},0.5\n"));
    }
    std::fs::write(&entropy_path, table).unwrap();

    let json_path = dir.path().join("fits.json");
    let out = entroshell(&[
        "fit",
        "--entropy",
        entropy_path.to_str().unwrap(),
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("S_sum: a = 1, b = 2, rms = "), "{text}");
    let fits: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert!((fits["s_sum"]["b"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let figure_path = dir.path().join("figure.csv");
    let out = entroshell(&[
        "figure",
        "--entropy",
        entropy_path.to_str().unwrap(),
        "--out",
        figure_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let figure = std::fs::read_to_string(&figure_path).unwrap();
    assert!(figure.starts_with("N,S_atoms,S_clusters,S_nuclei,S_computed"));
    assert!(figure.lines().any(|l| l.starts_with("8,") && !l.ends_with(',')));
}

#[test]
fn figure_verb_without_scatter_prints_reference_curves() {
    let out = entroshell(&["figure"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("N,S_atoms,S_clusters,S_nuclei,S_computed"));
    // All scatter cells empty.
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn entropy_verb_ingests_external_tables() {
    let dir = tempfile::tempdir().unwrap();
    let table_path = dir.path().join("pair.dat");
    write_gaussian_tables(&table_path);
    let out = entroshell(&[
        "entropy",
        "--mode",
        "external",
        "--system",
        table_path.to_str().unwrap(),
        "--n-points",
        "1501",
        "--n-k",
        "1501",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    // S_r = 1.5 (1 + ln pi) = 3.21709 for the unit-width Gaussian.
    assert!(text.contains("pair,1,3.217"), "{text}");
}

#[test]
fn usage_errors_exit_one() {
    let out = entroshell(&["run", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = entroshell(&["no_such_verb"]);
    assert_eq!(out.status.code(), Some(1));
    let out = entroshell(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn invalid_input_exits_two() {
    // Open shell under strict filling.
    let dir = tempfile::tempdir().unwrap();
    let out = entroshell(&[
        ["run"].as_slice(),
        &[
            "--mode",
            "cluster_ws",
            "--counts",
            "19",
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ],
        LIGHT,
    ]
    .concat());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("19"));

    // Missing required inputs.
    let out = entroshell(&["entropy", "--mode", "cluster_ws"]);
    assert_eq!(out.status.code(), Some(2));
    let out = entroshell(&["run", "--mode", "warp_drive"]);
    assert_eq!(out.status.code(), Some(2));

    // Unreadable config file.
    let out = entroshell(&["run", "--config", "/nonexistent/run.conf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three() {
    // A momentum cutoff far too small for the orbitals to decay inside it.
    let out = entroshell(&[
        "entropy",
        "--mode",
        "cluster_ws",
        "--n",
        "8",
        "--n-points",
        "2001",
        "--k-max",
        "2.0",
        "--n-k",
        "501",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("k_max"), "stderr: {}", stderr(&out));
}
