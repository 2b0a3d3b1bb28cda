//! End-to-end runs: configuration, per-system computation, outputs.
//!
//! A run takes a set of systems (Woods-Saxon clusters by valence-electron
//! count, harmonic-oscillator nuclei by mass number, or externally tabulated
//! density pairs), computes each system's entropies, fits the scaling law
//! S = a + b ln N over the successful systems, and writes CSV/JSON outputs
//! into the run directory:
//!
//! * `entropy.csv` — one row per system;
//! * `levels_<id>.csv` — the level scheme of each model system;
//! * `fits.json` — the three fitted laws plus the Boltzmann analogy;
//! * `comparison.csv` — fitted against published coefficients;
//! * `figure.csv` — reference curves with the computed points as scatter.
//!
//! Shell-closure validation runs for every system before any transform work
//! starts, so a bad particle count aborts the run without the expensive
//! part. Numerical trouble in one system (a tail that will not decay, say)
//! fails only that system; the fit proceeds when at least two systems
//! survive. All outputs are written atomically (temp file, then rename) and
//! are byte-identical across repeated runs of the same configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::bound_states::{
    enumerate_bound_levels_below, fill_shells, FillingMode, LevelScheme, ShellFilling,
};
use crate::density::{build_density, entropy_report, DensityPair, EntropyResult};
use crate::error::{Error, Result};
use crate::format::format_g6;
use crate::grid::RadialGrid;
use crate::ingest::{ingest_external_density, parse_density_tables};
use crate::momentum::{transform_orbitals, MomentumOrbital};
use crate::potentials::{PotentialKind, PotentialSpec};
use crate::scaling::{
    boltzmann_analogy, fit_log_linear, reference_fit, BoltzmannAnalogy, ScalingFit,
};

/// What kind of systems a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ClusterWs,
    NucleusHo,
    External,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cluster_ws" => Some(Self::ClusterWs),
            "nucleus_ho" => Some(Self::NucleusHo),
            "external" => Some(Self::External),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClusterWs => "cluster_ws",
            Self::NucleusHo => "nucleus_ho",
            Self::External => "external",
        }
    }
}

/// Grid resolution; `None` radii/cutoffs mean "derive from the potential".
#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    pub r_max: Option<f64>,
    pub n_points: usize,
    pub k_max: Option<f64>,
    pub n_k: usize,
    pub l_max: u32,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            r_max: None,
            n_points: 6001,
            k_max: None,
            n_k: 3000,
            l_max: 6,
        }
    }
}

/// One externally tabulated system: an id and the files whose tables
/// together provide its position and momentum densities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSystem {
    pub id: String,
    pub files: Vec<PathBuf>,
}

/// Full description of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub particle_counts: Vec<u32>,
    pub filling: FillingMode,
    pub grid: GridSettings,
    pub output_dir: PathBuf,
    pub external_systems: Vec<ExternalSystem>,
}

impl RunConfig {
    /// The standard cluster run: the shell closures 8..70 of the
    /// Woods-Saxon well, strictly closed, default grids.
    pub fn default_cluster() -> Self {
        Self {
            mode: Mode::ClusterWs,
            particle_counts: vec![8, 18, 20, 34, 40, 58, 68, 70],
            filling: FillingMode::StrictClosed,
            grid: GridSettings::default(),
            output_dir: PathBuf::from("out"),
            external_systems: Vec::new(),
        }
    }

    /// The standard nucleus run: the oscillator closures 4..224.
    pub fn default_nucleus() -> Self {
        Self {
            mode: Mode::NucleusHo,
            particle_counts: vec![4, 16, 40, 80, 140, 224],
            ..Self::default_cluster()
        }
    }

    /// Parses the plain-text key-value configuration format:
    ///
    /// ```text
    /// mode = cluster_ws
    /// particle_counts = 8, 18, 20
    /// filling = strict_closed
    /// output_dir = out
    ///
    /// [grid]
    /// r_max = auto
    /// n_points = 6001
    /// k_max = auto
    /// n_k = 3000
    /// l_max = 6
    ///
    /// [external]
    /// system = densities_a.dat
    /// system = pos_b.dat, mom_b.dat
    /// ```
    ///
    /// Unset keys keep the defaults of [`default_cluster`](Self::default_cluster)
    /// (with the mode's own particle counts); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Top,
            Grid,
            External,
        }
        let mut section = Section::Top;
        let mut mode: Option<Mode> = None;
        let mut counts: Option<Vec<u32>> = None;
        let mut filling: Option<FillingMode> = None;
        let mut output_dir: Option<PathBuf> = None;
        let mut grid = GridSettings::default();
        let mut systems: Vec<ExternalSystem> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(Error::Parse {
                    line: line_no,
                    message: format!("unterminated section header `{line}`"),
                })?;
                section = match name.trim() {
                    "grid" => Section::Grid,
                    "external" => Section::External,
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("unknown section `[{other}]`"),
                        })
                    }
                };
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad_key = |k: &str| Error::Parse {
                line: line_no,
                message: format!("unknown key `{k}` in this section"),
            };
            match section {
                Section::Top => match key {
                    "mode" => {
                        mode = Some(Mode::parse(value).ok_or(Error::Parse {
                            line: line_no,
                            message: format!(
                                "mode must be cluster_ws, nucleus_ho or external, got `{value}`"
                            ),
                        })?)
                    }
                    "particle_counts" => {
                        let mut parsed = Vec::new();
                        for piece in value.split(',') {
                            let piece = piece.trim();
                            if piece.is_empty() {
                                continue;
                            }
                            parsed.push(piece.parse::<u32>().map_err(|_| Error::Parse {
                                line: line_no,
                                message: format!("bad particle count `{piece}`"),
                            })?);
                        }
                        counts = Some(parsed);
                    }
                    "filling" => {
                        filling = Some(match value {
                            "strict_closed" => FillingMode::StrictClosed,
                            "uniform_fractional" => FillingMode::UniformFractional,
                            other => {
                                return Err(Error::Parse {
                                    line: line_no,
                                    message: format!("unknown filling mode `{other}`"),
                                })
                            }
                        })
                    }
                    "output_dir" => output_dir = Some(PathBuf::from(value)),
                    other => return Err(bad_key(other)),
                },
                Section::Grid => {
                    let parse_f64 = |v: &str| -> Result<Option<f64>> {
                        if v == "auto" {
                            return Ok(None);
                        }
                        let x: f64 = v.parse().map_err(|_| Error::Parse {
                            line: line_no,
                            message: format!("`{key}` must be a number or `auto`, got `{v}`"),
                        })?;
                        if !(x > 0.0) {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!("`{key}` must be positive, got `{v}`"),
                            });
                        }
                        Ok(Some(x))
                    };
                    let parse_usize = |v: &str| -> Result<usize> {
                        v.parse().map_err(|_| Error::Parse {
                            line: line_no,
                            message: format!("`{key}` must be a count, got `{v}`"),
                        })
                    };
                    match key {
                        "r_max" => grid.r_max = parse_f64(value)?,
                        "k_max" => grid.k_max = parse_f64(value)?,
                        "n_points" => grid.n_points = parse_usize(value)?,
                        "n_k" => grid.n_k = parse_usize(value)?,
                        "l_max" => {
                            grid.l_max = value.parse().map_err(|_| Error::Parse {
                                line: line_no,
                                message: format!("`l_max` must be a count, got `{value}`"),
                            })?
                        }
                        other => return Err(bad_key(other)),
                    }
                }
                Section::External => match key {
                    "system" => {
                        let files: Vec<PathBuf> = value
                            .split(',')
                            .map(str::trim)
                            .filter(|p| !p.is_empty())
                            .map(PathBuf::from)
                            .collect();
                        if files.is_empty() {
                            return Err(Error::Parse {
                                line: line_no,
                                message: "system needs at least one file".into(),
                            });
                        }
                        let id = files[0]
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| format!("system{}", systems.len() + 1));
                        systems.push(ExternalSystem { id, files });
                    }
                    other => return Err(bad_key(other)),
                },
            }
        }

        let mode = mode.ok_or(Error::Parse {
            line: 0,
            message: "missing key `mode`".into(),
        })?;
        let mut config = match mode {
            Mode::NucleusHo => RunConfig::default_nucleus(),
            _ => RunConfig::default_cluster(),
        };
        config.mode = mode;
        if let Some(c) = counts {
            config.particle_counts = c;
        }
        if let Some(f) = filling {
            config.filling = f;
        }
        if let Some(dir) = output_dir {
            config.output_dir = dir;
        }
        config.grid = grid;
        config.external_systems = systems;
        if mode == Mode::External {
            config.particle_counts.clear();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::External => {
                if self.external_systems.is_empty() {
                    return Err(Error::InvalidArgument(
                        "external mode needs at least one `system = ...` entry".into(),
                    ));
                }
            }
            _ => {
                if self.particle_counts.is_empty() {
                    return Err(Error::InvalidArgument(
                        "no particle counts to compute".into(),
                    ));
                }
                if self.particle_counts.contains(&0) {
                    return Err(Error::InvalidArgument(
                        "particle counts must be at least 1".into(),
                    ));
                }
            }
        }
        if self.grid.n_points < 32 || self.grid.n_k < 32 {
            return Err(Error::InvalidArgument(
                "grids need at least 32 points".into(),
            ));
        }
        Ok(())
    }
}

/// The potential spec a model mode assigns to particle count n.
pub fn model_spec(mode: Mode, n: u32) -> Result<PotentialSpec> {
    match mode {
        Mode::ClusterWs => PotentialSpec::cluster(n),
        Mode::NucleusHo => PotentialSpec::nucleus(n),
        Mode::External => Err(Error::InvalidArgument(
            "external systems have no model potential".into(),
        )),
    }
}

/// Default box radius: the well radius plus fifteen diffuseness lengths and
/// a 10-length safety margin for the Woods-Saxon well; twelve oscillator
/// lengths for the oscillator.
pub fn default_r_max(spec: &PotentialSpec) -> f64 {
    match spec.kind {
        PotentialKind::WoodsSaxon { diffuseness, .. } => {
            spec.radius() + 15.0 * diffuseness + 10.0
        }
        PotentialKind::HarmonicOscillator { .. } => 12.0 * spec.radius(),
    }
}

/// Default momentum cutoff: 40 over the shortest length scale.
pub fn default_k_max(spec: &PotentialSpec) -> f64 {
    40.0 / spec.length_scale()
}

/// Builds the position and momentum grids for one model system.
pub fn resolve_grids(
    spec: &PotentialSpec,
    grid: &GridSettings,
) -> Result<(Arc<RadialGrid>, Arc<RadialGrid>)> {
    let r_max = grid.r_max.unwrap_or_else(|| default_r_max(spec));
    let k_max = grid.k_max.unwrap_or_else(|| default_k_max(spec));
    Ok((
        Arc::new(RadialGrid::build(r_max, grid.n_points)?),
        Arc::new(RadialGrid::build(k_max, grid.n_k)?),
    ))
}

/// Search ceiling wide enough that the enumerated levels can hold n
/// particles: just below threshold for the Woods-Saxon well, two quanta
/// above the last oscillator shell needed.
fn search_ceiling(spec: &PotentialSpec, grid: &RadialGrid, n: u32) -> f64 {
    match spec.kind {
        PotentialKind::WoodsSaxon { .. } => {
            crate::bound_states::default_search_ceiling(spec, grid)
        }
        PotentialKind::HarmonicOscillator { hbar_omega } => {
            let g = spec.degeneracy_factor;
            let mut capacity = 0u64;
            let mut p = 0u32;
            loop {
                capacity += (g as u64) * ((p + 1) * (p + 2) / 2) as u64;
                if capacity >= n as u64 {
                    break;
                }
                p += 1;
            }
            (p as f64 + 2.0) * hbar_omega
        }
    }
}

/// Everything computed for one successful system.
#[derive(Debug, Clone)]
pub struct ModelSystem {
    pub id: String,
    pub n_particles: u32,
    pub scheme: LevelScheme,
    pub filling: ShellFilling,
    pub momenta: Vec<MomentumOrbital>,
    pub pair: DensityPair,
    pub entropy: EntropyResult,
}

/// Level scheme of one model system (also used by the `levels` listing).
pub fn enumerate_for_mode(mode: Mode, n: u32, grid: &GridSettings) -> Result<LevelScheme> {
    let spec = model_spec(mode, n)?;
    let (r_grid, _) = resolve_grids(&spec, grid)?;
    let ceiling = search_ceiling(&spec, &r_grid, n);
    enumerate_bound_levels_below(&spec, &r_grid, grid.l_max, ceiling)
}

/// Runs the whole chain for one model system: levels, filling, transforms,
/// densities, entropies.
pub fn compute_model_system(
    mode: Mode,
    n: u32,
    grid: &GridSettings,
    filling_mode: FillingMode,
) -> Result<ModelSystem> {
    let spec = model_spec(mode, n)?;
    let (r_grid, k_grid) = resolve_grids(&spec, grid)?;
    let ceiling = search_ceiling(&spec, &r_grid, n);
    let scheme = enumerate_bound_levels_below(&spec, &r_grid, grid.l_max, ceiling)?;
    let filling = fill_shells(&scheme, n, filling_mode)?;
    let orbitals: Vec<_> = filling.occupied.iter().map(|(o, _)| o.clone()).collect();
    let momenta = transform_orbitals(&orbitals, &k_grid)?;
    let pair = build_density(&filling, &momenta)?;
    let entropy = entropy_report(&pair)?;
    Ok(ModelSystem {
        id: system_id(mode, n),
        n_particles: n,
        scheme,
        filling,
        momenta,
        pair,
        entropy,
    })
}

/// Stable system identifier used in file names and the entropy CSV.
pub fn system_id(mode: Mode, n: u32) -> String {
    match mode {
        Mode::ClusterWs => format!("N{n}"),
        Mode::NucleusHo => format!("A{n}"),
        Mode::External => format!("ext{n}"),
    }
}

/// Reads and ingests one external system's files.
pub fn compute_external_system(
    system: &ExternalSystem,
    grid: &GridSettings,
) -> Result<(DensityPair, EntropyResult)> {
    let mut tables = Vec::new();
    for path in &system.files {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read {}: {e}", path.display()))
        })?;
        tables.extend(parse_density_tables(&text)?);
    }
    let pair = ingest_external_density(&tables, grid.n_points, grid.n_k)?;
    let entropy = entropy_report(&pair)?;
    Ok((pair, entropy))
}

/// Per-system line of a finished run.
#[derive(Debug, Clone)]
pub struct SystemResult {
    pub id: String,
    pub n_particles: u32,
    pub entropy: EntropyResult,
}

/// A system that failed, with the diagnostic and the exit code its error
/// class maps to.
#[derive(Debug, Clone)]
pub struct SystemFailure {
    pub id: String,
    pub message: String,
    pub exit_code: i32,
}

/// The three fitted laws of a run plus the Boltzmann analogy of the sum.
#[derive(Debug, Clone)]
pub struct RunFits {
    pub s_r: ScalingFit,
    pub s_k: ScalingFit,
    pub s_sum: ScalingFit,
    pub boltzmann: Option<BoltzmannAnalogy>,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub systems: Vec<SystemResult>,
    pub failures: Vec<SystemFailure>,
    pub fits: Option<RunFits>,
    /// Why the fit was skipped, when it was.
    pub fit_skip_reason: Option<String>,
    /// Files written, in write order.
    pub written: Vec<PathBuf>,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".into(),
    });
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Renders the entropy table: system_id, N, S_r, S_k, S_sum, eur_margin.
pub fn entropy_csv(systems: &[SystemResult]) -> String {
    let mut out = String::from("system_id,N,S_r,S_k,S_sum,eur_margin\n");
    for s in systems {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.id,
            s.n_particles,
            format_g6(s.entropy.s_r),
            format_g6(s.entropy.s_k),
            format_g6(s.entropy.s_sum),
            format_g6(s.entropy.eur_margin),
        ));
    }
    out
}

/// Fitted-versus-published coefficient table for the run's family.
fn comparison_csv(mode: Mode, fits: &RunFits) -> String {
    let family_keys = match mode {
        Mode::ClusterWs => [
            Some("clusters_WS_Sr"),
            Some("clusters_WS_Sk"),
            Some("clusters_WS_sum"),
        ],
        Mode::NucleusHo => [None, None, Some("nuclei_HO_sum")],
        Mode::External => [None, None, None],
    };
    let mut out = String::from(
        "quantity,computed_a,computed_b,rms_residual,reference_key,reference_a,\
         reference_b,delta_a,delta_b\n",
    );
    for ((quantity, fit), key) in [
        ("S_r", &fits.s_r),
        ("S_k", &fits.s_k),
        ("S_sum", &fits.s_sum),
    ]
    .into_iter()
    .zip(family_keys)
    {
        let reference = key.and_then(reference_fit);
        let (rk, ra, rb, da, db) = match reference {
            Some(r) => (
                r.key,
                format_g6(r.a),
                format_g6(r.b),
                format_g6(fit.a - r.a),
                format_g6(fit.b - r.b),
            ),
            None => ("", String::new(), String::new(), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{quantity},{},{},{},{rk},{ra},{rb},{da},{db}\n",
            format_g6(fit.a),
            format_g6(fit.b),
            format_g6(fit.rms_residual),
        ));
    }
    out
}

/// The published total-entropy laws of the three families, as labeled
/// (a, b) curves for the figure output.
pub fn reference_curves() -> [(&'static str, f64, f64); 3] {
    let curve = |label, key| {
        let r = reference_fit(key).expect("table entry");
        (label, r.a, r.b)
    };
    [
        curve("atoms", "atoms_HF_sum"),
        curve("clusters", "clusters_WS_sum"),
        curve("nuclei", "nuclei_HO_sum"),
    ]
}

/// Figure data: each (label, a, b) curve sampled densely over N, with the
/// computed sums as a scatter column (blank where no system sits). N rows
/// cover 2..250 plus every computed count.
pub fn emit_figure_data(curves: &[(&str, f64, f64)], systems: &[SystemResult]) -> String {
    let mut rows: Vec<u32> = (1..=125).map(|i| 2 * i).collect();
    for s in systems {
        rows.push(s.n_particles);
    }
    rows.sort_unstable();
    rows.dedup();

    let mut out = String::from("N");
    for (label, _, _) in curves {
        out.push_str(",S_");
        out.push_str(label);
    }
    out.push_str(",S_computed\n");
    for n in rows {
        let x = (n as f64).ln();
        out.push_str(&n.to_string());
        for &(_, a, b) in curves {
            out.push(',');
            out.push_str(&format_g6(a + b * x));
        }
        out.push(',');
        if let Some(s) = systems.iter().find(|s| s.n_particles == n) {
            out.push_str(&format_g6(s.entropy.s_sum));
        }
        out.push('\n');
    }
    out
}

/// JSON document for a run's three fits plus the Boltzmann analogy.
pub fn fits_json(fits: &RunFits) -> String {
    #[derive(serde::Serialize)]
    struct Doc<'a> {
        s_r: &'a ScalingFit,
        s_k: &'a ScalingFit,
        s_sum: &'a ScalingFit,
        #[serde(skip_serializing_if = "Option::is_none")]
        boltzmann: &'a Option<BoltzmannAnalogy>,
    }
    let doc = Doc {
        s_r: &fits.s_r,
        s_k: &fits.s_k,
        s_sum: &fits.s_sum,
        boltzmann: &fits.boltzmann,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}

/// Runs a configuration to completion and writes its outputs.
///
/// Returns `Err` for configuration-class problems (bad counts, open shells
/// in strict filling, unreadable config): nothing useful can be produced.
/// Numerical failures of individual systems are collected in the report's
/// `failures` instead, and the fit runs when two or more systems survive.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;

    // Pass 1: levels and shell filling for every system (cheap), so closure
    // violations surface before any transform starts.
    enum Prepared {
        Model(Box<ModelSystem>),
        External(SystemResult),
        Failed(SystemFailure),
    }
    let mut prepared: Vec<Prepared> = Vec::new();
    match config.mode {
        Mode::External => {
            for system in &config.external_systems {
                match compute_external_system(system, &config.grid) {
                    Ok((pair, entropy)) => prepared.push(Prepared::External(SystemResult {
                        id: system.id.clone(),
                        n_particles: pair.n_particles,
                        entropy,
                    })),
                    Err(err) => prepared.push(Prepared::Failed(SystemFailure {
                        id: system.id.clone(),
                        message: err.to_string(),
                        exit_code: err.exit_code(),
                    })),
                }
            }
        }
        mode => {
            // Closure pre-validation: enumerate + fill for all systems first.
            let mut schemes = Vec::new();
            for &n in &config.particle_counts {
                let spec = model_spec(mode, n)?;
                let (r_grid, k_grid) = resolve_grids(&spec, &config.grid)?;
                let ceiling = search_ceiling(&spec, &r_grid, n);
                let scheme =
                    enumerate_bound_levels_below(&spec, &r_grid, config.grid.l_max, ceiling)?;
                let filling = fill_shells(&scheme, n, config.filling)?;
                schemes.push((n, k_grid, scheme, filling));
            }
            // Pass 2: the heavy transform and entropy work.
            for (n, k_grid, scheme, filling) in schemes {
                let id = system_id(mode, n);
                let outcome = (|| -> Result<ModelSystem> {
                    let orbitals: Vec<_> =
                        filling.occupied.iter().map(|(o, _)| o.clone()).collect();
                    let momenta = transform_orbitals(&orbitals, &k_grid)?;
                    let pair = build_density(&filling, &momenta)?;
                    let entropy = entropy_report(&pair)?;
                    Ok(ModelSystem {
                        id: id.clone(),
                        n_particles: n,
                        scheme,
                        filling,
                        momenta,
                        pair,
                        entropy,
                    })
                })();
                match outcome {
                    Ok(system) => prepared.push(Prepared::Model(Box::new(system))),
                    Err(err) => prepared.push(Prepared::Failed(SystemFailure {
                        id,
                        message: err.to_string(),
                        exit_code: err.exit_code(),
                    })),
                }
            }
        }
    }

    let mut written = Vec::new();
    let mut systems = Vec::new();
    let mut failures = Vec::new();
    for p in &prepared {
        match p {
            Prepared::Model(m) => {
                let path = config.output_dir.join(format!("levels_{}.csv", m.id));
                write_atomic(&path, &m.scheme.to_csv())?;
                written.push(path);
                systems.push(SystemResult {
                    id: m.id.clone(),
                    n_particles: m.n_particles,
                    entropy: m.entropy,
                });
            }
            Prepared::External(s) => systems.push(s.clone()),
            Prepared::Failed(f) => failures.push(f.clone()),
        }
    }

    let entropy_path = config.output_dir.join("entropy.csv");
    write_atomic(&entropy_path, &entropy_csv(&systems))?;
    written.push(entropy_path);

    // The scaling fits over the surviving systems.
    let (fits, fit_skip_reason) = if systems.len() < 2 {
        (
            None,
            Some(format!(
                "scaling fit needs at least 2 systems, {} succeeded",
                systems.len()
            )),
        )
    } else {
        let pts = |pick: fn(&EntropyResult) -> f64| -> Vec<(f64, f64)> {
            systems
                .iter()
                .map(|s| (s.n_particles as f64, pick(&s.entropy)))
                .collect()
        };
        let fit3 = (|| -> Result<RunFits> {
            let s_r = fit_log_linear(&pts(|e| e.s_r))?;
            let s_k = fit_log_linear(&pts(|e| e.s_k))?;
            let s_sum = fit_log_linear(&pts(|e| e.s_sum))?;
            let boltzmann = boltzmann_analogy(&s_sum).ok();
            Ok(RunFits {
                s_r,
                s_k,
                s_sum,
                boltzmann,
            })
        })();
        match fit3 {
            Ok(f) => (Some(f), None),
            Err(err) => (None, Some(err.to_string())),
        }
    };

    if let Some(fits) = &fits {
        let path = config.output_dir.join("fits.json");
        write_atomic(&path, &fits_json(fits))?;
        written.push(path);
        let path = config.output_dir.join("comparison.csv");
        write_atomic(&path, &comparison_csv(config.mode, fits))?;
        written.push(path);
    }
    if !systems.is_empty() {
        let path = config.output_dir.join("figure.csv");
        write_atomic(&path, &emit_figure_data(&reference_curves(), &systems))?;
        written.push(path);
    }

    Ok(RunReport {
        systems,
        failures,
        fits,
        fit_skip_reason,
        written,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_configs_validate() {
        RunConfig::default_cluster().validate().unwrap();
        RunConfig::default_nucleus().validate().unwrap();
        assert_eq!(
            RunConfig::default_cluster().particle_counts,
            vec![8, 18, 20, 34, 40, 58, 68, 70]
        );
        assert_eq!(
            RunConfig::default_nucleus().particle_counts,
            vec![4, 16, 40, 80, 140, 224]
        );
    }

    #[test]
    fn config_parses_sections_and_defaults() {
        let text = "\
            # a cluster run\n\
            mode = cluster_ws\n\
            particle_counts = 8, 18\n\
            filling = uniform_fractional\n\
            output_dir = /tmp/somewhere\n\
            \n\
            [grid]\n\
            r_max = 25.5\n\
            n_points = 2001\n\
            k_max = auto\n\
            n_k = 1001\n\
            l_max = 4\n";
        let config = RunConfig::parse(text).unwrap();
        assert_eq!(config.mode, Mode::ClusterWs);
        assert_eq!(config.particle_counts, vec![8, 18]);
        assert_eq!(config.filling, FillingMode::UniformFractional);
        assert_eq!(config.output_dir, PathBuf::from("/tmp/somewhere"));
        assert_eq!(config.grid.r_max, Some(25.5));
        assert_eq!(config.grid.k_max, None);
        assert_eq!(config.grid.n_points, 2001);
        assert_eq!(config.grid.n_k, 1001);
        assert_eq!(config.grid.l_max, 4);

        // Minimal config: mode only, everything else defaulted.
        let minimal = RunConfig::parse("mode = nucleus_ho\n").unwrap();
        assert_eq!(minimal.particle_counts, vec![4, 16, 40, 80, 140, 224]);
        assert_eq!(minimal.grid, GridSettings::default());
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        match RunConfig::parse("mode = cluster_ws\nbogus = 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            RunConfig::parse("mode = warp_drive\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("particle_counts = 8\n"),
            Err(Error::Parse { line: 0, .. })
        ));
        assert!(matches!(
            RunConfig::parse("mode = cluster_ws\n[grid]\nn_points = few\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            RunConfig::parse("mode = external\n"),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            RunConfig::parse("mode = cluster_ws\nparticle_counts =\n"),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn external_systems_get_ids_from_file_stems() {
        let text = "mode = external\n[external]\nsystem = /data/na8_gauss.dat\n\
                    system = a.dat, b.dat\n";
        let config = RunConfig::parse(text).unwrap();
        assert_eq!(config.external_systems.len(), 2);
        assert_eq!(config.external_systems[0].id, "na8_gauss");
        assert_eq!(config.external_systems[1].id, "a");
        assert_eq!(config.external_systems[1].files.len(), 2);
    }

    #[test]
    fn default_grids_match_the_potential() {
        let cluster = PotentialSpec::cluster(8).unwrap();
        assert_relative_eq!(default_r_max(&cluster), 4.5 + 15.0 * 0.74 + 10.0);
        assert_relative_eq!(default_k_max(&cluster), 40.0 / 0.74);
        let nucleus = PotentialSpec::nucleus(16).unwrap();
        let b = nucleus.radius();
        assert_relative_eq!(default_r_max(&nucleus), 12.0 * b);
        assert_relative_eq!(default_k_max(&nucleus), 40.0 / b);
    }

    #[test]
    fn oscillator_ceiling_covers_the_requested_count() {
        let spec = PotentialSpec::nucleus(224).unwrap();
        let grid = RadialGrid::build(40.0, 101).unwrap();
        let hw = match spec.kind {
            PotentialKind::HarmonicOscillator { hbar_omega } => hbar_omega,
            _ => unreachable!(),
        };
        // 224 fills shells p = 0..5, so the ceiling must clear (6.5 + 0.5) hw
        // but stay below the p = 6 shell at 7.5 hw... it sits at (5+2) hw.
        assert_relative_eq!(search_ceiling(&spec, &grid, 224), 7.0 * hw);
        assert_relative_eq!(search_ceiling(&spec, &grid, 4), 2.0 * hw);
    }

    #[test]
    fn entropy_csv_shape() {
        let systems = vec![SystemResult {
            id: "N8".into(),
            n_particles: 8,
            entropy: EntropyResult {
                s_r: 6.160576,
                s_k: 1.451505,
                s_sum: 7.612081,
                eur_bound: 6.434189,
                eur_margin: 1.177892,
            },
        }];
        let csv = entropy_csv(&systems);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "system_id,N,S_r,S_k,S_sum,eur_margin"
        );
        assert_eq!(lines.next().unwrap(), "N8,8,6.16058,1.45151,7.61208,1.17789");
    }

    #[test]
    fn figure_rows_include_computed_counts() {
        let systems = vec![SystemResult {
            id: "N9".into(),
            n_particles: 9,
            entropy: EntropyResult {
                s_r: 6.2,
                s_k: 1.45,
                s_sum: 7.65,
                eur_bound: 6.43,
                eur_margin: 1.22,
            },
        }];
        let csv = emit_figure_data(&reference_curves(), &systems);
        assert!(csv.starts_with("N,S_atoms,S_clusters,S_nuclei,S_computed\n"));
        let row9: Vec<&str> = csv
            .lines()
            .find(|l| l.starts_with("9,"))
            .expect("odd computed N gets its own row")
            .split(',')
            .collect();
        assert_eq!(row9[4], "7.65");
        // Reference curve value at N = 9: atoms_HF 6.257 + 1.007 ln 9.
        let expected = 6.257 + 1.007 * 9f64.ln();
        assert_eq!(row9[1], format_g6(expected));
        // Rows without a computed point leave the scatter column empty.
        let row10 = csv.lines().find(|l| l.starts_with("10,")).unwrap();
        assert!(row10.ends_with(','));
    }

    #[test]
    fn figure_curves_keep_the_published_ordering() {
        // Atoms above clusters above nuclei everywhere on the plot.
        let csv = emit_figure_data(&reference_curves(), &[]);
        let mut previous_n = 0u32;
        for line in csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            let n: u32 = cells[0].parse().unwrap();
            assert!(n > previous_n, "N column must increase");
            previous_n = n;
            let atoms: f64 = cells[1].parse().unwrap();
            let clusters: f64 = cells[2].parse().unwrap();
            let nuclei: f64 = cells[3].parse().unwrap();
            assert!(atoms > clusters && clusters > nuclei, "ordering at N = {n}");
        }
    }

    #[test]
    fn figure_handles_a_single_curve() {
        let csv = emit_figure_data(&[("sum", 1.0, 2.0)], &[]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "N,S_sum,S_computed");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "2");
        assert_eq!(first[1], format_g6(1.0 + 2.0 * 2f64.ln()));
    }
}
