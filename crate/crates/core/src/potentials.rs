//! Mean-field potential definitions and kinematic constants.
//!
//! A [`PotentialSpec`] bundles the potential shape (Woods-Saxon smoothed well
//! or harmonic oscillator) with the particle species data the radial
//! Schroedinger equation needs: the kinetic constant hbar^2/2m and the
//! per-orbital degeneracy factor.

use crate::constants;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    /// -V0 / (1 + exp((r - R)/a)) with R = r0 * N^(1/3).
    WoodsSaxon { depth: f64, r0: f64, diffuseness: f64 },
    /// (1/2) m omega^2 r^2, parametrized by the oscillator quantum.
    HarmonicOscillator { hbar_omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// hbar^2 / 2m in energy * length^2 for the particle species.
    pub kinetic_constant: f64,
    /// Particle count; sets the Woods-Saxon radius R = r0 * N^(1/3).
    pub n_particles: u32,
    /// Level capacity factor g in g*(2l+1): 2 for electrons (spin),
    /// 4 for nucleons (spin and isospin).
    pub degeneracy_factor: u32,
}

/// Beyond this argument of the Fermi function the potential is taken as 0.
const FERMI_EXP_CUTOFF: f64 = 500.0;

impl PotentialSpec {
    /// Woods-Saxon spec for the valence electrons of a neutral metallic
    /// cluster: V0 = 6 eV, r0 = 2.25 A, a = 0.74 A, electron kinetics.
    pub fn cluster(n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument(
                "cluster needs at least one valence electron".into(),
            ));
        }
        Ok(Self {
            kind: PotentialKind::WoodsSaxon {
                depth: constants::CLUSTER_V0_EV,
                r0: constants::CLUSTER_R0_A,
                diffuseness: constants::CLUSTER_DIFFUSENESS_A,
            },
            kinetic_constant: constants::HBAR2_OVER_2ME_EV_A2,
            n_particles: n,
            degeneracy_factor: constants::ELECTRON_DEGENERACY_FACTOR,
        })
    }

    /// Harmonic-oscillator spec for a nucleus of mass number A with the
    /// empirical quantum hbar*omega = 41 A^(-1/3) MeV and nucleon kinetics.
    pub fn nucleus(a: u32) -> Result<Self> {
        if a < 2 {
            return Err(Error::InvalidArgument(format!(
                "nucleus needs A >= 2, got {a}"
            )));
        }
        Ok(Self {
            kind: PotentialKind::HarmonicOscillator {
                hbar_omega: constants::HO_OMEGA_COEFF_MEV * (a as f64).powf(-1.0 / 3.0),
            },
            kinetic_constant: constants::HBAR2_OVER_2M_NUCLEON_MEV_FM2,
            n_particles: a,
            degeneracy_factor: constants::NUCLEON_DEGENERACY_FACTOR,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kinetic_constant > 0.0) {
            return Err(Error::InvalidArgument(
                "kinetic constant must be positive".into(),
            ));
        }
        if self.n_particles < 1 {
            return Err(Error::InvalidArgument("particle count must be >= 1".into()));
        }
        match self.kind {
            PotentialKind::WoodsSaxon {
                depth,
                r0,
                diffuseness,
            } => {
                if !(depth > 0.0 && r0 > 0.0 && diffuseness > 0.0) {
                    return Err(Error::InvalidArgument(
                        "Woods-Saxon needs V0 > 0, r0 > 0, a > 0".into(),
                    ));
                }
            }
            PotentialKind::HarmonicOscillator { hbar_omega } => {
                if !(hbar_omega > 0.0) {
                    return Err(Error::InvalidArgument(
                        "oscillator quantum must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Well radius: R = r0 * N^(1/3) for Woods-Saxon, the oscillator length
    /// b = sqrt(2c/hbar_omega) for the harmonic oscillator.
    pub fn radius(&self) -> f64 {
        match self.kind {
            PotentialKind::WoodsSaxon { r0, .. } => r0 * (self.n_particles as f64).cbrt(),
            PotentialKind::HarmonicOscillator { hbar_omega } => {
                (2.0 * self.kinetic_constant / hbar_omega).sqrt()
            }
        }
    }

    /// Shortest length scale of the potential; sets the default momentum
    /// cutoff k_max = 40 / length_scale.
    pub fn length_scale(&self) -> f64 {
        match self.kind {
            PotentialKind::WoodsSaxon { diffuseness, .. } => diffuseness,
            PotentialKind::HarmonicOscillator { .. } => self.radius(),
        }
    }

    /// V(r). Overflow-safe: for (r-R)/a beyond the exp cutoff the
    /// Woods-Saxon tail is exactly 0.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radius must be non-negative, got {r}"
            )));
        }
        Ok(self.evaluate_unchecked(r))
    }

    /// Same as [`evaluate`](Self::evaluate) without the argument check, for
    /// grid loops that guarantee r >= 0.
    pub fn evaluate_unchecked(&self, r: f64) -> f64 {
        match self.kind {
            PotentialKind::WoodsSaxon {
                depth, diffuseness, ..
            } => {
                let x = (r - self.radius()) / diffuseness;
                if x > FERMI_EXP_CUTOFF {
                    0.0
                } else {
                    -depth / (1.0 + x.exp())
                }
            }
            PotentialKind::HarmonicOscillator { hbar_omega } => {
                hbar_omega * hbar_omega * r * r / (4.0 * self.kinetic_constant)
            }
        }
    }

    /// Plain-text key-value form, one `key = value` per line.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        match self.kind {
            PotentialKind::WoodsSaxon {
                depth,
                r0,
                diffuseness,
            } => {
                out.push_str("kind = woods_saxon\n");
                out.push_str(&format!("V0_eV = {depth}\n"));
                out.push_str(&format!("r0_A = {r0}\n"));
                out.push_str(&format!("a_A = {diffuseness}\n"));
            }
            PotentialKind::HarmonicOscillator { hbar_omega } => {
                out.push_str("kind = harmonic_oscillator\n");
                out.push_str(&format!("hbar_omega_MeV = {hbar_omega}\n"));
            }
        }
        out.push_str(&format!("N = {}\n", self.n_particles));
        out
    }

    /// Parses the key-value form written by
    /// [`to_config_string`](Self::to_config_string). Species constants
    /// follow the kind: electrons for `woods_saxon` (eV, Angstrom),
    /// nucleons for `harmonic_oscillator` (MeV, fm); the optional keys
    /// `kinetic_constant` and `degeneracy_factor` override them.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut kind: Option<&str> = None;
        let mut v0 = None;
        let mut r0 = None;
        let mut a = None;
        let mut hbar_omega = None;
        let mut n: Option<u32> = None;
        let mut kinetic = None;
        let mut degeneracy = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = |v: &str| -> Result<f64> {
                v.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{key}` is not a number: `{v}`"),
                })
            };
            match key {
                "kind" => {
                    kind = Some(match value {
                        "woods_saxon" => "ws",
                        "harmonic_oscillator" => "ho",
                        other => {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!("unknown potential kind `{other}`"),
                            })
                        }
                    })
                }
                "V0_eV" => v0 = Some(parse_f64(value)?),
                "r0_A" => r0 = Some(parse_f64(value)?),
                "a_A" => a = Some(parse_f64(value)?),
                "hbar_omega_MeV" => hbar_omega = Some(parse_f64(value)?),
                "N" => {
                    n = Some(value.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("`N` is not a count: `{value}`"),
                    })?)
                }
                "kinetic_constant" => kinetic = Some(parse_f64(value)?),
                "degeneracy_factor" => {
                    degeneracy = Some(value.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("`degeneracy_factor` is not a count: `{value}`"),
                    })?)
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        let missing = |what: &str| Error::Parse {
            line: 0,
            message: format!("missing key `{what}`"),
        };
        let n = n.ok_or_else(|| missing("N"))?;
        let spec = match kind.ok_or_else(|| missing("kind"))? {
            "ws" => PotentialSpec {
                kind: PotentialKind::WoodsSaxon {
                    depth: v0.ok_or_else(|| missing("V0_eV"))?,
                    r0: r0.ok_or_else(|| missing("r0_A"))?,
                    diffuseness: a.ok_or_else(|| missing("a_A"))?,
                },
                kinetic_constant: kinetic.unwrap_or(constants::HBAR2_OVER_2ME_EV_A2),
                n_particles: n,
                degeneracy_factor: degeneracy
                    .unwrap_or(constants::ELECTRON_DEGENERACY_FACTOR),
            },
            _ => PotentialSpec {
                kind: PotentialKind::HarmonicOscillator {
                    hbar_omega: hbar_omega.ok_or_else(|| missing("hbar_omega_MeV"))?,
                },
                kinetic_constant: kinetic.unwrap_or(constants::HBAR2_OVER_2M_NUCLEON_MEV_FM2),
                n_particles: n,
                degeneracy_factor: degeneracy.unwrap_or(constants::NUCLEON_DEGENERACY_FACTOR),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}
