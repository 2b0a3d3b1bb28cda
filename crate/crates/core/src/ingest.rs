//! External density tables: parsing, validation, and resampling.
//!
//! The text format carries one or more blocks, each introduced by a
//! `# space:` header:
//!
//! ```text
//! # space: position            (or momentum)
//! # unit: angstrom             (fm, inverse_angstrom, inverse_fm)
//! # norm: 1                    (or N)
//! # n_particles: 8             (optional)
//! 0.00   2.533030e-02
//! 0.05   2.531882e-02
//! ...
//! ```
//!
//! Data rows are two whitespace-separated columns, abscissa strictly
//! increasing. Lines starting with `#` that are not single-word headers are
//! comments. Tables are resampled onto uniform internal grids with a
//! monotone (Fritsch-Carlson) cubic, so positive monotone data stays
//! positive and free of overshoot; a declared norm off by less than 1% is
//! corrected silently, a larger deviation is rejected.

use std::sync::Arc;

use crate::density::{DensityPair, Normalization};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Position,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableUnit {
    Angstrom,
    Fm,
    InverseAngstrom,
    InverseFm,
}

/// Declared normalization of a table: unity or the particle number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclaredNorm {
    One,
    ParticleCount,
}

/// One parsed density table.
#[derive(Debug, Clone)]
pub struct DensityTable {
    pub space: Space,
    pub unit: TableUnit,
    pub norm: DeclaredNorm,
    pub n_particles: Option<u32>,
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
}

/// 1 angstrom = 1e5 fm.
const FM_PER_ANGSTROM: f64 = 1e5;

/// Parses every table block in `text`. Errors carry 1-based line numbers.
pub fn parse_density_tables(text: &str) -> Result<Vec<DensityTable>> {
    struct Partial {
        space: Space,
        unit: Option<TableUnit>,
        norm: Option<DeclaredNorm>,
        n_particles: Option<u32>,
        abscissae: Vec<f64>,
        values: Vec<f64>,
        start_line: usize,
    }

    let mut tables = Vec::new();
    let mut current: Option<Partial> = None;

    let finish = |p: Partial, tables: &mut Vec<DensityTable>| -> Result<()> {
        let unit = p.unit.ok_or(Error::Parse {
            line: p.start_line,
            message: "table has no `# unit:` header".into(),
        })?;
        let norm = p.norm.ok_or(Error::Parse {
            line: p.start_line,
            message: "table has no `# norm:` header".into(),
        })?;
        let length_like = matches!(unit, TableUnit::Angstrom | TableUnit::Fm);
        let wants_length = p.space == Space::Position;
        if length_like != wants_length {
            return Err(Error::Parse {
                line: p.start_line,
                message: format!(
                    "unit {unit:?} does not fit a {:?}-space table",
                    p.space
                ),
            });
        }
        if p.abscissae.len() < 4 {
            return Err(Error::InsufficientData(format!(
                "table starting at line {} has {} rows; at least 4 are needed",
                p.start_line,
                p.abscissae.len()
            )));
        }
        tables.push(DensityTable {
            space: p.space,
            unit,
            norm,
            n_particles: p.n_particles,
            abscissae: p.abscissae,
            values: p.values,
        });
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            // A single-word token before ':' is a header; anything else is
            // commentary.
            let Some((key, value)) = rest.split_once(':') else {
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                continue;
            }
            match key {
                "space" => {
                    if let Some(done) = current.take() {
                        finish(done, &mut tables)?;
                    }
                    let space = match value {
                        "position" => Space::Position,
                        "momentum" => Space::Momentum,
                        other => {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!("unknown space `{other}`"),
                            })
                        }
                    };
                    current = Some(Partial {
                        space,
                        unit: None,
                        norm: None,
                        n_particles: None,
                        abscissae: Vec::new(),
                        values: Vec::new(),
                        start_line: line_no,
                    });
                }
                "unit" | "norm" | "n_particles" => {
                    let part = current.as_mut().ok_or(Error::Parse {
                        line: line_no,
                        message: format!("`{key}` header before any `# space:` header"),
                    })?;
                    match key {
                        "unit" => {
                            part.unit = Some(match value {
                                "angstrom" => TableUnit::Angstrom,
                                "fm" => TableUnit::Fm,
                                "inverse_angstrom" => TableUnit::InverseAngstrom,
                                "inverse_fm" => TableUnit::InverseFm,
                                other => {
                                    return Err(Error::Parse {
                                        line: line_no,
                                        message: format!("unknown unit `{other}`"),
                                    })
                                }
                            })
                        }
                        "norm" => {
                            part.norm = Some(match value {
                                "1" => DeclaredNorm::One,
                                "N" => DeclaredNorm::ParticleCount,
                                other => {
                                    return Err(Error::Parse {
                                        line: line_no,
                                        message: format!(
                                            "norm must be `1` or `N`, got `{other}`"
                                        ),
                                    })
                                }
                            })
                        }
                        _ => {
                            let n: u32 = value.parse().map_err(|_| Error::Parse {
                                line: line_no,
                                message: format!(
                                    "n_particles must be a positive integer, got `{value}`"
                                ),
                            })?;
                            if n < 1 {
                                return Err(Error::Parse {
                                    line: line_no,
                                    message: "n_particles must be at least 1".into(),
                                });
                            }
                            part.n_particles = Some(n);
                        }
                    }
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown header `{other}`"),
                    })
                }
            }
            continue;
        }

        // A data row.
        let part = current.as_mut().ok_or(Error::Parse {
            line: line_no,
            message: "data row before any `# space:` header".into(),
        })?;
        if part.unit.is_none() || part.norm.is_none() {
            return Err(Error::Parse {
                line: line_no,
                message: "data row before the table's unit and norm headers".into(),
            });
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let x: f64 = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("abscissa is not a number: `{}`", fields[0]),
        })?;
        let y: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("density is not a number: `{}`", fields[1]),
        })?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: "non-finite entry".into(),
            });
        }
        if x < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("negative abscissa {x}"),
            });
        }
        if let Some(&last) = part.abscissae.last() {
            if x <= last {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "abscissa {x} does not increase past {last} — are the columns swapped?"
                    ),
                });
            }
        }
        if y < 0.0 {
            return Err(Error::DataIntegrity(format!(
                "negative density {y} at line {line_no}"
            )));
        }
        part.abscissae.push(x);
        part.values.push(y);
    }

    if let Some(done) = current.take() {
        finish(done, &mut tables)?;
    }
    if tables.is_empty() {
        return Err(Error::InsufficientData(
            "no density tables found in the input".into(),
        ));
    }
    Ok(tables)
}

/// Fritsch-Carlson slope selection: monotone data gets a monotone cubic.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let delta: Vec<f64> = y
        .windows(2)
        .zip(&h)
        .map(|(p, &h)| (p[1] - p[0]) / h)
        .collect();
    let mut d = vec![0.0; n];

    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }

    let one_sided = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let est = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if est.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && est.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            est
        }
    };
    d[0] = if n == 2 {
        delta[0]
    } else {
        one_sided(h[0], h[1], delta[0], delta[1])
    };
    d[n - 1] = if n == 2 {
        delta[0]
    } else {
        one_sided(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3])
    };
    d
}

/// Evaluates the monotone cubic at sorted query points. Queries left of the
/// table are held at the first value; right of it, at zero.
fn pchip_resample(x: &[f64], y: &[f64], queries: &[f64]) -> Vec<f64> {
    let d = pchip_slopes(x, y);
    let mut out = Vec::with_capacity(queries.len());
    let mut seg = 0usize;
    for &q in queries {
        if q <= x[0] {
            out.push(y[0]);
            continue;
        }
        if q > *x.last().expect("non-empty table") {
            out.push(0.0);
            continue;
        }
        while seg + 2 < x.len() && x[seg + 1] < q {
            seg += 1;
        }
        let (x0, x1) = (x[seg], x[seg + 1]);
        let h = x1 - x0;
        let t = (q - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        out.push(h00 * y[seg] + h10 * h * d[seg] + h01 * y[seg + 1] + h11 * h * d[seg + 1]);
    }
    out
}

/// Converts a momentum table in place so its unit is reciprocal to the
/// position unit: k scales by s, n(k) by 1/s^3.
fn reconcile_momentum_unit(table: &mut DensityTable, position_unit: TableUnit) {
    let want = match position_unit {
        TableUnit::Angstrom => TableUnit::InverseAngstrom,
        TableUnit::Fm => TableUnit::InverseFm,
        _ => unreachable!("position tables carry length units"),
    };
    if table.unit == want {
        return;
    }
    // inverse_fm -> inverse_angstrom multiplies k by 1e5 and vice versa.
    let s = match (table.unit, want) {
        (TableUnit::InverseFm, TableUnit::InverseAngstrom) => FM_PER_ANGSTROM,
        (TableUnit::InverseAngstrom, TableUnit::InverseFm) => 1.0 / FM_PER_ANGSTROM,
        _ => unreachable!("momentum tables carry inverse units"),
    };
    for x in table.abscissae.iter_mut() {
        *x *= s;
    }
    let s3 = s * s * s;
    for v in table.values.iter_mut() {
        *v /= s3;
    }
    table.unit = want;
}

/// Builds a unit-normalized [`DensityPair`] from one position and one
/// momentum table, resampled onto uniform grids of `n_r` and `n_k` points
/// spanning each table's range.
pub fn ingest_external_density(
    tables: &[DensityTable],
    n_r: usize,
    n_k: usize,
) -> Result<DensityPair> {
    let mut position: Option<DensityTable> = None;
    let mut momentum: Option<DensityTable> = None;
    for t in tables {
        let slot = match t.space {
            Space::Position => &mut position,
            Space::Momentum => &mut momentum,
        };
        if slot.is_some() {
            return Err(Error::DataIntegrity(format!(
                "more than one {:?}-space table supplied",
                t.space
            )));
        }
        *slot = Some(t.clone());
    }
    let position = position.ok_or_else(|| {
        Error::DataIntegrity("no position-space table supplied".into())
    })?;
    let mut momentum = momentum.ok_or_else(|| {
        Error::DataIntegrity("no momentum-space table supplied".into())
    })?;
    reconcile_momentum_unit(&mut momentum, position.unit);

    let resample = |table: &DensityTable, n_points: usize| -> Result<(Arc<RadialGrid>, Vec<f64>, f64)> {
        let grid = Arc::new(RadialGrid::build(
            *table.abscissae.last().expect("validated non-empty"),
            n_points,
        )?);
        let mut values = pchip_resample(&table.abscissae, &table.values, grid.points());
        // The monotone cubic cannot overshoot knots, so clamp only roundoff.
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let integrand: Vec<f64> = values
            .iter()
            .zip(grid.points())
            .map(|(&v, &x)| v * x * x)
            .collect();
        let integral = 4.0 * std::f64::consts::PI * grid.integrate(&integrand)?;
        Ok((grid, values, integral))
    };

    let (r_grid, mut rho, rho_integral) = resample(&position, n_r)?;
    let (k_grid, mut nk, nk_integral) = resample(&momentum, n_k)?;

    // Establish the particle count both tables agree on.
    let mut n_particles: Option<u32> = None;
    for t in [&position, &momentum] {
        let from_table = match t.norm {
            DeclaredNorm::One => t.n_particles,
            DeclaredNorm::ParticleCount => {
                let integral = if t.space == Space::Position {
                    rho_integral
                } else {
                    nk_integral
                };
                let n = t
                    .n_particles
                    .unwrap_or_else(|| integral.round().max(1.0) as u32);
                Some(n)
            }
        };
        match (n_particles, from_table) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::DataIntegrity(format!(
                    "tables disagree on the particle count ({a} vs {b})"
                )));
            }
            (None, Some(b)) => n_particles = Some(b),
            _ => {}
        }
    }
    let n_particles = n_particles.unwrap_or(1);

    // Check each declared norm within 1%, then rescale exactly to unity.
    for (space, declared, integral, values) in [
        ("position", position.norm, rho_integral, &mut rho),
        ("momentum", momentum.norm, nk_integral, &mut nk),
    ] {
        let expected = match declared {
            DeclaredNorm::One => 1.0,
            DeclaredNorm::ParticleCount => n_particles as f64,
        };
        let deviation = (integral / expected - 1.0).abs();
        if deviation >= 0.01 {
            return Err(Error::DataIntegrity(format!(
                "{space} table integrates to {integral:.6} where its declared norm \
                 is {expected} (off by {:.2}%)",
                100.0 * deviation
            )));
        }
        let scale = 1.0 / integral;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }

    DensityPair::from_samples(rho, nk, r_grid, k_grid, n_particles, Normalization::Unit)
}
