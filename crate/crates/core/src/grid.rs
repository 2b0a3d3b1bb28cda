//! Uniform radial grids with composite quadrature weights.
//!
//! One grid type serves both position space (radii in Angstrom or fm) and
//! momentum space (wavenumbers in inverse length). Weights follow the
//! composite Simpson rule; for an even number of points the last three
//! intervals use the 3/8 rule so the composite order is preserved.

use crate::error::{Error, Result};

/// Discretized radial axis [0, r_max] with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    r_max: f64,
}

impl RadialGrid {
    /// Builds a uniform grid on [0, r_max] with composite Simpson weights.
    ///
    /// Needs at least 3 points (Simpson); production runs should use a few
    /// thousand. Integrating the constant 1 returns exactly r_max.
    pub fn build(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 grid points, got {n_points}"
            )));
        }
        let h = r_max / (n_points - 1) as f64;
        let points: Vec<f64> = (0..n_points).map(|i| i as f64 * h).collect();
        let weights = simpson_weights(n_points, h);
        Ok(Self {
            points,
            weights,
            spacing: h,
            r_max,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Quadrature of samples given on this grid: sum w_i * value_i.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.points.len() {
            return Err(Error::InvalidArgument(format!(
                "sample length {} does not match grid length {}",
                values.len(),
                self.points.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NumericDomain(format!(
                    "non-finite sample {v} at index {i}"
                )));
            }
        }
        Ok(self
            .weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum())
    }

    /// Quadrature of f(r_i) without allocating a sample vector.
    pub fn integrate_fn(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.points)
            .map(|(w, r)| w * f(*r))
            .sum()
    }
}

/// Composite Simpson weights; even point counts end with a 3/8 segment.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n % 2 == 1 {
        fill_simpson(&mut w, 0, n, h);
    } else if n == 4 {
        fill_three_eighths(&mut w, 0, h);
    } else {
        // Simpson over the first n-4 intervals, 3/8 over the last three.
        fill_simpson(&mut w, 0, n - 3, h);
        fill_three_eighths(&mut w, n - 4, h);
    }
    w
}

fn fill_simpson(w: &mut [f64], start: usize, count: usize, h: f64) {
    debug_assert!(count % 2 == 1 && count >= 3);
    for i in 0..count {
        let c = if i == 0 || i == count - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w[start + i] += c * h / 3.0;
    }
}

fn fill_three_eighths(w: &mut [f64], start: usize, h: f64) {
    for (i, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
        w[start + i] += 3.0 * c * h / 8.0;
    }
}
