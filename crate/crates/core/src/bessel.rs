//! Spherical Bessel functions of the first kind, j_l(x).
//!
//! Three evaluation regimes keep the result accurate over the full range the
//! momentum transform visits (x = k*r from 0 up to a few thousand, l <= ~10):
//!
//! * small x: the ascending power series, free of cancellation;
//! * x >= l: upward recurrence from j_0, j_1 (stable in this range);
//! * intermediate x < l: Miller's downward recurrence, normalized against
//!   j_0 or j_1, which is stable where upward recurrence is not.

/// j_l(x) for x >= 0.
///
/// Panics in debug builds if x is negative or NaN; callers pass k*r products
/// which are non-negative by construction.
pub fn spherical_jl(l: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0, "spherical_jl needs x >= 0, got {x}");
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x < series_switch(l) {
        return jl_series(l, x);
    }
    if x >= l as f64 {
        return jl_upward(l, x);
    }
    jl_downward(l, x)
}

/// Fills `out[m] = j_m(x)` for m = 0..=l_max (out.len() == l_max + 1).
///
/// The transform kernel calls this once per (k, r) pair and reads off every
/// angular momentum it needs, so the sin/cos pair is computed once.
pub fn spherical_jl_upto(l_max: u32, x: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), l_max as usize + 1);
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        out[0] = 1.0;
        out[1..].fill(0.0);
        return;
    }
    if x >= l_max as f64 {
        // One upward sweep covers every order at once.
        let (s, c) = x.sin_cos();
        out[0] = s / x;
        if l_max == 0 {
            return;
        }
        out[1] = s / (x * x) - c / x;
        for m in 1..l_max as usize {
            out[m + 1] = (2 * m + 1) as f64 / x * out[m] - out[m - 1];
        }
        return;
    }
    // Small arguments: each order picks its own regime.
    for (m, slot) in out.iter_mut().enumerate() {
        *slot = spherical_jl(m as u32, x);
    }
}

/// Below this threshold the ascending series converges in a few terms with
/// every term positive (no cancellation).
fn series_switch(l: u32) -> f64 {
    0.5 * ((2 * l + 3) as f64).sqrt()
}

/// Ascending series j_l(x) = x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+2k+1)!!).
fn jl_series(l: u32, x: f64) -> f64 {
    let mut lead = 1.0;
    for m in 0..l {
        lead *= x / (2 * m + 3) as f64;
    }
    // lead = x^l / (2l+1)!!
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1u32;
    loop {
        term *= -x2 / ((2 * k) as f64 * (2 * l + 2 * k + 1) as f64);
        let prev = sum;
        sum += term;
        if sum == prev || k > 60 {
            break;
        }
        k += 1;
    }
    lead * sum
}

fn jl_upward(l: u32, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let j1 = s / (x * x) - c / x;
    if l == 1 {
        return j1;
    }
    let mut jm = j0;
    let mut j = j1;
    for m in 1..l {
        let next = (2 * m + 1) as f64 / x * j - jm;
        jm = j;
        j = next;
    }
    j
}

/// Miller's algorithm: run the recurrence downward from a padded start order
/// with arbitrary seed, then fix the scale against j_0 (or j_1 when j_0 is
/// near a zero).
fn jl_downward(l: u32, x: f64) -> f64 {
    let start = l as usize + 20 + x as usize;
    let mut jp = 0.0f64; // j_{m+1}
    let mut j = 1e-30f64; // j_m
    let mut value = 0.0;
    let mut j1_down = 0.0;
    for m in (0..=start).rev() {
        let jm = (2 * m + 3) as f64 / x * j - jp;
        jp = j;
        j = jm;
        // After this step j holds the unnormalized j_m.
        if m == l as usize {
            value = j;
        }
        if m == 1 {
            j1_down = j;
        }
        if j.abs() > 1e280 {
            // Rescale to dodge overflow; relative values are all that matter.
            j *= 1e-280;
            jp *= 1e-280;
            value *= 1e-280;
            j1_down *= 1e-280;
        }
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    // Normalize against whichever reference is better conditioned.
    if j0.abs() >= j1.abs() {
        value * (j0 / j)
    } else {
        value * (j1 / j1_down)
    }
}
