//! Named input-function generators used by the verification harness:
//! Gaussian and compactly supported bumps, near-atoms (normalized small-cube
//! indicators) and randomized smooth superpositions.

use crate::error::{Error, Result};
use crate::grid::{integrate, GridFunction, WeightedGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Product Gaussian exp(−Σ (x_j−c_j)²/w²) sampled on the grid.
pub fn gaussian_bump(grid: Arc<WeightedGrid>, center: &[f64], width: f64) -> Result<GridFunction> {
    if center.len() != grid.dim() {
        return Err(Error::GridMismatch("center dimension mismatch".into()));
    }
    let c = center.to_vec();
    GridFunction::from_fn(grid, move |x| {
        let s: f64 = x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
        Complex64::new((-s / (width * width)).exp(), 0.0)
    })
}

/// C_c^∞-style bump: ∏ exp(1 − 1/(1−u_j²)) for |u_j| < 1, u_j = (x_j−c_j)/w.
pub fn smooth_bump(grid: Arc<WeightedGrid>, center: &[f64], halfwidth: f64) -> Result<GridFunction> {
    if center.len() != grid.dim() {
        return Err(Error::GridMismatch("center dimension mismatch".into()));
    }
    let c = center.to_vec();
    GridFunction::from_fn(grid, move |x| {
        let mut v = 1.0;
        for (xi, ci) in x.iter().zip(&c) {
            let u = (xi - ci) / halfwidth;
            if u.abs() >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            v *= (1.0 - 1.0 / (1.0 - u * u)).exp();
        }
        Complex64::new(v, 0.0)
    })
}

/// Indicator of the cube ∏[c_j − side/2, c_j + side/2], normalized so its
/// integral against the grid's measure is exactly 1 (a discrete near-atom).
pub fn near_atom(grid: Arc<WeightedGrid>, center: &[f64], side: f64) -> Result<GridFunction> {
    if center.len() != grid.dim() {
        return Err(Error::GridMismatch("center dimension mismatch".into()));
    }
    let c = center.to_vec();
    let raw = GridFunction::from_fn(grid, move |x| {
        let inside = x
            .iter()
            .zip(&c)
            .all(|(xi, ci)| (xi - ci).abs() <= side / 2.0);
        Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
    })?;
    let mass = integrate(&raw).re;
    if mass <= 0.0 {
        return Err(Error::InvalidParameter(
            "near-atom cube contains no grid mass; refine the grid near its center".into(),
        ));
    }
    Ok(raw.scale(Complex64::new(1.0 / mass, 0.0)))
}

/// Reproducible random superposition of `count` Gaussian bumps with random
/// complex amplitudes, centers and widths (a smooth, effectively band-limited
/// test input).
pub fn random_smooth(grid: Arc<WeightedGrid>, seed: u64, count: usize) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let mut comps = Vec::with_capacity(count);
    for _ in 0..count {
        let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(0.8..3.5)).collect();
        let width: f64 = rng.gen_range(0.3..0.9);
        comps.push((amp, center, width));
    }
    GridFunction::from_fn(grid, move |x| {
        let mut v = Complex64::new(0.0, 0.0);
        for (amp, center, width) in &comps {
            let s: f64 = x
                .iter()
                .zip(center)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum();
            v += amp * (-s / (width * width)).exp();
        }
        v
    })
}

/// Smoothstep taper vanishing at `a` and equal to 1 from `2a` on; applied
/// per coordinate to emulate compact support away from the boundary.
pub fn left_taper(x: f64, a: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= 2.0 * a {
        1.0
    } else {
        let u = (x - a) / a;
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}
