//! The n-dimensional Hankel transform, its self-inversion and Plancherel
//! identities, and the Bessel differential operator.
//!
//! The transform kernel per axis is (xy)^{−λ+1/2} J_{λ−1/2}(xy), which is
//! exactly the scaled Bessel function z^{−ν}J_ν(z) at ν = λ − 1/2 — it is
//! always evaluated in that form, never as a quotient of large factors.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, WeightedGrid};
use crate::quad::{fd_weights, pairwise_sum_complex};
use crate::specfun::{bessel_j_scaled, BesselOrder};
use num_complex::Complex64;
use std::sync::Arc;

/// Precomputed dense per-axis kernel matrices for the transform on a grid
/// (frequency grid = source grid, so the involution h∘h is well-posed).
#[derive(Clone, Debug)]
pub struct TransformPlan {
    grid: Arc<WeightedGrid>,
    /// Row-major n×n matrices: kernel(x_o, y_i) · measure_weight(y_i).
    matrices: Vec<Vec<f64>>,
}

impl TransformPlan {
    pub fn new(grid: &Arc<WeightedGrid>) -> Result<Self> {
        let mut matrices = Vec::with_capacity(grid.dim());
        for j in 0..grid.dim() {
            let axis = grid.axis(j);
            let nu = BesselOrder::new(grid.order().lambda(j) - 0.5)?;
            let nodes = axis.nodes();
            let w = grid.axis_measure_weights(j);
            let n = nodes.len();
            let mut m = vec![0.0; n * n];
            // kernel is symmetric in (o, i); evaluate each product once
            for o in 0..n {
                for i in o..n {
                    let k = bessel_j_scaled(nu, nodes[o] * nodes[i])?;
                    m[o * n + i] = k * w[i];
                    m[i * n + o] = k * w[o];
                }
            }
            matrices.push(m);
        }
        Ok(TransformPlan {
            grid: grid.clone(),
            matrices,
        })
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    /// h_{λ1…λn}(f): tensor contraction of the kernel matrices, axis by axis.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if !Arc::ptr_eq(f.grid(), &self.grid) {
            return Err(Error::GridMismatch(
                "function does not live on the plan's grid".into(),
            ));
        }
        let shape = self.grid.shape();
        let mut values = f.values().to_vec();
        for (axis, m) in self.matrices.iter().enumerate() {
            values = contract_axis(&values, &shape, axis, m);
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonConvergent(
                "non-finite transform output (grid truncation failure)".into(),
            ));
        }
        GridFunction::from_values(self.grid.clone(), values)
    }
}

/// Apply the square matrix `m` (row-major) along `axis` of the tensor.
pub(crate) fn contract_axis(
    vals: &[Complex64],
    shape: &[usize],
    axis: usize,
    m: &[f64],
) -> Vec<Complex64> {
    let n = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); vals.len()];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        let base = o * n * inner;
        for c in 0..inner {
            for k in 0..n {
                let row = &m[k * n..(k + 1) * n];
                for i in 0..n {
                    scratch[i] = vals[base + i * inner + c] * row[i];
                }
                out[base + k * inner + c] = pairwise_sum_complex(&scratch);
            }
        }
    }
    out
}

/// ‖h(h(f)) − f‖₂ / ‖f‖₂ — the self-inversion residual.
pub fn self_inverse_residual(plan: &TransformPlan, f: &GridFunction) -> Result<f64> {
    let hh = plan.apply(&plan.apply(f)?)?;
    crate::grid::l2_relative_error(f, &hh)
}

/// |∫ h(f)·h(g) dm − ∫ f·g dm| / (‖f‖₂ ‖g‖₂) — the Plancherel residual.
pub fn plancherel_residual(plan: &TransformPlan, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let hf = plan.apply(f)?;
    let hg = plan.apply(g)?;
    let lhs = crate::grid::integrate(&pointwise_mul(&hf, &hg)?);
    let rhs = crate::grid::integrate(&pointwise_mul(f, g)?);
    let nf = crate::grid::lp_norm(f, 2.0)?;
    let ng = crate::grid::lp_norm(g, 2.0)?;
    if nf == 0.0 || ng == 0.0 {
        return Ok((lhs - rhs).norm());
    }
    Ok((lhs - rhs).norm() / (nf * ng))
}

fn pointwise_mul(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    if !Arc::ptr_eq(f.grid(), g.grid()) {
        return Err(Error::GridMismatch("pointwise product across grids".into()));
    }
    GridFunction::from_values(
        f.grid().clone(),
        f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .collect(),
    )
}

/// Δ_{λ1…λn} f = Σ_j −(∂²/∂x_j² + (2λ_j/x_j) ∂/∂x_j) f by 5-point stencils
/// on the grid nodes (one-sided near the boundary).
pub fn bessel_operator_apply(f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    let shape = grid.shape();
    let mut out = vec![Complex64::new(0.0, 0.0); f.values().len()];
    for axis in 0..grid.dim() {
        let nodes = grid.axis(axis).nodes();
        let n = nodes.len();
        if n < 5 {
            return Err(Error::InvalidParameter(
                "axis too coarse for 5-point stencils".into(),
            ));
        }
        let lambda = grid.order().lambda(axis);
        // per-node stencils: window start, 1st- and 2nd-derivative weights
        let stencils: Vec<(usize, Vec<f64>, Vec<f64>)> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(2).min(n - 5);
                let window = &nodes[lo..lo + 5];
                let w1 = fd_weights(nodes[i], window, 1);
                let w2 = fd_weights(nodes[i], window, 2);
                (lo, w1, w2)
            })
            .collect();
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        for o in 0..outer {
            let base = o * n * inner;
            for c in 0..inner {
                for i in 0..n {
                    let (lo, w1, w2) = &stencils[i];
                    let mut d1 = Complex64::new(0.0, 0.0);
                    let mut d2 = Complex64::new(0.0, 0.0);
                    for k in 0..5 {
                        let v = f.values()[base + (lo + k) * inner + c];
                        d1 += v * w1[k];
                        d2 += v * w2[k];
                    }
                    out[base + i * inner + c] -= d2 + d1 * (2.0 * lambda / nodes[i]);
                }
            }
        }
    }
    GridFunction::from_values(grid.clone(), out)
}
