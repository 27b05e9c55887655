//! The Bessel heat kernel, its time derivative, the Euclidean comparison
//! kernel, and semigroup application.
//!
//! The kernel is always assembled from the damped Bessel form
//! A_ν(w) = e^{−w} w^{−ν} I_ν(w), so that the exponentially growing I factor
//! and the Gaussian dampers combine analytically:
//! W_t^λ(u,v) = (2t)^{−λ−1/2} · A_{λ−1/2}(uv/2t) · e^{−(u−v)²/4t}.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Order};
use crate::quad::{gauss_legendre, log_breaks, pairwise_sum, pairwise_sum_complex, GaussRule};
use crate::specfun::{bessel_i_damped, bessel_j_scaled, BesselOrder};
use num_complex::Complex64;

/// Order and time of a heat kernel evaluation.
#[derive(Clone, Debug)]
pub struct HeatKernelParams {
    order: Order,
    t: f64,
}

impl HeatKernelParams {
    pub fn new(order: Order, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time must be positive and finite, got {t}"
            )));
        }
        Ok(HeatKernelParams { order, t })
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

fn check_coord(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "coordinate must be positive and finite, got {c}"
        )));
    }
    Ok(())
}

/// One-dimensional Bessel heat kernel W_t^λ(u,v).
pub fn heat_kernel_1d(lambda: f64, t: f64, u: f64, v: f64) -> Result<f64> {
    check_coord(u)?;
    check_coord(v)?;
    let nu = BesselOrder::new(lambda - 0.5)?;
    let w = u * v / (2.0 * t);
    let a = bessel_i_damped(nu, w)?;
    let d = u - v;
    Ok((2.0 * t).powf(-lambda - 0.5) * a * (-d * d / (4.0 * t)).exp())
}

/// One-dimensional time derivative ∂_t W_t^λ(u,v), in closed form:
/// with s = λ+1/2, ν = λ−1/2, w = uv/2t,
/// ∂_tW = (2t)^{−s} e^{−(u−v)²/4t} [ (−s/t + (u²+v²)/4t²)·A_ν(w)
///                                   − (u²v²/4t³)·A_{ν+1}(w) ].
pub fn dt_heat_kernel_1d(lambda: f64, t: f64, u: f64, v: f64) -> Result<f64> {
    check_coord(u)?;
    check_coord(v)?;
    let nu = BesselOrder::new(lambda - 0.5)?;
    let nu1 = BesselOrder::new(lambda + 0.5)?;
    let s = lambda + 0.5;
    let w = u * v / (2.0 * t);
    let a = bessel_i_damped(nu, w)?;
    let a1 = bessel_i_damped(nu1, w)?;
    let d = u - v;
    let pre = (2.0 * t).powf(-s) * (-d * d / (4.0 * t)).exp();
    let term_a = (-s / t + (u * u + v * v) / (4.0 * t * t)) * a;
    let term_b = (u * u * v * v) / (4.0 * t * t * t) * a1;
    Ok(pre * (term_a - term_b))
}

/// Product kernel ∏_j W_t^{λ_j}(x_j, y_j).
pub fn heat_kernel(params: &HeatKernelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != params.order.dim() || y.len() != params.order.dim() {
        return Err(Error::GridMismatch("point dimension mismatch".into()));
    }
    let mut prod = 1.0;
    for j in 0..x.len() {
        prod *= heat_kernel_1d(params.order.lambda(j), params.t, x[j], y[j])?;
    }
    Ok(prod)
}

/// ∂_t ∏_j W_t^{λ_j}(x_j,y_j), assembled by the exact Leibniz sum over axes.
pub fn dt_heat_kernel(params: &HeatKernelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != params.order.dim() || y.len() != params.order.dim() {
        return Err(Error::GridMismatch("point dimension mismatch".into()));
    }
    let n = x.len();
    let mut w = vec![0.0; n];
    let mut dw = vec![0.0; n];
    for j in 0..n {
        w[j] = heat_kernel_1d(params.order.lambda(j), params.t, x[j], y[j])?;
        dw[j] = dt_heat_kernel_1d(params.order.lambda(j), params.t, x[j], y[j])?;
    }
    let mut sum = 0.0;
    for j in 0..n {
        let mut term = dw[j];
        for (k, &wk) in w.iter().enumerate() {
            if k != j {
                term *= wk;
            }
        }
        sum += term;
    }
    Ok(sum)
}

/// The classical (Euclidean) heat kernel ∏ e^{−(x_j−y_j)²/4t}/(2√(πt)).
pub fn euclidean_kernel(t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("time must be positive".into()));
    }
    if x.len() != y.len() {
        return Err(Error::GridMismatch("point dimension mismatch".into()));
    }
    let n = x.len() as f64;
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((4.0 * std::f64::consts::PI * t).powf(-n / 2.0) * (-d2 / (4.0 * t)).exp())
}

/// ∂_t of the n-dimensional Euclidean heat kernel, in closed form.
pub fn dt_euclidean_kernel(t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let w = euclidean_kernel(t, x, y)?;
    let n = x.len() as f64;
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(w * (-n / (2.0 * t) + d2 / (4.0 * t * t)))
}

/// Quadrature of the spectral-side integral
/// ∫_0^∞ e^{−tz²} (zx)^{−ν}J_ν(zx) (zy)^{−ν}J_ν(zy) z^{2λ} dz  (ν = λ−1/2)
/// compared against the closed-form kernel; returns the relative residual.
pub fn heat_kernel_spectral_residual(lambda: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let closed = heat_kernel_1d(lambda, t, x, y)?;
    let spectral = spectral_heat_integral(lambda, t, x, y)?;
    Ok((spectral - closed).abs() / closed)
}

/// Evaluate the spectral-side z-integral of the heat kernel identity.
pub fn spectral_heat_integral(lambda: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    check_coord(x)?;
    check_coord(y)?;
    let nu = BesselOrder::new(lambda - 0.5)?;
    let g = |z: f64| -> f64 {
        bessel_j_scaled(nu, z * x).unwrap()
            * bessel_j_scaled(nu, z * y).unwrap()
            * (-t * z * z).exp()
    };
    // Gaussian cutoff: beyond Z the envelope e^{−tz²}·z^{2λ−2ν−1} = e^{−tz²}
    // has decayed below 1e−20 of its scale
    let z_top = (46.0 / t).sqrt() * 1.2;
    let z_join = (0.01f64).min(0.1 * z_top);
    // weight singularity strip (0, z_join]: substitute u = z^{2λ+1}
    let s = 2.0 * lambda + 1.0;
    let cap = z_join.powf(s);
    let (un, uw) = gauss_legendre(16);
    let strip_terms: Vec<f64> = un
        .iter()
        .zip(&uw)
        .map(|(&uq, &wq)| {
            let u = 0.5 * cap * (uq + 1.0);
            let z = u.powf(1.0 / s);
            0.5 * cap * wq / s * g(z)
        })
        .collect();
    let strip = pairwise_sum(&strip_terms);
    // main region: geometric panels to 1, then oscillation-resolving panels
    let rule = GaussRule::new(24);
    let mut breaks = log_breaks(z_join, (1.0f64).min(z_top), 2);
    if z_top > 1.0 {
        // resolve both the Bessel oscillation (frequency max(x,y)) and the
        // Gaussian damper (scale 1/√t) within each GL-24 panel
        let freq = x.max(y).max(1.0);
        let width = (1.4 * 16.0 / freq).min(1.5 / t.sqrt()).min(z_top - 1.0);
        let panels = (((z_top - 1.0) / width).ceil() as usize).max(1);
        for i in 1..=panels {
            breaks.push(1.0 + (z_top - 1.0) * i as f64 / panels as f64);
        }
    }
    let main = rule.integrate_panels(&breaks, |z| g(z) * z.powf(2.0 * lambda));
    Ok(strip + main)
}

/// W_t f(x) = ∫ ∏_j W_t^{λ_j}(x_j,y_j) f(y) dm(y), as per-axis contractions.
pub fn semigroup_apply(params: &HeatKernelParams, f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    if grid.order() != &params.order {
        return Err(Error::GridMismatch(
            "grid order does not match the kernel parameters".into(),
        ));
    }
    let shape = grid.shape();
    let mut values = f.values().to_vec();
    for axis in 0..grid.dim() {
        let nodes = grid.axis(axis).nodes();
        let wts = grid.axis_measure_weights(axis);
        let n = nodes.len();
        let lambda = params.order.lambda(axis);
        let mut m = vec![0.0; n * n];
        for o in 0..n {
            for i in o..n {
                let k = heat_kernel_1d(lambda, params.t, nodes[o], nodes[i])?;
                m[o * n + i] = k * wts[i];
                m[i * n + o] = k * wts[o];
            }
        }
        values = contract_axis_real(&values, &shape, axis, &m);
    }
    GridFunction::from_values(grid.clone(), values)
}

fn contract_axis_real(
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_relative_error, lp_norm, Axis, WeightedGrid};
    use std::sync::Arc;
    use crate::hankel::TransformPlan;
    use crate::inputs::gaussian_bump;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_reference_value() {
        // λ=1/2, t=1/4, x=y=1: W = 2·I_0(2)·e^{−2}
        let w = heat_kernel_1d(0.5, 0.25, 1.0, 1.0).unwrap();
        assert!((w - 0.6170166451073421).abs() < 1e-13);
    }

    #[test]
    fn kernel_symmetry_exact() {
        for &(l, t, u, v) in &[(0.3, 0.7, 1.2, 2.5), (2.3, 0.05, 0.4, 3.0)] {
            assert_eq!(
                heat_kernel_1d(l, t, u, v).unwrap(),
                heat_kernel_1d(l, t, v, u).unwrap()
            );
        }
    }

    #[test]
    fn kernel_small_second_argument_limit() {
        // W_t^λ(x, v→0) → (2t)^{−λ−1/2} e^{−x²/4t} / (2^{λ−1/2} Γ(λ+1/2))
        let (lambda, t, x) = (1.0, 0.3, 1.4);
        let w = heat_kernel_1d(lambda, t, x, 1e-8).unwrap();
        let nu = lambda - 0.5;
        let limit = (2.0 * t).powf(-lambda - 0.5) * (-x * x / (4.0 * t)).exp()
            / (2f64.powf(nu) * crate::specfun::gamma(nu + 1.0));
        assert!((w - limit).abs() < 1e-8 * limit);
    }

    #[test]
    fn kernel_positive_and_no_overflow() {
        // uv/2t up to 1e6
        for &(l, t, u, v) in &[
            (0.5, 1e-6, 1.0, 2.0),
            (-0.4, 0.01, 10.0, 10.0),
            (2.3, 1e-5, 14.0, 14.0),
        ] {
            let w = heat_kernel_1d(l, t, u, v).unwrap();
            assert!(w.is_finite() && w >= 0.0, "W={w} at {l},{t},{u},{v}");
        }
        let w = heat_kernel_1d(0.5, 5e-6, 4.0, 4.0).unwrap(); // uv/2t = 1.6e6
        assert!(w.is_finite() && w > 0.0);
    }

    #[test]
    fn dt_matches_finite_differences() {
        let fd = |l: f64, t: f64, u: f64, v: f64| {
            let h = 1e-4 * t;
            (-heat_kernel_1d(l, t + 2.0 * h, u, v).unwrap()
                + 8.0 * heat_kernel_1d(l, t + h, u, v).unwrap()
                - 8.0 * heat_kernel_1d(l, t - h, u, v).unwrap()
                + heat_kernel_1d(l, t - 2.0 * h, u, v).unwrap())
                / (12.0 * h)
        };
        let d = dt_heat_kernel_1d(1.0, 0.3, 1.0, 1.2).unwrap();
        assert!((d - fd(1.0, 0.3, 1.0, 1.2)).abs() / d.abs() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let l = rng.gen_range(-0.45..2.5);
            let t = rng.gen_range(0.05..2.0);
            let u = rng.gen_range(0.2..3.0);
            let v = rng.gen_range(0.2..3.0);
            let d = dt_heat_kernel_1d(l, t, u, v).unwrap();
            let scale = d.abs().max(heat_kernel_1d(l, t, u, v).unwrap() / t);
            assert!(
                (d - fd(l, t, u, v)).abs() / scale < 1e-6,
                "l={l} t={t} u={u} v={v}"
            );
        }
    }

    #[test]
    fn dt_product_leibniz_matches_fd() {
        let order = Order::new(vec![0.7, 1.4]).unwrap();
        let x = [1.0, 2.0];
        let y = [1.3, 1.7];
        let t = 0.4;
        let p = |tt: f64| {
            let params = HeatKernelParams::new(order.clone(), tt).unwrap();
            heat_kernel(&params, &x, &y).unwrap()
        };
        let h = 1e-5;
        let fd = (-p(t + 2.0 * h) + 8.0 * p(t + h) - 8.0 * p(t - h) + p(t - 2.0 * h)) / (12.0 * h);
        let params = HeatKernelParams::new(order, t).unwrap();
        let d = dt_heat_kernel(&params, &x, &y).unwrap();
        assert!((d - fd).abs() / d.abs() < 1e-8);
    }

    #[test]
    fn dt_fundamental_theorem() {
        // ∫_a^b ∂_tW dt = W_b − W_a
        let (lambda, u, v) = (0.8, 1.1, 0.9);
        let rule = GaussRule::new(16);
        let breaks = log_breaks(0.1, 2.0, 8);
        let integral = rule.integrate_panels(&breaks, |t| dt_heat_kernel_1d(lambda, t, u, v).unwrap());
        let expect =
            heat_kernel_1d(lambda, 2.0, u, v).unwrap() - heat_kernel_1d(lambda, 0.1, u, v).unwrap();
        assert!((integral - expect).abs() < 1e-8 * expect.abs().max(1e-3));
    }

    #[test]
    fn dt_negative_at_coincidence() {
        for &(l, t, x) in &[(0.5, 0.01, 1.0), (1.5, 0.05, 2.0)] {
            assert!(dt_heat_kernel_1d(l, t, x, x).unwrap() < 0.0);
        }
    }

    #[test]
    fn spectral_identity_examples() {
        assert!(heat_kernel_spectral_residual(1.0, 0.5, 1.0, 2.0).unwrap() <= 1e-8);
        assert!(heat_kernel_spectral_residual(0.5, 0.1, 1.0, 1.0).unwrap() <= 1e-7);
        // t large: cutoff scales as 1/√t
        assert!(heat_kernel_spectral_residual(0.7, 10.0, 0.8, 1.1).unwrap() <= 1e-8);
        // negative-order weight singularity
        assert!(heat_kernel_spectral_residual(-0.4, 0.7, 1.5, 0.6).unwrap() <= 1e-7);
    }

    #[test]
    fn euclidean_kernel_basics() {
        // peak at t=1/4: 1/√π
        let v = euclidean_kernel(0.25, &[1.0], &[1.0]).unwrap();
        assert!((v - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        // ∂_t against finite differences
        let t = 0.4;
        let h = 1e-5;
        let p = |tt: f64| euclidean_kernel(tt, &[1.0, 2.0], &[1.5, 1.1]).unwrap();
        let fd = (-p(t + 2.0 * h) + 8.0 * p(t + h) - 8.0 * p(t - h) + p(t - 2.0 * h)) / (12.0 * h);
        let d = dt_euclidean_kernel(t, &[1.0, 2.0], &[1.5, 1.1]).unwrap();
        assert!((d - fd).abs() / d.abs() < 1e-8);
        // per-axis mass 1 over ℝ (quadrature over a wide symmetric window)
        let rule = GaussRule::new(16);
        let mass = rule.integrate_panels(
            &(0..=40).map(|i| -10.0 + 0.5 * i as f64).collect::<Vec<_>>(),
            |y| euclidean_kernel(0.25, &[3.0], &[y.max(-20.0)]).unwrap(),
        );
        assert!((mass - 1.0).abs() < 1e-10);
    }

    fn grid_1d(lambda: f64) -> Arc<WeightedGrid> {
        let ax = Axis::geometric_uniform(1e-3, 16.0, 16).unwrap();
        WeightedGrid::new_with_origin(vec![ax], Order::new(vec![lambda]).unwrap()).unwrap()
    }

    #[test]
    fn mass_conservation() {
        let grid = grid_1d(0.8);
        let params = HeatKernelParams::new(grid.order().clone(), 0.25).unwrap();
        let one = GridFunction::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0)).unwrap();
        let wf = semigroup_apply(&params, &one).unwrap();
        for (i, v) in wf.values().iter().enumerate() {
            let x = grid.node(i)[0];
            if (0.5..=8.0).contains(&x) {
                assert!((v.re - 1.0).abs() < 1e-6, "x={x}: {}", v.re);
            }
        }
    }

    #[test]
    fn semigroup_law_and_spectral_consistency() {
        let grid = grid_1d(1.0);
        let f = gaussian_bump(grid.clone(), &[2.0], 0.5).unwrap();
        let p1 = HeatKernelParams::new(grid.order().clone(), 0.25).unwrap();
        let p2 = HeatKernelParams::new(grid.order().clone(), 0.5).unwrap();
        let two_steps = semigroup_apply(&p1, &semigroup_apply(&p1, &f).unwrap()).unwrap();
        let one_step = semigroup_apply(&p2, &f).unwrap();
        assert!(l2_relative_error(&f, &two_steps).unwrap() < 1.0); // sanity
        let rel = lp_norm(
            &two_steps.axpy(Complex64::new(-1.0, 0.0), &one_step).unwrap(),
            2.0,
        )
        .unwrap()
            / lp_norm(&f, 2.0).unwrap();
        assert!(rel <= 1e-6, "semigroup law residual {rel}");
        // spectral path: W_t f = h(e^{−t|y|²} h(f))
        let plan = TransformPlan::new(&grid).unwrap();
        let hf = plan.apply(&f).unwrap();
        let damped = GridFunction::from_values(
            grid.clone(),
            hf.values()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let y = grid.node(i)[0];
                    v * (-0.25 * y * y).exp()
                })
                .collect(),
        )
        .unwrap();
        let spectral = plan.apply(&damped).unwrap();
        let direct = semigroup_apply(&p1, &f).unwrap();
        let rel = lp_norm(
            &spectral.axpy(Complex64::new(-1.0, 0.0), &direct).unwrap(),
            2.0,
        )
        .unwrap()
            / lp_norm(&f, 2.0).unwrap();
        assert!(rel <= 1e-6, "dual-path heat residual {rel}");
    }

    #[test]
    fn contraction_in_l2() {
        let grid = grid_1d(0.6);
        let f = gaussian_bump(grid.clone(), &[1.5], 0.4).unwrap();
        let params = HeatKernelParams::new(grid.order().clone(), 0.3).unwrap();
        let wf = semigroup_apply(&params, &f).unwrap();
        assert!(lp_norm(&wf, 2.0).unwrap() <= lp_norm(&f, 2.0).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(HeatKernelParams::new(Order::new(vec![0.5]).unwrap(), 0.0).is_err());
        assert!(heat_kernel_1d(0.5, 1.0, -1.0, 1.0).is_err());
        let params = HeatKernelParams::new(Order::new(vec![0.5]).unwrap(), 1.0).unwrap();
        assert!(heat_kernel(&params, &[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
