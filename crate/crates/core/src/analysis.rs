//! The comparison and maximal operator zoo used to probe the boundedness of
//! the multiplier operator: local/global region decomposition of the kernel,
//! truncated maximal operators, Hardy-type, Gaussian maximal, averaging and
//! tail operators, empirical kernel-envelope ratios, and the L^p /
//! weak-(1,1) experiment harness.

use crate::error::{Error, Result};
use crate::grid::{lp_norm, weak_l1_profile, Axis, GridFunction, WeightedGrid};
use crate::hankel::contract_axis;
use crate::multiplier::{kernel_h_refined, kernel_k_refined, LaplaceSymbol};
use crate::par::parallel_fill;
use crate::quad::{pairwise_sum, pairwise_sum_complex};
use crate::semigroup::{dt_heat_kernel_1d, heat_kernel_1d};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Threshold below which input values are treated as numerically zero when
/// pruning kernel sums (relative to the input's max modulus).
const LIVE_THRESHOLD: f64 = 1e-14;

/// True iff y lies in the local region L(x): x_j/2 < y_j < 2x_j for all j
/// (strict inequalities).
pub fn in_local_region(x: &[f64], y: &[f64]) -> bool {
    x.len() == y.len()
        && x.iter()
            .zip(y)
            .all(|(&a, &b)| b > a / 2.0 && b < 2.0 * a)
}

fn live_nodes(f: &GridFunction) -> Vec<usize> {
    let fmax = f.values().iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    (0..f.grid().node_count())
        .filter(|&j| f.values()[j].norm() > LIVE_THRESHOLD * fmax)
        .collect()
}

/// ∏_j (x_j y_j)^{−λ_j}, the weight relating the Euclidean kernel to the
/// Bessel one on the local region.
fn local_weight(lambdas: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let mut w = 1.0;
    for ((&l, &a), &b) in lambdas.iter().zip(x).zip(y) {
        w *= (a * b).powf(-l);
    }
    w
}

/// 𝒢(|f|)(x) = ∫_{(0,∞)^n∖L(x)} |f(y)| |K(x,y)| dm(y), by node sums over
/// the grid's quadrature (the kernel is regular off the local region).
pub fn global_operator_apply(
    sym: &LaplaceSymbol,
    f: &GridFunction,
    refine: usize,
) -> Result<GridFunction> {
    let grid = f.grid().clone();
    let order = grid.order().clone();
    let live = live_nodes(f);
    let fvals = f.values().to_vec();
    let mut rows: Vec<Result<Complex64>> = Vec::new();
    rows.resize_with(grid.node_count(), || Ok(ZERO));
    parallel_fill(&mut rows, |i| {
        let x = grid.node(i);
        let mut terms = Vec::new();
        for &j in &live {
            let y = grid.node(j);
            if in_local_region(&x, &y) {
                continue;
            }
            let k = kernel_k_refined(sym, &order, &x, &y, refine)?;
            terms.push(Complex64::new(
                fvals[j].norm() * k.norm() * grid.measure_weight(j),
                0.0,
            ));
        }
        Ok(pairwise_sum_complex(&terms))
    });
    let vals = rows.into_iter().collect::<Result<Vec<_>>>()?;
    GridFunction::from_values(grid, vals)
}

/// ℒ(|f|)(x) = ∫_{L(x)} |f(y)| |K(x,y) − ∏(x_jy_j)^{−λ_j}H(x,y)| dm(y);
/// the difference kernel is integrable across the diagonal, which the node
/// sum skips.
pub fn local_diff_operator_apply(
    sym: &LaplaceSymbol,
    f: &GridFunction,
    refine: usize,
) -> Result<GridFunction> {
    let grid = f.grid().clone();
    let order = grid.order().clone();
    let lambdas = order.lambdas().to_vec();
    let live = live_nodes(f);
    let fvals = f.values().to_vec();
    let mut rows: Vec<Result<Complex64>> = Vec::new();
    rows.resize_with(grid.node_count(), || Ok(ZERO));
    parallel_fill(&mut rows, |i| {
        let x = grid.node(i);
        let mut terms = Vec::new();
        for &j in &live {
            let y = grid.node(j);
            if !in_local_region(&x, &y) || x == y {
                continue;
            }
            let k = kernel_k_refined(sym, &order, &x, &y, refine)?;
            let h = kernel_h_refined(sym, &x, &y, refine)?;
            let diff = k - h * local_weight(&lambdas, &x, &y);
            terms.push(Complex64::new(
                fvals[j].norm() * diff.norm() * grid.measure_weight(j),
                0.0,
            ));
        }
        Ok(pairwise_sum_complex(&terms))
    });
    let vals = rows.into_iter().collect::<Result<Vec<_>>>()?;
    GridFunction::from_values(grid, vals)
}

/// T^{m,*}f(x) = sup over the ε schedule of |Σ_{|y−x|>ε} f(y) K(x,y) w(y)|.
pub fn maximal_truncated_apply(
    sym: &LaplaceSymbol,
    f: &GridFunction,
    eps_schedule: &[f64],
    refine: usize,
) -> Result<GridFunction> {
    if eps_schedule.is_empty() {
        return Err(Error::InvalidParameter(
            "empty truncation schedule".into(),
        ));
    }
    truncated_sup(sym, f, eps_schedule, refine, false)
}

/// T*_loc f(x) = sup over the ε schedule of
/// |Σ_{y∈L(x), |y−x|>ε} f(y) ∏(x_jy_j)^{−λ_j} H(x,y) w(y)|.
pub fn t_loc_star_apply(
    sym: &LaplaceSymbol,
    f: &GridFunction,
    eps_schedule: &[f64],
    refine: usize,
) -> Result<GridFunction> {
    if eps_schedule.is_empty() {
        return Err(Error::InvalidParameter(
            "empty truncation schedule".into(),
        ));
    }
    truncated_sup(sym, f, eps_schedule, refine, true)
}

fn truncated_sup(
    sym: &LaplaceSymbol,
    f: &GridFunction,
    eps_schedule: &[f64],
    refine: usize,
    local_euclidean: bool,
) -> Result<GridFunction> {
    let grid = f.grid().clone();
    let order = grid.order().clone();
    let lambdas = order.lambdas().to_vec();
    let live = live_nodes(f);
    let fvals = f.values().to_vec();
    let eps = eps_schedule.to_vec();
    let mut rows: Vec<Result<Complex64>> = Vec::new();
    rows.resize_with(grid.node_count(), || Ok(ZERO));
    parallel_fill(&mut rows, |i| {
        let x = grid.node(i);
        let mut contribs: Vec<(f64, Complex64)> = Vec::new();
        for &j in &live {
            let y = grid.node(j);
            let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 == 0.0 {
                continue;
            }
            if local_euclidean {
                if !in_local_region(&x, &y) {
                    continue;
                }
                let h = kernel_h_refined(sym, &x, &y, refine)?;
                contribs.push((
                    d2.sqrt(),
                    fvals[j] * h * (local_weight(&lambdas, &x, &y) * grid.measure_weight(j)),
                ));
            } else {
                let k = kernel_k_refined(sym, &order, &x, &y, refine)?;
                contribs.push((d2.sqrt(), fvals[j] * k * grid.measure_weight(j)));
            }
        }
        let mut best = 0.0f64;
        for &e in &eps {
            let acc: Vec<Complex64> = contribs
                .iter()
                .filter(|(d, _)| *d > e)
                .map(|&(_, v)| v)
                .collect();
            best = best.max(pairwise_sum_complex(&acc).norm());
        }
        Ok(Complex64::new(best, 0.0))
    });
    let vals = rows.into_iter().collect::<Result<Vec<_>>>()?;
    GridFunction::from_values(grid, vals)
}

/// Dyadic truncation schedule from the domain diameter down to the smallest
/// node spacing of the grid.
pub fn default_eps_schedule(grid: &WeightedGrid) -> Vec<f64> {
    let diam: f64 = (0..grid.dim())
        .map(|j| {
            let a = grid.axis(j);
            (a.upper() - a.lower()).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let mut min_gap = diam;
    for j in 0..grid.dim() {
        let nodes = grid.axis(j).nodes();
        for w in nodes.windows(2) {
            min_gap = min_gap.min(w[1] - w[0]);
        }
    }
    let mut out = Vec::new();
    let mut e = diam;
    while e > min_gap {
        out.push(e);
        e *= 0.5;
    }
    out.push(min_gap);
    out
}

// ---------------------------------------------------------------------------
// Hardy-type, averaging and tail operators (exact panel-interpolant
// integration along axes)
// ---------------------------------------------------------------------------

/// ∫_a^b interp(values)(y)·w(y) dy, with [a,b] clipped to the axis range and
/// split at panel boundaries.
fn axis_range_integral(
    axis: &Axis,
    values: &[Complex64],
    a: f64,
    b: f64,
    w: &dyn Fn(f64) -> f64,
) -> Complex64 {
    let a = a.max(axis.lower());
    let b = b.min(axis.upper());
    if !(b > a) {
        return ZERO;
    }
    let pa = axis.panel_of(a);
    let pb = axis.panel_of(b);
    let breaks = axis.breakpoints();
    let mut acc = Vec::with_capacity(pb - pa + 1);
    for p in pa..=pb {
        let lo = a.max(breaks[p]);
        let hi = b.min(breaks[p + 1]);
        if hi > lo {
            acc.push(axis.integrate_partial_panel(p, values, lo, hi, w));
        }
    }
    pairwise_sum_complex(&acc)
}

/// ∫_0^u g(y) y^{2β} dy where g is the axis interpolant, extended below the
/// grid's lower bound by its boundary value (exact when g is constant there).
fn hardy_partial_integral(axis: &Axis, values: &[Complex64], beta: f64, u: f64) -> Complex64 {
    let a = axis.lower();
    let boundary = axis.interp_in_panel(0, values, a);
    if u <= a {
        return boundary * (u.powf(2.0 * beta + 1.0) / (2.0 * beta + 1.0));
    }
    let tail = boundary * (a.powf(2.0 * beta + 1.0) / (2.0 * beta + 1.0));
    tail + axis_range_integral(axis, values, a, u, &|y| y.powf(2.0 * beta))
}

/// Hardy operator H_β g(x) = x^{−2β−1} ∫_0^x g(y) y^{2β} dy on a 1-D grid.
pub fn hardy_apply(beta: f64, g: &GridFunction) -> Result<GridFunction> {
    if !(beta > -0.5) {
        return Err(Error::InvalidParameter(format!(
            "Hardy exponent must exceed -1/2, got {beta}"
        )));
    }
    let grid = g.grid().clone();
    if grid.dim() != 1 {
        return Err(Error::GridMismatch("Hardy operator needs a 1-D grid".into()));
    }
    let axis = grid.axis(0).clone();
    let vals = g.values().to_vec();
    let out: Vec<Complex64> = axis
        .nodes()
        .iter()
        .map(|&x| hardy_partial_integral(&axis, &vals, beta, x) * x.powf(-2.0 * beta - 1.0))
        .collect();
    GridFunction::from_values(grid, out)
}

/// Row-major matrix whose row i applies `functional(node_i)` to nodal values
/// along the axis; built by evaluating the functional on the basis vectors.
fn axis_functional_matrix(
    axis: &Axis,
    functional: &dyn Fn(&[Complex64], f64) -> Complex64,
) -> Vec<f64> {
    let n = axis.len();
    let mut m = vec![0.0; n * n];
    let mut basis = vec![ZERO; n];
    for l in 0..n {
        basis[l] = Complex64::new(1.0, 0.0);
        for (i, &x) in axis.nodes().iter().enumerate() {
            m[i * n + l] = functional(&basis, x).re;
        }
        basis[l] = ZERO;
    }
    m
}

fn apply_axis_matrices(g: &GridFunction, matrices: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    let shape = g.grid().shape();
    let mut vals = g.values().to_vec();
    for (axis, m) in matrices.iter().enumerate() {
        vals = contract_axis(&vals, &shape, axis, m);
    }
    Ok(vals)
}

/// Tensor Hardy operator
/// H(g)(x) = (Σx_j²)^{−Σ(β_j+1/2)} ∫_0^{x_1/2}…∫_0^{x_k/2} g ∏y_j^{2β_j} dy.
pub fn tensor_hardy_apply(betas: &[f64], g: &GridFunction) -> Result<GridFunction> {
    let grid = g.grid().clone();
    check_betas(betas, &grid)?;
    let matrices: Vec<Vec<f64>> = (0..grid.dim())
        .map(|j| {
            let axis = grid.axis(j);
            let beta = betas[j];
            axis_functional_matrix(axis, &|vals, x| {
                hardy_partial_integral(axis, vals, beta, x / 2.0)
            })
        })
        .collect();
    let mut vals = apply_axis_matrices(g, &matrices)?;
    let s: f64 = betas.iter().map(|b| b + 0.5).sum();
    for (i, v) in vals.iter_mut().enumerate() {
        let rho: f64 = grid.node(i).iter().map(|c| c * c).sum();
        *v *= rho.powf(-s);
    }
    GridFunction::from_values(grid, vals)
}

/// Iterated coordinate-wise Hardy bound
/// ∏_j x_j^{−2β_j−1} ∫_0^{x_1}…∫_0^{x_k} g ∏y_j^{2β_j} dy, which dominates
/// the tensor Hardy operator pointwise for g ≥ 0.
pub fn iterated_hardy_apply(betas: &[f64], g: &GridFunction) -> Result<GridFunction> {
    let grid = g.grid().clone();
    check_betas(betas, &grid)?;
    let matrices: Vec<Vec<f64>> = (0..grid.dim())
        .map(|j| {
            let axis = grid.axis(j);
            let beta = betas[j];
            axis_functional_matrix(axis, &|vals, x| {
                hardy_partial_integral(axis, vals, beta, x) * x.powf(-2.0 * beta - 1.0)
            })
        })
        .collect();
    let vals = apply_axis_matrices(g, &matrices)?;
    GridFunction::from_values(grid, vals)
}

/// Averaging operator
/// Z(g)(x) = ∏x_j^{−2β_j−1} ∫_{x_1/2}^{2x_1}…∫_{x_k/2}^{2x_k} g ∏y_j^{2β_j} dy
/// (integration clipped to the grid box).
pub fn averaging_apply(betas: &[f64], g: &GridFunction) -> Result<GridFunction> {
    let grid = g.grid().clone();
    check_betas(betas, &grid)?;
    let matrices: Vec<Vec<f64>> = (0..grid.dim())
        .map(|j| {
            let axis = grid.axis(j);
            let beta = betas[j];
            axis_functional_matrix(axis, &|vals, x| {
                axis_range_integral(axis, vals, x / 2.0, 2.0 * x, &|y| y.powf(2.0 * beta))
                    * x.powf(-2.0 * beta - 1.0)
            })
        })
        .collect();
    let vals = apply_axis_matrices(g, &matrices)?;
    GridFunction::from_values(grid, vals)
}

/// Tail operator 𝒮_k(g)(x) = ∫_{2x_1}^∞…∫_{2x_k}^∞ |g(y)|/(y_1…y_k) dy,
/// with g taken as zero beyond the grid box.
pub fn tail_operator_apply(g: &GridFunction) -> Result<GridFunction> {
    let grid = g.grid().clone();
    let a = g.abs();
    let matrices: Vec<Vec<f64>> = (0..grid.dim())
        .map(|j| {
            let axis = grid.axis(j);
            axis_functional_matrix(axis, &|vals, x| {
                axis_range_integral(axis, vals, 2.0 * x, axis.upper(), &|y| 1.0 / y)
            })
        })
        .collect();
    let vals = apply_axis_matrices(&a, &matrices)?;
    GridFunction::from_values(grid, vals)
}

fn check_betas(betas: &[f64], grid: &WeightedGrid) -> Result<()> {
    if betas.len() != grid.dim() {
        return Err(Error::GridMismatch(
            "one exponent per grid axis is required".into(),
        ));
    }
    if betas.iter().any(|b| !(*b > -0.5)) {
        return Err(Error::InvalidParameter(
            "exponents must exceed -1/2".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gaussian maximal and Hardy–Littlewood maximal operators
// ---------------------------------------------------------------------------

/// Log-uniform time ladder for the Gaussian maximal operator.
pub fn default_time_ladder() -> Vec<f64> {
    let (lo, hi, rungs) = (1e-4f64, 1e2f64, 64usize);
    (0..rungs)
        .map(|i| lo * (hi / lo).powf(i as f64 / (rungs - 1) as f64))
        .collect()
}

/// Gaussian maximal operator over the local region:
/// Ω(g)(x) = sup_t |Σ_{y∈L(x)} ∏_j (x_jy_j)^{−β_j} t^{−1/2} e^{−(x_j−y_j)²/4t}
/// g(y) w(y)| with the sup over the given time ladder.
pub fn gaussian_maximal_apply(
    betas: &[f64],
    g: &GridFunction,
    ladder: &[f64],
) -> Result<GridFunction> {
    let grid = g.grid().clone();
    check_betas(betas, &grid)?;
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("empty time ladder".into()));
    }
    let live = live_nodes(g);
    let gvals = g.values().to_vec();
    let betas = betas.to_vec();
    let ladder = ladder.to_vec();
    let n = grid.dim();
    let mut rows: Vec<Result<Complex64>> = Vec::new();
    rows.resize_with(grid.node_count(), || Ok(ZERO));
    parallel_fill(&mut rows, |i| {
        let x = grid.node(i);
        let mut best = 0.0f64;
        for &t in &ladder {
            let mut terms = Vec::new();
            for &j in &live {
                let y = grid.node(j);
                if !in_local_region(&x, &y) {
                    continue;
                }
                let mut k = 1.0;
                for jj in 0..n {
                    k *= (x[jj] * y[jj]).powf(-betas[jj]) / t.sqrt()
                        * (-(x[jj] - y[jj]).powi(2) / (4.0 * t)).exp();
                }
                terms.push(gvals[j] * (k * grid.measure_weight(j)));
            }
            best = best.max(pairwise_sum_complex(&terms).norm());
        }
        Ok(Complex64::new(best, 0.0))
    });
    let vals = rows.into_iter().collect::<Result<Vec<_>>>()?;
    GridFunction::from_values(grid, vals)
}

/// Dyadic radius ladder for the Hardy–Littlewood maximal operator, from the
/// domain diameter down to the smallest node spacing.
pub fn default_radius_ladder(grid: &WeightedGrid) -> Vec<f64> {
    default_eps_schedule(grid)
}

/// Discrete centered Hardy–Littlewood maximal function over a dyadic radius
/// ladder: M g(x) = max_r (Σ_{|y−x|≤r} |g| w)/(Σ_{|y−x|≤r} w).
pub fn hl_maximal(g: &GridFunction, radii: &[f64]) -> Result<GridFunction> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter("empty radius ladder".into()));
    }
    let grid = g.grid().clone();
    let gvals = g.values().to_vec();
    let radii = radii.to_vec();
    let nodes_total = grid.node_count();
    let mut rows: Vec<Result<Complex64>> = Vec::new();
    rows.resize_with(nodes_total, || Ok(ZERO));
    parallel_fill(&mut rows, |i| {
        let x = grid.node(i);
        // distances to every node, then averages per radius
        let mut pairs: Vec<(f64, f64, f64)> = (0..nodes_total)
            .map(|j| {
                let y = grid.node(j);
                let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
                let w = grid.measure_weight(j);
                (d2.sqrt(), gvals[j].norm() * w, w)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut best = 0.0f64;
        for &r in &radii {
            let upto = pairs.partition_point(|p| p.0 <= r);
            if upto == 0 {
                continue;
            }
            let num: Vec<f64> = pairs[..upto].iter().map(|p| p.1).collect();
            let den: Vec<f64> = pairs[..upto].iter().map(|p| p.2).collect();
            let d = pairwise_sum(&den);
            if d > 0.0 {
                best = best.max(pairwise_sum(&num) / d);
            }
        }
        Ok(Complex64::new(best, 0.0))
    });
    let vals = rows.into_iter().collect::<Result<Vec<_>>>()?;
    GridFunction::from_values(grid, vals)
}

// ---------------------------------------------------------------------------
// Empirical kernel-envelope ratios
// ---------------------------------------------------------------------------

/// Empirical suprema of kernel/envelope ratios over random probes in the
/// regime where each bound applies. Finite, refinement-stable values support
/// the corresponding envelope estimates.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EnvelopeRatios {
    /// sup |x−y|·|H(x,y)| over off-diagonal pairs (1-D Euclidean kernel).
    pub h_distance: f64,
    /// sup of the Gaussian-comparison residual ratio
    /// |W_t(u,v) − (uv)^{−λ}e^{−(u−v)²/4t}/√(4πt)| / ((uv)^{−λ−1}√t·e^{−(u−v)²/4t})
    /// over probes with uv > t.
    pub heat_gaussian: f64,
    /// sup |W_t(u,v)| / (t^{−λ−1/2}e^{−v²/20t}) over probes with 2u < v.
    pub heat_offdiag: f64,
    /// sup |∂_t W_t(u,v)| / (t^{−λ−3/2}e^{−v²/20t}) over probes with 2u < v.
    pub dt_offdiag: f64,
}

/// Sample `probes` random points per regime (reproducibly from `seed`) and
/// report the empirical sup-ratios for the four kernel envelopes.
pub fn envelope_sup_ratios(lambda: f64, probes: usize, seed: u64) -> Result<EnvelopeRatios> {
    if probes == 0 {
        return Err(Error::InvalidParameter("need at least one probe".into()));
    }
    let sym = LaplaceSymbol::resolvent(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // pre-draw the probe coordinates so the kernel evaluations can be
    // parallelized deterministically
    let h_pts: Vec<(f64, f64)> = (0..probes)
        .map(|_| {
            loop {
                let x: f64 = rng.gen_range(0.1..5.0);
                let y: f64 = rng.gen_range(0.1..5.0);
                if (x - y).abs() > 1e-3 {
                    return (x, y);
                }
            }
        })
        .collect();
    let mut h_ratios: Vec<Result<f64>> = Vec::new();
    h_ratios.resize_with(probes, || Ok(0.0));
    parallel_fill(&mut h_ratios, |i| {
        let (x, y) = h_pts[i];
        let h = kernel_h_refined(&sym, &[x], &[y], 0)?;
        Ok((x - y).abs() * h.norm())
    });
    let mut h_distance = 0.0f64;
    for r in h_ratios {
        h_distance = h_distance.max(r?);
    }

    let mut heat_gaussian = 0.0f64;
    let mut heat_offdiag = 0.0f64;
    let mut dt_offdiag = 0.0f64;
    let pi = std::f64::consts::PI;
    for _ in 0..probes {
        // Gaussian comparison on the near-diagonal regime uv > t
        let u = rng.gen_range(0.1..5.0);
        let v = rng.gen_range(0.1..5.0);
        let t = rng.gen_range(1e-3..1.0) * (u * v);
        let w = heat_kernel_1d(lambda, t, u, v)?;
        let gauss = (u * v).powf(-lambda) * (-(u - v).powi(2) / (4.0 * t)).exp()
            / (4.0 * pi * t).sqrt();
        let envelope = (u * v).powf(-lambda - 1.0) * t.sqrt() * (-(u - v).powi(2) / (4.0 * t)).exp();
        heat_gaussian = heat_gaussian.max((w - gauss).abs() / envelope);

        // off-diagonal regime 2u < v
        let v = rng.gen_range(0.5..5.0);
        let u = rng.gen_range(0.0..0.5) * v / 2.0 + 1e-6;
        let t = 10f64.powf(rng.gen_range(-3.0..2.0));
        let w = heat_kernel_1d(lambda, t, u, v)?;
        let env = t.powf(-lambda - 0.5) * (-v * v / (20.0 * t)).exp();
        heat_offdiag = heat_offdiag.max(w.abs() / env);
        let dw = dt_heat_kernel_1d(lambda, t, u, v)?;
        let denv = t.powf(-lambda - 1.5) * (-v * v / (20.0 * t)).exp();
        dt_offdiag = dt_offdiag.max(dw.abs() / denv);
    }
    let out = EnvelopeRatios {
        h_distance,
        heat_gaussian,
        heat_offdiag,
        dt_offdiag,
    };
    for v in [out.h_distance, out.heat_gaussian, out.heat_offdiag, out.dt_offdiag] {
        if !v.is_finite() {
            return Err(Error::NonConvergent(
                "non-finite envelope ratio encountered".into(),
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Experiment harness
// ---------------------------------------------------------------------------

/// One row of an operator experiment: a norm ratio or weak-type constant for
/// a named operator/input pair at a given grid resolution.
#[derive(Clone, Debug, serde::Serialize)]
pub struct OperatorReport {
    pub operator: String,
    pub p_or_weak: String,
    pub input: String,
    pub resolution: usize,
    pub value: f64,
}

/// Tabulate ‖T f‖_p/‖f‖_p for each named input.
pub fn lp_ratio_experiment<F>(
    label: &str,
    op: F,
    p: f64,
    inputs: &[(&str, &GridFunction)],
    resolution: usize,
) -> Result<Vec<OperatorReport>>
where
    F: Fn(&GridFunction) -> Result<GridFunction>,
{
    let mut out = Vec::with_capacity(inputs.len());
    for (name, f) in inputs {
        let tf = op(f)?;
        let denom = lp_norm(f, p)?;
        if denom == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "input `{name}` has zero norm"
            )));
        }
        let value = lp_norm(&tf, p)? / denom;
        if !value.is_finite() {
            return Err(Error::NonConvergent(format!(
                "non-finite norm ratio for input `{name}`"
            )));
        }
        out.push(OperatorReport {
            operator: label.to_string(),
            p_or_weak: format!("{p}"),
            input: name.to_string(),
            resolution,
            value,
        });
    }
    Ok(out)
}

/// Tabulate the fitted weak-(1,1) constant sup_γ γ·m{|Tf|>γ}/‖f‖₁ for each
/// named input, with γ on a dyadic ladder below max|Tf|.
pub fn weak11_experiment<F>(
    label: &str,
    op: F,
    inputs: &[(&str, &GridFunction)],
    resolution: usize,
) -> Result<Vec<OperatorReport>>
where
    F: Fn(&GridFunction) -> Result<GridFunction>,
{
    let mut out = Vec::with_capacity(inputs.len());
    for (name, f) in inputs {
        let tf = op(f)?;
        let l1 = lp_norm(f, 1.0)?;
        if l1 == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "input `{name}` has zero L1 norm"
            )));
        }
        let top = tf.values().iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if top == 0.0 {
            out.push(OperatorReport {
                operator: label.to_string(),
                p_or_weak: "weak-1-1".to_string(),
                input: name.to_string(),
                resolution,
                value: 0.0,
            });
            continue;
        }
        // quarter-dyadic ladder: dense enough that the fitted sup is not
        // quantization-limited
        let gammas: Vec<f64> = (1..=96)
            .map(|j| top * 0.5f64.powf(j as f64 / 4.0))
            .collect();
        let profile = weak_l1_profile(&tf, &gammas)?;
        let value = profile
            .iter()
            .map(|&(_, gm)| gm / l1)
            .fold(0.0f64, f64::max);
        if !value.is_finite() {
            return Err(Error::NonConvergent(format!(
                "non-finite weak profile for input `{name}`"
            )));
        }
        out.push(OperatorReport {
            operator: label.to_string(),
            p_or_weak: "weak-1-1".to_string(),
            input: name.to_string(),
            resolution,
            value,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Order, WeightedGrid};
    use crate::hankel::TransformPlan;
    use crate::inputs::{gaussian_bump, near_atom, random_smooth};
    use crate::multiplier::spectral_apply;
    use std::sync::Arc;

    fn indicator_axis() -> Axis {
        Axis::from_breakpoints(vec![0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0], 12).unwrap()
    }

    fn indicator_grid(lambda: f64) -> Arc<WeightedGrid> {
        WeightedGrid::new(vec![indicator_axis()], Order::new(vec![lambda]).unwrap()).unwrap()
    }

    fn unit_indicator(grid: &Arc<WeightedGrid>) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |x| {
            Complex64::new(if x[0] < 1.0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap()
    }

    #[test]
    fn local_region_examples() {
        assert!(in_local_region(&[1.0, 1.0], &[1.5, 0.6]));
        assert!(!in_local_region(&[1.0, 1.0], &[2.5, 1.0]));
        // boundary is excluded (strict inequalities)
        assert!(!in_local_region(&[1.0], &[2.0]));
        assert!(!in_local_region(&[1.0], &[0.5]));
        assert!(in_local_region(&[1.0], &[1.0]));
    }

    #[test]
    fn local_global_partition() {
        let grid = indicator_grid(0.5);
        for i in (0..grid.node_count()).step_by(7) {
            for j in (0..grid.node_count()).step_by(5) {
                let x = grid.node(i);
                let y = grid.node(j);
                let local = in_local_region(&x, &y);
                let global = !in_local_region(&x, &y);
                assert!(local ^ global == false || local != global);
                assert!(local != global || !local);
                assert!(local || global);
                assert!(!(local && global));
            }
        }
    }

    #[test]
    fn kernel_operators_vanish_for_constant_profile() {
        let ax = Axis::from_breakpoints(vec![0.5, 1.0, 2.0, 4.0], 6).unwrap();
        let grid = WeightedGrid::new(vec![ax], Order::new(vec![1.0]).unwrap()).unwrap();
        let f = near_atom(grid.clone(), &[1.5], 0.4).unwrap();
        let sym = LaplaceSymbol::identity();
        let eps = default_eps_schedule(&grid);
        let scale = lp_norm(&f, f64::INFINITY).unwrap();
        for op in [
            global_operator_apply(&sym, &f, 0).unwrap(),
            local_diff_operator_apply(&sym, &f, 0).unwrap(),
            maximal_truncated_apply(&sym, &f, &eps, 0).unwrap(),
            t_loc_star_apply(&sym, &f, &eps, 0).unwrap(),
        ] {
            let top = lp_norm(&op, f64::INFINITY).unwrap();
            assert!(top <= 1e-7 * scale, "constant-profile operator gave {top}");
        }
    }

    #[test]
    fn decomposition_inequality_holds_pointwise() {
        let ax = Axis::from_breakpoints(vec![0.5, 1.0, 2.0, 4.0], 6).unwrap();
        let grid = WeightedGrid::new(vec![ax], Order::new(vec![0.7]).unwrap()).unwrap();
        let f = near_atom(grid.clone(), &[1.5], 0.4).unwrap();
        let sym = LaplaceSymbol::resolvent(1.0).unwrap();
        let eps = default_eps_schedule(&grid);
        let tstar = maximal_truncated_apply(&sym, &f, &eps, 0).unwrap();
        let gpart = global_operator_apply(&sym, &f, 0).unwrap();
        let lpart = local_diff_operator_apply(&sym, &f, 0).unwrap();
        let tloc = t_loc_star_apply(&sym, &f, &eps, 0).unwrap();
        for i in 0..grid.node_count() {
            let lhs = tstar.values()[i].re;
            let rhs = gpart.values()[i].re + lpart.values()[i].re + tloc.values()[i].re;
            assert!(
                lhs <= rhs * (1.0 + 1e-12) + 1e-300,
                "node {i}: {lhs} > {rhs}"
            );
        }
        // the sup dominates every member, in particular the finest truncation
        let last = [*eps.last().unwrap()];
        let fin = maximal_truncated_apply(&sym, &f, &last, 0).unwrap();
        for i in 0..grid.node_count() {
            assert!(tstar.values()[i].re >= fin.values()[i].re - 1e-300);
        }
    }

    #[test]
    fn local_diff_refined_kernel_oracle() {
        let ax = Axis::from_breakpoints(vec![0.5, 1.0, 2.0, 4.0], 6).unwrap();
        let grid = WeightedGrid::new(vec![ax], Order::new(vec![0.5]).unwrap()).unwrap();
        let f = near_atom(grid.clone(), &[1.5], 0.4).unwrap();
        let sym = LaplaceSymbol::resolvent(1.0).unwrap();
        let base = local_diff_operator_apply(&sym, &f, 0).unwrap();
        let fine = local_diff_operator_apply(&sym, &f, 1).unwrap();
        let scale = lp_norm(&fine, f64::INFINITY).unwrap();
        assert!(scale > 0.0 && scale.is_finite());
        for i in 0..grid.node_count() {
            let d = (base.values()[i].re - fine.values()[i].re).abs();
            assert!(d <= 1e-4 * scale, "node {i}: |Δ| = {d}, scale {scale}");
        }
        let tbase = t_loc_star_apply(&sym, &f, &default_eps_schedule(&grid), 0).unwrap();
        let tfine = t_loc_star_apply(&sym, &f, &default_eps_schedule(&grid), 1).unwrap();
        let tscale = lp_norm(&tfine, f64::INFINITY).unwrap();
        for i in 0..grid.node_count() {
            let d = (tbase.values()[i].re - tfine.values()[i].re).abs();
            assert!(d <= 1e-4 * tscale);
        }
    }

    #[test]
    fn hardy_closed_forms() {
        // g = χ_{(0,1)}: H_β g(x) = 1/(2β+1) for x ≤ 1, x^{−2β−1}/(2β+1) after
        for &beta in &[-0.4, 0.0, 0.5, 1.0, 2.3] {
            let grid = indicator_grid(f64::max(beta, 0.0));
            let g = unit_indicator(&grid);
            let hg = hardy_apply(beta, &g).unwrap();
            for (i, &x) in grid.axis(0).nodes().iter().enumerate() {
                let exact = if x <= 1.0 {
                    1.0 / (2.0 * beta + 1.0)
                } else {
                    x.powf(-2.0 * beta - 1.0) / (2.0 * beta + 1.0)
                };
                let got = hg.values()[i].re;
                assert!(
                    (got - exact).abs() <= 1e-8 * exact.abs(),
                    "beta={beta}, x={x}: {got} vs {exact}"
                );
            }
        }
        // spot values for β = 1/2: x=0.5 → 1/2; x=2 → 1/8 (interpolated)
        let grid = indicator_grid(0.5);
        let g = unit_indicator(&grid);
        let hg = hardy_apply(0.5, &g).unwrap();
        let axis = grid.axis(0);
        let at = |x: f64| axis.interp_in_panel(axis.panel_of(x), hg.values(), x).re;
        assert!((at(0.5) - 0.5).abs() < 1e-8);
        assert!((at(2.0) - 0.125).abs() < 1e-8);
        // zero input
        let z = GridFunction::zeros(grid.clone());
        assert_eq!(lp_norm(&hardy_apply(0.5, &z).unwrap(), f64::INFINITY).unwrap(), 0.0);
        assert!(hardy_apply(-0.6, &g).is_err());
    }

    #[test]
    fn tensor_hardy_closed_form_and_domination() {
        // k=1, β=0, g ≡ 1: H(g)(x) = x^{−1}·(x/2) = 1/2
        let grid = indicator_grid(0.0);
        let ones = GridFunction::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0)).unwrap();
        let hg = tensor_hardy_apply(&[0.0], &ones).unwrap();
        for v in hg.values() {
            assert!((v.re - 0.5).abs() < 1e-10, "{v}");
        }
        // k=2 domination by the iterated coordinate-wise Hardy bound
        let ax = Axis::from_breakpoints(vec![0.25, 0.5, 1.0, 2.0, 4.0], 8).unwrap();
        let grid2 = WeightedGrid::new(
            vec![ax.clone(), ax],
            Order::new(vec![0.5, 1.0]).unwrap(),
        )
        .unwrap();
        let g = gaussian_bump(grid2.clone(), &[1.0, 1.0], 0.7).unwrap();
        let betas = [0.5, 1.0];
        let tensor = tensor_hardy_apply(&betas, &g).unwrap();
        let iterated = iterated_hardy_apply(&betas, &g).unwrap();
        for i in 0..grid2.node_count() {
            assert!(
                tensor.values()[i].re <= iterated.values()[i].re * (1.0 + 1e-10) + 1e-300,
                "node {i}"
            );
        }
    }

    #[test]
    fn averaging_closed_form() {
        // g ≡ 1, β=0: Z(g)(x) = x^{−1}(2x − x/2) = 3/2 away from the box edges
        let grid = indicator_grid(0.0);
        let ones = GridFunction::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0)).unwrap();
        let zg = averaging_apply(&[0.0], &ones).unwrap();
        for (i, &x) in grid.axis(0).nodes().iter().enumerate() {
            if x / 2.0 >= grid.axis(0).lower() && 2.0 * x <= grid.axis(0).upper() {
                assert!((zg.values()[i].re - 1.5).abs() < 1e-10, "x={x}");
            }
        }
        let z = GridFunction::zeros(grid.clone());
        assert_eq!(
            lp_norm(&averaging_apply(&[0.0], &z).unwrap(), f64::INFINITY).unwrap(),
            0.0
        );
    }

    #[test]
    fn tail_operator_closed_forms() {
        // k=1, g = χ_{(0,1]}: 𝒮(g)(x) = ∫_{2x}^1 dy/y = −ln(2x) for 2x < 1
        let grid = indicator_grid(0.0);
        let g = unit_indicator(&grid);
        let sg = tail_operator_apply(&g).unwrap();
        let axis = grid.axis(0);
        let at = |x: f64| axis.interp_in_panel(axis.panel_of(x), sg.values(), x).re;
        assert!((at(0.25) - std::f64::consts::LN_2).abs() < 1e-8, "{}", at(0.25));
        assert!((at(0.125) + (0.25f64).ln()).abs() < 1e-8);
        // beyond half the support the tail is empty
        for (i, &x) in axis.nodes().iter().enumerate() {
            if 2.0 * x >= 1.0 {
                assert!(sg.values()[i].re.abs() < 1e-12, "x={x}");
            }
        }
        // k=2 product indicator factorizes into a product of 1-D logs
        let ax = Axis::from_breakpoints(vec![0.0625, 0.125, 0.25, 0.5, 1.0, 2.0], 10).unwrap();
        let grid2 =
            WeightedGrid::new(vec![ax.clone(), ax], Order::new(vec![0.0, 0.0]).unwrap()).unwrap();
        let g2 = GridFunction::from_fn(grid2.clone(), |x| {
            Complex64::new(if x[0] < 1.0 && x[1] < 1.0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let s2 = tail_operator_apply(&g2).unwrap();
        let a0 = grid2.axis(0);
        // interpolate the 2-D output at (0.25, 0.125) through nested 1-D interp
        let target = (0.25f64, 0.125f64);
        let len = a0.len();
        let col: Vec<Complex64> = (0..len)
            .map(|i| {
                let row: Vec<Complex64> =
                    (0..len).map(|j| s2.values()[i * len + j]).collect();
                a0.interp_in_panel(a0.panel_of(target.1), &row, target.1)
            })
            .collect();
        let got = a0.interp_in_panel(a0.panel_of(target.0), &col, target.0).re;
        let exact = (-(2.0 * target.0).ln()) * (-(2.0 * target.1).ln());
        assert!((got - exact).abs() < 1e-7, "{got} vs {exact}");
    }

    #[test]
    fn gaussian_maximal_basics() {
        let grid = indicator_grid(0.5);
        let z = GridFunction::zeros(grid.clone());
        let ladder = default_time_ladder();
        let out = gaussian_maximal_apply(&[0.5], &z, &ladder).unwrap();
        assert_eq!(lp_norm(&out, f64::INFINITY).unwrap(), 0.0);
        // sup is monotone under ladder extension
        let g = near_atom(grid.clone(), &[1.5], 0.3).unwrap();
        let short = gaussian_maximal_apply(&[0.5], &g, &ladder[..16]).unwrap();
        let long = gaussian_maximal_apply(&[0.5], &g, &ladder).unwrap();
        for i in 0..grid.node_count() {
            assert!(long.values()[i].re >= short.values()[i].re - 1e-300);
        }
        assert!(gaussian_maximal_apply(&[0.5], &g, &[]).is_err());
    }

    #[test]
    fn hl_maximal_basics() {
        let grid = indicator_grid(0.0);
        let c = GridFunction::from_fn(grid.clone(), |_| Complex64::new(0.7, 0.0)).unwrap();
        let radii = default_radius_ladder(&grid);
        let out = hl_maximal(&c, &radii).unwrap();
        for v in out.values() {
            assert!((v.re - 0.7).abs() < 1e-12);
        }
        // monotone under ladder extension
        let g = near_atom(grid.clone(), &[0.75], 0.2).unwrap();
        let short = hl_maximal(&g, &radii[..4]).unwrap();
        let long = hl_maximal(&g, &radii).unwrap();
        for i in 0..grid.node_count() {
            assert!(long.values()[i].re >= short.values()[i].re - 1e-300);
        }
        // indicator averages decay like 1/x in 1-D; fit on a domain wide
        // enough that the centered balls never clip at the upper edge
        let wide = WeightedGrid::new(
            vec![Axis::geometric_uniform(0.05, 16.0, 8).unwrap()],
            Order::new(vec![0.0]).unwrap(),
        )
        .unwrap();
        let g = near_atom(wide.clone(), &[0.3], 0.1).unwrap();
        let long = hl_maximal(&g, &default_radius_ladder(&wide)).unwrap();
        let far: Vec<(f64, f64)> = wide
            .axis(0)
            .nodes()
            .iter()
            .zip(long.values())
            .filter(|(&x, _)| x > 2.0 && x < 8.0)
            .map(|(&x, v)| (x, v.re))
            .collect();
        assert!(far.len() >= 4);
        let (x0, m0) = far[0];
        let (x1, m1) = *far.last().unwrap();
        let slope = (m1 / m0).ln() / (x1 / x0).ln();
        assert!((slope + 1.0).abs() < 0.1, "fitted exponent {slope}");
    }

    #[test]
    fn positive_operators_monotone() {
        let grid = indicator_grid(0.5);
        let g1 = random_smooth(grid.clone(), 11, 4).unwrap().abs();
        let bump = random_smooth(grid.clone(), 12, 3).unwrap().abs();
        let g2 = g1.axpy(Complex64::new(1.0, 0.0), &bump).unwrap(); // g2 ≥ g1 ≥ 0
        let check = |a: &GridFunction, b: &GridFunction| {
            for i in 0..a.grid().node_count() {
                assert!(a.values()[i].re <= b.values()[i].re * (1.0 + 1e-10) + 1e-12);
            }
        };
        check(
            &hardy_apply(0.5, &g1).unwrap(),
            &hardy_apply(0.5, &g2).unwrap(),
        );
        check(
            &averaging_apply(&[0.5], &g1).unwrap(),
            &averaging_apply(&[0.5], &g2).unwrap(),
        );
        check(
            &tail_operator_apply(&g1).unwrap(),
            &tail_operator_apply(&g2).unwrap(),
        );
        let radii = default_radius_ladder(&grid);
        check(&hl_maximal(&g1, &radii).unwrap(), &hl_maximal(&g2, &radii).unwrap());
        let ladder = default_time_ladder();
        check(
            &gaussian_maximal_apply(&[0.5], &g1, &ladder).unwrap(),
            &gaussian_maximal_apply(&[0.5], &g2, &ladder).unwrap(),
        );
    }

    #[test]
    fn envelope_ratios_finite_and_stable() {
        for &lambda in &[0.5, 1.0] {
            let a = envelope_sup_ratios(lambda, 1000, 42).unwrap();
            let b = envelope_sup_ratios(lambda, 2000, 42).unwrap();
            for (x, y, name) in [
                (a.h_distance, b.h_distance, "h"),
                (a.heat_gaussian, b.heat_gaussian, "gauss"),
                (a.heat_offdiag, b.heat_offdiag, "off"),
                (a.dt_offdiag, b.dt_offdiag, "dt"),
            ] {
                assert!(x.is_finite() && y.is_finite() && y > 0.0);
                assert!(
                    (y - x).abs() <= 0.10 * y,
                    "lambda={lambda} {name}: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn experiment_harness_identity_and_unitarity() {
        let ax = Axis::geometric_uniform(1e-3, 32.0, 16).unwrap();
        let grid =
            WeightedGrid::new_with_origin(vec![ax], Order::new(vec![2.3]).unwrap()).unwrap();
        let plan = TransformPlan::new(&grid).unwrap();
        let f = gaussian_bump(grid.clone(), &[2.0], 0.5).unwrap();
        let inputs = [("gaussian", &f)];
        let id = LaplaceSymbol::identity();
        let rows = lp_ratio_experiment(
            id.label(),
            |g| spectral_apply(&id, &plan, g),
            2.0,
            &inputs,
            grid.node_count(),
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].value - 1.0).abs() <= 2e-3, "{}", rows[0].value);
        let sym = LaplaceSymbol::imaginary_power(1.0).unwrap();
        let rows = lp_ratio_experiment(
            sym.label(),
            |g| spectral_apply(&sym, &plan, g),
            2.0,
            &inputs,
            grid.node_count(),
        )
        .unwrap();
        assert!((rows[0].value - 1.0).abs() <= 1e-3, "{}", rows[0].value);
        // weak profile of the same operator on a near-atom is finite
        let atom = near_atom(grid.clone(), &[2.0], 0.2).unwrap();
        let rows = weak11_experiment(
            sym.label(),
            |g| spectral_apply(&sym, &plan, g),
            &[("atom", &atom)],
            grid.node_count(),
        )
        .unwrap();
        assert!(rows[0].value.is_finite() && rows[0].value > 0.0);
        assert_eq!(rows[0].p_or_weak, "weak-1-1");
    }
}
