//! The weighted half-space ((0,∞)^n, ∏ x_j^{2λ_j} dx): tensor-product
//! quadrature grids, sampled functions, L^p and weak-L¹ functionals, and
//! dyadic-cube bookkeeping.

use crate::error::{Error, Result};
use crate::quad::{barycentric_weights, gauss_legendre, pairwise_sum, pairwise_sum_complex};
use num_complex::Complex64;
use std::io::{BufRead, Write};
use std::sync::Arc;

/// The vector of Bessel parameters (λ_1,…,λ_n); every λ_j > −1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct Order {
    lambdas: Vec<f64>,
}

impl Order {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParameter(
                "order needs at least one lambda".into(),
            ));
        }
        for &l in &lambdas {
            if !l.is_finite() || l <= -0.5 {
                return Err(Error::InvalidParameter(format!(
                    "lambda must exceed -1/2, got {l}"
                )));
            }
        }
        Ok(Order { lambdas })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, axis: usize) -> f64 {
        self.lambdas[axis]
    }
}

/// One quadrature axis: consecutive Gauss–Legendre panels on [a, b].
///
/// The panel structure is public knowledge for downstream consumers: partial
/// -panel integrals (Hardy-type cumulative operators, principal-value shells)
/// interpolate within a panel using the stored barycentric weights.
#[derive(Clone, Debug)]
pub struct Axis {
    breaks: Vec<f64>,
    per_panel: usize,
    nodes: Vec<f64>,
    base_weights: Vec<f64>,
    /// Barycentric weights of the reference nodes on [−1, 1].
    ref_bary: Vec<f64>,
    /// Reference Gauss–Legendre nodes/weights on [−1, 1].
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
}

impl Axis {
    /// Axis from explicit panel breakpoints with `per_panel` GL nodes each.
    pub fn from_breakpoints(breaks: Vec<f64>, per_panel: usize) -> Result<Self> {
        if breaks.len() < 2 || per_panel < 1 {
            return Err(Error::InvalidParameter(
                "axis needs >= 2 breakpoints and >= 1 node per panel".into(),
            ));
        }
        for w in breaks.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0] && w[1].is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "axis breakpoints must be positive and strictly increasing ({} !< {})",
                    w[0], w[1]
                )));
            }
        }
        let (ref_nodes, ref_weights) = gauss_legendre(per_panel);
        let ref_bary = barycentric_weights(&ref_nodes);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * per_panel);
        let mut base_weights = Vec::with_capacity(nodes.capacity());
        for w in breaks.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let h = 0.5 * (w[1] - w[0]);
            for (&x, &wt) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(c + h * x);
                base_weights.push(h * wt);
            }
        }
        Ok(Axis {
            breaks,
            per_panel,
            nodes,
            base_weights,
            ref_bary,
            ref_nodes,
            ref_weights,
        })
    }

    /// Uniform panels on [a, b].
    pub fn uniform(a: f64, b: f64, panels: usize, per_panel: usize) -> Result<Self> {
        if panels < 1 {
            return Err(Error::InvalidParameter("need >= 1 panel".into()));
        }
        let breaks = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Axis::from_breakpoints(breaks, per_panel)
    }

    /// Default layout for kernels mixing a power-law weight near the origin
    /// with oscillation of frequency up to `b`: geometric (ratio ≤ 2) panels
    /// from `a` up to ~1, then uniform panels sized so a unit-speed phase
    /// `b·Δx` stays below ~24 radians per panel (comfortably resolved by the
    /// per-panel Gauss rule for per_panel ≥ 16).
    pub fn geometric_uniform(a: f64, b: f64, per_panel: usize) -> Result<Self> {
        if !(a > 0.0 && b > a) {
            return Err(Error::InvalidParameter(format!("bad axis bounds [{a}, {b}]")));
        }
        let mut breaks = vec![a];
        let join = 1.0f64.min(b);
        let mut x = a;
        while x * 2.0 < join {
            x *= 2.0;
            breaks.push(x);
        }
        if join > *breaks.last().unwrap() {
            breaks.push(join);
        }
        if b > join {
            // a GL-n panel resolves ~n radians of phase across its width
            // with margin at 1.4·n
            let phase_budget = 1.4 * per_panel as f64;
            let width = (phase_budget / b).min(b - join);
            let panels = (((b - join) / width).ceil() as usize).max(1);
            for i in 1..=panels {
                breaks.push(join + (b - join) * i as f64 / panels as f64);
            }
        }
        Axis::from_breakpoints(breaks, per_panel)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn base_weights(&self) -> &[f64] {
        &self.base_weights
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn per_panel(&self) -> usize {
        self.per_panel
    }

    pub fn panel_count(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn lower(&self) -> f64 {
        self.breaks[0]
    }

    pub fn upper(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// Index of the panel containing `x` (clamped to the boundary panels).
    pub fn panel_of(&self, x: f64) -> usize {
        match self
            .breaks
            .binary_search_by(|probe| probe.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.panel_count() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.panel_count() - 1),
        }
    }

    /// Evaluate the degree-(per_panel−1) interpolant of per-node values
    /// belonging to panel `p` at the point `x` inside that panel.
    pub fn interp_in_panel(&self, p: usize, values: &[Complex64], x: f64) -> Complex64 {
        let a = self.breaks[p];
        let b = self.breaks[p + 1];
        let t = 2.0 * (x - a) / (b - a) - 1.0; // map to reference coordinates
        let lo = p * self.per_panel;
        let vals = &values[lo..lo + self.per_panel];
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for i in 0..self.per_panel {
            let d = t - self.ref_nodes[i];
            if d == 0.0 {
                return vals[i];
            }
            let q = self.ref_bary[i] / d;
            num += vals[i] * q;
            den += q;
        }
        num / den
    }

    /// ∫_a^b w(x)·interp(values)(x) dx over an interval inside panel `p`,
    /// integrating the panel interpolant against an explicit factor `w`.
    pub fn integrate_partial_panel<W: Fn(f64) -> f64>(
        &self,
        p: usize,
        values: &[Complex64],
        a: f64,
        b: f64,
        w: W,
    ) -> Complex64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let terms: Vec<Complex64> = self
            .ref_nodes
            .iter()
            .zip(&self.ref_weights)
            .map(|(&t, &wt)| {
                let x = c + h * t;
                self.interp_in_panel(p, values, x) * (w(x) * wt * h)
            })
            .collect();
        pairwise_sum_complex(&terms)
    }
}

/// Tensor-product quadrature grid on ∏(a_j, b_j) ⊂ (0,∞)^n carrying the
/// measure ∏ x_j^{2λ_j} dx.
#[derive(Clone, Debug)]
pub struct WeightedGrid {
    axes: Vec<Axis>,
    order: Order,
    /// Per-axis weights with the measure factor baked in: base_w · x^{2λ}.
    measure_weights: Vec<Vec<f64>>,
}

impl WeightedGrid {
    pub fn new(axes: Vec<Axis>, order: Order) -> Result<Arc<Self>> {
        Self::build(axes, order, false)
    }

    /// Grid whose quadrature also accounts for the origin strip (0, a_j) on
    /// each axis: the weight x^{2λ} keeps non-negligible mass below any
    /// feasible lower bound when λ < 0, so ∫_0^{a} is evaluated by a Gauss
    /// rule under the substitution u = y^{2λ+1} and charged to the first
    /// panel's nodes through polynomial extrapolation. Integrals on such a
    /// grid approximate ∫ over ∏(0, b_j), not over the node bounding box.
    pub fn new_with_origin(axes: Vec<Axis>, order: Order) -> Result<Arc<Self>> {
        Self::build(axes, order, true)
    }

    fn build(axes: Vec<Axis>, order: Order, origin: bool) -> Result<Arc<Self>> {
        if axes.len() != order.dim() {
            return Err(Error::GridMismatch(format!(
                "{} axes but order dimension {}",
                axes.len(),
                order.dim()
            )));
        }
        let mut measure_weights: Vec<Vec<f64>> = axes
            .iter()
            .zip(order.lambdas())
            .map(|(ax, &l)| {
                ax.nodes
                    .iter()
                    .zip(&ax.base_weights)
                    .map(|(&x, &w)| w * x.powf(2.0 * l))
                    .collect()
            })
            .collect();
        if origin {
            for (j, ax) in axes.iter().enumerate() {
                let l = order.lambda(j);
                let extra = origin_strip_weights(ax, l);
                for (i, e) in extra.into_iter().enumerate() {
                    measure_weights[j][i] += e;
                }
            }
        }
        Ok(Arc::new(WeightedGrid {
            axes,
            order,
            measure_weights,
        }))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn axis(&self, j: usize) -> &Axis {
        &self.axes[j]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    /// Measure weight (quadrature weight × ∏ x^{2λ}) of a flat node index.
    pub fn measure_weight(&self, flat: usize) -> f64 {
        let mut rem = flat;
        let mut w = 1.0;
        for j in (0..self.dim()).rev() {
            let n = self.axes[j].len();
            w *= self.measure_weights[j][rem % n];
            rem /= n;
        }
        w
    }

    /// Per-axis measure weights (quadrature weight × x^{2λ}).
    pub fn axis_measure_weights(&self, j: usize) -> &[f64] {
        &self.measure_weights[j]
    }

    /// Coordinates of a flat node index.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut rem = flat;
        let mut x = vec![0.0; self.dim()];
        for j in (0..self.dim()).rev() {
            let n = self.axes[j].len();
            x[j] = self.axes[j].nodes[rem % n];
            rem /= n;
        }
        x
    }
}

/// Quadrature weights charging ∫_0^{a} f(y) y^{2λ} dy to the first panel's
/// nodes. Substituting u = y^{2λ+1} removes the weight singularity; the
/// smooth factor f is represented by extrapolating the panel-0 interpolant
/// (the strip is at most one panel wide, so extrapolation is mild).
fn origin_strip_weights(ax: &Axis, lambda: f64) -> Vec<f64> {
    let a = ax.lower();
    let s = 2.0 * lambda + 1.0;
    let cap = a.powf(s);
    let (u_nodes, u_weights) = gauss_legendre(16);
    // Extrapolate with a low-degree basis on the nodes nearest the left
    // edge: the full panel interpolant has a Lebesgue function ~1e8 one
    // panel-width outside its panel and would amplify roundoff there, while
    // a cubic over a strip of width ≤ a is both stable and ~a⁴-accurate.
    let k = ax.per_panel().min(4);
    let cluster = &ax.nodes[..k];
    let bw = barycentric_weights(cluster);
    let mut extra = vec![0.0; k];
    for (&uq, &wq) in u_nodes.iter().zip(&u_weights) {
        // map reference rule to [0, cap]
        let u = 0.5 * cap * (uq + 1.0);
        let w = 0.5 * cap * wq / s;
        let y = u.powf(1.0 / s);
        let mut den = 0.0;
        let mut q = vec![0.0; k];
        for i in 0..k {
            q[i] = bw[i] / (y - cluster[i]);
            den += q[i];
        }
        for i in 0..k {
            extra[i] += w * q[i] / den;
        }
    }
    extra
}

/// Row-major flat index iteration (last axis fastest).
pub fn for_each_index<F: FnMut(&[usize], usize)>(shape: &[usize], mut f: F) {
    let total: usize = shape.iter().product();
    if total == 0 {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        f(&idx, flat);
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
}

/// A complex-valued function sampled on every tensor node of a grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<WeightedGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn from_values(grid: Arc<WeightedGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Input("non-finite sample value".into()));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(grid: Arc<WeightedGrid>, mut f: F) -> Result<Self> {
        let shape = grid.shape();
        let mut values = Vec::with_capacity(grid.node_count());
        let mut coords = vec![0.0; grid.dim()];
        for_each_index(&shape, |idx, _| {
            for (j, &i) in idx.iter().enumerate() {
                coords[j] = grid.axis(j).nodes()[i];
            }
            values.push(f(&coords));
        });
        GridFunction::from_values(grid, values)
    }

    pub fn zeros(grid: Arc<WeightedGrid>) -> Self {
        let n = grid.node_count();
        GridFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.norm(), 0.0))
                .collect(),
        }
    }

    /// self + c·other (grids must be identical objects).
    pub fn axpy(&self, c: Complex64, other: &GridFunction) -> Result<GridFunction> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::GridMismatch("axpy across different grids".into()));
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// ∫ f dm^{(n)} by the tensor quadrature rule.
pub fn integrate(f: &GridFunction) -> Complex64 {
    let grid = f.grid();
    let terms: Vec<Complex64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * grid.measure_weight(i))
        .collect();
    pairwise_sum_complex(&terms)
}

/// (∫ |f|^p dm)^{1/p}; `p = f64::INFINITY` gives the max over nodes.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(f
            .values()
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let grid = f.grid();
    let terms: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v.norm().powf(p) * grid.measure_weight(i))
        .collect();
    Ok(pairwise_sum(&terms).powf(1.0 / p))
}

/// ‖f − g‖₂ / ‖f‖₂ (L² relative difference; absolute difference if f ≡ 0).
pub fn l2_relative_error(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let diff = f.axpy(Complex64::new(-1.0, 0.0), g)?;
    let nf = lp_norm(f, 2.0)?;
    let nd = lp_norm(&diff, 2.0)?;
    Ok(if nf == 0.0 { nd } else { nd / nf })
}

/// For each γ: (γ, γ·m{|f| > γ}), superlevel measures by weight summation.
pub fn weak_l1_profile(f: &GridFunction, gammas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("empty gamma list".into()));
    }
    let grid = f.grid();
    let mags: Vec<(f64, f64)> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.norm(), grid.measure_weight(i)))
        .collect();
    let mut out = Vec::with_capacity(gammas.len());
    for &g in gammas {
        if !(g > 0.0) {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
        let terms: Vec<f64> = mags
            .iter()
            .map(|&(m, w)| if m > g { w } else { 0.0 })
            .collect();
        out.push((g, g * pairwise_sum(&terms)));
    }
    Ok(out)
}

/// The dyadic cube Q_j = ∏ [2^{j_i}, 2^{j_i+1}).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    pub j: Vec<i32>,
}

impl DyadicCube {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.j.len() == x.len()
            && self
                .j
                .iter()
                .zip(x)
                .all(|(&ji, &xi)| xi >= 2f64.powi(ji) && xi < 2f64.powi(ji + 1))
    }

    /// Membership in the enlarged cube Q̃_j = ∏ [2^{j_i−1}, 2^{j_i+2}).
    pub fn enlarged_contains(&self, x: &[f64]) -> bool {
        self.j.len() == x.len()
            && self
                .j
                .iter()
                .zip(x)
                .all(|(&ji, &xi)| xi >= 2f64.powi(ji - 1) && xi < 2f64.powi(ji + 2))
    }
}

/// The dyadic cube containing x.
pub fn cube_of(x: &[f64]) -> Result<DyadicCube> {
    let mut j = Vec::with_capacity(x.len());
    for &xi in x {
        if !(xi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dyadic cubes live in (0,∞)^n, got coordinate {xi}"
            )));
        }
        j.push(xi.log2().floor() as i32);
    }
    Ok(DyadicCube { j })
}

/// m^{(n)}(Q_j) = ∏ (2^{(j_i+1)(2λ_i+1)} − 2^{j_i(2λ_i+1)})/(2λ_i+1).
pub fn cube_measure(c: &DyadicCube, order: &Order) -> Result<f64> {
    if c.j.len() != order.dim() {
        return Err(Error::GridMismatch("cube/order dimension mismatch".into()));
    }
    let mut m = 1.0;
    for (&ji, &l) in c.j.iter().zip(order.lambdas()) {
        let e = 2.0 * l + 1.0;
        m *= (2f64.powf((ji + 1) as f64 * e) - 2f64.powf(ji as f64 * e)) / e;
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// CSV import/export
// ---------------------------------------------------------------------------

/// Write f as CSV with columns x_1,…,x_n,re,im (17 significant digits).
pub fn export_csv<W: Write>(f: &GridFunction, mut out: W) -> std::io::Result<()> {
    let grid = f.grid();
    let n = grid.dim();
    let mut header = (1..=n).map(|j| format!("x_{j}")).collect::<Vec<_>>();
    header.push("re".into());
    header.push("im".into());
    writeln!(out, "{}", header.join(","))?;
    let shape = grid.shape();
    let mut rows = Vec::with_capacity(grid.node_count());
    for_each_index(&shape, |idx, flat| {
        let mut cols: Vec<String> = idx
            .iter()
            .enumerate()
            .map(|(j, &i)| format!("{:.16e}", grid.axis(j).nodes()[i]))
            .collect();
        let v = f.values()[flat];
        cols.push(format!("{:.16e}", v.re));
        cols.push(format!("{:.16e}", v.im));
        rows.push(cols.join(","));
    });
    for r in rows {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

/// Read a GridFunction from CSV written by [`export_csv`]; coordinates must
/// match the grid nodes (relative tolerance 1e−12) in row order.
pub fn import_csv<R: BufRead>(grid: Arc<WeightedGrid>, input: R) -> Result<GridFunction> {
    let n = grid.dim();
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Input("empty CSV".into()))?
        .map_err(|e| Error::Input(e.to_string()))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() != n + 2 {
        return Err(Error::Input(format!(
            "expected {} columns, found {}",
            n + 2,
            cols.len()
        )));
    }
    let mut values = Vec::with_capacity(grid.node_count());
    let shape = grid.shape();
    let mut expected_nodes = Vec::with_capacity(grid.node_count());
    for_each_index(&shape, |idx, _| {
        let coords: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(j, &i)| grid.axis(j).nodes()[i])
            .collect();
        expected_nodes.push(coords);
    });
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Input(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .trim()
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("row {}: {e}", row + 2)))
            })
            .collect::<Result<_>>()?;
        if fields.len() != n + 2 {
            return Err(Error::Input(format!("row {}: wrong column count", row + 2)));
        }
        if row >= expected_nodes.len() {
            return Err(Error::Input("more rows than grid nodes".into()));
        }
        for (j, (&got, &want)) in fields[..n].iter().zip(&expected_nodes[row]).enumerate() {
            if (got - want).abs() > 1e-12 * want.abs().max(1.0) {
                return Err(Error::Input(format!(
                    "row {}: x_{} = {} does not match grid node {}",
                    row + 2,
                    j + 1,
                    got,
                    want
                )));
            }
        }
        values.push(Complex64::new(fields[n], fields[n + 1]));
    }
    GridFunction::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d(a: f64, b: f64, lambda: f64, panels: usize, per_panel: usize) -> Arc<WeightedGrid> {
        let axis = Axis::uniform(a, b, panels, per_panel).unwrap();
        WeightedGrid::new(vec![axis], Order::new(vec![lambda]).unwrap()).unwrap()
    }

    fn ones(grid: &Arc<WeightedGrid>) -> GridFunction {
        GridFunction::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn weighted_box_identity_1d() {
        // ∫_0^1 x² dx = 1/3 with λ = 1 (lower bound pushed to ~0)
        let g = grid_1d(1e-12, 1.0, 1.0, 8, 8);
        let v = integrate(&ones(&g));
        assert!((v.re - 1.0 / 3.0).abs() < 1e-10 && v.im == 0.0);
    }

    #[test]
    fn weighted_box_identity_2d() {
        let (a, b) = (1.3, 0.7);
        let ax = Axis::uniform(1e-12, a, 6, 8).unwrap();
        let ay = Axis::uniform(1e-12, b, 6, 8).unwrap();
        let g = WeightedGrid::new(vec![ax, ay], Order::new(vec![0.5, 1.0]).unwrap()).unwrap();
        let v = integrate(&ones(&g)).re;
        let expect = (a * a / 2.0) * (b * b * b / 3.0);
        assert!((v - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn gaussian_weighted_integral() {
        // ∫_0^∞ x e^{−x²} dx = 1/2, λ = 1/2, truncated at 12
        let axis = Axis::geometric_uniform(1e-8, 12.0, 16).unwrap();
        let g = WeightedGrid::new(vec![axis], Order::new(vec![0.5]).unwrap()).unwrap();
        let f = GridFunction::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        assert!((integrate(&f).re - 0.5).abs() < 1e-10);
    }

    #[test]
    fn lp_norm_cases() {
        let g = grid_1d(1e-10, 1.0, 1.0, 8, 8);
        let zero = GridFunction::zeros(g.clone());
        assert_eq!(lp_norm(&zero, 2.0).unwrap(), 0.0);
        let c = GridFunction::from_fn(g.clone(), |_| Complex64::new(-3.0, 4.0)).unwrap();
        // |c| · m(box)^{1/p}
        let m = integrate(&ones(&g)).re;
        assert!((lp_norm(&c, 2.0).unwrap() - 5.0 * m.sqrt()).abs() < 1e-12);
        assert!((lp_norm(&c, f64::INFINITY).unwrap() - 5.0).abs() < 1e-14);
        // Gaussian second moment: ∫_0^∞ e^{−2x²} x^{2λ} dx = Γ(λ+1/2)/(2·2^{λ+1/2})
        let axis = Axis::geometric_uniform(1e-8, 12.0, 16).unwrap();
        let gg = WeightedGrid::new(vec![axis], Order::new(vec![0.7]).unwrap()).unwrap();
        let f = GridFunction::from_fn(gg, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let lam = 0.7f64;
        let expect = (crate::specfun::gamma(lam + 0.5) / (2.0 * 2f64.powf(lam + 0.5))).sqrt();
        assert!((lp_norm(&f, 2.0).unwrap() - expect).abs() < 1e-8);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn weak_profile_indicator() {
        let g = grid_1d(1e-10, 2.0, 0.0, 16, 8);
        // E = (0, 1]: panel boundary at 1 keeps the indicator panel-constant
        let f = GridFunction::from_fn(g, |x| {
            Complex64::new(if x[0] <= 1.0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let prof = weak_l1_profile(&f, &[0.5, 2.0]).unwrap();
        assert!((prof[0].1 - 0.5).abs() < 1e-10); // 0.5 · m((0,1])
        assert_eq!(prof[1].1, 0.0);
        assert!(weak_l1_profile(&f, &[]).is_err());
    }

    #[test]
    fn weak_profile_one_over_x() {
        // f = 1/x on (0,1], λ=0: γ·m{1/x>γ} = γ·min(1, 1/γ) − γ·a
        let a = 1e-6;
        let g = grid_1d(a, 1.0, 0.0, 64, 8);
        let f = GridFunction::from_fn(g, |x| Complex64::new(1.0 / x[0], 0.0)).unwrap();
        let gammas = [0.5, 1.0, 4.0, 64.0];
        for (gamma, val) in weak_l1_profile(&f, &gammas).unwrap() {
            let expect = gamma * ((1.0f64).min(1.0 / gamma) - a);
            assert!(
                (val - expect).abs() < 0.02 * expect.abs().max(0.02),
                "gamma={gamma}: {val} vs {expect}"
            );
        }
    }

    #[test]
    fn weak_profile_monotone_measure() {
        let g = grid_1d(1e-6, 4.0, 0.3, 32, 8);
        let f = GridFunction::from_fn(g, |x| Complex64::new((5.0 * x[0]).sin() / x[0], 0.0)).unwrap();
        let gammas: Vec<f64> = (1..40).map(|i| 0.1 * i as f64).collect();
        let prof = weak_l1_profile(&f, &gammas).unwrap();
        for w in prof.windows(2) {
            let m0 = w[0].1 / w[0].0;
            let m1 = w[1].1 / w[1].0;
            assert!(m1 <= m0 + 1e-15);
        }
    }

    #[test]
    fn dyadic_cube_basics() {
        assert_eq!(cube_of(&[1.5]).unwrap().j, vec![0]);
        assert_eq!(cube_of(&[0.3, 5.0]).unwrap().j, vec![-2, 2]);
        let c = DyadicCube { j: vec![0] };
        let m = cube_measure(&c, &Order::new(vec![0.0]).unwrap()).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
        assert!(cube_of(&[-1.0]).is_err());
        // containment in own cube and enlargement
        assert!(c.contains(&[1.5]) && c.enlarged_contains(&[0.6]) && !c.contains(&[2.0]));
    }

    #[test]
    fn quadrature_convergence_order() {
        // GL-2 panels: 4th-order; halving spacing must shrink the error
        // by a factor ≥ 2^3.5
        let f = |x: f64| (1.0 + x).ln() * (-x).exp();
        let exact = {
            let fine = Axis::uniform(0.5, 3.0, 4096, 8).unwrap();
            let g = WeightedGrid::new(vec![fine], Order::new(vec![0.0]).unwrap()).unwrap();
            integrate(&GridFunction::from_fn(g, |x| Complex64::new(f(x[0]), 0.0)).unwrap()).re
        };
        let err_at = |panels: usize| {
            let ax = Axis::uniform(0.5, 3.0, panels, 2).unwrap();
            let g = WeightedGrid::new(vec![ax], Order::new(vec![0.0]).unwrap()).unwrap();
            (integrate(&GridFunction::from_fn(g, |x| Complex64::new(f(x[0]), 0.0)).unwrap()).re
                - exact)
                .abs()
        };
        let e1 = err_at(8);
        let e2 = err_at(16);
        assert!(e1 / e2 >= 2f64.powf(3.5), "ratio {}", e1 / e2);
    }

    #[test]
    fn csv_roundtrip_identical() {
        let g = grid_1d(0.1, 2.0, 0.4, 3, 4);
        let f = GridFunction::from_fn(g.clone(), |x| Complex64::new(x[0].sin(), x[0].cos())).unwrap();
        let mut buf = Vec::new();
        export_csv(&f, &mut buf).unwrap();
        let back = import_csv(g, std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.values(), f.values());
        let mut buf2 = Vec::new();
        export_csv(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn origin_strip_recovers_full_halfline_mass() {
        // λ = −0.4: (0, 1e−3) carries x^{−0.8} mass ≈ 1.26, far above any
        // tolerance; the origin-corrected grid must see it.
        for &(lam, lo) in &[(-0.4, 1e-3), (0.5, 1e-3), (2.3, 1e-2), (0.0, 1e-4)] {
            let ax = Axis::geometric_uniform(lo, 12.0, 16).unwrap();
            let g =
                WeightedGrid::new_with_origin(vec![ax], Order::new(vec![lam]).unwrap()).unwrap();
            let f =
                GridFunction::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
            // ∫_0^∞ e^{−x²} x^{2λ} dx = Γ(λ+1/2)/2
            let expect = crate::specfun::gamma(lam + 0.5) / 2.0;
            let got = integrate(&f).re;
            assert!(
                (got - expect).abs() < 1e-9 * expect,
                "lam={lam}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn origin_strip_constant_closed_form() {
        let ax = Axis::geometric_uniform(1e-3, 1.0, 16).unwrap();
        let g = WeightedGrid::new_with_origin(vec![ax], Order::new(vec![-0.4]).unwrap()).unwrap();
        // ∫_0^1 x^{−0.8} dx = 1/0.2 = 5
        let v = integrate(&ones(&g)).re;
        assert!((v - 5.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn order_validation() {
        assert!(Order::new(vec![]).is_err());
        assert!(Order::new(vec![-0.6]).is_err());
        assert!(Order::new(vec![-0.5]).is_err());
        assert!(Order::new(vec![-0.4, 2.0]).is_ok());
    }

    #[test]
    fn gridfunction_shape_and_finite_checks() {
        let g = grid_1d(0.1, 1.0, 0.0, 2, 2);
        assert!(GridFunction::from_values(g.clone(), vec![Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(GridFunction::from_values(
            g,
            vec![Complex64::new(f64::NAN, 0.0); 4]
        )
        .is_err());
    }
}
