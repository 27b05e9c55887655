//! Quadrature and finite-difference primitives: Gauss–Legendre rules,
//! panel-composite integration, Fornberg stencil weights, and deterministic
//! pairwise summation used by every reduction in the library.

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on [−1, 1], computed by Newton iteration
/// on the Legendre polynomial (Chebyshev initial guesses).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A reusable quadrature rule on [−1, 1] with affine mapping helpers.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    /// ∫_a^b f, single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let vals: Vec<f64> = self.mapped(a, b).map(|(x, w)| w * f(x)).collect();
        pairwise_sum(&vals)
    }

    /// ∫_a^b f for complex integrands, single panel.
    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Complex64 {
        let vals: Vec<Complex64> = self.mapped(a, b).map(|(x, w)| f(x) * w).collect();
        pairwise_sum_complex(&vals)
    }

    /// Composite integral over consecutive panels given by breakpoints.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        let vals: Vec<f64> = breaks
            .windows(2)
            .map(|ab| self.integrate(ab[0], ab[1], &mut f))
            .collect();
        pairwise_sum(&vals)
    }

    /// Composite complex integral over consecutive panels.
    pub fn integrate_panels_complex<F: FnMut(f64) -> Complex64>(
        &self,
        breaks: &[f64],
        mut f: F,
    ) -> Complex64 {
        let vals: Vec<Complex64> = breaks
            .windows(2)
            .map(|ab| self.integrate_complex(ab[0], ab[1], &mut f))
            .collect();
        pairwise_sum_complex(&vals)
    }
}

/// Breakpoints of a geometric (log-uniform) panel subdivision of [a, b]
/// with `per_decade` panels per decade (at least one panel).
pub fn log_breaks(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && per_decade >= 1);
    let decades = (b / a).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (b / a).powf(1.0 / n as f64);
    let mut breaks = Vec::with_capacity(n + 1);
    let mut x = a;
    for _ in 0..n {
        breaks.push(x);
        x *= ratio;
    }
    breaks.push(b);
    breaks
}

/// Deterministic pairwise summation: a fixed balanced reduction tree, so the
/// result is independent of thread count or chunking decisions upstream.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

/// Complex counterpart of [`pairwise_sum`].
pub fn pairwise_sum_complex(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum_complex(&v[..mid]) + pairwise_sum_complex(&v[mid..])
        }
    }
}

/// Fornberg weights: coefficients c_i such that Σ c_i f(x_i) approximates
/// the `m`-th derivative of f at `x0`, for arbitrary distinct nodes `x`.
pub fn fd_weights(x0: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m);
    // B. Fornberg, "Generation of finite difference formulas on arbitrarily
    // spaced grids", Math. Comp. 51 (1988).
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Barycentric weights for Lagrange interpolation on the given nodes.
pub fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] /= x[i] - x[j];
            }
        }
    }
    w
}

/// Evaluate the interpolant through (x_i, f_i) at `t` (barycentric form).
pub fn barycentric_eval(x: &[f64], w: &[f64], f: &[Complex64], t: f64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for i in 0..x.len() {
        let d = t - x[i];
        if d == 0.0 {
            return f[i];
        }
        let q = w[i] / d;
        num += f[i] * q;
        den += q;
    }
    num / den
}
