//! Laplace-transform-type multiplier symbols and the two evaluation paths of
//! the multiplier operator: the spectral path h(m·h(f)) and the
//! principal-value singular-integral path built on the time-derivative
//! kernel K(x,y) = ∫ φ(t) ∂_t ∏ W_t(x_j,y_j) dt.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{GridFunction, Order};
use crate::hankel::TransformPlan;
use crate::par::parallel_fill;
use crate::quad::{log_breaks, pairwise_sum_complex, GaussRule};
use crate::semigroup::{
    dt_euclidean_kernel, dt_heat_kernel, euclidean_kernel, heat_kernel, HeatKernelParams,
};
use crate::specfun::gamma_complex;
use num_complex::Complex64;
use std::sync::{Arc, OnceLock};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug)]
enum SymbolKind {
    Identity,
    ImaginaryPower { beta: f64 },
    Resolvent { a: f64 },
    Indicator { t_end: f64 },
    Custom { expr: Arc<Expr> },
}

/// A bounded profile φ on (0,∞) inducing the multiplier
/// m(y) = |y|² ∫_0^∞ e^{−t|y|²} φ(t) dt.
#[derive(Clone, Debug)]
pub struct LaplaceSymbol {
    kind: SymbolKind,
    sup_bound: f64,
    phi_zero_plus: Option<Complex64>,
    label: String,
}

impl LaplaceSymbol {
    /// φ ≡ 1, inducing m ≡ 1 (the identity operator).
    pub fn identity() -> LaplaceSymbol {
        LaplaceSymbol {
            kind: SymbolKind::Identity,
            sup_bound: 1.0,
            phi_zero_plus: Some(ONE),
            label: "identity".into(),
        }
    }

    /// φ_β(t) = t^{−iβ}/Γ(1−iβ), inducing m(y) = (Σ y_j²)^{iβ}.
    pub fn imaginary_power(beta: f64) -> Result<LaplaceSymbol> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        let modulus = 1.0 / gamma_complex(Complex64::new(1.0, -beta)).norm();
        Ok(LaplaceSymbol {
            kind: SymbolKind::ImaginaryPower { beta },
            sup_bound: modulus,
            // t^{−iβ} has no limit at 0⁺ unless β = 0
            phi_zero_plus: if beta == 0.0 { Some(ONE) } else { None },
            label: format!("imaginary-power:{beta}"),
        })
    }

    /// φ(t) = e^{−at}, inducing the resolvent symbol m(y) = |y|²/(|y|²+a).
    pub fn resolvent(a: f64) -> Result<LaplaceSymbol> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "resolvent shift must be positive, got {a}"
            )));
        }
        Ok(LaplaceSymbol {
            kind: SymbolKind::Resolvent { a },
            sup_bound: 1.0,
            phi_zero_plus: Some(ONE),
            label: format!("resolvent:{a}"),
        })
    }

    /// φ = χ_{[0,T]}, inducing m(y) = 1 − e^{−T|y|²}.
    pub fn indicator(t_end: f64) -> Result<LaplaceSymbol> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "indicator endpoint must be positive, got {t_end}"
            )));
        }
        Ok(LaplaceSymbol {
            kind: SymbolKind::Indicator { t_end },
            sup_bound: 1.0,
            phi_zero_plus: Some(ONE),
            label: format!("indicator:{t_end}"),
        })
    }

    /// A user-supplied real profile given as an arithmetic expression in `t`.
    pub fn custom(expr_src: &str) -> Result<LaplaceSymbol> {
        let expr = Expr::parse(expr_src)?;
        // sample a wide logarithmic range for the sup bound and finiteness
        let mut sup = 0.0f64;
        for k in 0..=512 {
            let t = 10f64.powf(-8.0 + 16.0 * k as f64 / 512.0);
            let v = expr.eval(t);
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "custom profile is not finite at t = {t:.3e}"
                )));
            }
            sup = sup.max(v.abs());
        }
        let near0 = expr.eval(1e-8);
        let phi_zero_plus = if (expr.eval(1e-6) - near0).abs() <= 1e-5 * (1.0 + near0.abs()) {
            Some(Complex64::new(near0, 0.0))
        } else {
            None
        };
        Ok(LaplaceSymbol {
            kind: SymbolKind::Custom {
                expr: Arc::new(expr),
            },
            sup_bound: sup * (1.0 + 1e-12) + 1e-300,
            phi_zero_plus,
            label: format!("custom:{expr_src}"),
        })
    }

    /// Resolve a preset name: `identity`, `imaginary-power:β`, `resolvent:a`,
    /// `indicator:T`, or `custom:expr`.
    pub fn from_preset(name: &str) -> Result<LaplaceSymbol> {
        if name == "identity" {
            return Ok(LaplaceSymbol::identity());
        }
        let parse_param = |text: &str, what: &str| -> Result<f64> {
            text.parse::<f64>()
                .map_err(|_| Error::Input(format!("invalid {what} parameter `{text}`")))
        };
        if let Some(rest) = name.strip_prefix("imaginary-power:") {
            return LaplaceSymbol::imaginary_power(parse_param(rest, "imaginary-power")?);
        }
        if let Some(rest) = name.strip_prefix("resolvent:") {
            return LaplaceSymbol::resolvent(parse_param(rest, "resolvent")?);
        }
        if let Some(rest) = name.strip_prefix("indicator:") {
            return LaplaceSymbol::indicator(parse_param(rest, "indicator")?);
        }
        if let Some(rest) = name.strip_prefix("custom:") {
            return LaplaceSymbol::custom(rest);
        }
        Err(Error::Input(format!("unknown symbol preset `{name}`")))
    }

    /// Names of the built-in presets (parameterized ones shown schematically).
    pub fn preset_names() -> &'static [&'static str] {
        &[
            "identity",
            "imaginary-power:<beta>",
            "resolvent:<a>",
            "indicator:<T>",
            "custom:<expr in t>",
        ]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn phi_zero_plus(&self) -> Option<Complex64> {
        self.phi_zero_plus
    }

    /// Evaluate the profile φ(t).
    pub fn phi(&self, t: f64) -> Complex64 {
        match &self.kind {
            SymbolKind::Identity => ONE,
            SymbolKind::ImaginaryPower { beta } => {
                // t^{−iβ}/Γ(1−iβ) = e^{−iβ ln t}/Γ(1−iβ)
                let arg = -beta * t.ln();
                Complex64::new(arg.cos(), arg.sin())
                    / gamma_complex(Complex64::new(1.0, -beta))
            }
            SymbolKind::Resolvent { a } => Complex64::new((-a * t).exp(), 0.0),
            SymbolKind::Indicator { t_end } => {
                if t <= *t_end {
                    ONE
                } else {
                    ZERO
                }
            }
            SymbolKind::Custom { expr } => Complex64::new(expr.eval(t), 0.0),
        }
    }

    /// m(y) as a function of ρ = |y|² = Σ y_j², by analytic shortcut for the
    /// closed-form presets and by quadrature for custom profiles.
    pub fn symbol_m(&self, rho: f64) -> Result<Complex64> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squared frequency must be positive, got {rho}"
            )));
        }
        match &self.kind {
            SymbolKind::Identity => Ok(ONE),
            SymbolKind::ImaginaryPower { beta } => {
                // ρ^{iβ}; the Γ factor of φ_β cancels the Laplace transform
                let arg = beta * rho.ln();
                Ok(Complex64::new(arg.cos(), arg.sin()))
            }
            SymbolKind::Resolvent { a } => Ok(Complex64::new(rho / (rho + a), 0.0)),
            SymbolKind::Indicator { t_end } => {
                Ok(Complex64::new(1.0 - (-t_end * rho).exp(), 0.0))
            }
            SymbolKind::Custom { .. } => {
                let coarse = self.symbol_m_quadrature(rho, 3)?;
                let fine = self.symbol_m_quadrature(rho, 5)?;
                if (fine - coarse).norm() > 1e-6 * (1.0 + fine.norm()) {
                    return Err(Error::NonConvergent(format!(
                        "symbol quadrature for `{}` did not converge at rho = {rho}",
                        self.label
                    )));
                }
                Ok(fine)
            }
        }
    }

    /// The defining quadrature m(ρ) = ∫_0^∞ e^{−u} φ(u/ρ) du (u = tρ),
    /// exposed for cross-checking the analytic shortcuts.
    pub fn symbol_m_quadrature(&self, rho: f64, per_decade: usize) -> Result<Complex64> {
        let rule = GaussRule::new(16);
        let breaks = log_breaks(1e-10, 46.0, per_decade);
        let m = rule.integrate_panels_complex(&breaks, |u| self.phi(u / rho) * (-u).exp());
        if !m.re.is_finite() || !m.im.is_finite() {
            return Err(Error::NonConvergent(
                "symbol quadrature produced a non-finite value".into(),
            ));
        }
        Ok(m)
    }

    /// Tail ∫_T^∞ φ(t) P'(t) dt of a time-derivative kernel integral, given
    /// P(T), assuming P(t) ≈ P(T)(T/t)^s beyond T (valid once T dominates
    /// every regime scale of the kernel).
    fn kernel_tail(&self, t_hi: f64, p_hi: f64, s: f64) -> Complex64 {
        match &self.kind {
            // ∫_T^∞ P' dt = −P(T) exactly
            SymbolKind::Identity => Complex64::new(-p_hi, 0.0),
            // t_hi is chosen so e^{−a t_hi} has underflowed
            SymbolKind::Resolvent { .. } => ZERO,
            // integration never extends past t_end
            SymbolKind::Indicator { .. } => ZERO,
            // integration by parts with P ≈ P(T)(T/t)^s gives
            // −P(T) T^{−iβ} / Γ(1−iβ) · s/(s+iβ)
            SymbolKind::ImaginaryPower { beta } => {
                let arg = -beta * t_hi.ln();
                let t_pow = Complex64::new(arg.cos(), arg.sin());
                -p_hi * t_pow / gamma_complex(Complex64::new(1.0, -beta))
                    * (s / Complex64::new(s, *beta))
            }
            // −s P(T) ∫_0^∞ φ(T e^v) e^{−sv} dv  (v = ln t/T)
            SymbolKind::Custom { expr } => {
                let rule = GaussRule::new(8);
                let v_top = 46.0 / s.max(0.05);
                let panels = ((v_top / 0.5).ceil() as usize).max(1);
                let breaks: Vec<f64> = (0..=panels)
                    .map(|i| v_top * i as f64 / panels as f64)
                    .collect();
                let integral =
                    rule.integrate_panels(&breaks, |v| expr.eval(t_hi * v.exp()) * (-s * v).exp());
                Complex64::new(-s * p_hi * integral, 0.0)
            }
        }
    }

    /// Upper time limit for kernel quadrature, given the largest regime
    /// scale of the integrand and a refinement level.
    fn kernel_t_hi(&self, t_scale: f64, refine: usize) -> f64 {
        let stretch = 100f64.powi(refine as i32);
        match &self.kind {
            SymbolKind::Resolvent { a } => (t_scale * 100.0).max(50.0 / a) * stretch,
            _ => t_scale * 1e6 * stretch,
        }
    }

    fn indicator_end(&self) -> Option<f64> {
        match &self.kind {
            SymbolKind::Indicator { t_end } => Some(*t_end),
            _ => None,
        }
    }
}

fn rule64() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(64))
}

/// Shared time-quadrature scheme for ∫_0^∞ φ(t) P'(t) dt where P is a heat
/// kernel product decaying like t^{−s}: log-uniform panels between the
/// regime-boundary splits, 64 nodes per panel, plus the profile's tail rule.
fn kernel_time_integral(
    sym: &LaplaceSymbol,
    d2: f64,
    mut extra_splits: Vec<f64>,
    s: f64,
    p: &dyn Fn(f64) -> Result<f64>,
    dp: &dyn Fn(f64) -> Result<f64>,
    refine: usize,
) -> Result<Complex64> {
    let t_lo = d2 / 200.0;
    let mut t_scale: f64 = 1.0f64.max(d2);
    for &sp in &extra_splits {
        t_scale = t_scale.max(sp);
    }
    let mut t_hi = sym.kernel_t_hi(t_scale, refine);
    let mut tail = true;
    if let Some(t_end) = sym.indicator_end() {
        if t_end <= t_lo {
            // the whole profile lives below the Gaussian cutoff:
            // ∫_0^{t_end} P' dt = P(t_end) − P(0⁺) = P(t_end)
            return Ok(Complex64::new(p(t_end)?, 0.0));
        }
        if t_end < t_hi {
            t_hi = t_end;
            tail = false;
        }
    }
    // panel anchors: the regime boundaries inside (t_lo, t_hi)
    extra_splits.push(d2 / 16.0);
    extra_splits.push(d2);
    extra_splits.push(1.0);
    extra_splits.retain(|&sp| sp > t_lo * 1.0000001 && sp < t_hi * 0.9999999);
    extra_splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
    extra_splits.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let per_decade = 1 + 2 * refine;
    let mut breaks = vec![t_lo];
    let mut lo = t_lo;
    for anchor in extra_splits.into_iter().chain(std::iter::once(t_hi)) {
        let decades = (anchor / lo).log10();
        let panels = (decades * per_decade as f64).ceil().max(1.0) as usize;
        let ratio = (anchor / lo).powf(1.0 / panels as f64);
        let mut edge = lo;
        for _ in 0..panels {
            edge *= ratio;
            breaks.push(edge);
        }
        *breaks.last_mut().unwrap() = anchor;
        lo = anchor;
    }
    let rule = rule64();
    let mut acc = Vec::with_capacity(breaks.len() - 1);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut terms = Vec::with_capacity(rule.nodes.len());
        for (&tn, &tw) in rule.nodes.iter().zip(&rule.weights) {
            let t = c + h * tn;
            terms.push(sym.phi(t) * (dp(t)? * tw * h));
        }
        acc.push(pairwise_sum_complex(&terms));
    }
    let mut total = pairwise_sum_complex(&acc);
    if tail {
        total += sym.kernel_tail(t_hi, p(t_hi)?, s);
    }
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(Error::NonConvergent(
            "kernel time quadrature produced a non-finite value".into(),
        ));
    }
    Ok(total)
}

fn diagonal_check(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::GridMismatch("point dimension mismatch".into()));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if d2 == 0.0 {
        return Err(Error::Singular(
            "kernel evaluated on the diagonal x = y".into(),
        ));
    }
    Ok(d2)
}

/// The singular kernel K(x,y) = ∫_0^∞ φ(t) ∂_t ∏_j W_t^{λ_j}(x_j,y_j) dt.
pub fn kernel_k(sym: &LaplaceSymbol, order: &Order, x: &[f64], y: &[f64]) -> Result<Complex64> {
    kernel_k_refined(sym, order, x, y, 0)
}

/// K(x,y) with a quadrature refinement level (finer panels, longer range);
/// level 1 serves as the self-convergence oracle for level 0.
pub fn kernel_k_refined(
    sym: &LaplaceSymbol,
    order: &Order,
    x: &[f64],
    y: &[f64],
    refine: usize,
) -> Result<Complex64> {
    if x.len() != order.dim() {
        return Err(Error::GridMismatch("point dimension mismatch".into()));
    }
    let d2 = diagonal_check(x, y)?;
    let s: f64 = order.lambdas().iter().map(|l| l + 0.5).sum();
    let splits: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b / 2.0).collect();
    let xv = x.to_vec();
    let yv = y.to_vec();
    let ord = order.clone();
    let p = move |t: f64| -> Result<f64> {
        heat_kernel(&HeatKernelParams::new(ord.clone(), t)?, &xv, &yv)
    };
    let ord2 = order.clone();
    let xv2 = x.to_vec();
    let yv2 = y.to_vec();
    let dp = move |t: f64| -> Result<f64> {
        dt_heat_kernel(&HeatKernelParams::new(ord2.clone(), t)?, &xv2, &yv2)
    };
    kernel_time_integral(sym, d2, splits, s, &p, &dp, refine)
}

/// The Euclidean comparison kernel
/// H(x,y) = ∫_0^∞ φ(t) ∂_t [e^{−|x−y|²/4t}/(4πt)^{n/2}] dt.
pub fn kernel_h(sym: &LaplaceSymbol, x: &[f64], y: &[f64]) -> Result<Complex64> {
    kernel_h_refined(sym, x, y, 0)
}

pub fn kernel_h_refined(
    sym: &LaplaceSymbol,
    x: &[f64],
    y: &[f64],
    refine: usize,
) -> Result<Complex64> {
    let d2 = diagonal_check(x, y)?;
    let n = x.len() as f64;
    let xv = x.to_vec();
    let yv = y.to_vec();
    let p = move |t: f64| euclidean_kernel(t, &xv, &yv);
    let xv2 = x.to_vec();
    let yv2 = y.to_vec();
    let dp = move |t: f64| dt_euclidean_kernel(t, &xv2, &yv2);
    kernel_time_integral(sym, d2, Vec::new(), n / 2.0, &p, &dp, refine)
}

/// The dimensional constant M = (2√π)^{−n} ∫_{|z̄|<1} √(1−|z̄|²) dz̄ of the
/// boundary function (the z̄-integral runs over the unit ball of ℝ^{n−1}).
pub fn m_constant(n: usize) -> Result<f64> {
    let pi = std::f64::consts::PI;
    match n {
        0 => Err(Error::InvalidParameter("dimension must be positive".into())),
        1 => Ok(0.5 / pi.sqrt()),
        2 => Ok(0.125),
        _ => {
            // ball integral = S_{n−2} ∫_0^{π/2} cos²θ sin^{n−2}θ dθ
            let k = n - 1; // ambient dimension of z̄
            let sphere = 2.0 * pi.powf(k as f64 / 2.0) / crate::specfun::gamma(k as f64 / 2.0);
            let rule = GaussRule::new(32);
            let radial =
                rule.integrate(0.0, pi / 2.0, |th| th.cos().powi(2) * th.sin().powi(n as i32 - 2));
            Ok(sphere * radial / (2.0 * pi.sqrt()).powi(n as i32))
        }
    }
}

/// The boundary function in reduced radial form:
/// α(ε) = −M ∫_0^{1/ε²} φ(sε²) e^{−1/4s} s^{−n/2−1} ds.
pub fn alpha_epsilon(sym: &LaplaceSymbol, n: usize, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let m = m_constant(n)?;
    let s_top = 1.0 / (eps * eps);
    let s_lo = (1.0f64 / 184.0).min(s_top / 10.0); // e^{−1/4s} < 1e−20 below
    let rule = GaussRule::new(16);
    let breaks = log_breaks(s_lo, s_top, 3);
    let integral = rule.integrate_panels_complex(&breaks, |s| {
        sym.phi(s * eps * eps) * ((-0.25 / s).exp() * s.powf(-(n as f64) / 2.0 - 1.0))
    });
    Ok(-m * integral)
}

/// The positive constant C with T^m f = Cφ(0⁺)f − lim ∫_{|y−x|>ε} f K dm:
/// C = −n·lim_{ε→0} α(ε)/φ(0⁺) = n · M · ∫_0^∞ e^{−1/4s} s^{−n/2−1} ds.
/// Analytic (exactly 1) for n = 1, 2; quadrature otherwise.
pub fn normalization_c(sym: &LaplaceSymbol, n: usize) -> Result<f64> {
    if sym.phi_zero_plus().is_none() {
        return Err(Error::InvalidParameter(format!(
            "symbol `{}` has no right limit at 0; the normalization constant is undefined",
            sym.label()
        )));
    }
    match n {
        0 => Err(Error::InvalidParameter("dimension must be positive".into())),
        1 | 2 => Ok(1.0),
        _ => {
            let m = m_constant(n)?;
            let rule = GaussRule::new(16);
            let breaks = log_breaks(1.0 / 200.0, 1e8, 3);
            let gamma_integral =
                rule.integrate_panels(&breaks, |s| (-0.25 / s).exp() * s.powf(-(n as f64) / 2.0 - 1.0));
            Ok(n as f64 * m * gamma_integral)
        }
    }
}

/// Spectral path: T^m f = h(m · h(f)).
pub fn spectral_apply(
    sym: &LaplaceSymbol,
    plan: &TransformPlan,
    f: &GridFunction,
) -> Result<GridFunction> {
    let hf = plan.apply(f)?;
    let grid = f.grid().clone();
    let mut vals = hf.values().to_vec();
    for (i, v) in vals.iter_mut().enumerate() {
        let rho: f64 = grid.node(i).iter().map(|c| c * c).sum();
        *v *= sym.symbol_m(rho)?;
    }
    plan.apply(&GridFunction::from_values(grid, vals)?)
}

/// Truncation schedule and extrapolation policy for the principal-value path.
#[derive(Clone, Debug)]
pub struct PVConfig {
    epsilons: Vec<f64>,
    richardson: bool,
    refine: usize,
}

impl PVConfig {
    pub fn new(epsilons: Vec<f64>, richardson: bool) -> Result<PVConfig> {
        if epsilons.len() < 2 {
            return Err(Error::InvalidParameter(
                "epsilon schedule needs at least 2 entries".into(),
            ));
        }
        for w in epsilons.windows(2) {
            if !(w[1] < w[0]) || !(w[1] > 0.0) {
                return Err(Error::InvalidParameter(
                    "epsilon schedule must be strictly decreasing and positive".into(),
                ));
            }
        }
        Ok(PVConfig {
            epsilons,
            richardson,
            refine: 0,
        })
    }

    /// Dyadic default: ε_k = 0.5·2^{−k}, k = 1..12.
    pub fn dyadic(entries: usize) -> Result<PVConfig> {
        PVConfig::new(
            (1..=entries).map(|k| 0.5 * 0.5f64.powi(k as i32)).collect(),
            true,
        )
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn with_refine(mut self, refine: usize) -> PVConfig {
        self.refine = refine;
        self
    }
}

impl Default for PVConfig {
    fn default() -> Self {
        PVConfig::dyadic(12).unwrap()
    }
}

/// Result of the principal-value path with per-ε convergence diagnostics.
#[derive(Clone, Debug)]
pub struct PVResult {
    /// The extrapolated (or final-ε) operator values.
    pub values: GridFunction,
    /// The truncation schedule actually used.
    pub epsilons: Vec<f64>,
    /// L² norms of the per-ε combined truncations v_ε = α(ε)f + I_ε.
    pub truncation_l2: Vec<f64>,
    /// L² increments ‖v_{ε_{k+1}} − v_{ε_k}‖₂ between consecutive entries.
    pub increment_l2: Vec<f64>,
}

/// Principal-value path:
/// T^m f(x) = −lim_{ε→0} ( n·α(ε) f(x) + ∫_{|y−x|>ε} f K dm ).
///
/// For n = 1 the truncated integrals use fresh panel quadrature with edges at
/// every x ± ε_k (the grid function is evaluated through its panel
/// interpolant); for n ≥ 2 they are discrete node sums excluding the ε-ball.
pub fn pv_apply(sym: &LaplaceSymbol, f: &GridFunction, cfg: &PVConfig) -> Result<PVResult> {
    let grid = f.grid().clone();
    let n = grid.dim();
    let order = grid.order().clone();
    let alphas: Vec<Complex64> = cfg
        .epsilons
        .iter()
        .map(|&e| alpha_epsilon(sym, n, e).map(|a| a * n as f64))
        .collect::<Result<_>>()?;
    let ne = cfg.epsilons.len();
    let nodes_total = grid.node_count();
    // per-node truncation sequences v_k(x), outer index = node
    let mut rows: Vec<Result<Vec<Complex64>>> = Vec::new();
    rows.resize_with(nodes_total, || Ok(Vec::new()));
    if n == 1 {
        let axis = grid.axis(0).clone();
        let lambda = order.lambda(0);
        let fvals = f.values().to_vec();
        // panels whose interpolant can be skipped as numerically zero
        let fmax = fvals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let mut panel_live = vec![false; axis.panel_count()];
        for p in 0..axis.panel_count() {
            let lo = p * axis.per_panel();
            panel_live[p] = fvals[lo..lo + axis.per_panel()]
                .iter()
                .any(|v| v.norm() > 1e-14 * fmax);
        }
        let rule = GaussRule::new(12);
        parallel_fill(&mut rows, |i| {
            let x = axis.nodes()[i];
            // integration edges: grid breakpoints plus the truncation shells
            let mut edges: Vec<f64> = axis.breakpoints().to_vec();
            for &e in &cfg.epsilons {
                for cand in [x - e, x + e] {
                    if cand > axis.lower() && cand < axis.upper() {
                        edges.push(cand);
                    }
                }
            }
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
            // per-shell kernel integrals, then cumulative truncations
            let mut shell_vals: Vec<(f64, f64, Complex64)> = Vec::new();
            for w in edges.windows(2) {
                let (a, b) = (w[0], w[1]);
                let panel = axis.panel_of(0.5 * (a + b));
                if !panel_live[panel] {
                    continue;
                }
                // skip shells strictly inside the smallest epsilon
                if a >= x - cfg.epsilons[ne - 1] - 1e-300 && b <= x + cfg.epsilons[ne - 1] + 1e-300
                {
                    continue;
                }
                let mut terms = Vec::with_capacity(rule.nodes.len());
                for (&tn, &tw) in rule.nodes.iter().zip(&rule.weights) {
                    let yq = 0.5 * (a + b) + 0.5 * (b - a) * tn;
                    let fq = axis.interp_in_panel(panel, &fvals, yq);
                    if fq.norm() <= 1e-300 {
                        terms.push(ZERO);
                        continue;
                    }
                    let k = kernel_k_refined(sym, &order, &[x], &[yq], cfg.refine)?;
                    terms.push(fq * k * (yq.powf(2.0 * lambda) * tw * 0.5 * (b - a)));
                }
                shell_vals.push((a, b, pairwise_sum_complex(&terms)));
            }
            let mut out = Vec::with_capacity(ne);
            for (k, &eps) in cfg.epsilons.iter().enumerate() {
                let mut acc: Vec<Complex64> = Vec::new();
                for &(a, b, v) in &shell_vals {
                    if b <= x - eps + 1e-300 || a >= x + eps - 1e-300 {
                        acc.push(v);
                    }
                }
                out.push(alphas[k] * fvals[i] + pairwise_sum_complex(&acc));
            }
            Ok(out)
        });
    } else {
        let fvals = f.values().to_vec();
        let fmax = fvals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let live: Vec<usize> = (0..nodes_total)
            .filter(|&j| fvals[j].norm() > 1e-14 * fmax)
            .collect();
        parallel_fill(&mut rows, |i| {
            let x = grid.node(i);
            let mut out = Vec::with_capacity(ne);
            let mut contribs: Vec<(f64, Complex64)> = Vec::new();
            for &j in &live {
                let y = grid.node(j);
                let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 == 0.0 {
                    continue;
                }
                let k = kernel_k_refined(sym, &order, &x, &y, cfg.refine)?;
                contribs.push((d2.sqrt(), fvals[j] * k * grid.measure_weight(j)));
            }
            for (k, &eps) in cfg.epsilons.iter().enumerate() {
                let acc: Vec<Complex64> = contribs
                    .iter()
                    .filter(|(d, _)| *d > eps)
                    .map(|&(_, v)| v)
                    .collect();
                out.push(alphas[k] * fvals[i] + pairwise_sum_complex(&acc));
            }
            Ok(out)
        });
    }
    // collect, diagnose, extrapolate
    let mut table = Vec::with_capacity(nodes_total);
    for r in rows {
        table.push(r?);
    }
    let mut truncation_l2 = Vec::with_capacity(ne);
    let mut increment_l2 = Vec::with_capacity(ne - 1);
    for k in 0..ne {
        let col = GridFunction::from_values(
            grid.clone(),
            table.iter().map(|row| row[k]).collect(),
        )?;
        truncation_l2.push(crate::grid::lp_norm(&col, 2.0)?);
        if k > 0 {
            let prev = GridFunction::from_values(
                grid.clone(),
                table.iter().map(|row| row[k - 1]).collect(),
            )?;
            increment_l2.push(crate::grid::lp_norm(
                &col.axpy(Complex64::new(-1.0, 0.0), &prev)?,
                2.0,
            )?);
        }
    }
    // a tail of strictly growing increments signals divergence
    let m = increment_l2.len();
    if m >= 3
        && increment_l2[m - 1] > increment_l2[m - 2]
        && increment_l2[m - 2] > increment_l2[m - 3]
        && increment_l2[m - 1] > 1e-12 * truncation_l2[ne - 1]
    {
        return Err(Error::NonConvergent(
            "truncation increments grow as epsilon shrinks; the principal value diverges".into(),
        ));
    }
    let values: Vec<Complex64> = table
        .iter()
        .map(|row| -extrapolate(&cfg.epsilons, row, cfg.richardson))
        .collect();
    Ok(PVResult {
        values: GridFunction::from_values(grid, values)?,
        epsilons: cfg.epsilons.clone(),
        truncation_l2,
        increment_l2,
    })
}

/// Richardson extrapolation of the truncation sequence: one sweep removing
/// the O(ε) error from the last two entries, one more removing O(ε²).
fn extrapolate(eps: &[f64], v: &[Complex64], richardson: bool) -> Complex64 {
    let k = v.len() - 1;
    if !richardson || v.len() < 3 {
        return v[k];
    }
    let first = |i: usize| {
        let r = eps[i] / eps[i - 1];
        (v[i] - v[i - 1] * r) / (1.0 - r)
    };
    let a = first(k - 1);
    let b = first(k);
    let r2 = (eps[k] / eps[k - 1]) * (eps[k - 1] / eps[k - 2]);
    (b - a * r2) / (1.0 - r2)
}
