//! Experiment configuration: a single TOML document with strict schema
//! (unknown keys are hard errors), validated before any experiment starts.

use hankelops::error::{Error, Result};
use hankelops::grid::{Axis, GridFunction, Order, WeightedGrid};
use hankelops::inputs;
use hankelops::multiplier::{LaplaceSymbol, PVConfig};
use serde::Deserialize;
use std::sync::Arc;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Report label; defaults to the config file stem.
    pub label: Option<String>,
    pub order: OrderCfg,
    pub grid: GridCfg,
    pub symbol: Option<SymbolCfg>,
    #[serde(default)]
    pub inputs: Vec<InputCfg>,
    pub pv: Option<PvCfg>,
    pub verify: Option<VerifyCfg>,
    pub operator: Option<OperatorCfg>,
    pub kernel_dump: Option<KernelDumpCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderCfg {
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub axes: Vec<AxisCfg>,
    /// Include the (0, lower) origin-strip quadrature correction.
    #[serde(default = "default_true")]
    pub origin_strip: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisCfg {
    pub lower: f64,
    pub upper: f64,
    /// Nodes per geometric panel.
    pub per_panel: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolCfg {
    /// `identity`, `imaginary-power:β`, `resolvent:a`, `indicator:T`,
    /// `custom:<expr in t>`.
    pub preset: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputCfg {
    pub name: String,
    /// `gaussian`, `smooth-bump`, `near-atom`, `random`.
    pub kind: String,
    #[serde(default)]
    pub center: Vec<f64>,
    pub width: Option<f64>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvCfg {
    /// Strictly decreasing truncation radii; defaults to ε_k = 2^{−k−1}.
    pub epsilons: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    pub richardson: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCfg {
    /// Suites to run; empty means all. Known names are listed by `presets`.
    #[serde(default)]
    pub suites: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorCfg {
    /// Operator names, e.g. `spectral`, `hardy:0.5`, `averaging`, `tail`,
    /// `hl-maximal`, `gaussian-maximal`, `global`, `local-diff`, `maximal`,
    /// `t-loc-star`.
    pub operators: Vec<String>,
    #[serde(default = "default_ps")]
    pub p: Vec<f64>,
    /// Exponents for the Hardy-family operators; defaults to the order.
    pub betas: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDumpCfg {
    pub t: f64,
    /// Probe pairs; each entry holds full n-dimensional coordinates.
    pub probes: Vec<ProbeCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCfg {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn default_true() -> bool {
    true
}

fn default_ps() -> Vec<f64> {
    vec![1.0, 2.0]
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("reading {}: {e}", path.display())))?;
        let cfg: Config =
            toml::from_str(&text).map_err(|e| Error::Input(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for &l in &self.order.lambdas {
            if !(l > -0.5) {
                return Err(Error::Input(format!(
                    "lambda must exceed -1/2, got {l}"
                )));
            }
        }
        if self.grid.axes.len() != self.order.lambdas.len() {
            return Err(Error::Input(format!(
                "grid has {} axes but the order lists {} exponents",
                self.grid.axes.len(),
                self.order.lambdas.len()
            )));
        }
        for (j, ax) in self.grid.axes.iter().enumerate() {
            if !(ax.lower > 0.0 && ax.upper > ax.lower) {
                return Err(Error::Input(format!(
                    "axis {j}: need 0 < lower < upper, got [{}, {}]",
                    ax.lower, ax.upper
                )));
            }
        }
        // the preset must resolve before anything runs
        if let Some(sym) = &self.symbol {
            LaplaceSymbol::from_preset(&sym.preset).map_err(|e| Error::Input(e.to_string()))?;
        }
        for input in &self.inputs {
            match input.kind.as_str() {
                "gaussian" | "smooth-bump" | "near-atom" => {
                    if input.center.len() != self.order.lambdas.len() {
                        return Err(Error::Input(format!(
                            "input `{}`: center must have one coordinate per axis",
                            input.name
                        )));
                    }
                    if !matches!(input.width, Some(w) if w > 0.0) {
                        return Err(Error::Input(format!(
                            "input `{}`: a positive width is required",
                            input.name
                        )));
                    }
                }
                "random" => {}
                other => {
                    return Err(Error::Input(format!(
                        "input `{}`: unknown generator `{other}`",
                        input.name
                    )))
                }
            }
        }
        if let Some(dump) = &self.kernel_dump {
            if !(dump.t > 0.0) {
                return Err(Error::Input("kernel_dump.t must be positive".into()));
            }
            for (i, p) in dump.probes.iter().enumerate() {
                if p.x.len() != self.order.lambdas.len() || p.y.len() != self.order.lambdas.len() {
                    return Err(Error::Input(format!(
                        "kernel_dump probe {i}: coordinate dimension mismatch"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self, path: &std::path::Path) -> String {
        self.label.clone().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "experiment".into())
        })
    }

    pub fn order(&self) -> Result<Order> {
        Order::new(self.order.lambdas.clone())
    }

    /// Build the configured grid; `per_panel_bonus` adds nodes per panel for
    /// refinement trends.
    pub fn build_grid(&self, per_panel_bonus: usize) -> Result<Arc<WeightedGrid>> {
        let axes: Vec<Axis> = self
            .grid
            .axes
            .iter()
            .map(|a| Axis::geometric_uniform(a.lower, a.upper, a.per_panel + per_panel_bonus))
            .collect::<Result<_>>()?;
        for (j, ax) in axes.iter().enumerate() {
            if ax.len() < 16 {
                return Err(Error::Input(format!(
                    "axis {j}: at least 16 nodes are required, got {}",
                    ax.len()
                )));
            }
        }
        if self.grid.origin_strip {
            WeightedGrid::new_with_origin(axes, self.order()?)
        } else {
            WeightedGrid::new(axes, self.order()?)
        }
    }

    pub fn symbol(&self) -> Result<LaplaceSymbol> {
        match &self.symbol {
            Some(s) => LaplaceSymbol::from_preset(&s.preset),
            None => Ok(LaplaceSymbol::identity()),
        }
    }

    pub fn pv_config(&self) -> Result<PVConfig> {
        match &self.pv {
            Some(p) => match &p.epsilons {
                Some(eps) => PVConfig::new(eps.clone(), p.richardson),
                None => PVConfig::dyadic(12),
            },
            None => PVConfig::dyadic(12),
        }
    }

    /// Instantiate the configured inputs on `grid` (or a default Gaussian
    /// bump when none are configured).
    pub fn build_inputs(&self, grid: &Arc<WeightedGrid>) -> Result<Vec<(String, GridFunction)>> {
        if self.inputs.is_empty() {
            let center = vec![2.0; grid.dim()];
            return Ok(vec![(
                "gaussian".to_string(),
                inputs::gaussian_bump(grid.clone(), &center, 0.5)?,
            )]);
        }
        self.inputs
            .iter()
            .map(|ic| {
                let f = match ic.kind.as_str() {
                    "gaussian" => {
                        inputs::gaussian_bump(grid.clone(), &ic.center, ic.width.unwrap())?
                    }
                    "smooth-bump" => {
                        inputs::smooth_bump(grid.clone(), &ic.center, ic.width.unwrap())?
                    }
                    "near-atom" => {
                        inputs::near_atom(grid.clone(), &ic.center, ic.width.unwrap())?
                    }
                    "random" => inputs::random_smooth(
                        grid.clone(),
                        ic.seed.unwrap_or(1),
                        ic.count.unwrap_or(4),
                    )?,
                    _ => unreachable!("validated"),
                };
                Ok((ic.name.clone(), f))
            })
            .collect()
    }

    pub fn input_generator_names() -> &'static [&'static str] {
        &["gaussian", "smooth-bump", "near-atom", "random"]
    }

    pub fn verify_suite_names() -> &'static [&'static str] {
        &[
            "transform",
            "eigen",
            "gaussian-pair",
            "heat-identity",
            "mass-one",
            "semigroup-law",
            "normalization",
            "dual-path",
            "unitarity",
        ]
    }

    pub fn operator_names() -> &'static [&'static str] {
        &[
            "spectral",
            "global",
            "local-diff",
            "maximal",
            "t-loc-star",
            "hardy:<beta>",
            "tensor-hardy",
            "averaging",
            "tail",
            "hl-maximal",
            "gaussian-maximal",
        ]
    }
}
