//! JSON-facing configuration for the CLI: one section per subcommand, all
//! fields optional with the library defaults filled in, converted into the
//! validated core types by the `build_*` methods.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::approximation::ApproxOptions;
use crate::cutoff::GlueCutoff;
use crate::error::{Error, Result};
use crate::experiments::{NontrapConfig, ShapeConfig};
use crate::ladder::LadderConfig;
use crate::operator::{GridSpec, Scheme};
use crate::potential::Potential;
use crate::spectrum::Window;

/// Builtin potential by name + parameter map (no expression parser).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            name: "gaussian_barrier".into(),
            params: BTreeMap::new(),
        }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<Potential> {
        Potential::builtin(&self.name, &self.params)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    /// "order2" or "order4".
    #[serde(default = "default_scheme")]
    pub scheme: String,
}

fn default_scheme() -> String {
    "order4".into()
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            x_min: -12.0,
            x_max: 12.0,
            n_points: 600,
            scheme: default_scheme(),
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        let scheme = match self.scheme.as_str() {
            "order2" => Scheme::Order2,
            "order4" => Scheme::Order4,
            other => {
                return Err(Error::Config(format!(
                    "unknown scheme `{other}` (expected order2 or order4)"
                )))
            }
        };
        GridSpec::new(self.x_min, self.x_max, self.n_points, scheme)
    }
}

/// Overrides on top of [`ApproxOptions::default`].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxConfig {
    pub taylor_order: Option<usize>,
    pub panel_points: Option<usize>,
    pub s_max: Option<f64>,
    pub tol: Option<f64>,
    pub eval_hi: Option<f64>,
    pub mu_max: Option<f64>,
    /// "default" or "alternative" χ₁ profile.
    pub glue: Option<String>,
    pub exact_threshold: Option<f64>,
    pub analytic_continuation: Option<bool>,
}

impl ApproxConfig {
    pub fn build(&self) -> Result<ApproxOptions> {
        let mut o = ApproxOptions::default();
        if let Some(v) = self.taylor_order {
            o.taylor_order = v;
        }
        if let Some(v) = self.panel_points {
            o.panel_points = v;
        }
        if self.s_max.is_some() {
            o.s_max = self.s_max;
        }
        if let Some(v) = self.tol {
            o.tol = v;
        }
        if let Some(v) = self.eval_hi {
            o.eval_hi = v;
        }
        if let Some(v) = self.mu_max {
            o.mu_max = v;
        }
        if let Some(g) = &self.glue {
            o.glue = match g.as_str() {
                "default" => GlueCutoff::default_profile(),
                "alternative" => GlueCutoff::alternative_profile(),
                other => {
                    return Err(Error::Config(format!(
                        "unknown glue profile `{other}` (expected default or alternative)"
                    )))
                }
            };
        }
        if let Some(v) = self.exact_threshold {
            o.exact_threshold = v;
        }
        if let Some(v) = self.analytic_continuation {
            o.analytic_continuation = v;
        }
        Ok(o)
    }
}

/// `resonette approx`: build V^μ and dump it on a real grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxCmd {
    pub potential: PotentialConfig,
    pub mu: f64,
    /// None → ν/2.
    pub nu_tilde: Option<f64>,
    /// Dump grid.
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub approx: ApproxConfig,
}

impl Default for ApproxCmd {
    fn default() -> Self {
        ApproxCmd {
            potential: PotentialConfig::default(),
            mu: 0.1,
            nu_tilde: None,
            x_min: -5.0,
            x_max: 5.0,
            n_points: 401,
            approx: ApproxConfig::default(),
        }
    }
}

/// `resonette verify`: μ-sweep decay fit of sup|⟨x⟩^ν̃(V^μ−V)|.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyCmd {
    pub potential: PotentialConfig,
    pub mu_grid: Vec<f64>,
    pub nu_tilde: Option<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    /// Fitted slope must exceed this.
    pub n_floor: f64,
    pub approx: ApproxConfig,
}

impl Default for VerifyCmd {
    fn default() -> Self {
        VerifyCmd {
            potential: PotentialConfig {
                name: "bump".into(),
                params: BTreeMap::new(),
            },
            mu_grid: vec![0.1, 0.05, 0.025, 0.0125],
            nu_tilde: None,
            x_min: -4.0,
            x_max: 4.0,
            n_points: 201,
            n_floor: 3.5,
            approx: ApproxConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub e_lo: f64,
    pub e_hi: f64,
    pub tau: f64,
}

impl WindowConfig {
    pub fn build(&self) -> Result<Window> {
        Window::new(self.e_lo, self.e_hi, self.tau)
    }
}

/// `resonette spectrum`: one resonance set at fixed (h, μ, θ).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumCmd {
    pub potential: PotentialConfig,
    pub h: f64,
    pub mu: f64,
    /// None → θ = μ.
    pub theta: Option<f64>,
    pub nu_tilde: Option<f64>,
    pub n1: f64,
    pub r0: f64,
    pub lambda0: f64,
    pub window: WindowConfig,
    pub grid: GridConfig,
    pub stability_tol: Option<f64>,
    pub approx: ApproxConfig,
}

impl Default for SpectrumCmd {
    fn default() -> Self {
        SpectrumCmd {
            potential: PotentialConfig::default(),
            h: 0.1,
            mu: 0.1,
            theta: None,
            nu_tilde: None,
            n1: 1.1,
            r0: 1.0,
            lambda0: 1.0,
            window: WindowConfig {
                e_lo: 0.6,
                e_hi: 1.0,
                tau: 0.12,
            },
            grid: GridConfig {
                x_min: -14.0,
                x_max: 14.0,
                n_points: 1000,
                scheme: default_scheme(),
            },
            // genuine θ-drift at this grid is ~1e−3; the library default
            // (1e−3·θ) would reject the resonance itself
            stability_tol: Some(5e-3),
            approx: ApproxConfig::default(),
        }
    }
}

/// `resonette ladder`: μ-ladder run, optionally cross-checked against the
/// same ladder rebuilt with the alternative glue profile.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderCmd {
    pub potential: PotentialConfig,
    pub h: f64,
    pub n1: f64,
    pub mu_tilde: f64,
    pub nu_tilde: f64,
    pub j_prime: (f64, f64),
    pub lambda0: f64,
    pub kmax: usize,
    pub mu_floor: f64,
    pub n_match: i32,
    pub c_match: f64,
    pub shrink_frac: f64,
    pub n_cap: usize,
    pub stability_tol: Option<f64>,
    pub r0: f64,
    pub grid: GridConfig,
    pub approx: ApproxConfig,
    pub crosscheck: bool,
}

impl Default for LadderCmd {
    fn default() -> Self {
        let l = LadderConfig::default();
        LadderCmd {
            potential: PotentialConfig {
                name: "gaussian_barrier".into(),
                params: [("amp".to_string(), -1.0), ("width".to_string(), 1.0)]
                    .into_iter()
                    .collect(),
            },
            h: l.h,
            n1: l.n1,
            mu_tilde: l.mu_tilde,
            nu_tilde: l.nu_tilde,
            j_prime: (-0.99, -0.62),
            lambda0: l.lambda0,
            kmax: 3,
            mu_floor: l.mu_floor,
            n_match: l.n_match,
            c_match: l.c_match,
            shrink_frac: l.shrink_frac,
            n_cap: l.n_cap,
            stability_tol: Some(1e-4),
            r0: 1.0,
            grid: GridConfig {
                x_min: -10.0,
                x_max: 10.0,
                n_points: 300,
                scheme: default_scheme(),
            },
            approx: ApproxConfig::default(),
            crosscheck: false,
        }
    }
}

impl LadderCmd {
    pub fn ladder_config(&self) -> LadderConfig {
        LadderConfig {
            h: self.h,
            n1: self.n1,
            mu_tilde: self.mu_tilde,
            nu_tilde: self.nu_tilde,
            j_prime: self.j_prime,
            lambda0: self.lambda0,
            kmax: self.kmax,
            mu_floor: self.mu_floor,
            n_match: self.n_match,
            c_match: self.c_match,
            shrink_frac: self.shrink_frac,
            n_cap: self.n_cap,
            stability_tol: self.stability_tol,
        }
    }
}

/// `resonette shape`: the point-well-in-an-island sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapeCmd {
    pub lambda0: f64,
    pub h_list: Vec<f64>,
    pub mu: f64,
    pub nu_tilde: f64,
    pub delta: f64,
    pub n_levels: usize,
    pub eps: f64,
    pub n1: f64,
    pub r0: f64,
    pub stability_tol: Option<f64>,
    pub grid: GridConfig,
    pub approx: ApproxConfig,
    /// Re-defect slope floor and |Im| slope tolerance used by the exit code.
    pub re_slope_floor: f64,
    pub im_slope_rel_tol: f64,
}

impl Default for ShapeCmd {
    fn default() -> Self {
        let s = ShapeConfig::default();
        ShapeCmd {
            lambda0: 1.0,
            h_list: s.h_list,
            mu: s.mu,
            nu_tilde: s.nu_tilde,
            delta: s.delta,
            // level 1 drops below the eigensolver floor at the small-h end
            // of the sweep; the default run tracks the ground level only
            n_levels: 1,
            eps: s.eps,
            n1: s.n1,
            r0: s.r0,
            stability_tol: s.stability_tol,
            grid: GridConfig {
                x_min: s.grid.x_min,
                x_max: s.grid.x_max,
                n_points: s.grid.n_points,
                scheme: default_scheme(),
            },
            approx: ApproxConfig::default(),
            re_slope_floor: 1.4,
            im_slope_rel_tol: 0.15,
        }
    }
}

impl ShapeCmd {
    pub fn shape_config(&self) -> Result<ShapeConfig> {
        Ok(ShapeConfig {
            h_list: self.h_list.clone(),
            mu: self.mu,
            nu_tilde: self.nu_tilde,
            delta: self.delta,
            n_levels: self.n_levels,
            eps: self.eps,
            grid: self.grid.build()?,
            approx: self.approx.build()?,
            n1: self.n1,
            r0: self.r0,
            stability_tol: self.stability_tol,
        })
    }
}

/// `resonette nontrap`: emptiness of the above-barrier box.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NontrapCmd {
    pub potential: PotentialConfig,
    pub h_list: Vec<f64>,
    pub lambda0: f64,
    pub eps: f64,
    pub c_mu: f64,
    pub nu_tilde: f64,
    pub escape_radius: f64,
    pub t_max: f64,
    pub n_samples: usize,
    pub n1: f64,
    pub r0: f64,
    pub grid: GridConfig,
    pub approx: ApproxConfig,
}

impl Default for NontrapCmd {
    fn default() -> Self {
        let n = NontrapConfig::default();
        NontrapCmd {
            potential: PotentialConfig {
                name: "sech2".into(),
                params: BTreeMap::new(),
            },
            h_list: n.h_list,
            lambda0: n.lambda0,
            eps: n.eps,
            c_mu: n.c_mu,
            nu_tilde: n.nu_tilde,
            escape_radius: n.escape_radius,
            t_max: n.t_max,
            n_samples: n.n_samples,
            n1: n.n1,
            r0: n.r0,
            grid: GridConfig {
                x_min: n.grid.x_min,
                x_max: n.grid.x_max,
                n_points: n.grid.n_points,
                scheme: default_scheme(),
            },
            approx: ApproxConfig::default(),
        }
    }
}

impl NontrapCmd {
    pub fn nontrap_config(&self) -> Result<NontrapConfig> {
        Ok(NontrapConfig {
            h_list: self.h_list.clone(),
            lambda0: self.lambda0,
            eps: self.eps,
            c_mu: self.c_mu,
            nu_tilde: self.nu_tilde,
            escape_radius: self.escape_radius,
            t_max: self.t_max,
            n_samples: self.n_samples,
            grid: self.grid.build()?,
            approx: self.approx.build()?,
            n1: self.n1,
            r0: self.r0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build() {
        assert!(ApproxCmd::default().potential.build().is_ok());
        assert!(SpectrumCmd::default().grid.build().is_ok());
        assert!(ShapeCmd::default().shape_config().is_ok());
        assert!(NontrapCmd::default().nontrap_config().is_ok());
        let l = LadderCmd::default();
        assert!(l.potential.build().is_ok());
        assert_eq!(l.ladder_config().kmax, 3);
    }

    #[test]
    fn json_roundtrip_with_overrides() {
        let cmd: SpectrumCmd = serde_json::from_str(
            r#"{"h": 0.05, "potential": {"name": "sech2", "params": {"amp": 0.4}},
                "window": {"e_lo": 0.5, "e_hi": 0.9, "tau": 0.1},
                "grid": {"x_min": -8, "x_max": 8, "n_points": 200, "scheme": "order2"}}"#,
        )
        .unwrap();
        assert_eq!(cmd.h, 0.05);
        assert_eq!(cmd.potential.name, "sech2");
        assert_eq!(cmd.grid.build().unwrap().n_points, 200);
        // unknown keys are config errors, not silent misconfiguration
        assert!(serde_json::from_str::<SpectrumCmd>(r#"{"hh": 0.05}"#).is_err());
        // bad scheme name surfaces as a config error
        let g: GridConfig = serde_json::from_str(
            r#"{"x_min": 0, "x_max": 1, "n_points": 10, "scheme": "order6"}"#,
        )
        .unwrap();
        assert!(g.build().is_err());
    }
}
