//! TOML run configuration.
//!
//! ```toml
//! scenario = "transport"
//! output_dir = "runs"
//! checkpoints = [10, 30, 70]
//!
//! [params]
//! kick_strength = 270.0
//! scaled_planck = 2.5988
//!
//! [sweep]
//! eta = [0.0, 0.0187, 0.0503]
//! ```
//!
//! Every section is optional. `kick_strength` and `scaled_planck` may be
//! derived from a `[physical]` block instead; explicit values win.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{Backend, FluxConfig, Integrator};
use crate::error::{Error, Result};
use crate::model::{build_pulse_train, physical_to_scaled, PhysicalParams, PulseTrain, SimParams};
use crate::quantum::Averaging;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Poincare,
    Waterfall,
    Transport,
    Wigner,
    Flux,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Poincare, Scenario::Waterfall, Scenario::Transport, Scenario::Wigner, Scenario::Flux];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Poincare => "poincare",
            Scenario::Waterfall => "waterfall",
            Scenario::Transport => "transport",
            Scenario::Wigner => "wigner",
            Scenario::Flux => "flux",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Poincare => "stroboscopic sections of classical orbits for each kick strength",
            Scenario::Waterfall => "quantum momentum distributions after every kick, per k and η",
            Scenario::Transport => "fraction beyond the boundary vs kick: classical plus one quantum curve per η",
            Scenario::Wigner => "toroidal Wigner functions and negativity at the checkpoint kicks",
            Scenario::Flux => "classical flux through ρ = ±boundary per kick cycle",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `[params]`: overrides of [`SimParams`]; unset fields take defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kick_strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled_planck: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_kicks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_trajectories: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_momentum_sigma: Option<f64>,
}

/// `[physical]`: laboratory parameters. Only the Rabi frequency and the
/// detunings are required; the rest default to caesium at 852 nm, T = 25 μs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub rabi_frequency: f64,
    pub detunings: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wave_number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_period: Option<f64>,
}

impl PhysicalSection {
    pub fn to_params(&self) -> PhysicalParams {
        let base = PhysicalParams::caesium(self.rabi_frequency, self.detunings);
        PhysicalParams {
            wave_number: self.wave_number.unwrap_or(base.wave_number),
            atom_mass: self.atom_mass.unwrap_or(base.atom_mass),
            pulse_period: self.pulse_period.unwrap_or(base.pulse_period),
            ..base
        }
    }
}

/// `[sweep]`: lists of η and k to run. Empty lists fall back to the single
/// value in `[params]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub eta: Vec<f64>,
    pub kick_strength: Vec<f64>,
}

/// `[classical]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalSection {
    /// Whether scenarios that can include a classical companion do so.
    pub enabled: bool,
    pub backend: Backend,
    pub substeps: usize,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        let i = Integrator::default();
        ClassicalSection { enabled: true, backend: i.backend, substeps: i.substeps }
    }
}

impl ClassicalSection {
    pub fn integrator(&self) -> Integrator {
        Integrator { backend: self.backend, substeps: self.substeps }
    }
}

/// `[poincare]`: seeds on `n_rho` momentum lines × `n_phi` angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareSection {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_phi: usize,
    pub n_kicks: usize,
}

impl Default for PoincareSection {
    fn default() -> Self {
        PoincareSection { rho_min: -13.0 * PI, rho_max: 13.0 * PI, n_rho: 53, n_phi: 4, n_kicks: 400 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Momentum boundary for transport and flux, default 10π.
    #[serde(default = "default_boundary")]
    pub boundary: f64,
    /// Kicks at which full density matrices (and Wigner grids) are saved.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSection>,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub classical: ClassicalSection,
    #[serde(default)]
    pub quantum: Averaging,
    #[serde(default)]
    pub poincare: PoincareSection,
    #[serde(default)]
    pub flux: FluxConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_boundary() -> f64 {
    10.0 * PI
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = match e.span() {
                Some(span) => {
                    let before = &text[..span.start.min(text.len())];
                    let line = before.matches('\n').count() + 1;
                    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                    format!("line {line}, column {col}")
                }
                None => "toml".into(),
            };
            Error::config(field, e.message().to_string())
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    /// Canonical TOML text: every section written out in a fixed order.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("toml", e.to_string()))
    }

    /// Checks every field and derives the concrete run parameters.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::config("output_dir", "must not be empty"));
        }
        if !(self.boundary.is_finite() && self.boundary > 0.0) {
            return Err(Error::config("boundary", format!("must be finite and > 0, got {}", self.boundary)));
        }

        let derived = match &self.physical {
            Some(p) => Some(physical_to_scaled(&p.to_params()).map_err(|e| prefixed("physical", e))?),
            None => None,
        };
        let defaults = SimParams::default();
        let p = &self.params;
        let pick = |explicit: Option<f64>, from_physical: Option<f64>, name: &str, fallback: f64| match (
            explicit,
            from_physical,
        ) {
            (Some(v), Some(d)) => {
                if (v - d).abs() > 0.01 * d.abs() {
                    log::warn!("params.{name} = {v} overrides {d:.4} derived from [physical]");
                }
                v
            }
            (Some(v), None) => v,
            (None, Some(d)) => d,
            (None, None) => fallback,
        };
        let params = SimParams {
            kick_strength: pick(p.kick_strength, derived.map(|d| d.0), "kick_strength", defaults.kick_strength),
            scaled_planck: pick(p.scaled_planck, derived.map(|d| d.1), "scaled_planck", defaults.scaled_planck),
            se_probability: p.se_probability.unwrap_or(defaults.se_probability),
            pulse_width: p.pulse_width.unwrap_or(defaults.pulse_width),
            pulse_spacing: p.pulse_spacing.unwrap_or(defaults.pulse_spacing),
            basis_size: p.basis_size.unwrap_or(defaults.basis_size),
            n_kicks: p.n_kicks.unwrap_or(defaults.n_kicks),
            n_trajectories: p.n_trajectories.unwrap_or(defaults.n_trajectories),
            rng_seed: p.rng_seed.unwrap_or(defaults.rng_seed),
            init_momentum_sigma: p.init_momentum_sigma.unwrap_or(defaults.init_momentum_sigma),
        };
        params.validate().map_err(|e| prefixed("params", e))?;
        let pulses = build_pulse_train(params.pulse_width, params.pulse_spacing).map_err(|e| prefixed("params", e))?;

        for &eta in &self.sweep.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::config("sweep.eta", format!("each η must lie in [0, 1], got {eta}")));
            }
        }
        for &k in &self.sweep.kick_strength {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::config("sweep.kick_strength", format!("each k must be > 0, got {k}")));
            }
        }
        let etas = if self.sweep.eta.is_empty() { vec![params.se_probability] } else { self.sweep.eta.clone() };
        let kick_strengths = if self.sweep.kick_strength.is_empty() {
            vec![params.kick_strength]
        } else {
            self.sweep.kick_strength.clone()
        };

        if let Some(&bad) = self.checkpoints.iter().find(|&&c| c > params.n_kicks) {
            return Err(Error::config("checkpoints", format!("kick {bad} is beyond n_kicks = {}", params.n_kicks)));
        }
        let mut checkpoints = self.checkpoints.clone();
        checkpoints.sort_unstable();
        checkpoints.dedup();

        if self.classical.backend == Backend::Symplectic && self.classical.substeps == 0 {
            return Err(Error::config("classical.substeps", "must be positive"));
        }
        self.quantum.validate().map_err(|e| prefixed("quantum", e))?;

        let s = &self.poincare;
        if s.n_rho == 0 || s.n_phi == 0 || s.n_kicks == 0 {
            return Err(Error::config("poincare", "n_rho, n_phi and n_kicks must be positive"));
        }
        if !(s.rho_min.is_finite() && s.rho_max.is_finite() && s.rho_min <= s.rho_max) {
            return Err(Error::config("poincare.rho_min", "need finite rho_min <= rho_max"));
        }

        let f = &self.flux;
        if f.grid_phi == 0 || f.grid_rho < 2 || f.grid_rho % 2 != 0 {
            return Err(Error::config("flux.grid_rho", "grid_phi must be positive and grid_rho even and >= 2"));
        }
        if !(f.band_halfwidth.is_finite() && f.band_halfwidth > 0.0) || f.n_cycles == 0 {
            return Err(Error::config("flux", "band_halfwidth and n_cycles must be positive"));
        }

        Ok(Resolved {
            scenario: self.scenario,
            params,
            pulses,
            etas,
            kick_strengths,
            checkpoints,
            boundary: self.boundary,
            integrator: self.classical.integrator(),
            classical: self.classical.enabled,
            averaging: self.quantum,
            poincare: self.poincare,
            flux: self.flux,
        })
    }
}

/// Rewrites a model error as a config error naming the offending field.
fn prefixed(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::config(format!("{section}.{name}"), reason),
        Error::Config { .. } => e,
        other => Error::config(section, other.to_string()),
    }
}

/// A validated configuration with all defaults applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    pub params: SimParams,
    pub pulses: PulseTrain,
    pub etas: Vec<f64>,
    pub kick_strengths: Vec<f64>,
    pub checkpoints: Vec<usize>,
    pub boundary: f64,
    pub integrator: Integrator,
    pub classical: bool,
    pub averaging: Averaging,
    pub poincare: PoincareSection,
    pub flux: FluxConfig,
}
