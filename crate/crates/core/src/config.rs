//! Run configuration and the figure presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{TCParams, DEFAULT_ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::xstate::XState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Window end in units of `1/λ`.
    pub t_max: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: TCParams,
    pub initial: XState,
    pub grid: GridConfig,
    #[serde(default = "default_threshold")]
    pub zero_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_threshold() -> f64 {
    DEFAULT_ZERO_THRESHOLD
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.initial.ensure_valid()?;
        self.params.validate()?;
        if self.grid.n_samples < 2 || !(self.grid.t_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need n_samples ≥ 2 and t_max > 0, got {:?}",
                self.grid
            )));
        }
        if !(self.zero_threshold > 0.0) {
            return Err(Error::Config(format!(
                "zero threshold must be positive, got {}",
                self.zero_threshold
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3Separable,
    Fig3Entangled,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::Fig3Separable,
        Preset::Fig3Entangled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3Separable => "fig3-separable",
            Preset::Fig3Entangled => "fig3-entangled",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "preset",
                name: name.to_string(),
                available: Preset::ALL.map(Preset::name).join(", "),
            })
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig1 => "|α|²=0.5922, κ=0.05λ; ρ11=ρ44=1/4, ρ22=3/16, ρ33=5/16, |ρ14|=0.25, |ρ23|=0.05",
            Preset::Fig2 => "|α|²=1.1434, κ=0.25λ; same initial state as fig1",
            Preset::Fig3Separable => "|α|²=1, κ=0.05λ; ρjj=1/4, |ρ14|=0.2, |ρ23|=0.0736 (unentangled)",
            Preset::Fig3Entangled => "|α|²=1, κ=0.05λ; ρ11=ρ44=|ρ14|=0.4, ρ22=ρ33=0.1, |ρ23|=0.05",
        }
    }

    /// Expanded configuration; time windows are 30/λ for fig1–2 and 300/λ
    /// for fig3, sampled every 0.01/λ.
    pub fn config(self) -> RunConfig {
        let asymmetric = XState::new([0.25, 3.0 / 16.0, 5.0 / 16.0, 0.25], 0.25, 0.05);
        let (params, initial, t_max) = match self {
            Preset::Fig1 => (params(0.05, 0.5922), asymmetric, 30.0),
            Preset::Fig2 => (params(0.25, 1.1434), asymmetric, 30.0),
            Preset::Fig3Separable => (params(0.05, 1.0), XState::new([0.25; 4], 0.2, 0.0736), 300.0),
            Preset::Fig3Entangled => (
                params(0.05, 1.0),
                XState::new([0.4, 0.1, 0.1, 0.4], 0.4, 0.05),
                300.0,
            ),
        };
        RunConfig {
            params,
            initial,
            grid: GridConfig {
                t_max,
                n_samples: (t_max * 100.0) as usize + 1,
            },
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            output: None,
        }
    }
}

fn params(kappa: f64, alpha_sq: f64) -> TCParams {
    TCParams {
        lambda: 1.0,
        kappa,
        alpha_sq,
    }
}
