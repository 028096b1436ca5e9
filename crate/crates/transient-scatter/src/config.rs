//! JSON run configuration shared by every subcommand.
//!
//! A config names the unit system (usually the "paper" shortcut), the barrier
//! and packet parameters, the engine selection, optional grid overrides for
//! the split-operator engine, and one block per task. Tasks only read their
//! own block; shipping one file per figure keeps the artifacts reproducible
//! from a single input.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::GaussianPacket;
use crate::barrier::BarrierSpec;
use crate::units::UnitSystem;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub units: UnitsField,
    pub barrier: BarrierConfig,
    pub packet: PacketConfig,
    pub engine: EngineChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gqmax: Option<GqMaxTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argand: Option<ArgandTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<PolesTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareTask>,
}

/// Either the literal string "paper" or a full five-factor unit system.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitsField {
    Named(String),
    Explicit(UnitSystem),
}

impl UnitsField {
    pub fn resolve(&self) -> Result<UnitSystem> {
        match self {
            UnitsField::Named(name) if name == "paper" => Ok(UnitSystem::paper()),
            UnitsField::Named(name) => Err(Error::Config(format!(
                "unknown unit system name {name:?} (only \"paper\" is predefined)"
            ))),
            UnitsField::Explicit(u) => {
                let u = u.with_hbar();
                let diags = u.diagnostics()?;
                if !diags.is_empty() {
                    return Err(Error::Config(format!(
                        "inconsistent unit system: {}",
                        diags.join("; ")
                    )));
                }
                Ok(u)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    pub v0: f64,
    pub d: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub delta_x: f64,
    pub p_c: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Analytic,
    Oracle,
    Both,
}

impl EngineChoice {
    pub fn uses_oracle(self) -> bool {
        matches!(self, EngineChoice::Oracle | EngineChoice::Both)
    }
    pub fn uses_analytic(self) -> bool {
        matches!(self, EngineChoice::Analytic | EngineChoice::Both)
    }
    pub fn label(self) -> &'static str {
        match self {
            EngineChoice::Analytic => "analytic",
            EngineChoice::Oracle => "oracle",
            EngineChoice::Both => "both",
        }
    }
}

/// Split-operator grid overrides. Absent fields fall back to the engineered
/// grid and the default step.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl GridOverrides {
    pub fn is_empty(&self) -> bool {
        self.n.is_none() && self.x_min.is_none() && self.x_max.is_none() && self.dt.is_none()
    }
}

/// Default split-operator step when no override is given: converged to the
/// few-percent level for the reference collision while keeping full scans
/// inside a coffee break.
pub const DEFAULT_DT: f64 = 2e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveTask {
    pub times: Vec<f64>,
    /// Zero-padding factor for the momentum analysis (power of two).
    #[serde(default = "default_pad")]
    pub pad: usize,
}

fn default_pad() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GqMaxTask {
    pub p_range: [f64; 2],
    pub t_range: [f64; 2],
    /// Coarse time samples before refinement.
    #[serde(default = "default_nt")]
    pub nt: usize,
    /// Pin t and search over p only (reported t_star equals this value).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_fixed: Option<f64>,
    #[serde(default = "default_pad")]
    pub pad: usize,
}

fn default_nt() -> usize {
    15
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgandTask {
    pub t: f64,
    pub p_window: [f64; 2],
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolesTask {
    pub t: f64,
    pub re_range: [f64; 2],
    pub im_range: [f64; 2],
    #[serde(default = "default_max_poles")]
    pub max_count: usize,
}

fn default_max_poles() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareTask {
    pub t: f64,
    /// Momentum window for the pointwise and L2 comparison.
    pub window: [f64; 2],
    /// Relative L2 threshold deciding pass/fail.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_pad")]
    pub pad: usize,
}

fn default_threshold() -> f64 {
    0.1
}

/// Typed physics objects built from a validated config.
#[derive(Debug)]
pub struct Resolved {
    pub units: UnitSystem,
    pub barrier: BarrierSpec,
    pub packet: GaussianPacket,
    pub engine: EngineChoice,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&raw)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Validates field combinations and builds the typed objects; the first
    /// offending field is named in the error.
    pub fn resolve(&self) -> Result<Resolved> {
        let units = self.units.resolve()?;
        let barrier = BarrierSpec::new(self.barrier.v0, self.barrier.d, self.barrier.m)
            .map_err(|e| Error::Config(format!("barrier: {e}")))?;
        let packet = GaussianPacket::new(
            self.packet.delta_x,
            self.packet.p_c,
            self.packet.alpha,
            units.hbar_scaled,
        )
        .map_err(|e| Error::Config(format!("packet: {e}")))?;
        if let Some(g) = &self.grid {
            if !g.is_empty() && !self.engine.uses_oracle() {
                return Err(Error::Config(
                    "grid overrides require the oracle (or both) engine".into(),
                ));
            }
            if let Some(n) = g.n {
                if !n.is_power_of_two() {
                    return Err(Error::Config(format!("grid.n must be a power of two, got {n}")));
                }
            }
            if let Some(dt) = g.dt {
                if !(dt > 0.0) {
                    return Err(Error::Config(format!("grid.dt must be positive, got {dt}")));
                }
            }
            match (g.x_min, g.x_max) {
                (Some(a), Some(b)) if a >= b => {
                    return Err(Error::Config(format!(
                        "grid.x_min {a} must lie below grid.x_max {b}"
                    )));
                }
                (Some(_), None) | (None, Some(_)) => {
                    return Err(Error::Config(
                        "grid.x_min and grid.x_max must be overridden together".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(Resolved {
            units,
            barrier,
            packet,
            engine: self.engine,
        })
    }

    pub fn dt(&self) -> f64 {
        self.grid.as_ref().and_then(|g| g.dt).unwrap_or(DEFAULT_DT)
    }

    /// Grid for the oracle engine: the engineered default unless overridden.
    pub fn spatial_grid(
        &self,
        packet: &GaussianPacket,
        barrier: &BarrierSpec,
        t_final: f64,
    ) -> Result<crate::grid::SpatialGrid> {
        use crate::grid::SpatialGrid;
        match &self.grid {
            Some(g) if g.n.is_some() || g.x_min.is_some() => {
                let engineered = SpatialGrid::engineered(packet, barrier, t_final);
                let (x_min, x_max) = match (g.x_min, g.x_max) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        let e = engineered?;
                        (e.x_min, e.x_max)
                    }
                };
                let n = g.n.unwrap_or(1 << 19);
                let grid = SpatialGrid::new(x_min, x_max, n)?;
                grid.validate_for(packet, barrier, t_final)?;
                Ok(grid)
            }
            _ => SpatialGrid::engineered(packet, barrier, t_final),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_json() -> String {
        r#"{
            "units": "paper",
            "barrier": {"v0": 102.5, "d": 2.5, "m": 1.558023},
            "packet": {"delta_x": 107.99, "p_c": 28.48, "alpha": 0.46300583387350683},
            "engine": "both",
            "evolve": {"times": [0.0, 2.333, 2.731, 3.233]}
        }"#
        .to_string()
    }

    #[test]
    fn parses_reference_config() {
        let cfg: RunConfig = serde_json::from_str(&fig1_json()).unwrap();
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.units.hbar_scaled, 0.005);
        assert_eq!(resolved.barrier.v0, 102.5);
        assert!((resolved.packet.x0() + 50.0).abs() < 1e-10);
        assert_eq!(cfg.dt(), DEFAULT_DT);
        assert_eq!(cfg.evolve.as_ref().unwrap().pad, 8);
    }

    #[test]
    fn rejects_unknown_unit_name() {
        let cfg: RunConfig =
            serde_json::from_str(&fig1_json().replace("\"paper\"", "\"si\"")).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("si"));
    }

    #[test]
    fn explicit_units_accepted_and_checked() {
        let json = fig1_json().replace(
            "\"paper\"",
            r#"{"e_u": 1e-13, "p_u": 1e-4, "l_u": 2e6, "m_u": 1e5, "t_u": 2e15}"#,
        );
        let cfg: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg.resolve().unwrap().units.hbar_scaled, 0.005);
        let bad = fig1_json().replace("\"paper\"", r#"{"e_u": 1e-13, "p_u": 1e-4, "l_u": 2e6, "m_u": 1e5, "t_u": 1e15}"#);
        let cfg: RunConfig = serde_json::from_str(&bad).unwrap();
        assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn grid_overrides_need_oracle() {
        let json = fig1_json()
            .replace("\"both\"", "\"analytic\"")
            .replace(
                "\"evolve\"",
                "\"grid\": {\"dt\": 1e-4, \"n\": 65536}, \"evolve\"",
            );
        let cfg: RunConfig = serde_json::from_str(&json).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("oracle"));
    }

    #[test]
    fn half_open_box_override_rejected() {
        let json = fig1_json().replace(
            "\"evolve\"",
            "\"grid\": {\"x_min\": -100.0}, \"evolve\"",
        );
        let cfg: RunConfig = serde_json::from_str(&json).unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn negative_field_named_in_error() {
        let json = fig1_json().replace("102.5", "-1.0");
        let cfg: RunConfig = serde_json::from_str(&json).unwrap();
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("barrier"));
    }

    #[test]
    fn unknown_key_rejected_at_parse() {
        let json = fig1_json().replace("\"engine\"", "\"engime\"");
        assert!(serde_json::from_str::<RunConfig>(&json).is_err());
    }

    #[test]
    fn roundtrips_through_json() {
        let cfg: RunConfig = serde_json::from_str(&fig1_json()).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.barrier.v0, cfg.barrier.v0);
        assert_eq!(back.engine, cfg.engine);
    }
}
