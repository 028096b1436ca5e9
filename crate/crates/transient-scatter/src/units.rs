//! Scaled unit system.
//!
//! All physics in this crate runs in units scaled off atomic units so that the
//! studied collision has O(1)..O(100) numbers. A [`UnitSystem`] stores the five
//! conversion factors (each "how many atomic units is one scaled unit") plus
//! the reduced Planck constant expressed in the scaled units. hbar is stored,
//! not recomputed at call sites, so there is a single source of truth.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Conversion factors to atomic units, plus hbar in scaled units.
///
/// Not every choice of five factors is consistent: kinetic energy, action and
/// velocity each tie three of them together. `validate` checks all of that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    #[serde(rename = "e_u")]
    pub energy_unit: f64,
    #[serde(rename = "p_u")]
    pub momentum_unit: f64,
    #[serde(rename = "l_u")]
    pub length_unit: f64,
    #[serde(rename = "m_u")]
    pub mass_unit: f64,
    #[serde(rename = "t_u")]
    pub time_unit: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub hbar_scaled: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

const REL_TOL: f64 = 1e-12;

impl UnitSystem {
    /// Builds a system from the five factors; hbar follows from hbar = 1 a.u.
    pub fn new(e_u: f64, p_u: f64, l_u: f64, m_u: f64, t_u: f64) -> UnitSystem {
        UnitSystem {
            energy_unit: e_u,
            momentum_unit: p_u,
            length_unit: l_u,
            mass_unit: m_u,
            time_unit: t_u,
            hbar_scaled: 1.0 / (p_u * l_u),
        }
    }

    /// The scaled system used throughout: e_u=1e-13, p_u=1e-4, l_u=2e6,
    /// m_u=1e5, t_u=2e15 atomic units, giving hbar_scaled = 0.005.
    pub fn paper() -> UnitSystem {
        UnitSystem::new(1e-13, 1e-4, 2e6, 1e5, 2e15)
    }

    /// Fills in `hbar_scaled` when a deserialized config omitted it.
    pub fn with_hbar(mut self) -> UnitSystem {
        if self.hbar_scaled == 0.0 {
            self.hbar_scaled = 1.0 / (self.momentum_unit * self.length_unit);
        }
        self
    }

    /// Names of the consistency relations violated by this system.
    ///
    /// Empty means consistent. Non-positive fields are a hard error: the
    /// relations below would be meaningless.
    pub fn diagnostics(&self) -> Result<Vec<String>> {
        let fields = [
            ("e_u", self.energy_unit),
            ("p_u", self.momentum_unit),
            ("l_u", self.length_unit),
            ("m_u", self.mass_unit),
            ("t_u", self.time_unit),
            ("hbar_scaled", self.hbar_scaled),
        ];
        for (name, v) in fields {
            if !(v > 0.0) {
                return Err(Error::Input(format!("unit field {name} must be positive, got {v}")));
            }
        }
        let mut bad = Vec::new();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        if rel(self.momentum_unit * self.momentum_unit / self.mass_unit, self.energy_unit) > REL_TOL {
            bad.push("kinetic-energy consistency: p_u^2/m_u == e_u".to_string());
        }
        if rel(self.energy_unit * self.time_unit, self.momentum_unit * self.length_unit) > REL_TOL {
            bad.push("action consistency: e_u*t_u == p_u*l_u".to_string());
        }
        if rel(self.momentum_unit * self.time_unit / self.mass_unit, self.length_unit) > REL_TOL {
            bad.push("velocity consistency: p_u*t_u/m_u == l_u".to_string());
        }
        if rel(self.hbar_scaled, 1.0 / (self.momentum_unit * self.length_unit)) > REL_TOL {
            bad.push("hbar consistency: hbar_scaled == 1/(p_u*l_u)".to_string());
        }
        Ok(bad)
    }

    /// True iff all four consistency relations hold to 1e-12 relative.
    pub fn validate(&self) -> Result<bool> {
        Ok(self.diagnostics()?.is_empty())
    }
}
