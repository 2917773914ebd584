//! Resource and system noise knobs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::state::{ghz_state, werner_ghz, DensityMatrix};

/// Noise applied to a run. The default is noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Werner fidelity parameter of the GHZ resource; 1 is a pure GHZ state.
    pub ghz_werner_p: f64,
    /// White-noise weight mixed into the system state; 0 leaves it alone.
    pub system_depolarizing: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { ghz_werner_p: 1.0, system_depolarizing: 0.0 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ghz_werner_p) {
            return arg(format!("ghz_werner_p {} outside [0, 1]", self.ghz_werner_p));
        }
        if !(0.0..=1.0).contains(&self.system_depolarizing) {
            return arg(format!("system_depolarizing {} outside [0, 1]", self.system_depolarizing));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.ghz_werner_p == 1.0 && self.system_depolarizing == 0.0
    }

    /// GHZ resource of the given width under this configuration.
    pub fn ghz(&self, width: usize) -> Result<DensityMatrix> {
        self.validate()?;
        if self.ghz_werner_p == 1.0 {
            Ok(ghz_state(width)?.density())
        } else {
            werner_ghz(width, self.ghz_werner_p)
        }
    }

    /// System state after the configured depolarizing noise.
    pub fn apply_system(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.validate()?;
        apply_depolarizing(rho, self.system_depolarizing)
    }
}

/// `(1 − strength)·ρ + strength·I/2^N`.
pub fn apply_depolarizing(rho: &DensityMatrix, strength: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&strength) {
        return arg(format!("depolarizing strength {strength} outside [0, 1]"));
    }
    let d = rho.dim();
    let white = DMatrix::<Complex64>::identity(d, d) * Complex64::new(strength / d as f64, 0.0);
    DensityMatrix::new(rho.num_qubits(), rho.entries() * Complex64::new(1.0 - strength, 0.0) + white)
}
