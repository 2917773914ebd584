//! Resolved run configuration: defaults, then `--config`, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use teleprobe::noise::NoiseConfig;
use teleprobe::scan::prepare_fig5_state;
use teleprobe::state::{basis_state, epr, ghz_state, maximally_mixed, DensityMatrixRecord, PureStateRecord};
use teleprobe::{DensityMatrix, ElementIndex, PureState};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub state: Option<String>,
    pub state_file: Option<PathBuf>,
    pub theta: f64,
    pub phi: f64,
    pub num_qubits: Option<usize>,
    pub m: Option<String>,
    pub n: Option<String>,
    /// 0 runs the exact branch calculation.
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseConfig,
    pub p_correction: f64,
    pub threshold: f64,
    pub reuse_branches: bool,
    pub dump_branches: bool,
    pub tol: f64,
    pub class: Option<String>,
    pub fit: Option<f64>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            state: None,
            state_file: None,
            theta: 56.0,
            phi: 20.0,
            num_qubits: None,
            m: None,
            n: None,
            shots: 0,
            seed: 0,
            noise: NoiseConfig::default(),
            p_correction: 1.0,
            threshold: 1e-3,
            reuse_branches: false,
            dump_branches: false,
            tol: 1e-8,
            class: None,
            fit: None,
            format: Format::Json,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StateFile {
    Pure(PureStateRecord),
    Mixed(DensityMatrixRecord),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn is_exact(&self) -> bool {
        self.shots == 0
    }

    /// The system state after any configured depolarizing noise.
    pub fn system_state(&self) -> Result<DensityMatrix, CliError> {
        let rho = match (&self.state, &self.state_file) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either --state or --state-file, not both".into()))
            }
            (None, None) => return Err(CliError::Usage("no state: pass --state or --state-file".into())),
            (Some(name), None) => self.named_state(name)?,
            (None, Some(path)) => {
                let text =
                    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                match serde_json::from_str::<StateFile>(&text).map_err(|_| {
                    CliError::Usage(format!("{}: not a pure-state or density-matrix record", path.display()))
                })? {
                    StateFile::Pure(r) => PureState::try_from(r)?.density(),
                    StateFile::Mixed(r) => DensityMatrix::try_from(r)?,
                }
            }
        };
        Ok(self.noise.apply_system(&rho)?)
    }

    fn named_state(&self, name: &str) -> Result<DensityMatrix, CliError> {
        let width = |prefix: &str| -> Result<usize, CliError> {
            name[prefix.len()..]
                .parse()
                .map_err(|_| CliError::Usage(format!("bad qubit count in state '{name}'")))
        };
        Ok(match name {
            "epr" => epr().density(),
            "fig5" => prepare_fig5_state(self.theta, self.phi)?,
            _ if name.starts_with("ghz") => ghz_state(width("ghz")?)?.density(),
            _ if name.starts_with("mixed") => maximally_mixed(width("mixed")?)?,
            _ if name.starts_with("basis:") => {
                let bits = &name["basis:".len()..];
                let index = teleprobe::plan::parse_bits(bits)?;
                basis_state(bits.len(), index as usize)?.density()
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown state '{name}' (expected epr, fig5, ghzN, mixedN or basis:BITS)"
                )))
            }
        })
    }

    /// The element named by `--m`/`--nn`, checked against `--n` and `expected_qubits`.
    pub fn element(&self, expected_qubits: Option<usize>) -> Result<ElementIndex, CliError> {
        let (Some(m), Some(n)) = (&self.m, &self.n) else {
            return Err(CliError::Usage("an element needs both --m and --nn".into()));
        };
        let e = ElementIndex::from_bits(m, n)?;
        for want in [self.num_qubits, expected_qubits].into_iter().flatten() {
            if e.num_qubits() != want {
                return Err(CliError::Usage(format!(
                    "element bitstrings have {} qubits, expected {want}",
                    e.num_qubits()
                )));
            }
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_states() {
        let cfg = RunConfig { state: Some("ghz3".into()), ..Default::default() };
        assert_eq!(cfg.system_state().unwrap().num_qubits(), 3);
        let cfg = RunConfig { state: Some("basis:101".into()), ..Default::default() };
        assert_eq!(cfg.system_state().unwrap().entry(5, 5).re, 1.0);
        let cfg = RunConfig { state: Some("qux".into()), ..Default::default() };
        assert!(matches!(cfg.system_state(), Err(CliError::Usage(_))));
        assert!(RunConfig::default().system_state().is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig { shots: 10, seed: 3, m: Some("01".into()), ..Default::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
        let partial: RunConfig =
            serde_json::from_str(r#"{"state": "epr", "noise": {"ghz_werner_p": 0.5}}"#).unwrap();
        assert_eq!(partial.theta, 56.0);
        assert_eq!(partial.noise.ghz_werner_p, 0.5);
        assert!(serde_json::from_str::<RunConfig>(r#"{"shotz": 1}"#).is_err());
    }

    #[test]
    fn element_checks() {
        let cfg = RunConfig {
            m: Some("01".into()),
            n: Some("10".into()),
            num_qubits: Some(3),
            ..Default::default()
        };
        assert!(cfg.element(None).is_err());
        let cfg = RunConfig { num_qubits: None, ..cfg };
        assert_eq!(cfg.element(Some(2)).unwrap().xor_mask(), 3);
    }
}
