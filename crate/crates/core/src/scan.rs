//! Two-step sparse reconstruction.
//!
//! Step one reads the populations in the computational basis and keeps the
//! support `{i : ρ_ii > threshold}`. Step two estimates one element per
//! unordered support pair with its teleporter and fills in the rest by
//! Hermiticity. For an `s`-sparse diagonal that costs `1 + s(s−1)/2`
//! settings against `3^N` for Pauli tomography.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::run_exact;
use crate::error::{arg, Error, Result};
use crate::estimator::{
    correct_for_noise, estimate_class_sampled, estimate_exact, estimate_from_table, estimate_populations,
    estimate_sampled, group_by_class, ElementEstimate, EstimateRecord, PopulationMode, SamplingOptions,
};
use crate::plan::{compile_plan, format_bits, settings_for_tomography, ElementIndex, MAX_INDEX_QUBITS};
use crate::state::{epr, DensityMatrix, DensityMatrixRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub population_threshold: f64,
    /// Shots per setting; 0 selects exact mode.
    pub shots_per_setting: u64,
    /// Resource fidelity to divide out of every estimate; 1 disables.
    pub p_correction: f64,
    /// Share one teleporter configuration among all candidates of a class.
    pub reuse_branches: bool,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            population_threshold: 1e-3,
            shots_per_setting: 0,
            p_correction: 1.0,
            reuse_branches: false,
            seed: 0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.population_threshold) {
            return arg(format!("population threshold {} outside [0, 1)", self.population_threshold));
        }
        if !(self.p_correction > 0.0 && self.p_correction <= 1.0) {
            return arg(format!("p_correction {} outside (0, 1]", self.p_correction));
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        self.shots_per_setting == 0
    }

    /// Threshold actually applied: sampled runs never go below `5/shots`.
    pub fn effective_threshold(&self) -> f64 {
        if self.is_exact() {
            self.population_threshold
        } else {
            self.population_threshold.max(5.0 / self.shots_per_setting as f64)
        }
    }
}

/// Which elements a scan measures, known before any teleporter runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanPlan {
    pub num_qubits: usize,
    pub support: Vec<u64>,
    /// Unordered support pairs `(m, n)`, `m < n`, in ascending order.
    pub candidates: Vec<ElementIndex>,
    /// Distinct `m ⊕ n` among the candidates.
    pub classes: usize,
    pub settings_used: u64,
    pub tomography_settings: u128,
}

/// Candidate elements and settings for a given support. Works for any
/// register size the index type holds; no state is touched.
pub fn plan_scan(num_qubits: usize, support: &[u64], reuse_branches: bool) -> Result<ScanPlan> {
    if num_qubits == 0 || num_qubits > MAX_INDEX_QUBITS {
        return arg(format!("register of {num_qubits} qubits not supported"));
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.is_empty() {
        return arg("empty support");
    }
    if let Some(&top) = support.last() {
        if num_qubits < 64 && top >> num_qubits != 0 {
            return arg(format!("support index {top} outside a {num_qubits}-qubit register"));
        }
    }
    let mut candidates = Vec::with_capacity(support.len() * (support.len() - 1) / 2);
    for (i, &m) in support.iter().enumerate() {
        for &n in &support[i + 1..] {
            candidates.push(ElementIndex::new(num_qubits, m, n)?);
        }
    }
    let classes = group_by_class(&candidates).len();
    let per_setting = if reuse_branches { classes } else { candidates.len() };
    Ok(ScanPlan {
        num_qubits,
        support,
        settings_used: 1 + per_setting as u64,
        classes,
        candidates,
        tomography_settings: settings_for_tomography(num_qubits),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub populations: Vec<f64>,
    pub support: Vec<u64>,
    pub candidates: Vec<ElementIndex>,
    pub estimates: Vec<ElementEstimate>,
    pub settings_used: u64,
    pub tomography_settings: u128,
    pub reconstructed: DensityMatrix,
    pub psd_projected: bool,
}

impl ScanReport {
    pub fn num_qubits(&self) -> usize {
        self.reconstructed.num_qubits()
    }

    pub fn to_record(&self) -> ScanReportRecord {
        let n = self.num_qubits();
        ScanReportRecord {
            num_qubits: n,
            threshold: self.config.effective_threshold(),
            populations: self.populations.clone(),
            support: self.support.iter().map(|&i| format_bits(i, n)).collect(),
            estimates: self.estimates.iter().map(ElementEstimate::to_record).collect(),
            settings_used: self.settings_used,
            tomography_settings: self.tomography_settings.to_string(),
            psd_projected: self.psd_projected,
            reconstructed: (&self.reconstructed).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReportRecord {
    pub num_qubits: usize,
    pub threshold: f64,
    pub populations: Vec<f64>,
    pub support: Vec<String>,
    pub estimates: Vec<EstimateRecord>,
    pub settings_used: u64,
    /// Decimal string: `3^N` outgrows a JSON double for large `N`.
    pub tomography_settings: String,
    pub psd_projected: bool,
    pub reconstructed: DensityMatrixRecord,
}

fn estimate_candidates(
    rho: &DensityMatrix,
    plan: &ScanPlan,
    cfg: &ScanConfig,
    ghz_supplier: &(dyn Fn(usize) -> Result<DensityMatrix> + Sync),
) -> Result<Vec<ElementEstimate>> {
    let ghz_for = |e: &ElementIndex| ghz_supplier(e.hamming_distance() + 1);
    if !cfg.reuse_branches {
        return plan
            .candidates
            .par_iter()
            .map(|e| {
                if cfg.is_exact() {
                    estimate_exact(rho, e, &ghz_for(e)?)
                } else {
                    estimate_sampled(
                        rho,
                        e,
                        &ghz_for(e)?,
                        cfg.shots_per_setting,
                        cfg.seed,
                        SamplingOptions::default(),
                    )
                }
            })
            .collect();
    }
    let groups = group_by_class(&plan.candidates);
    let per_group: Vec<Vec<ElementEstimate>> = groups
        .par_iter()
        .map(|g| {
            let ghz = ghz_for(&g[0])?;
            if cfg.is_exact() {
                let table = run_exact(rho, &compile_plan(&g[0])?, &ghz)?;
                g.iter().map(|e| estimate_from_table(&table, e)).collect()
            } else {
                estimate_class_sampled(rho, g, &ghz, cfg.shots_per_setting, cfg.seed)?.into_iter().collect()
            }
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<ElementEstimate> = per_group.into_iter().flatten().collect();
    all.sort_by_key(|e| e.element);
    Ok(all)
}

/// Runs both steps on `rho`. `ghz_supplier` returns the resource for a
/// given GHZ width, which is where resource noise enters.
pub fn scan(
    rho: &DensityMatrix,
    cfg: &ScanConfig,
    ghz_supplier: impl Fn(usize) -> Result<DensityMatrix> + Sync,
) -> Result<ScanReport> {
    cfg.validate()?;
    let n = rho.num_qubits();
    let mode = if cfg.is_exact() {
        PopulationMode::Exact
    } else {
        PopulationMode::Sampled { shots: cfg.shots_per_setting, seed: cfg.seed }
    };
    let populations = estimate_populations(rho, mode)?;
    let threshold = cfg.effective_threshold();
    let support: Vec<u64> =
        populations.iter().enumerate().filter(|(_, &p)| p > threshold).map(|(i, _)| i as u64).collect();
    if support.is_empty() {
        return Err(Error::DegenerateState { threshold });
    }
    let plan = plan_scan(n, &support, cfg.reuse_branches)?;
    let mut estimates = estimate_candidates(rho, &plan, cfg, &ghz_supplier)?;
    if cfg.p_correction < 1.0 {
        estimates =
            estimates.iter().map(|e| correct_for_noise(e, cfg.p_correction)).collect::<Result<_>>()?;
    }
    let d = rho.dim();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for (i, &p) in populations.iter().enumerate() {
        m[(i, i)] = Complex64::new(p, 0.0);
    }
    for est in &estimates {
        let (a, b) = (est.element.m() as usize, est.element.n() as usize);
        m[(a, b)] = est.value;
        m[(b, a)] = est.value.conj();
    }
    let (reconstructed, psd_projected) = DensityMatrix::project_physical(n, m)?;
    Ok(ScanReport {
        config: *cfg,
        populations,
        support: plan.support,
        candidates: plan.candidates,
        estimates,
        settings_used: plan.settings_used,
        tomography_settings: plan.tomography_settings,
        reconstructed,
        psd_projected,
    })
}

/// Settings needed for an `s`-sparse diagonal on `N` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SettingsAccounting {
    pub num_qubits: usize,
    pub support_size: u64,
    /// `1 + s(s−1)/2`: one population setting plus one per unordered pair.
    pub scan: u128,
    /// `s(s−1)`: every ordered off-diagonal element.
    pub ordered_elements: u128,
    pub tomography: u128,
}

pub fn settings_accounting(num_qubits: usize, support_size: u64) -> Result<SettingsAccounting> {
    if num_qubits == 0 || num_qubits > MAX_INDEX_QUBITS {
        return arg(format!("register of {num_qubits} qubits not supported"));
    }
    if support_size == 0 || u128::from(support_size) > 1u128 << num_qubits {
        return arg(format!("support size {support_size} outside 1..=2^{num_qubits}"));
    }
    let s = u128::from(support_size);
    Ok(SettingsAccounting {
        num_qubits,
        support_size,
        scan: 1 + s * (s - 1) / 2,
        ordered_elements: s * (s - 1),
        tomography: settings_for_tomography(num_qubits),
    })
}

fn ry(theta: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    let r = |x: f64| Complex64::new(x, 0.0);
    [[r(c), r(-s)], [r(s), r(c)]]
}

fn rz(phi: f64) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    [[Complex64::from_polar(1.0, -phi / 2.0), z], [z, Complex64::from_polar(1.0, phi / 2.0)]]
}

/// `(Rz(φ)·Ry(θ) ⊗ I)` applied to the EPR pair, angles in degrees.
pub fn prepare_fig5_state(theta_deg: f64, phi_deg: f64) -> Result<DensityMatrix> {
    if !theta_deg.is_finite() || !phi_deg.is_finite() {
        return arg("rotation angles must be finite");
    }
    let s = epr().apply_1q(0, ry(theta_deg.to_radians()))?.apply_1q(0, rz(phi_deg.to_radians()))?;
    Ok(s.density())
}

#[cfg(test)]
mod tests;
