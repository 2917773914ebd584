//! Element recovery from teleporter runs.
//!
//! After the prober's Pauli frame is undone it holds the logical qubit
//! `[[ρ_mm, ρ_mn], [ρ_nm, ρ_nn]] / w`, so `⟨X⟩ = 2 Re(ρ_mn)/w` and
//! `⟨Y⟩ = −2 Im(ρ_mn)/w`. The normalized element is `(⟨X⟩ − i⟨Y⟩)/2` and the
//! recovered element is that times the acceptance weight `w`, the
//! probability that a shot teleports the subspace `{|m>, |n>}`. With an ideal
//! resource `w = ρ_mm + ρ_nn`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{prober_state_for, run_exact, BranchTable};
use crate::error::{arg, Error, Result};
use crate::pauli::Pauli;
use crate::plan::{compile_plan, ElementIndex};
use crate::rng::{sample_cdf, ShotStream};
use crate::state::DensityMatrix;

/// Elements whose acceptance weight is below this are unmeasurable.
pub const MIN_WEIGHT: f64 = 1e-12;

const SHOT_CHUNK: u64 = 1 << 15;
const POPULATION_TAG: u64 = 0x504F_5055_4C41_5445;
const CLASS_TAG: u64 = 0x434C_4153_5345_5300;

/// A recovered density-matrix element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementEstimate {
    pub element: ElementIndex,
    /// Recovered `ρ_mn`.
    pub value: Complex64,
    /// `ρ_mn / w`, read off the prober.
    pub normalized_value: Complex64,
    pub x_mean: f64,
    pub y_mean: f64,
    /// Standard errors of `value`.
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// Acceptance weight `w` (exact, or the accepted fraction when sampled).
    pub weight: f64,
    /// 0 in exact mode.
    pub shots_used: u64,
    pub accepted_shots: u64,
    pub p_correction: f64,
}

impl ElementEstimate {
    pub fn is_exact(&self) -> bool {
        self.shots_used == 0
    }

    pub fn to_record(&self) -> EstimateRecord {
        EstimateRecord {
            m: self.element.m_bits(),
            n: self.element.n_bits(),
            re: self.value.re,
            im: self.value.im,
            stderr_re: self.stderr_re,
            stderr_im: self.stderr_im,
            shots: self.shots_used,
            accepted: self.accepted_shots,
            p: self.p_correction,
        }
    }
}

/// Flat export of an estimate (one JSON object or CSV row).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub m: String,
    pub n: String,
    pub re: f64,
    pub im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub shots: u64,
    pub accepted: u64,
    pub p: f64,
}

/// Which shots count toward an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acceptance {
    /// Every outcome that teleports `{|m>, |n>}`; its Pauli frame is undone
    /// classically on the prober result.
    #[default]
    Subspace,
    /// Only the success outcome (Z results `m_i`, Bell results `(m_j, 0)`).
    /// The weight is rescaled by the number of equally likely target outcomes.
    IdentityOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProberBasis {
    X,
    Y,
}

/// One simulated shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    pub branch_id: usize,
    pub prober_basis: ProberBasis,
    /// ±1 as measured on the prober, before any frame correction.
    pub prober_result: i8,
}

fn bloch_xy(s: &DensityMatrix) -> (f64, f64) {
    let c = s.entry(0, 1);
    (2.0 * c.re, -2.0 * c.im)
}

/// Sign that the frame correction `V` imprints on X and Y results.
fn frame_signs(v: Pauli) -> (i64, i64) {
    match v {
        Pauli::I => (1, 1),
        Pauli::X => (1, -1),
        Pauli::Y => (-1, 1),
        Pauli::Z => (-1, -1),
    }
}

/// Exact recovery from an existing table. Any element in the table's
/// teleporter class can be read.
pub fn estimate_from_table(table: &BranchTable, e: &ElementIndex) -> Result<ElementEstimate> {
    let weight = table.acceptance_probability(e);
    if weight < MIN_WEIGHT {
        return Err(Error::Unmeasurable { m: e.m(), n: e.n(), weight });
    }
    let prober = prober_state_for(table, e)?;
    let (x, y) = bloch_xy(&prober);
    let normalized = Complex64::new(x, -y) / 2.0;
    Ok(ElementEstimate {
        element: *e,
        value: normalized * weight,
        normalized_value: normalized,
        x_mean: x,
        y_mean: y,
        stderr_re: 0.0,
        stderr_im: 0.0,
        weight,
        shots_used: 0,
        accepted_shots: 0,
        p_correction: 1.0,
    })
}

/// Exact recovery of `ρ_mn` through the teleporter for `e`.
pub fn estimate_exact(rho: &DensityMatrix, e: &ElementIndex, ghz: &DensityMatrix) -> Result<ElementEstimate> {
    let plan = compile_plan(e)?;
    let table = run_exact(rho, &plan, ghz)?;
    estimate_from_table(&table, e)
}

struct Sampler {
    cdf: Vec<f64>,
    /// per branch: (slot into the tally vector, X result sign, Y result sign)
    accept: Vec<Option<(usize, i64, i64)>>,
    raw_xy: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    nx: u64,
    sx: i64,
    ny: u64,
    sy: i64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.nx += o.nx;
        self.sx += o.sx;
        self.ny += o.ny;
        self.sy += o.sy;
        self
    }
}

impl Sampler {
    fn new(table: &BranchTable, elements: &[ElementIndex], acceptance: Acceptance) -> Self {
        let mut acc = 0.0;
        let cdf = table
            .branches
            .iter()
            .map(|b| {
                acc += b.probability;
                acc
            })
            .collect();
        let accept = table
            .branches
            .iter()
            .map(|b| {
                b.prober_state.as_ref()?;
                let (slot, frame) =
                    elements.iter().enumerate().find_map(|(i, e)| b.frame_correction(e).map(|f| (i, f)))?;
                if acceptance == Acceptance::IdentityOnly && !b.is_identity() {
                    return None;
                }
                let (sx, sy) = frame_signs(frame);
                Some((slot, sx, sy))
            })
            .collect();
        let raw_xy = table
            .branches
            .iter()
            .map(|b| b.prober_state.as_ref().map(bloch_xy).unwrap_or((0.0, 0.0)))
            .collect();
        Sampler { cdf, accept, raw_xy }
    }

    fn shot(&self, draws: [f64; 4]) -> ShotRecord {
        let branch_id = sample_cdf(&self.cdf, draws[0] * self.cdf.last().copied().unwrap_or(1.0));
        let prober_basis = if draws[1] < 0.5 { ProberBasis::X } else { ProberBasis::Y };
        let (x, y) = self.raw_xy[branch_id];
        let e = if prober_basis == ProberBasis::X { x } else { y };
        let prober_result = if draws[2] < 0.5 * (1.0 + e) { 1 } else { -1 };
        ShotRecord { branch_id, prober_basis, prober_result }
    }

    fn tally(&self, stream: &ShotStream, shots: u64, slots: usize) -> Vec<Tally> {
        let chunks: Vec<(u64, u64)> =
            (0..shots).step_by(SHOT_CHUNK as usize).map(|s| (s, (s + SHOT_CHUNK).min(shots))).collect();
        chunks
            .into_par_iter()
            .map(|(start, end)| {
                let mut t = vec![Tally::default(); slots];
                for draws in stream.shots(start, end) {
                    let rec = self.shot(draws);
                    let Some((slot, sx, sy)) = self.accept[rec.branch_id] else { continue };
                    let r = i64::from(rec.prober_result);
                    match rec.prober_basis {
                        ProberBasis::X => {
                            t[slot].nx += 1;
                            t[slot].sx += sx * r;
                        }
                        ProberBasis::Y => {
                            t[slot].ny += 1;
                            t[slot].sy += sy * r;
                        }
                    }
                }
                t
            })
            .reduce(
                || vec![Tally::default(); slots],
                |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
            )
    }
}

/// Mean and standard error of ±1 results.
fn pm_one_stats(n: u64, sum: i64) -> (f64, f64) {
    match n {
        0 => (0.0, 1.0),
        1 => (sum as f64, 1.0),
        _ => {
            let nf = n as f64;
            let mean = sum as f64 / nf;
            let var = (nf / (nf - 1.0)) * (1.0 - mean * mean).max(0.0);
            (mean, (var / nf).sqrt())
        }
    }
}

fn finish(e: ElementIndex, t: Tally, shots: u64, weight_scale: f64) -> Result<ElementEstimate> {
    let accepted = t.nx + t.ny;
    if accepted == 0 {
        return Err(Error::InsufficientStatistics { accepted: 0, shots });
    }
    let (x, se_x) = pm_one_stats(t.nx, t.sx);
    let (y, se_y) = pm_one_stats(t.ny, t.sy);
    let frac = accepted as f64 / shots as f64;
    let weight = (frac * weight_scale).min(1.0);
    let se_w = weight_scale * (frac * (1.0 - frac) / shots as f64).sqrt();
    let normalized = Complex64::new(x, -y) / 2.0;
    // delta method on w·x/2 and −w·y/2
    let stderr_re = ((weight * se_x / 2.0).powi(2) + (x / 2.0 * se_w).powi(2)).sqrt();
    let stderr_im = ((weight * se_y / 2.0).powi(2) + (y / 2.0 * se_w).powi(2)).sqrt();
    Ok(ElementEstimate {
        element: e,
        value: normalized * weight,
        normalized_value: normalized,
        x_mean: x,
        y_mean: y,
        stderr_re,
        stderr_im,
        weight,
        shots_used: shots,
        accepted_shots: accepted,
        p_correction: 1.0,
    })
}

/// Options for shot-based estimation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SamplingOptions {
    pub acceptance: Acceptance,
}

fn identity_scale(table: &BranchTable, acceptance: Acceptance) -> f64 {
    match acceptance {
        Acceptance::Subspace => 1.0,
        // 2 orientations × 2^k phase patterns, all equally likely
        Acceptance::IdentityOnly => (1u64 << (table.plan.k + 1)) as f64,
    }
}

/// Shot-based recovery of `ρ_mn`.
///
/// Each shot draws a joint outcome from the exact branch distribution, picks
/// the prober basis X or Y with probability 1/2, and draws a ±1 result. The
/// random stream is keyed by `(seed, m, n)` and addressed by shot index.
pub fn estimate_sampled(
    rho: &DensityMatrix,
    e: &ElementIndex,
    ghz: &DensityMatrix,
    shots: u64,
    seed: u64,
    opts: SamplingOptions,
) -> Result<ElementEstimate> {
    if shots == 0 {
        return arg("shots must be at least 1");
    }
    let plan = compile_plan(e)?;
    let table = run_exact(rho, &plan, ghz)?;
    let sampler = Sampler::new(&table, std::slice::from_ref(e), opts.acceptance);
    let stream = ShotStream::new(seed, &[e.num_qubits() as u64, e.m(), e.n()]);
    let t = sampler.tally(&stream, shots, 1)[0];
    finish(*e, t, shots, identity_scale(&table, opts.acceptance))
}

/// Shot-based recovery of several elements of one teleporter class from a
/// single configuration: each shot's outcome decides which element it
/// informs. Results follow the order of `elements`; an element that received
/// no shots yields `InsufficientStatistics`.
pub fn estimate_class_sampled(
    rho: &DensityMatrix,
    elements: &[ElementIndex],
    ghz: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<Vec<Result<ElementEstimate>>> {
    let Some(first) = elements.first() else { return Ok(Vec::new()) };
    if shots == 0 {
        return arg("shots must be at least 1");
    }
    if elements.iter().any(|e| e.xor_mask() != first.xor_mask() || e.num_qubits() != first.num_qubits()) {
        return arg("class estimation needs elements with a common m ⊕ n");
    }
    let plan = compile_plan(first)?;
    let table = run_exact(rho, &plan, ghz)?;
    let sampler = Sampler::new(&table, elements, Acceptance::Subspace);
    let stream = ShotStream::new(seed, &[CLASS_TAG, first.num_qubits() as u64, first.xor_mask()]);
    let tallies = sampler.tally(&stream, shots, elements.len());
    Ok(elements.iter().zip(tallies).map(|(e, t)| finish(*e, t, shots, 1.0)).collect())
}

/// First `count` shots of an element run, for inspection.
pub fn draw_shots(table: &BranchTable, count: u64, seed: u64) -> Vec<ShotRecord> {
    let e = table.plan.element;
    let sampler = Sampler::new(table, &[e], Acceptance::Subspace);
    let stream = ShotStream::new(seed, &[e.num_qubits() as u64, e.m(), e.n()]);
    stream.shots(0, count).map(|d| sampler.shot(d)).collect()
}

/// How populations are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationMode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

/// Z^⊗N populations: the diagonal, or multinomial frequencies.
pub fn estimate_populations(rho: &DensityMatrix, mode: PopulationMode) -> Result<Vec<f64>> {
    let diag = rho.diagonal();
    match mode {
        PopulationMode::Exact => Ok(diag),
        PopulationMode::Sampled { shots, seed } => {
            if shots == 0 {
                return arg("shots must be at least 1");
            }
            let mut acc = 0.0;
            let cdf: Vec<f64> = diag
                .iter()
                .map(|&p| {
                    acc += p.max(0.0);
                    acc
                })
                .collect();
            let total = acc;
            let stream = ShotStream::new(seed, &[POPULATION_TAG, rho.num_qubits() as u64]);
            let chunks: Vec<(u64, u64)> =
                (0..shots).step_by(SHOT_CHUNK as usize).map(|s| (s, (s + SHOT_CHUNK).min(shots))).collect();
            let counts = chunks
                .into_par_iter()
                .map(|(a, b)| {
                    let mut c = vec![0u64; cdf.len()];
                    for d in stream.shots(a, b) {
                        c[sample_cdf(&cdf, d[0] * total)] += 1;
                    }
                    c
                })
                .reduce(|| vec![0u64; cdf.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
            Ok(counts.into_iter().map(|c| c as f64 / shots as f64).collect())
        }
    }
}

/// Divides out a characterized resource fidelity `p`.
pub fn correct_for_noise(est: &ElementEstimate, p: f64) -> Result<ElementEstimate> {
    if !(p > 0.0 && p <= 1.0) {
        return arg(format!("noise parameter {p} outside (0, 1]"));
    }
    Ok(ElementEstimate {
        value: est.value / p,
        stderr_re: est.stderr_re / p,
        stderr_im: est.stderr_im / p,
        p_correction: est.p_correction * p,
        ..est.clone()
    })
}

/// Groups elements by teleporter class, keeping first-seen order.
pub fn group_by_class(elements: &[ElementIndex]) -> Vec<Vec<ElementIndex>> {
    let mut order: Vec<u64> = Vec::new();
    let mut groups: HashMap<u64, Vec<ElementIndex>> = HashMap::new();
    for e in elements {
        let g = groups.entry(e.xor_mask()).or_default();
        if g.is_empty() {
            order.push(e.xor_mask());
        }
        g.push(*e);
    }
    order.into_iter().map(|k| groups.remove(&k).unwrap_or_default()).collect()
}
