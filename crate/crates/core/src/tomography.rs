//! Standard Pauli-basis state tomography by linear inversion.
//!
//! Each of the `3^N` settings measures every qubit in X, Y or Z. A Pauli
//! string is read from every setting that agrees with it on its support,
//! and the state is `Σ_P ⟨P⟩ P / 2^N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{arg, Result};
use crate::pauli::{Pauli, PauliString};
use crate::rng::{sample_cdf, ShotStream};
use crate::state::{check_cap, DensityMatrix};

const TOMOGRAPHY_TAG: u64 = 0x544F_4D4F_4752_4150;
const BASES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// Outcome distribution of one local setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingData {
    /// One of X, Y, Z per qubit, qubit 1 first.
    pub bases: String,
    /// Outcome probabilities (exact) or frequencies (sampled), indexed by
    /// the outcome bitstring; bit 0 is the +1 eigenvalue.
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    pub reconstructed: DensityMatrix,
    pub settings_used: u64,
    pub settings: Vec<SettingData>,
    /// `⟨P⟩` for every Pauli string, base-4 index with I, X, Y, Z = 0..3 and
    /// qubit 1 most significant.
    pub pauli_expectations: Vec<f64>,
    pub psd_projected: bool,
}

impl TomographyResult {
    pub fn num_qubits(&self) -> usize {
        self.reconstructed.num_qubits()
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        self.pauli_expectations[pauli_index(p)]
    }
}

fn pauli_index(p: &PauliString) -> usize {
    p.letters().iter().fold(0, |acc, &l| acc * 4 + Pauli::ALL.iter().position(|&a| a == l).unwrap_or(0))
}

fn setting_bases(index: usize, n: usize) -> Vec<Pauli> {
    let mut out = vec![Pauli::Z; n];
    let mut i = index;
    for q in (0..n).rev() {
        out[q] = BASES[i % 3];
        i /= 3;
    }
    out
}

fn rotation(basis: Pauli) -> [[Complex64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| Complex64::new(x, 0.0);
    match basis {
        Pauli::X => [[r(h), r(h)], [r(h), r(-h)]],
        // H·S†
        Pauli::Y => [[r(h), Complex64::new(0.0, -h)], [r(h), Complex64::new(0.0, h)]],
        _ => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
    }
}

fn setting_distribution(rho: &DensityMatrix, bases: &[Pauli]) -> Result<Vec<f64>> {
    let mut s = rho.clone();
    for (q, &b) in bases.iter().enumerate() {
        if b != Pauli::Z {
            s = s.apply_1q(q, rotation(b))?;
        }
    }
    Ok(s.diagonal().into_iter().map(|p| p.max(0.0)).collect())
}

/// In-place Walsh–Hadamard transform: `out[S] = Σ_o v[o] (−1)^{|o ∧ S|}`.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn invert(n: usize, settings: Vec<SettingData>) -> Result<TomographyResult> {
    let d = 1usize << n;
    let mut sums = vec![0.0; 1usize << (2 * n)];
    let mut counts = vec![0u32; 1usize << (2 * n)];
    for (si, data) in settings.iter().enumerate() {
        let bases = setting_bases(si, n);
        let mut e = data.probabilities.clone();
        walsh_hadamard(&mut e);
        for (support, &value) in e.iter().enumerate() {
            let idx = (0..n).fold(0usize, |acc, q| {
                let on = (support >> (n - 1 - q)) & 1 == 1;
                let l = if on { Pauli::ALL.iter().position(|&a| a == bases[q]).unwrap_or(0) } else { 0 };
                acc * 4 + l
            });
            sums[idx] += value;
            counts[idx] += 1;
        }
    }
    let expectations: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / f64::from(c)).collect();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    let norm = 1.0 / d as f64;
    for (idx, &e) in expectations.iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let mut letters = vec![Pauli::I; n];
        let mut i = idx;
        for q in (0..n).rev() {
            letters[q] = Pauli::ALL[i % 4];
            i /= 4;
        }
        let p = PauliString::new(letters);
        for y in 0..d {
            let (phase, y2) = p.act(y);
            m[(y2, y)] += phase * (e * norm);
        }
    }
    let (reconstructed, psd_projected) = DensityMatrix::project_physical(n, m)?;
    Ok(TomographyResult {
        reconstructed,
        settings_used: settings.len() as u64,
        settings,
        pauli_expectations: expectations,
        psd_projected,
    })
}

fn collect_settings(
    rho: &DensityMatrix,
    f: impl Fn(usize, Vec<f64>) -> Vec<f64> + Sync,
) -> Result<Vec<SettingData>> {
    let n = rho.num_qubits();
    check_cap(n)?;
    let total = 3usize.pow(n as u32);
    (0..total)
        .into_par_iter()
        .map(|si| {
            let bases = setting_bases(si, n);
            let p = setting_distribution(rho, &bases)?;
            Ok(SettingData { bases: bases.iter().map(|b| b.symbol()).collect(), probabilities: f(si, p) })
        })
        .collect()
}

/// Tomography from exact outcome distributions; returns the input up to
/// round-off.
pub fn tomograph_exact(rho: &DensityMatrix) -> Result<TomographyResult> {
    let settings = collect_settings(rho, |_, p| p)?;
    invert(rho.num_qubits(), settings)
}

/// Tomography from `shots_per_setting` multinomial draws per setting.
pub fn tomograph_sampled(rho: &DensityMatrix, shots_per_setting: u64, seed: u64) -> Result<TomographyResult> {
    if shots_per_setting == 0 {
        return arg("shots must be at least 1");
    }
    let n = rho.num_qubits();
    let settings = collect_settings(rho, |si, p| {
        let mut acc = 0.0;
        let cdf: Vec<f64> = p
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect();
        let stream = ShotStream::new(seed, &[TOMOGRAPHY_TAG, n as u64, si as u64]);
        let mut counts = vec![0u64; p.len()];
        for d in stream.shots(0, shots_per_setting) {
            counts[sample_cdf(&cdf, d[0] * acc)] += 1;
        }
        counts.into_iter().map(|c| c as f64 / shots_per_setting as f64).collect()
    })?;
    invert(n, settings)
}
