//! Teleporter characterization with four logical test states.
//!
//! Each class is fed `0_L`, `1_L`, `+_L` and `R_L` on its representative
//! pair `{|m>, |n>}`. The prober's Bloch vectors give the output fidelities
//! and, by linearity, the full single-qubit process.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex_serde;
use crate::engine::{prober_state_for, run_exact};
use crate::error::{arg, Result};
use crate::noise::NoiseConfig;
use crate::pauli::Pauli;
use crate::plan::{classify, compile_plan, ElementIndex, TeleporterClass};
use crate::rng::ShotStream;
use crate::state::{DensityMatrix, PureState};

const BENCH_TAG: u64 = 0x4245_4E43_4800_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LogicalTestState {
    #[serde(rename = "0_L")]
    Zero,
    #[serde(rename = "1_L")]
    One,
    #[serde(rename = "+_L")]
    Plus,
    #[serde(rename = "R_L")]
    R,
}

impl LogicalTestState {
    pub const ALL: [LogicalTestState; 4] =
        [LogicalTestState::Zero, LogicalTestState::One, LogicalTestState::Plus, LogicalTestState::R];

    pub fn label(self) -> &'static str {
        match self {
            LogicalTestState::Zero => "0_L",
            LogicalTestState::One => "1_L",
            LogicalTestState::Plus => "+_L",
            LogicalTestState::R => "R_L",
        }
    }

    /// Ideal Bloch vector (X, Y, Z).
    pub fn bloch(self) -> [f64; 3] {
        match self {
            LogicalTestState::Zero => [0.0, 0.0, 1.0],
            LogicalTestState::One => [0.0, 0.0, -1.0],
            LogicalTestState::Plus => [1.0, 0.0, 0.0],
            LogicalTestState::R => [0.0, 1.0, 0.0],
        }
    }

    /// Single-qubit amplitudes `(α, β)` on `(|m>, |n>)`.
    pub fn logical_amplitudes(self) -> [Complex64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (z, o) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        match self {
            LogicalTestState::Zero => [o, z],
            LogicalTestState::One => [z, o],
            LogicalTestState::Plus => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            LogicalTestState::R => [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        }
    }

    /// The register state `α|m> + β|n>`.
    pub fn embed(self, e: &ElementIndex) -> Result<PureState> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << e.num_qubits()];
        let [a, b] = self.logical_amplitudes();
        amps[e.m() as usize] = a;
        amps[e.n() as usize] = b;
        PureState::new(e.num_qubits(), amps)
    }
}

/// Prober result for one test state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateResult {
    pub state: LogicalTestState,
    /// Exact prober expectations ⟨X⟩, ⟨Y⟩, ⟨Z⟩ after the frame correction.
    pub bloch: [f64; 3],
    /// Simulated-shot estimates and their standard errors, when requested.
    pub sampled: Option<[f64; 3]>,
    pub stderr: Option<[f64; 3]>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleporterBenchmark {
    pub class: TeleporterClass,
    pub element: ElementIndex,
    pub noise: NoiseConfig,
    pub states: Vec<StateResult>,
    /// Process matrix in the `{I, X, Y, Z}` basis.
    pub chi: Matrix4<Complex64>,
    pub process_fidelity: f64,
    pub average_fidelity: f64,
}

impl TeleporterBenchmark {
    pub fn to_record(&self) -> BenchmarkRecord {
        BenchmarkRecord {
            class: self.class.to_string(),
            m: self.element.m_bits(),
            n: self.element.n_bits(),
            ghz_width: self.element.hamming_distance() + 1,
            noise: self.noise,
            states: self.states.clone(),
            process_fidelity: self.process_fidelity,
            average_fidelity: self.average_fidelity,
            chi: self.chi.transpose().iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRecord {
    pub class: String,
    pub m: String,
    pub n: String,
    pub ghz_width: usize,
    pub noise: NoiseConfig,
    pub states: Vec<StateResult>,
    pub process_fidelity: f64,
    pub average_fidelity: f64,
    /// Row-major `[re, im]` pairs.
    #[serde(with = "complex_serde::vec")]
    pub chi: Vec<Complex64>,
}

/// Simulated-shot settings for error bars; `shots = 0` disables them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BenchOptions {
    pub shots: u64,
    pub seed: u64,
}

fn bloch_of(s: &DensityMatrix) -> [f64; 3] {
    let c = s.entry(0, 1);
    [2.0 * c.re, -2.0 * c.im, (s.entry(0, 0) - s.entry(1, 1)).re]
}

fn qubit_matrix(b: [f64; 3]) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new((1.0 + b[2]) / 2.0, 0.0), Complex64::new(b[0], -b[1]) / 2.0],
        [Complex64::new(b[0], b[1]) / 2.0, Complex64::new((1.0 - b[2]) / 2.0, 0.0)],
    ]
}

fn sample_bloch(b: [f64; 3], shots: u64, stream: &ShotStream) -> ([f64; 3], [f64; 3]) {
    let mut sums = [0i64; 3];
    for d in stream.shots(0, shots) {
        for axis in 0..3 {
            sums[axis] += if d[axis] < 0.5 * (1.0 + b[axis]) { 1 } else { -1 };
        }
    }
    let n = shots as f64;
    let mean = sums.map(|s| s as f64 / n);
    let se = mean.map(|m| if shots > 1 { ((1.0 - m * m).max(0.0) / (n - 1.0)).sqrt() } else { 1.0 });
    (mean, se)
}

/// Process matrix from the outputs for `0_L`, `1_L`, `+_L`, `R_L`.
///
/// The off-diagonal inputs follow from linearity:
/// `E(|0><1|) = E(+) + i·E(R) − (1+i)/2·(E(0) + E(1))`.
pub fn process_matrix(outputs: [[f64; 3]; 4]) -> Matrix4<Complex64> {
    let [e0, e1, ep, er] = outputs.map(qubit_matrix);
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.5);
    let mut e01 = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            e01[r][c] = ep[r][c] + i * er[r][c] - half * (e0[r][c] + e1[r][c]);
        }
    }
    let e10 = [[e01[0][0].conj(), e01[1][0].conj()], [e01[0][1].conj(), e01[1][1].conj()]];
    let blocks = [[e0, e01], [e10, e1]];
    // Choi matrix Σ |i><j| ⊗ E(|i><j|), index 2i + r
    let choi = Matrix4::from_fn(|row, col| blocks[row / 2][col / 2][row % 2][col % 2]);
    // |σ⟩⟩ components (i, k) = σ[k][i]
    let vecs: Vec<[Complex64; 4]> = Pauli::ALL
        .iter()
        .map(|p| {
            let m = p.matrix();
            [m[0][0], m[1][0], m[0][1], m[1][1]]
        })
        .collect();
    Matrix4::from_fn(|a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                acc += vecs[a][r].conj() * choi[(r, c)] * vecs[b][c];
            }
        }
        acc / 4.0
    })
}

/// Benchmarks the teleporter for `e` under `noise`.
pub fn run_benchmark_element(
    e: &ElementIndex,
    noise: &NoiseConfig,
    opts: BenchOptions,
) -> Result<TeleporterBenchmark> {
    noise.validate()?;
    let plan = compile_plan(e)?;
    let ghz = noise.ghz(plan.ghz_width)?;
    let states: Vec<StateResult> = LogicalTestState::ALL
        .par_iter()
        .map(|&s| {
            let input = noise.apply_system(&s.embed(e)?.density())?;
            let table = run_exact(&input, &plan, &ghz)?;
            let bloch = bloch_of(&prober_state_for(&table, e)?);
            let ideal = s.bloch();
            let fidelity = (1.0 + bloch.iter().zip(ideal).map(|(a, b)| a * b).sum::<f64>()) / 2.0;
            let (sampled, stderr) = if opts.shots > 0 {
                let stream =
                    ShotStream::new(opts.seed, &[BENCH_TAG, e.num_qubits() as u64, e.m(), e.n(), s as u64]);
                let (m, se) = sample_bloch(bloch, opts.shots, &stream);
                (Some(m), Some(se))
            } else {
                (None, None)
            };
            Ok(StateResult { state: s, bloch, sampled, stderr, fidelity })
        })
        .collect::<Result<_>>()?;
    let chi = process_matrix([states[0].bloch, states[1].bloch, states[2].bloch, states[3].bloch]);
    let average_fidelity = states.iter().map(|s| s.fidelity).sum::<f64>() / 4.0;
    Ok(TeleporterBenchmark {
        class: classify(e)?,
        element: *e,
        noise: *noise,
        states,
        process_fidelity: chi[(0, 0)].re,
        chi,
        average_fidelity,
    })
}

/// Benchmarks a class on its representative `(0…0, mask)`.
pub fn run_benchmark(
    class: &TeleporterClass,
    noise: &NoiseConfig,
    opts: BenchOptions,
) -> Result<TeleporterBenchmark> {
    run_benchmark_element(&class.representative(), noise, opts)
}

/// Werner parameter reproducing a target average output fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WernerFit {
    pub class: u64,
    pub p: f64,
    pub achieved: f64,
    pub residual: f64,
}

/// Bisects the resource parameter `p` until the class's average output
/// fidelity hits `target`. The fidelity rises monotonically with `p`.
pub fn fit_werner_p(class: &TeleporterClass, target: f64) -> Result<WernerFit> {
    let at = |p: f64| -> Result<f64> {
        let noise = NoiseConfig { ghz_werner_p: p, system_depolarizing: 0.0 };
        Ok(run_benchmark(class, &noise, BenchOptions::default())?.average_fidelity)
    };
    let (lo_f, hi_f) = (at(0.0)?, at(1.0)?);
    if !(lo_f..=hi_f).contains(&target) {
        return arg(format!("target fidelity {target} outside reachable range [{lo_f}, {hi_f}]"));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let achieved = at(p)?;
    Ok(WernerFit { class: class.mask, p, achieved, residual: achieved - target })
}
