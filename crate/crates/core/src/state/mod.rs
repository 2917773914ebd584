//! Dense pure states and density matrices.
//!
//! Qubit 1 is the most significant bit of a basis index, so the basis label
//! `m₁m₂…m_N` reads left to right as a binary number. Rust-side qubit
//! positions are zero-based: position `q` addresses bit `N - 1 - q`.

mod named;
mod random;

pub use named::{basis_state, bell_state, epr, ghz_state, maximally_mixed, werner_ghz};
pub use random::{random_density_matrix, random_pure_state};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_serde;
use crate::error::{arg, Error, Result};
use crate::pauli::PauliString;
use crate::policy::policy;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Value of qubit `q` (zero-based, MSB first) in `index` over `n` qubits.
#[inline]
pub fn qubit_bit(index: usize, q: usize, n: usize) -> u8 {
    ((index >> (n - 1 - q)) & 1) as u8
}

pub(crate) fn check_cap(qubits: usize) -> Result<()> {
    let cap = policy().qubit_cap;
    if qubits > cap {
        return Err(Error::Resource { qubits, cap });
    }
    Ok(())
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return arg("a state needs at least one qubit");
    }
    check_cap(num_qubits)
}

/// Normalized state vector over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validates length and unit norm.
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return arg(format!(
                "{} amplitudes given for {num_qubits} qubits (need {})",
                amplitudes.len(),
                1usize << num_qubits
            ));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > policy().norm_tol {
            return arg(format!("state norm² is {norm}, expected 1"));
        }
        Ok(PureState { num_qubits, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return arg("cannot normalize a zero or non-finite vector");
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(num_qubits, amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return arg("inner product of states with different qubit counts");
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn apply_pauli(&self, p: &PauliString) -> Result<PureState> {
        if p.num_qubits() != self.num_qubits {
            return arg("Pauli string and state qubit counts differ");
        }
        let mut out = vec![ZERO; self.dim()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let (phase, j) = p.act(i);
            out[j] += phase * a;
        }
        Ok(PureState { num_qubits: self.num_qubits, amplitudes: out })
    }

    /// Applies a single-qubit unitary (row-major 2x2) to qubit `q`.
    pub fn apply_1q(&self, q: usize, u: [[Complex64; 2]; 2]) -> Result<PureState> {
        if q >= self.num_qubits {
            return arg(format!("qubit {q} out of range"));
        }
        let stride = 1usize << (self.num_qubits - 1 - q);
        let mut out = self.amplitudes.clone();
        for i in 0..self.dim() {
            if i & stride == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | stride]);
                out[i] = u[0][0] * a0 + u[0][1] * a1;
                out[i | stride] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        PureState::normalized(self.num_qubits, out)
    }

    /// Projector `|ψ><ψ|`.
    pub fn density(&self) -> DensityMatrix {
        let d = self.dim();
        let entries = DMatrix::from_fn(d, d, |r, c| self.amplitudes[r] * self.amplitudes[c].conj());
        DensityMatrix { num_qubits: self.num_qubits, entries }
    }
}

/// Dense density matrix; entry `(a, b)` is `<a|ρ|b>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wraps and validates a matrix (Hermitian, unit trace, PSD).
    pub fn new(num_qubits: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_raw(num_qubits, entries)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape check only. Callers guarantee the state invariants.
    pub(crate) fn from_raw(num_qubits: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        check_qubits(num_qubits)?;
        let d = 1usize << num_qubits;
        if entries.nrows() != d || entries.ncols() != d {
            return arg(format!(
                "{}x{} matrix given for {num_qubits} qubits (need {d}x{d})",
                entries.nrows(),
                entries.ncols()
            ));
        }
        Ok(DensityMatrix { num_qubits, entries })
    }

    /// Builds a state from an arbitrary square matrix: Hermitian part,
    /// trace-normalized, eigenvalues clipped at zero when the smallest one is
    /// below `-psd_tol`. The flag reports whether clipping happened.
    pub fn project_physical(num_qubits: usize, m: DMatrix<Complex64>) -> Result<(Self, bool)> {
        let raw = Self::from_raw(num_qubits, m)?;
        let mut h = (&raw.entries + raw.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = h.trace().re;
        if !tr.is_finite() || tr <= 0.0 {
            return Err(Error::NumericalIntegrity(format!("non-positive trace {tr}")));
        }
        h /= Complex64::new(tr, 0.0);
        let eig = h.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min >= -policy().psd_tol {
            return Ok((DensityMatrix { num_qubits, entries: h }, false));
        }
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let v = &eig.eigenvectors;
        let d = h.nrows();
        let mut out = DMatrix::from_element(d, d, ZERO);
        for (k, &l) in clipped.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let col = v.column(k);
            out += (col * col.adjoint()) * Complex64::new(l / total, 0.0);
        }
        Ok((DensityMatrix { num_qubits, entries: out }, true))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Populations `ρ_xx`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, unit trace, and positive semidefiniteness against
    /// the active [`NumericPolicy`](crate::NumericPolicy).
    pub fn validate(&self) -> Result<()> {
        let pol = policy();
        let d = self.dim();
        for r in 0..d {
            for c in r..d {
                let diff = self.entries[(r, c)] - self.entries[(c, r)].conj();
                if diff.norm() > pol.hermitian_tol {
                    return arg(format!("not Hermitian at ({r}, {c}): deviation {:e}", diff.norm()));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > pol.trace_tol || tr.im.abs() > pol.trace_tol {
            return arg(format!("trace is {tr}, expected 1"));
        }
        let min = self.min_eigenvalue();
        if min < -pol.psd_tol {
            return arg(format!("not positive semidefinite: smallest eigenvalue {min:e}"));
        }
        Ok(())
    }

    /// `λ·a + (1 − λ)·b`.
    pub fn mix(lambda: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
        if a.num_qubits != b.num_qubits {
            return arg("mixing states of different sizes");
        }
        if !(0.0..=1.0).contains(&lambda) {
            return arg(format!("mixing weight {lambda} outside [0, 1]"));
        }
        let entries =
            &a.entries * Complex64::new(lambda, 0.0) + &b.entries * Complex64::new(1.0 - lambda, 0.0);
        Ok(DensityMatrix { num_qubits: a.num_qubits, entries })
    }

    /// Kronecker product; `self` supplies the leading (most significant) qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        tensor(self, other)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    pub fn expectation(&self, obs: &PauliString) -> Result<f64> {
        expectation(self, obs)
    }

    /// `U ρ U†` for a single-qubit unitary on qubit `q`.
    pub fn apply_1q(&self, q: usize, u: [[Complex64; 2]; 2]) -> Result<DensityMatrix> {
        if q >= self.num_qubits {
            return arg(format!("qubit {q} out of range"));
        }
        let stride = 1usize << (self.num_qubits - 1 - q);
        let d = self.dim();
        let mut m = self.entries.clone();
        // rows: U ρ
        for c in 0..d {
            for r in (0..d).filter(|r| r & stride == 0) {
                let (a0, a1) = (m[(r, c)], m[(r | stride, c)]);
                m[(r, c)] = u[0][0] * a0 + u[0][1] * a1;
                m[(r | stride, c)] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        // columns: (U ρ) U†
        for r in 0..d {
            for c in (0..d).filter(|c| c & stride == 0) {
                let (a0, a1) = (m[(r, c)], m[(r, c | stride)]);
                m[(r, c)] = a0 * u[0][0].conj() + a1 * u[0][1].conj();
                m[(r, c | stride)] = a0 * u[1][0].conj() + a1 * u[1][1].conj();
            }
        }
        Ok(DensityMatrix { num_qubits: self.num_qubits, entries: m })
    }
}

/// Kronecker product; `a` supplies the leading (most significant) qubits.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let n = a.num_qubits + b.num_qubits;
    check_cap(n)?;
    Ok(DensityMatrix { num_qubits: n, entries: a.entries.kronecker(&b.entries) })
}

/// Reduced state on the qubit positions in `keep` (zero-based, any order;
/// the result lists them in ascending position).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits;
    if keep.is_empty() {
        return arg("partial trace needs at least one kept qubit");
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return arg("duplicate qubit in keep set");
    }
    if let Some(&q) = kept.iter().find(|&&q| q >= n) {
        return arg(format!("qubit {q} out of range for {n} qubits"));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let scatter = |positions: &[usize], value: usize| -> usize {
        let k = positions.len();
        positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &q)| acc | (((value >> (k - 1 - i)) & 1) << (n - 1 - q)))
    };
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let kept_idx: Vec<usize> = (0..dk).map(|v| scatter(&kept, v)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|v| scatter(&traced, v)).collect();
    let entries = DMatrix::from_fn(dk, dk, |r, c| {
        traced_idx.iter().map(|&t| rho.entries[(kept_idx[r] | t, kept_idx[c] | t)]).sum()
    });
    Ok(DensityMatrix { num_qubits: kept.len(), entries })
}

/// `Tr(ρ P)`, checked to be real.
pub fn expectation(rho: &DensityMatrix, obs: &PauliString) -> Result<f64> {
    if obs.num_qubits() != rho.num_qubits {
        return arg(format!("observable on {} qubits, state on {}", obs.num_qubits(), rho.num_qubits));
    }
    let flip = obs.x_mask();
    let mut acc = ZERO;
    for y in 0..rho.dim() {
        let (phase, _) = obs.act(y);
        acc += phase * rho.entries[(y, y ^ flip)];
    }
    if acc.im.abs() > policy().imag_residue_tol {
        return Err(Error::NumericalIntegrity(format!(
            "expectation of Hermitian observable has imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

fn hermitian_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let eig = m.clone().symmetric_eigen();
    let tol = policy().psd_tol;
    if let Some(&l) = eig.eigenvalues.iter().find(|&&l| l < -tol) {
        return arg(format!("fidelity input not positive semidefinite (eigenvalue {l:e})"));
    }
    let v = &eig.eigenvectors;
    let roots = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)));
    Ok(v * roots * v.adjoint())
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`; equals `<ψ|a|ψ>` when `b = |ψ><ψ|`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return arg("fidelity of states with different qubit counts");
    }
    // A pure argument reduces the fidelity to an overlap, avoiding square
    // roots of round-off eigenvalues.
    for (pure, other) in [(b, a), (a, b)] {
        if (pure.purity() - 1.0).abs() < policy().psd_tol {
            let eig = pure.entries.clone().symmetric_eigen();
            let (top, _) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &l)| if l > best.1 { (i, l) } else { best });
            let psi = eig.eigenvectors.column(top);
            if other.min_eigenvalue() < -policy().psd_tol {
                return arg("fidelity input not positive semidefinite");
            }
            let overlap = (psi.adjoint() * &other.entries * psi)[(0, 0)].re;
            return Ok(overlap.clamp(0.0, 1.0));
        }
    }
    let sa = hermitian_sqrt(&a.entries)?;
    let inner = &sa * &b.entries * &sa;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = inner.symmetric_eigen();
    let tol = policy().psd_tol;
    if let Some(&l) = eig.eigenvalues.iter().find(|&&l| l < -tol) {
        return arg(format!("fidelity input not positive semidefinite (eigenvalue {l:e})"));
    }
    let root_trace: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// JSON form: `{"num_qubits": N, "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PureStateRecord {
    pub num_qubits: usize,
    #[serde(with = "complex_serde::vec")]
    pub amplitudes: Vec<Complex64>,
}

/// JSON form: `{"num_qubits": N, "entries": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixRecord {
    pub num_qubits: usize,
    #[serde(with = "complex_serde::vec")]
    pub entries: Vec<Complex64>,
}

impl From<&PureState> for PureStateRecord {
    fn from(s: &PureState) -> Self {
        PureStateRecord { num_qubits: s.num_qubits, amplitudes: s.amplitudes.clone() }
    }
}

impl TryFrom<PureStateRecord> for PureState {
    type Error = Error;
    fn try_from(r: PureStateRecord) -> Result<Self> {
        PureState::new(r.num_qubits, r.amplitudes)
    }
}

impl From<&DensityMatrix> for DensityMatrixRecord {
    fn from(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let entries = (0..d * d).map(|k| rho.entries[(k / d, k % d)]).collect();
        DensityMatrixRecord { num_qubits: rho.num_qubits, entries }
    }
}

impl TryFrom<DensityMatrixRecord> for DensityMatrix {
    type Error = Error;
    fn try_from(r: DensityMatrixRecord) -> Result<Self> {
        check_qubits(r.num_qubits)?;
        let d = 1usize << r.num_qubits;
        if r.entries.len() != d * d {
            return arg(format!("{} entries given, need {}", r.entries.len(), d * d));
        }
        DensityMatrix::new(r.num_qubits, DMatrix::from_row_slice(d, d, &r.entries))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityMatrixRecord::from(self).serialize(s)
    }
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PureStateRecord::from(self).serialize(s)
    }
}
