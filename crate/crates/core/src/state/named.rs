use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DensityMatrix, PureState, ONE, ZERO};
use crate::error::{arg, Result};

/// Computational basis state `|index>`.
pub fn basis_state(num_qubits: usize, index: usize) -> Result<PureState> {
    super::check_qubits(num_qubits)?;
    if index >= 1 << num_qubits {
        return arg(format!("basis index {index} out of range for {num_qubits} qubits"));
    }
    let mut amps = vec![ZERO; 1 << num_qubits];
    amps[index] = ONE;
    PureState::new(num_qubits, amps)
}

/// `(|00> + |11>)/√2`.
pub fn epr() -> PureState {
    ghz_state(2).expect("width 2 is valid")
}

/// Bell state `(I ⊗ X^a Z^b)(|00> + |11>)/√2`.
pub fn bell_state(a: bool, b: bool) -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if b { -1.0 } else { 1.0 };
    let mut amps = vec![ZERO; 4];
    // |0, a> + (-1)^b |1, 1⊕a>
    amps[usize::from(a)] = Complex64::new(h, 0.0);
    amps[2 | usize::from(!a)] = Complex64::new(sign * h, 0.0);
    PureState::new(2, amps).expect("Bell states are normalized")
}

/// `(|0…0> + |1…1>)/√2` on `width` qubits.
pub fn ghz_state(width: usize) -> Result<PureState> {
    if width < 2 {
        return arg(format!("GHZ width must be at least 2, got {width}"));
    }
    super::check_qubits(width)?;
    let d = 1usize << width;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![ZERO; d];
    amps[0] = h;
    amps[d - 1] = h;
    PureState::new(width, amps)
}

/// `I / 2^N`.
pub fn maximally_mixed(num_qubits: usize) -> Result<DensityMatrix> {
    super::check_qubits(num_qubits)?;
    let d = 1usize << num_qubits;
    let w = Complex64::new(1.0 / d as f64, 0.0);
    DensityMatrix::from_raw(num_qubits, DMatrix::from_diagonal_element(d, d, w))
}

/// Noisy resource `p·|GHZ><GHZ| + (1 − p)·I/2^width`.
pub fn werner_ghz(width: usize, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return arg(format!("Werner parameter {p} outside [0, 1]"));
    }
    let pure = ghz_state(width)?.density();
    let mixed = maximally_mixed(width)?;
    DensityMatrix::mix(p, &pure, &mixed)
}
