use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, PureState};
use crate::error::{arg, Result};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure_state(num_qubits: usize, rng: &mut impl Rng) -> Result<PureState> {
    let amps = (0..1usize << num_qubits).map(|_| gaussian(rng)).collect();
    PureState::normalized(num_qubits, amps)
}

/// Random mixed state of the given rank from the Ginibre ensemble
/// (`A A† / Tr` with `A` a `2^N × rank` complex Gaussian matrix).
pub fn random_density_matrix(num_qubits: usize, rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    super::check_qubits(num_qubits)?;
    let d = 1usize << num_qubits;
    if rank == 0 || rank > d {
        return arg(format!("rank {rank} outside 1..={d}"));
    }
    let a = DMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let mut m = &a * a.adjoint();
    let tr = m.trace();
    m /= tr;
    // exact Hermitian symmetrization so validation tolerances are met
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::from_raw(num_qubits, m)
}
