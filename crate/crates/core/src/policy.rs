//! Process-wide numeric tolerances.

use std::sync::RwLock;

/// Tolerances and limits shared by every validation pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Smallest eigenvalue allowed for a positive-semidefinite matrix is `-psd_tol`.
    pub psd_tol: f64,
    pub trace_tol: f64,
    pub hermitian_tol: f64,
    pub norm_tol: f64,
    /// Largest imaginary residue tolerated in a Hermitian expectation value.
    pub imag_residue_tol: f64,
    /// Branches below this probability carry no conditional state.
    pub negligible_probability: f64,
    /// Maximum number of qubits in any dense operator.
    pub qubit_cap: usize,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        psd_tol: 1e-10,
        trace_tol: 1e-12,
        hermitian_tol: 1e-12,
        norm_tol: 1e-12,
        imag_residue_tol: 1e-9,
        negligible_probability: 1e-14,
        qubit_cap: 14,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

static POLICY: RwLock<NumericPolicy> = RwLock::new(NumericPolicy::DEFAULT);

/// Current policy.
pub fn policy() -> NumericPolicy {
    *POLICY.read().unwrap_or_else(|e| e.into_inner())
}

/// Replaces the process-wide policy, returning the previous one.
pub fn set_policy(p: NumericPolicy) -> NumericPolicy {
    let mut guard = POLICY.write().unwrap_or_else(|e| e.into_inner());
    std::mem::replace(&mut *guard, p)
}
