//! Exact simulation of one teleporter configuration.
//!
//! The system state is joined with a GHZ register (ancillas in slot order,
//! prober last). Every joint outcome of the Z measurements and Bell
//! measurements is enumerated; for each one the engine records its
//! probability, the Pauli frame it leaves behind, and the conditional state
//! of the prober.
//!
//! A Bell outcome `(a, b)` denotes `(I ⊗ X^a Z^b)(|00> + |11>)/√2` on the pair
//! (system qubit, ancilla). With Z outcomes `z` and Bell outcomes `(a_j, b_j)`
//! the prober value `c` is correlated with the system basis state `x(c)` that
//! carries `z` on the Z-measured qubits and `c ⊕ a_j` on Bell-measured qubit
//! `j`. The branch therefore teleports the logical qubit spanned by
//! `{|x(0)>, |x(1)>}`, with a relative sign `(-1)^(Σ b_j)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex_serde;
use crate::error::{arg, Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::plan::{bit_at, format_bits, ElementIndex, MeasurementPlan};
use crate::policy::policy;
use crate::state::{check_cap, DensityMatrix, ZERO};

/// Bell-measurement result `(a, b)`: the pair was projected onto
/// `(I ⊗ X^a Z^b)(|00> + |11>)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BellOutcome {
    pub a: u8,
    pub b: u8,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome { a: 0, b: 0 },
        BellOutcome { a: 0, b: 1 },
        BellOutcome { a: 1, b: 0 },
        BellOutcome { a: 1, b: 1 },
    ];

    pub fn label(&self) -> String {
        format!("{}{}", self.a, self.b)
    }
}

/// One joint measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: usize,
    /// One bit per Z-measured qubit, in ascending qubit position.
    pub z_outcomes: Vec<u8>,
    /// One outcome per Bell-measured qubit, in ancilla-slot order.
    pub bell_outcomes: Vec<BellOutcome>,
    pub probability: f64,
    /// System Pauli `P̂` with `P̂|m> = |m'>` and `P̂|n> = |n'>` up to phase.
    pub correction: PauliString,
    /// `(m', n')`; the prober's `|0>` carries `|m'>`.
    pub subspace: (u64, u64),
    /// Normalized prober state, `None` when the branch is negligible.
    pub prober_state: Option<DensityMatrix>,
}

impl Branch {
    fn phase_parity(&self) -> bool {
        self.bell_outcomes.iter().fold(0u8, |acc, o| acc ^ o.b) == 1
    }

    /// Whether the branch teleports the logical qubit spanned by `{|m>, |n>}`.
    pub fn carries(&self, element: &ElementIndex) -> bool {
        let (p, q) = self.subspace;
        (p, q) == (element.m(), element.n()) || (p, q) == (element.n(), element.m())
    }

    /// Prober-side Pauli `V` such that `V ρ_prober V†` is the logical qubit
    /// of `element` in `(m, n)` order, or `None` if the branch carries a
    /// different subspace.
    pub fn frame_correction(&self, element: &ElementIndex) -> Option<Pauli> {
        self.carries(element).then(|| Pauli::from_xz(self.subspace.0 != element.m(), self.phase_parity()))
    }

    /// True when no correction is needed: every Z result equals `m_i` and
    /// every Bell result is the success outcome `(m_j, 0)`.
    pub fn is_identity(&self) -> bool {
        self.correction.is_identity()
    }
}

/// All branches of one teleporter run.
#[derive(Debug, Clone)]
pub struct BranchTable {
    pub plan: MeasurementPlan,
    pub branches: Vec<Branch>,
    /// Branches whose subspace is exactly `{|m>, |n>}`.
    pub target_branch_ids: Vec<usize>,
}

impl BranchTable {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Probability that a shot lands in a branch carrying `element`.
    pub fn acceptance_probability(&self, element: &ElementIndex) -> f64 {
        self.branches.iter().filter(|b| b.carries(element)).map(|b| b.probability).sum()
    }

    pub fn target_probability(&self) -> f64 {
        self.target_branch_ids.iter().map(|&i| self.branches[i].probability).sum()
    }

    pub fn to_record(&self) -> BranchTableRecord {
        let e = &self.plan.element;
        BranchTableRecord {
            m: e.m_bits(),
            n: e.n_bits(),
            ghz_width: self.plan.ghz_width,
            branches: self
                .branches
                .iter()
                .map(|b| BranchRecord {
                    id: b.id,
                    z_outcomes: b.z_outcomes.iter().map(|z| char::from(b'0' + z)).collect(),
                    bell_outcomes: b.bell_outcomes.iter().map(BellOutcome::label).collect(),
                    probability: b.probability,
                    correction: b.correction.to_string(),
                    subspace: [
                        format_bits(b.subspace.0, e.num_qubits()),
                        format_bits(b.subspace.1, e.num_qubits()),
                    ],
                    target: b.carries(e),
                    prober_state: b
                        .prober_state
                        .as_ref()
                        .map(|s| (0..4).map(|k| s.entry(k / 2, k % 2)).collect()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchRecord {
    pub id: usize,
    pub z_outcomes: String,
    pub bell_outcomes: Vec<String>,
    pub probability: f64,
    pub correction: String,
    pub subspace: [String; 2],
    pub target: bool,
    #[serde(serialize_with = "serialize_opt_entries")]
    pub prober_state: Option<Vec<Complex64>>,
}

fn serialize_opt_entries<S: serde::Serializer>(
    v: &Option<Vec<Complex64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => complex_serde::vec::serialize(v, s),
        None => s.serialize_none(),
    }
}

/// JSON export of a branch table.
#[derive(Debug, Clone, Serialize)]
pub struct BranchTableRecord {
    pub m: String,
    pub n: String,
    pub ghz_width: usize,
    pub branches: Vec<BranchRecord>,
}

/// Enumerates every joint outcome of the plan on `rho ⊗ ghz`.
pub fn run_exact(rho: &DensityMatrix, plan: &MeasurementPlan, ghz: &DensityMatrix) -> Result<BranchTable> {
    let n = plan.num_qubits();
    if rho.num_qubits() != n {
        return arg(format!("plan is for {n} qubits, state has {}", rho.num_qubits()));
    }
    if ghz.num_qubits() != plan.ghz_width {
        return arg(format!(
            "plan needs a {}-qubit GHZ resource, got {} qubits",
            plan.ghz_width,
            ghz.num_qubits()
        ));
    }
    check_cap(n + plan.ghz_width)?;

    let k = plan.k;
    let nz = plan.z_set.len();
    let bell_count = 1usize << (2 * k);
    let total = (1usize << nz) * bell_count;
    let negligible = policy().negligible_probability;
    let m = plan.element.m();

    // system index with the Z bits of `z` and Bell bits of `u` (slot 1 = MSB of u)
    let system_index = |z: usize, u: usize| -> usize {
        let mut idx = 0usize;
        for (i, &q) in plan.z_set.iter().enumerate() {
            idx |= ((z >> (nz - 1 - i)) & 1) << (n - 1 - q);
        }
        for (j, &q) in plan.bell_set.iter().enumerate() {
            idx |= ((u >> (k - 1 - j)) & 1) << (n - 1 - q);
        }
        idx
    };
    let mask = plan.element.xor_mask() as usize;
    let norm = 1.0 / (1u64 << k) as f64;

    let branches: Vec<Branch> = (0..total)
        .into_par_iter()
        .map(|id| {
            let (z, bell) = (id / bell_count, id % bell_count);
            let outcomes: Vec<BellOutcome> =
                (0..k).map(|j| BellOutcome::ALL[(bell >> (2 * (k - 1 - j))) & 3]).collect();
            let a = outcomes.iter().fold(0usize, |acc, o| acc << 1 | o.a as usize);
            let b = outcomes.iter().fold(0usize, |acc, o| acc << 1 | o.b as usize);

            let mut sigma = [[ZERO; 2]; 2];
            for u in 0..1usize << k {
                let su = system_index(z, u);
                let sign_u = if (b & u).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let gu = (u ^ a) << 1;
                for v in 0..1usize << k {
                    let sv = system_index(z, v);
                    let r = rho.entry(su, sv);
                    if r == ZERO {
                        continue;
                    }
                    let sign = if (b & v).count_ones() % 2 == 0 { sign_u } else { -sign_u };
                    let gv = (v ^ a) << 1;
                    let w = r * (sign * norm);
                    for (c, row) in sigma.iter_mut().enumerate() {
                        for (cp, s) in row.iter_mut().enumerate() {
                            *s += w * ghz.entry(gu | c, gv | cp);
                        }
                    }
                }
            }
            let probability = (sigma[0][0].re + sigma[1][1].re).max(0.0);
            let prober_state = (probability >= negligible).then(|| {
                let h = |x: Complex64, y: Complex64| (x + y.conj()) * (0.5 / probability);
                let entries = DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        h(sigma[0][0], sigma[0][0]),
                        h(sigma[0][1], sigma[1][0]),
                        h(sigma[1][0], sigma[0][1]),
                        h(sigma[1][1], sigma[1][1]),
                    ],
                );
                DensityMatrix::from_raw(1, entries).expect("2x2 prober state")
            });

            let x0 = system_index(z, a);
            let flips = (x0 as u64) ^ m;
            let mut letters = vec![Pauli::I; n];
            for (q, letter) in letters.iter_mut().enumerate() {
                *letter = Pauli::from_xz(bit_at(flips, q, n) == 1, false);
            }
            for (j, &q) in plan.bell_set.iter().enumerate() {
                if outcomes[j].b == 1 {
                    letters[q] = Pauli::from_xz(letters[q].has_x(), true);
                }
            }
            let z_outcomes = (0..nz).map(|i| ((z >> (nz - 1 - i)) & 1) as u8).collect();

            Branch {
                id,
                z_outcomes,
                bell_outcomes: outcomes,
                probability,
                correction: PauliString::new(letters),
                subspace: (x0 as u64, (x0 ^ mask) as u64),
                prober_state,
            }
        })
        .collect();

    let target_branch_ids = branches.iter().filter(|b| b.carries(&plan.element)).map(|b| b.id).collect();
    Ok(BranchTable { plan: plan.clone(), branches, target_branch_ids })
}

/// Correction and teleported subspace for one joint outcome, computed from
/// the outcome labels alone.
pub fn correction_for(
    z_outcomes: &[u8],
    bell_outcomes: &[BellOutcome],
    plan: &MeasurementPlan,
) -> Result<(PauliString, (u64, u64))> {
    if z_outcomes.len() != plan.z_set.len() || bell_outcomes.len() != plan.k {
        return arg(format!(
            "plan expects {} Z and {} Bell outcomes, got {} and {}",
            plan.z_set.len(),
            plan.k,
            z_outcomes.len(),
            bell_outcomes.len()
        ));
    }
    if z_outcomes.iter().any(|&z| z > 1) || bell_outcomes.iter().any(|o| o.a > 1 || o.b > 1) {
        return arg("outcome bits must be 0 or 1");
    }
    let n = plan.num_qubits();
    let m = plan.element.m();
    let mut x0 = 0u64;
    for (&q, &z) in plan.z_set.iter().zip(z_outcomes) {
        x0 |= u64::from(z) << (n - 1 - q);
    }
    for (&q, o) in plan.bell_set.iter().zip(bell_outcomes) {
        x0 |= u64::from(o.a) << (n - 1 - q);
    }
    let flips = x0 ^ m;
    let mut letters: Vec<Pauli> = (0..n).map(|q| Pauli::from_xz(bit_at(flips, q, n) == 1, false)).collect();
    for (&q, o) in plan.bell_set.iter().zip(bell_outcomes) {
        if o.b == 1 {
            letters[q] = Pauli::from_xz(letters[q].has_x(), true);
        }
    }
    Ok((PauliString::new(letters), (x0, x0 ^ plan.element.xor_mask())))
}

fn conjugate_by(p: Pauli, s: &DensityMatrix) -> DensityMatrix {
    let u = p.matrix();
    s.apply_1q(0, u).expect("single-qubit state")
}

/// Prober state for `element`, combining every branch that carries it after
/// undoing each branch's Pauli frame.
pub fn prober_state_for(table: &BranchTable, element: &ElementIndex) -> Result<DensityMatrix> {
    let negligible = policy().negligible_probability;
    let mut acc = DMatrix::from_element(2, 2, ZERO);
    let mut weight = 0.0;
    for b in &table.branches {
        let (Some(frame), Some(state)) = (b.frame_correction(element), b.prober_state.as_ref()) else {
            continue;
        };
        if b.probability < negligible {
            continue;
        }
        acc += conjugate_by(frame, state).entries() * Complex64::new(b.probability, 0.0);
        weight += b.probability;
    }
    if weight < negligible {
        return Err(Error::Unmeasurable { m: element.m(), n: element.n(), weight });
    }
    acc /= Complex64::new(weight, 0.0);
    DensityMatrix::from_raw(1, acc)
}

/// Prober state for the plan's own element.
pub fn target_prober_state(table: &BranchTable) -> Result<DensityMatrix> {
    prober_state_for(table, &table.plan.element)
}
