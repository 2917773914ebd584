//! Measurement plans: which system qubits are measured in Z and which are
//! Bell-measured against a GHZ ancilla, decided by the bit-wise parity of the
//! element's indices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// Largest register an [`ElementIndex`] can address.
pub const MAX_INDEX_QUBITS: usize = 63;

/// Names the density-matrix element `ρ_mn` of an `N`-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementIndex {
    num_qubits: usize,
    m: u64,
    n: u64,
}

impl ElementIndex {
    pub fn new(num_qubits: usize, m: u64, n: u64) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_INDEX_QUBITS {
            return arg(format!("element indices need 1..={MAX_INDEX_QUBITS} qubits, got {num_qubits}"));
        }
        let limit = 1u64 << num_qubits;
        if m >= limit || n >= limit {
            return arg(format!("indices ({m}, {n}) out of range for {num_qubits} qubits"));
        }
        Ok(ElementIndex { num_qubits, m, n })
    }

    /// Parses two bitstrings written qubit-1-first, e.g. `("01", "10")`.
    pub fn from_bits(m: &str, n: &str) -> Result<Self> {
        if m.len() != n.len() {
            return arg(format!("bitstrings '{m}' and '{n}' differ in length"));
        }
        Self::new(m.len(), parse_bits(m)?, parse_bits(n)?)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_diagonal(&self) -> bool {
        self.m == self.n
    }

    /// The Hermitian partner `(n, m)`.
    pub fn swapped(&self) -> Self {
        ElementIndex { num_qubits: self.num_qubits, m: self.n, n: self.m }
    }

    pub fn xor_mask(&self) -> u64 {
        self.m ^ self.n
    }

    pub fn hamming_distance(&self) -> usize {
        self.xor_mask().count_ones() as usize
    }

    pub fn m_bits(&self) -> String {
        format_bits(self.m, self.num_qubits)
    }

    pub fn n_bits(&self) -> String {
        format_bits(self.n, self.num_qubits)
    }
}

impl fmt::Display for ElementIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ρ[{},{}]", self.m_bits(), self.n_bits())
    }
}

/// Bit `q` (zero-based, qubit 1 first) of `value` in an `n`-qubit register.
#[inline]
pub fn bit_at(value: u64, q: usize, n: usize) -> u8 {
    ((value >> (n - 1 - q)) & 1) as u8
}

pub fn parse_bits(s: &str) -> Result<u64> {
    if s.is_empty() || s.len() > MAX_INDEX_QUBITS {
        return arg(format!("bitstring '{s}' must have 1..={MAX_INDEX_QUBITS} characters"));
    }
    s.chars().try_fold(0u64, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        other => Err(Error::Argument(format!("'{other}' in bitstring '{s}' is not 0 or 1"))),
    })
}

pub fn format_bits(value: u64, n: usize) -> String {
    (0..n).map(|q| if bit_at(value, q, n) == 1 { '1' } else { '0' }).collect()
}

/// Role of one system qubit in a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Measured in Z; `expected_bit` is the outcome that keeps `{|m>, |n>}`.
    Z { expected_bit: u8 },
    /// Bell-measured jointly with GHZ ancilla `ancilla_slot` (1-based).
    Bell { ancilla_slot: usize },
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Z { expected_bit } => write!(f, "Z:{expected_bit}"),
            Role::Bell { ancilla_slot } => write!(f, "Bell:{ancilla_slot}"),
        }
    }
}

/// Teleporter configuration for one element.
///
/// The GHZ register holds the `k` ancillas in slot order followed by the
/// prober as its last qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementPlan {
    pub element: ElementIndex,
    pub roles: Vec<Role>,
    pub k: usize,
    pub ghz_width: usize,
    /// Z-measured qubit positions, ascending.
    pub z_set: Vec<usize>,
    /// Bell-measured qubit positions, ascending; `bell_set[j]` uses ancilla slot `j + 1`.
    pub bell_set: Vec<usize>,
}

impl MeasurementPlan {
    pub fn num_qubits(&self) -> usize {
        self.element.num_qubits
    }

    pub fn class(&self) -> TeleporterClass {
        TeleporterClass { num_qubits: self.element.num_qubits, mask: self.element.xor_mask() }
    }

    pub fn to_record(&self) -> PlanRecord {
        PlanRecord {
            m: self.element.m_bits(),
            n: self.element.n_bits(),
            roles: self.roles.iter().map(Role::to_string).collect(),
            ghz_width: self.ghz_width,
        }
    }
}

/// JSON form of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub m: String,
    pub n: String,
    pub roles: Vec<String>,
    pub ghz_width: usize,
}

/// Builds the plan for an off-diagonal element.
pub fn compile_plan(e: &ElementIndex) -> Result<MeasurementPlan> {
    if e.is_diagonal() {
        return Err(Error::DiagonalElement);
    }
    let n = e.num_qubits;
    let mut roles = Vec::with_capacity(n);
    let (mut z_set, mut bell_set) = (Vec::new(), Vec::new());
    for q in 0..n {
        let (mq, nq) = (bit_at(e.m, q, n), bit_at(e.n, q, n));
        if mq == nq {
            roles.push(Role::Z { expected_bit: mq });
            z_set.push(q);
        } else {
            bell_set.push(q);
            roles.push(Role::Bell { ancilla_slot: bell_set.len() });
        }
    }
    let k = bell_set.len();
    Ok(MeasurementPlan { element: *e, roles, k, ghz_width: k + 1, z_set, bell_set })
}

/// Teleporters are identified by the positions needing Bell measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TeleporterClass {
    pub num_qubits: usize,
    /// `m ⊕ n`.
    pub mask: u64,
}

impl fmt::Display for TeleporterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_bits(self.mask, self.num_qubits))
    }
}

impl TeleporterClass {
    /// Canonical representative `(m, m ⊕ mask)` with the smallest `m`.
    pub fn representative(&self) -> ElementIndex {
        // smallest m is 0 since m ranges over all indices
        ElementIndex { num_qubits: self.num_qubits, m: 0, n: self.mask }
    }

    /// Unordered element pairs `(m, n)`, `m < n`, sharing this class.
    pub fn elements(&self) -> Vec<ElementIndex> {
        let limit = 1u64 << self.num_qubits;
        (0..limit)
            .filter(|&m| m < m ^ self.mask)
            .map(|m| ElementIndex { num_qubits: self.num_qubits, m, n: m ^ self.mask })
            .collect()
    }
}

pub fn classify(e: &ElementIndex) -> Result<TeleporterClass> {
    if e.is_diagonal() {
        return Err(Error::DiagonalElement);
    }
    Ok(TeleporterClass { num_qubits: e.num_qubits, mask: e.xor_mask() })
}

/// All `2^N − 1` teleporter classes of an `N`-qubit register.
pub fn all_classes(num_qubits: usize) -> Vec<TeleporterClass> {
    (1..1u64 << num_qubits).map(|mask| TeleporterClass { num_qubits, mask }).collect()
}

/// Local-basis settings of standard Pauli tomography: `3^N`.
pub fn settings_for_tomography(num_qubits: usize) -> u128 {
    3u128.pow(num_qubits as u32)
}
