//! Pauli operators and strings.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Builds the letter `X^x Z^z` up to phase.
    pub fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }

    /// Action on a computational basis state: `P|bit> = phase |bit'>`.
    #[inline]
    pub fn act(self, bit: u8) -> (Complex64, u8) {
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        match self {
            Pauli::I => (Complex64::new(1.0, 0.0), bit),
            Pauli::X => (Complex64::new(1.0, 0.0), bit ^ 1),
            Pauli::Y => (Complex64::new(0.0, sign), bit ^ 1),
            Pauli::Z => (Complex64::new(sign, 0.0), bit),
        }
    }

    /// 2x2 matrix in row-major order.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;

    fn try_from(c: char) -> Result<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Argument(format!("'{other}' is not a Pauli letter"))),
        }
    }
}

/// Tensor product of Pauli letters; letter 0 acts on qubit 1 (the most
/// significant bit of the basis index).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString { letters }
    }

    pub fn identity(num_qubits: usize) -> Self {
        PauliString { letters: vec![Pauli::I; num_qubits] }
    }

    /// A single letter on `qubit`, identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, letter: Pauli) -> Self {
        let mut s = Self::identity(num_qubits);
        s.letters[qubit] = letter;
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Bit-flip mask over basis indices (qubit 1 = most significant bit).
    pub fn x_mask(&self) -> usize {
        self.mask(Pauli::has_x)
    }

    pub fn z_mask(&self) -> usize {
        self.mask(Pauli::has_z)
    }

    fn mask(&self, f: impl Fn(Pauli) -> bool) -> usize {
        self.letters.iter().fold(0usize, |acc, &p| (acc << 1) | usize::from(f(p)))
    }

    /// `P|index> = phase |index'>`.
    pub fn act(&self, index: usize) -> (Complex64, usize) {
        let n = self.letters.len();
        let mut phase = Complex64::new(1.0, 0.0);
        for (q, &p) in self.letters.iter().enumerate() {
            if p == Pauli::I {
                continue;
            }
            let bit = ((index >> (n - 1 - q)) & 1) as u8;
            let (c, _) = p.act(bit);
            phase *= c;
        }
        (phase, index ^ self.x_mask())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.letters.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s.chars().map(Pauli::try_from).collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Argument("empty Pauli string".into()));
        }
        Ok(PauliString { letters })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
