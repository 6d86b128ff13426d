use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest register handled by the dense routines.
pub const MAX_QUBITS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// The three non-identity axes in x, y, z order.
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => vec![ONE, ZERO, ZERO, ONE],
            Pauli::X => vec![ZERO, ONE, ONE, ZERO],
            Pauli::Y => vec![ZERO, -i, i, ZERO],
            Pauli::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        CMatrix::from_vec(2, 2, data).expect("2x2")
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

/// Tensor product of single-qubit Paulis. Qubit 1 is the leftmost factor and
/// the most significant bit of a basis-state index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    axes: Vec<Pauli>,
}

impl PauliString {
    pub fn new(axes: Vec<Pauli>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::DimensionMismatch("Pauli string needs at least one qubit".into()));
        }
        Ok(Self { axes })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { axes: vec![Pauli::I; n_qubits.max(1)] }
    }

    /// `p` acting on the 1-based `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        Self::with_factors(n_qubits, &[(qubit, p)])
    }

    /// Operator from `(qubit, pauli)` factors with 1-based qubit labels.
    pub fn with_factors(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_qubits);
        for &(q, p) in factors {
            if q == 0 || q > n_qubits {
                return Err(Error::InvalidSubsystem(format!(
                    "qubit {q} outside 1..={n_qubits}"
                )));
            }
            s.axes[q - 1] = p;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.axes
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.axes.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Bits flipped by the string (X or Y factors).
    #[cfg(test)]
    pub(crate) fn flip_mask(&self) -> usize {
        let n = self.n_qubits();
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, &p)| matches!(p, Pauli::X | Pauli::Y))
            .fold(0, |m, (q, _)| m | 1 << (n - 1 - q))
    }

    /// Applies the string to the basis state `x`: returns `(phase, x')` with
    /// `P|x> = phase |x'>`.
    #[inline]
    pub(crate) fn apply_basis(&self, x: usize) -> (C64, usize) {
        let n = self.n_qubits();
        let mut phase = ONE;
        let mut y = x;
        for (q, &p) in self.axes.iter().enumerate() {
            let shift = n - 1 - q;
            let bit = (x >> shift) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => y ^= 1 << shift,
                Pauli::Y => {
                    y ^= 1 << shift;
                    // Y|0> = i|1>, Y|1> = -i|0>
                    phase *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (phase, y)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.axes {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Config(format!("'{other}' is not a Pauli label"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
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

/// Dense matrix of a Pauli string as an explicit Kronecker product.
pub fn pauli_matrix(p: &PauliString) -> Result<CMatrix> {
    if p.n_qubits() > MAX_QUBITS {
        return Err(Error::DimensionOverflow { n_qubits: p.n_qubits(), max: MAX_QUBITS });
    }
    let mut axes = p.axes().iter();
    let first = axes.next().expect("nonempty").matrix();
    Ok(axes.fold(first, |acc, a| acc.kron(&a.matrix())))
}
