use serde::{Deserialize, Serialize};

use super::matrix::CMatrix;
use super::pauli::{Pauli, PauliString, MAX_QUBITS};
use crate::error::{Error, Result};

/// Real-weighted sum of Pauli strings on a fixed register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl Hamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::DimensionMismatch("Hamiltonian needs at least one qubit".into()));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::DimensionOverflow { n_qubits, max: MAX_QUBITS });
        }
        for (c, p) in &terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "term {p} acts on {} qubits, Hamiltonian on {n_qubits}",
                    p.n_qubits()
                )));
            }
            if !c.is_finite() {
                return Err(Error::Config(format!("non-finite coefficient {c} on {p}")));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// `J sum_i Z_i Z_{i+1} + g sum_i X_i`: the quench Hamiltonian.
    pub fn ising_quench(n_qubits: usize, coupling: f64, field: f64) -> Result<Self> {
        let mut terms = nearest_neighbour(n_qubits, coupling, &[(Pauli::Z, Pauli::Z)])?;
        terms.extend(on_site(n_qubits, field, Pauli::X)?);
        Self::new(n_qubits, terms)
    }

    /// `-J sum_i (X_i X_{i+1} + Y_i Y_{i+1}) + delta sum_i Z_i Z_{i+1}`.
    pub fn xxz(n_qubits: usize, coupling: f64, delta: f64) -> Result<Self> {
        let mut terms =
            nearest_neighbour(n_qubits, -coupling, &[(Pauli::X, Pauli::X), (Pauli::Y, Pauli::Y)])?;
        terms.extend(nearest_neighbour(n_qubits, delta, &[(Pauli::Z, Pauli::Z)])?);
        Self::new(n_qubits, terms)
    }

    /// `-J sum_i (X_i X_{i+1} + Y_i Y_{i+1}) + h_z sum_i Z_i`.
    pub fn xx(n_qubits: usize, coupling: f64, h_z: f64) -> Result<Self> {
        let mut terms =
            nearest_neighbour(n_qubits, -coupling, &[(Pauli::X, Pauli::X), (Pauli::Y, Pauli::Y)])?;
        terms.extend(on_site(n_qubits, h_z, Pauli::Z)?);
        Self::new(n_qubits, terms)
    }
}

fn nearest_neighbour(n: usize, c: f64, pairs: &[(Pauli, Pauli)]) -> Result<Vec<(f64, PauliString)>> {
    let mut terms = Vec::new();
    for i in 1..n {
        for &(a, b) in pairs {
            terms.push((c, PauliString::with_factors(n, &[(i, a), (i + 1, b)])?));
        }
    }
    Ok(terms)
}

fn on_site(n: usize, c: f64, p: Pauli) -> Result<Vec<(f64, PauliString)>> {
    (1..=n).map(|i| Ok((c, PauliString::single(n, i, p)?))).collect()
}

/// Dense matrix `sum_i c_i B_i`.
pub fn hamiltonian_matrix(h: &Hamiltonian) -> Result<CMatrix> {
    if h.terms.is_empty() {
        return Err(Error::Config("Hamiltonian has no terms".into()));
    }
    let dim = h.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (c, p) in &h.terms {
        if *c == 0.0 {
            continue;
        }
        for x in 0..dim {
            let (phase, y) = p.apply_basis(x);
            m[(y, x)] += phase * *c;
        }
    }
    Ok(m)
}
