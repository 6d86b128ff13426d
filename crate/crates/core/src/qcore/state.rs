use num_complex::Complex64 as C64;

use super::eigen::{eig_hermitian, fix_phase, EigenDecomposition};
use super::hamiltonian::{hamiltonian_matrix, Hamiltonian};
use super::matrix::{norm, vdot, ZERO};
use super::pauli::{PauliString, MAX_QUBITS};
use crate::error::{mismatch, Error, Result};

/// Gap below which a ground state is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

const NORM_TOL: f64 = 1e-10;

/// Normalized pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let nrm = norm(&amplitudes);
        if (nrm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {nrm} differs from 1")));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let nrm = norm(&amplitudes);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= nrm);
        Ok(Self { n_qubits, amplitudes })
    }

    /// The computational basis state with index `index` (qubit 1 = MSB).
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::DimensionOverflow { n_qubits, max: MAX_QUBITS });
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        *amplitudes
            .get_mut(index)
            .ok_or_else(|| mismatch(format!("basis index {index} out of range")))? = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(mismatch("inner product of states of different size"));
        }
        Ok(vdot(&self.amplitudes, &other.amplitudes))
    }

    /// Tensor product `self (x) other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(Error::DimensionOverflow { n_qubits: n, max: MAX_QUBITS });
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(Self { n_qubits: n, amplitudes })
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(mismatch(format!("state length {len} is not 2^n with n >= 1")));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::DimensionOverflow { n_qubits: n, max: MAX_QUBITS });
    }
    Ok(n)
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: StateVector,
    /// `lambda_1 - lambda_0`; zero for a one-dimensional space.
    pub gap: f64,
    pub degenerate: bool,
}

pub fn ground_state(h: &Hamiltonian) -> Result<GroundStateResult> {
    let eig = eig_hermitian(&hamiltonian_matrix(h)?)?;
    ground_from_eig(&eig)
}

pub(crate) fn ground_from_eig(eig: &EigenDecomposition) -> Result<GroundStateResult> {
    let energy = eig.values[0];
    let gap = eig.values.get(1).map_or(f64::INFINITY, |v| v - energy);
    let mut amps = eig.vector(0);
    fix_phase(&mut amps);
    Ok(GroundStateResult {
        energy,
        state: StateVector::normalized(amps)?,
        gap,
        degenerate: gap < DEGENERACY_GAP,
    })
}

/// Exact propagator `exp(-iHt)` built from one cached eigendecomposition.
#[derive(Clone, Debug)]
pub struct Propagator {
    n_qubits: usize,
    eig: EigenDecomposition,
}

impl Propagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        Ok(Self { n_qubits: h.n_qubits(), eig: eig_hermitian(&hamiltonian_matrix(h)?)? })
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn ground_state(&self) -> Result<GroundStateResult> {
        ground_from_eig(&self.eig)
    }

    /// Evolution of one initial state to many times, sharing `V^dag psi0`.
    pub fn trajectory(&self, psi0: &StateVector) -> Result<Trajectory<'_>> {
        if psi0.n_qubits() != self.n_qubits {
            return Err(mismatch(format!(
                "state on {} qubits, Hamiltonian on {}",
                psi0.n_qubits(),
                self.n_qubits
            )));
        }
        let v = &self.eig.vectors;
        let n = self.eig.dim();
        let coeffs = (0..n)
            .map(|k| (0..n).map(|i| v[(i, k)].conj() * psi0.amplitudes[i]).sum())
            .collect();
        Ok(Trajectory { prop: self, psi0: psi0.clone(), coeffs })
    }

    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        self.trajectory(psi0)?.at(t)
    }
}

pub struct Trajectory<'a> {
    prop: &'a Propagator,
    psi0: StateVector,
    coeffs: Vec<C64>,
}

impl Trajectory<'_> {
    pub fn at(&self, t: f64) -> Result<StateVector> {
        if !t.is_finite() {
            return Err(Error::Config(format!("evolution time {t} is not finite")));
        }
        if t == 0.0 {
            return Ok(self.psi0.clone());
        }
        let eig = &self.prop.eig;
        let n = eig.dim();
        let rotated: Vec<C64> = self
            .coeffs
            .iter()
            .zip(&eig.values)
            .map(|(c, &l)| c * C64::from_polar(1.0, -l * t))
            .collect();
        let v = &eig.vectors;
        let amplitudes = (0..n)
            .map(|i| v.row(i).iter().zip(&rotated).map(|(a, b)| a * b).sum())
            .collect();
        Ok(StateVector { n_qubits: self.psi0.n_qubits, amplitudes })
    }
}

/// `exp(-iHt) psi0`. Repeated calls should go through [`Propagator`].
pub fn evolve(h: &Hamiltonian, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(h)?.evolve(psi0, t)
}

/// Product state with every qubit in `R_z(theta_z) R_y(theta_y) |0>`,
/// `R_a(theta) = exp(-i theta sigma_a / 2)`.
pub fn prepare_initial_state(n_qubits: usize, theta_y: f64, theta_z: f64) -> Result<StateVector> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::DimensionOverflow { n_qubits, max: MAX_QUBITS });
    }
    let (c, s) = ((theta_y / 2.0).cos(), (theta_y / 2.0).sin());
    let single = [
        C64::from_polar(1.0, -theta_z / 2.0) * c,
        C64::from_polar(1.0, theta_z / 2.0) * s,
    ];
    let amplitudes = (0..1usize << n_qubits)
        .map(|x| {
            (0..n_qubits).fold(C64::new(1.0, 0.0), |acc, q| acc * single[(x >> q) & 1])
        })
        .collect();
    Ok(StateVector { n_qubits, amplitudes })
}

/// `<psi|P|psi>`, real part.
pub fn expectation(psi: &StateVector, p: &PauliString) -> Result<f64> {
    if p.n_qubits() != psi.n_qubits() {
        return Err(mismatch(format!(
            "{}-qubit operator on {}-qubit state",
            p.n_qubits(),
            psi.n_qubits()
        )));
    }
    let a = psi.amplitudes();
    let value: C64 = (0..a.len())
        .map(|x| {
            let (phase, y) = p.apply_basis(x);
            a[y].conj() * phase * a[x]
        })
        .sum();
    Ok(value.re.clamp(-1.0, 1.0))
}
