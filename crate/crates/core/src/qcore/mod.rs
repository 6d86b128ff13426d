//! Pauli algebra, spin-chain Hamiltonians, exact diagonalization and unitary
//! time evolution for registers of up to eight qubits.

mod eigen;
mod hamiltonian;
mod matrix;
mod pauli;
mod state;

pub use eigen::{eig_hermitian, eigvals_hermitian, EigenDecomposition, HERMITIAN_TOL, MAX_DIM};
pub use hamiltonian::{hamiltonian_matrix, Hamiltonian};
pub use matrix::CMatrix;
pub use pauli::{pauli_matrix, Pauli, PauliString, MAX_QUBITS};
pub use state::{
    evolve, expectation, ground_state, prepare_initial_state, GroundStateResult, Propagator,
    StateVector, Trajectory, DEGENERACY_GAP,
};

#[cfg(test)]
pub(crate) use matrix::ZERO;
