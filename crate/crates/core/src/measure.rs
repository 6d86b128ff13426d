//! Local measurement sets: the network inputs.
//!
//! The operator ordering here is part of the dataset format. Static sets list
//! every single-qubit Pauli `sigma_a^i` (qubit outer, axis x, y, z inner),
//! then every nearest-neighbour pair `sigma_a^i sigma_b^{i+1}` (bond outer,
//! `(a, b)` row-major over x, y, z).

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::qcore::{expectation, Hamiltonian, Pauli, PauliString, Propagator, StateVector, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    /// One- and two-body nearest-neighbour Paulis.
    TwoLocal,
    /// Single-qubit Paulis only.
    SingleQubit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    n_qubits: usize,
    kind: MeasurementKind,
    operators: Vec<PauliString>,
}

impl MeasurementSet {
    pub fn new(kind: MeasurementKind, n_qubits: usize) -> Result<Self> {
        match kind {
            MeasurementKind::TwoLocal => static_measurement_set(n_qubits),
            MeasurementKind::SingleQubit => single_qubit_set(n_qubits),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn operators(&self) -> &[PauliString] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

/// `3N + 9(N-1)` one- and two-body operators in canonical order.
pub fn static_measurement_set(n_qubits: usize) -> Result<MeasurementSet> {
    if n_qubits < 2 {
        return Err(Error::Config(format!("two-local measurements need >= 2 qubits, got {n_qubits}")));
    }
    check_size(n_qubits)?;
    let mut operators = single_qubit_set(n_qubits)?.operators;
    for i in 1..n_qubits {
        for a in Pauli::AXES {
            for b in Pauli::AXES {
                operators.push(PauliString::with_factors(n_qubits, &[(i, a), (i + 1, b)])?);
            }
        }
    }
    Ok(MeasurementSet { n_qubits, kind: MeasurementKind::TwoLocal, operators })
}

/// `3N` single-qubit operators, qubit outer and axis inner.
pub fn single_qubit_set(n_qubits: usize) -> Result<MeasurementSet> {
    check_size(n_qubits)?;
    let mut operators = Vec::with_capacity(3 * n_qubits);
    for i in 1..=n_qubits {
        for a in Pauli::AXES {
            operators.push(PauliString::single(n_qubits, i, a)?);
        }
    }
    Ok(MeasurementSet { n_qubits, kind: MeasurementKind::SingleQubit, operators })
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::DimensionOverflow { n_qubits, max: MAX_QUBITS });
    }
    Ok(())
}

pub fn measure_expectations(psi: &StateVector, set: &MeasurementSet) -> Result<Vec<f64>> {
    if psi.n_qubits() != set.n_qubits {
        return Err(mismatch(format!(
            "{}-qubit measurement set on a {}-qubit state",
            set.n_qubits,
            psi.n_qubits()
        )));
    }
    set.operators.iter().map(|p| expectation(psi, p)).collect()
}

/// Single-qubit expectations sampled at `s * tau` for `s = 1..=n_steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeTraceGrid {
    pub n_qubits: usize,
    pub n_steps: usize,
    pub tau: f64,
    /// Row-major `n_steps x 3 n_qubits`.
    pub values: Vec<f64>,
}

impl TimeTraceGrid {
    pub fn width(&self) -> usize {
        3 * self.n_qubits
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let w = self.width();
        &self.values[s * w..(s + 1) * w]
    }
}

pub fn time_traces(h: &Hamiltonian, psi0: &StateVector, n_steps: usize, tau: f64) -> Result<TimeTraceGrid> {
    let prop = Propagator::new(h)?;
    time_traces_with(&prop, psi0, n_steps, tau)
}

/// [`time_traces`] reusing an existing propagator.
pub fn time_traces_with(
    prop: &Propagator,
    psi0: &StateVector,
    n_steps: usize,
    tau: f64,
) -> Result<TimeTraceGrid> {
    if n_steps == 0 {
        return Err(Error::Config("time trace needs at least one step".into()));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Config(format!("time step {tau} must be positive")));
    }
    let set = single_qubit_set(psi0.n_qubits())?;
    let traj = prop.trajectory(psi0)?;
    let mut values = Vec::with_capacity(n_steps * set.len());
    for s in 1..=n_steps {
        values.extend(measure_expectations(&traj.at(s as f64 * tau)?, &set)?);
    }
    Ok(TimeTraceGrid { n_qubits: psi0.n_qubits(), n_steps, tau, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{prepare_initial_state, ZERO};
    use crate::C64;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn set_sizes_and_order() {
        for n in 2..=8 {
            assert_eq!(static_measurement_set(n).unwrap().len(), 3 * n + 9 * (n - 1));
        }
        assert_eq!(static_measurement_set(4).unwrap().len(), 39);
        assert_eq!(static_measurement_set(6).unwrap().len(), 63);
        let two = static_measurement_set(2).unwrap();
        assert_eq!(two.len(), 15);
        assert_eq!(two.operators()[0].to_string(), "XI");
        assert_eq!(two.operators()[14].to_string(), "ZZ");
        assert_eq!(two.operators()[6].to_string(), "XX");
        assert_eq!(two.operators()[7].to_string(), "XY");
        assert!(static_measurement_set(1).is_err());
        assert_eq!(static_measurement_set(5).unwrap(), static_measurement_set(5).unwrap());
    }

    #[test]
    fn all_zero_state() {
        let psi = StateVector::basis(4, 0).unwrap();
        let set = static_measurement_set(4).unwrap();
        let v = measure_expectations(&psi, &set).unwrap();
        for (p, x) in set.operators().iter().zip(&v) {
            let only_z = p.axes().iter().all(|&a| a == Pauli::I || a == Pauli::Z);
            assert_eq!(*x, if only_z { 1.0 } else { 0.0 }, "{p}");
        }
    }

    #[test]
    fn bell_times_zeros() {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let bell = StateVector::new(vec![s, ZERO, ZERO, s]).unwrap();
        let psi = bell.tensor(&StateVector::basis(2, 0).unwrap()).unwrap();
        let set = static_measurement_set(4).unwrap();
        let v = measure_expectations(&psi, &set).unwrap();
        let idx = |name: &str| set.operators().iter().position(|p| p.to_string() == name).unwrap();
        assert!((v[idx("XXII")] - 1.0).abs() < 1e-15);
        assert_eq!(v[idx("ZIII")], 0.0);
        assert!((v[idx("IIIZ")] - 1.0).abs() < 1e-15);
        assert!(measure_expectations(&bell, &set).is_err());
    }

    #[test]
    fn frozen_dynamics() {
        let n = 3;
        let h = Hamiltonian::ising_quench(n, 0.0, 0.0).unwrap();
        let psi0 = prepare_initial_state(n, PI / 8.0, PI / 8.0).unwrap();
        let grid = time_traces(&h, &psi0, 7, 0.3).unwrap();
        let first = measure_expectations(&psi0, &single_qubit_set(n).unwrap()).unwrap();
        for s in 0..7 {
            for (a, b) in grid.row(s).iter().zip(&first) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn field_only_rabi() {
        let n = 4;
        let h = Hamiltonian::ising_quench(n, 0.0, 1.0).unwrap();
        let psi0 = StateVector::basis(n, 0).unwrap();
        let tau = PI / 50.0;
        let grid = time_traces(&h, &psi0, 50, tau).unwrap();
        assert_eq!(grid.values.len(), 50 * 12);
        for s in 0..50 {
            let t = (s + 1) as f64 * tau;
            for q in 0..n {
                assert!((grid.row(s)[3 * q + 2] - (2.0 * t).cos()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn invalid_grid_arguments() {
        let h = Hamiltonian::ising_quench(2, 1.0, 1.0).unwrap();
        let psi0 = StateVector::basis(2, 0).unwrap();
        assert!(time_traces(&h, &psi0, 0, 0.1).is_err());
        assert!(time_traces(&h, &psi0, 3, 0.0).is_err());
    }
}
