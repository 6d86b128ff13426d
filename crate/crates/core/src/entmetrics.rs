//! Entanglement quantities of pure and reduced states: Rényi entropies,
//! moments of the partial transpose and the relative-entropy coherence.
//!
//! Entropies are in bits. All quantities are computed from eigenvalues of
//! exactly reduced density matrices, so this module also serves as the
//! reference against which learned predictions are scored.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{eigvals_hermitian, CMatrix, StateVector};

/// Validation tolerance for trace and Hermiticity.
const DENSITY_TOL: f64 = 1e-10;

/// Eigenvalues below `-NEGATIVITY_TOL` mark a density matrix as invalid.
const NEGATIVITY_TOL: f64 = 1e-8;

/// Positive semidefinite, unit-trace matrix on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and (within 1e-10) positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.rows();
        if !matrix.is_square() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidDensity(format!(
                "{}x{} is not a qubit-register shape",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min = eigvals_hermitian(&matrix)?[0];
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { n_qubits: dim.trailing_zeros() as usize, matrix })
    }

    /// Skips validation; for matrices valid by construction.
    pub(crate) fn from_parts(n_qubits: usize, matrix: CMatrix) -> Self {
        Self { n_qubits, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        m.as_slice().iter().map(|x| x.norm_sqr()).sum()
    }

    /// Keeps only the diagonal.
    pub fn dephased(&self) -> DensityMatrix {
        Self::from_parts(self.n_qubits, CMatrix::from_diag(&self.matrix.diagonal()))
    }

    /// Eigenvalues clamped into [0, 1]; errors on significantly negative ones.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let vals = eigvals_hermitian(&self.matrix)?;
        if let Some(&bad) = vals.iter().find(|&&l| l < -NEGATIVITY_TOL) {
            return Err(Error::InvalidDensity(format!("eigenvalue {bad:e} is negative")));
        }
        Ok(vals.into_iter().map(|l| l.clamp(0.0, 1.0)).collect())
    }
}

/// Sorted set of 1-based qubit labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsystemSpec(Vec<usize>);

impl SubsystemSpec {
    pub fn new(labels: impl IntoIterator<Item = usize>) -> Result<Self> {
        let raw: Vec<usize> = labels.into_iter().collect();
        let set: BTreeSet<usize> = raw.iter().copied().collect();
        if set.is_empty() {
            return Err(Error::InvalidSubsystem("empty qubit set".into()));
        }
        if set.len() != raw.len() {
            return Err(Error::InvalidSubsystem(format!("duplicate labels in {raw:?}")));
        }
        if set.contains(&0) {
            return Err(Error::InvalidSubsystem("qubit labels are 1-based".into()));
        }
        Ok(Self(set.into_iter().collect()))
    }

    pub fn all(n_qubits: usize) -> Self {
        Self((1..=n_qubits).collect())
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_within(&self, n_qubits: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max <= n_qubits => Ok(()),
            _ => Err(Error::InvalidSubsystem(format!(
                "{self} not contained in a {n_qubits}-qubit register"
            ))),
        }
    }

    pub fn is_disjoint(&self, other: &SubsystemSpec) -> bool {
        self.0.iter().all(|q| !other.0.contains(q))
    }

    pub fn union(&self, other: &SubsystemSpec) -> SubsystemSpec {
        let set: BTreeSet<usize> = self.0.iter().chain(&other.0).copied().collect();
        Self(set.into_iter().collect())
    }

    /// Positions of `self`'s qubits inside the register `within`, 1-based.
    fn relabel_within(&self, within: &SubsystemSpec) -> Result<SubsystemSpec> {
        self.0
            .iter()
            .map(|q| {
                within.0.iter().position(|w| w == q).map(|p| p + 1).ok_or_else(|| {
                    Error::InvalidSubsystem(format!("qubit {q} not in {within}"))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// Bit mask of the region inside an `n_qubits` register (qubit 1 = MSB).
    fn mask(&self, n_qubits: usize) -> usize {
        self.0.iter().fold(0, |m, &q| m | 1 << (n_qubits - q))
    }
}

/// Qubit labels run together (`12`), or dot-separated once any label has two
/// digits (`1.10`).
impl fmt::Display for SubsystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.0.iter().any(|&q| q >= 10) { "." } else { "" };
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

impl Serialize for SubsystemSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubsystemSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        SubsystemSpec::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Renyi,
    PtMoment,
    Coherence,
}

/// One slot of the target vector.
///
/// `region_b` is only used by PT moments: the moment is taken on the reduced
/// state of `region_a ∪ region_b` with the transpose on `region_a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    #[serde(default = "default_order")]
    pub order: u32,
    pub region_a: SubsystemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_b: Option<SubsystemSpec>,
}

fn default_order() -> u32 {
    1
}

impl MetricSpec {
    pub fn renyi(order: u32, region_a: SubsystemSpec) -> Self {
        Self { kind: MetricKind::Renyi, order, region_a, region_b: None }
    }

    pub fn pt_moment(order: u32, region_a: SubsystemSpec, region_b: SubsystemSpec) -> Self {
        Self { kind: MetricKind::PtMoment, order, region_a, region_b: Some(region_b) }
    }

    pub fn coherence(region_a: SubsystemSpec) -> Self {
        Self { kind: MetricKind::Coherence, order: 1, region_a, region_b: None }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        self.region_a.check_within(n_qubits).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        match self.kind {
            MetricKind::Renyi if self.order < 2 => {
                Err(Error::InvalidSpec(format!("Renyi order {} < 2", self.order)))
            }
            MetricKind::PtMoment => {
                if self.order < 1 {
                    return Err(Error::InvalidSpec("PT moment order must be >= 1".into()));
                }
                let b = self
                    .region_b
                    .as_ref()
                    .ok_or_else(|| Error::InvalidSpec("PT moment needs region_b".into()))?;
                b.check_within(n_qubits).map_err(|e| Error::InvalidSpec(e.to_string()))?;
                if !self.region_a.is_disjoint(b) {
                    return Err(Error::InvalidSpec(format!(
                        "regions {} and {b} overlap",
                        self.region_a
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Short label such as `S2[12]`, `P3[1|2]`, `C[12]`.
    pub fn label(&self) -> String {
        match self.kind {
            MetricKind::Renyi => format!("S{}[{}]", self.order, self.region_a),
            MetricKind::PtMoment => format!(
                "P{}[{}|{}]",
                self.order,
                self.region_a,
                self.region_b.as_ref().map(|b| b.to_string()).unwrap_or_default()
            ),
            MetricKind::Coherence => format!("C[{}]", self.region_a),
        }
    }
}

fn parse_region(text: &str) -> Result<SubsystemSpec> {
    let bad = || Error::InvalidSpec(format!("bad region '{text}'"));
    let labels: Vec<usize> = if text.contains('.') {
        text.split('.').map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?
    } else {
        text.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect::<Result<_>>()?
    };
    SubsystemSpec::new(labels)
}

/// Parses the [`MetricSpec::label`] syntax: `S2[12]`, `P3[1|2]`, `C[12]`.
impl std::str::FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse metric '{s}'"));
        let s = s.trim();
        let open = s.find('[').ok_or_else(bad)?;
        let body = s[open + 1..].strip_suffix(']').ok_or_else(bad)?;
        let (head, order) = s[..open].split_at(1.min(open));
        let order = if order.is_empty() { None } else { Some(order.parse::<u32>().map_err(|_| bad())?) };
        match (head, order) {
            ("S", Some(n)) => Ok(MetricSpec::renyi(n, parse_region(body)?)),
            ("P", Some(n)) => {
                let (a, b) = body.split_once('|').ok_or_else(bad)?;
                Ok(MetricSpec::pt_moment(n, parse_region(a)?, parse_region(b)?))
            }
            ("C", None) => Ok(MetricSpec::coherence(parse_region(body)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `|psi><psi|`.
pub fn density_matrix(psi: &StateVector) -> DensityMatrix {
    let a = psi.amplitudes();
    let dim = a.len();
    let m = CMatrix::from_fn(dim, dim, |i, j| a[i] * a[j].conj());
    DensityMatrix::from_parts(psi.n_qubits(), m)
}

/// Traces out every qubit not in `keep`. Kept qubits retain their relative
/// order.
pub fn partial_trace(rho: &DensityMatrix, keep: &SubsystemSpec) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    keep.check_within(n)?;
    if keep.len() == n {
        return Ok(rho.clone());
    }
    let (kept, env) = index_maps(n, keep);
    let dk = kept.len();
    let m = &rho.matrix;
    let out = CMatrix::from_fn(dk, dk, |a, b| {
        env.iter().map(|&e| m[(kept[a] | e, kept[b] | e)]).sum()
    });
    Ok(DensityMatrix::from_parts(keep.len(), out))
}

/// Reduced state of a pure state without forming the full density matrix.
pub fn reduced_density(psi: &StateVector, keep: &SubsystemSpec) -> Result<DensityMatrix> {
    let n = psi.n_qubits();
    keep.check_within(n)?;
    let (kept, env) = index_maps(n, keep);
    let a = psi.amplitudes();
    let dk = kept.len();
    let out = CMatrix::from_fn(dk, dk, |i, j| {
        env.iter().map(|&e| a[kept[i] | e] * a[kept[j] | e].conj()).sum()
    });
    Ok(DensityMatrix::from_parts(keep.len(), out))
}

/// Full-register offsets of every kept-subsystem index and every environment
/// index.
fn index_maps(n: usize, keep: &SubsystemSpec) -> (Vec<usize>, Vec<usize>) {
    let keep_bits: Vec<usize> = keep.labels().iter().map(|&q| n - q).collect();
    let env_bits: Vec<usize> = (1..=n).filter(|q| !keep.labels().contains(q)).map(|q| n - q).collect();
    let spread = |bits: &[usize]| -> Vec<usize> {
        let k = bits.len();
        (0..1usize << k)
            .map(|idx| {
                bits.iter()
                    .enumerate()
                    .fold(0, |acc, (pos, &b)| acc | ((idx >> (k - 1 - pos)) & 1) << b)
            })
            .collect()
    };
    (spread(&keep_bits), spread(&env_bits))
}

/// Transposes the tensor indices of `region_a` only.
pub fn partial_transpose(rho: &DensityMatrix, region_a: &SubsystemSpec) -> Result<CMatrix> {
    let n = rho.n_qubits;
    region_a.check_within(n)?;
    Ok(partial_transpose_matrix(&rho.matrix, region_a.mask(n)))
}

fn partial_transpose_matrix(m: &CMatrix, mask: usize) -> CMatrix {
    let dim = m.rows();
    CMatrix::from_fn(dim, dim, |r, c| {
        let r2 = (r & !mask) | (c & mask);
        let c2 = (c & !mask) | (r & mask);
        m[(r2, c2)]
    })
}

/// `(1/(1-n)) log2 tr rho^n`, n >= 2.
pub fn renyi_entropy(rho: &DensityMatrix, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("Renyi order {n} < 2")));
    }
    let spectrum = rho.spectrum()?;
    Ok(renyi_from_spectrum(&spectrum, n))
}

fn renyi_from_spectrum(spectrum: &[f64], n: u32) -> f64 {
    let tr: f64 = spectrum.iter().map(|l| l.powi(n as i32)).sum();
    let tr = tr.clamp(f64::MIN_POSITIVE, 1.0);
    tr.log2() / (1.0 - n as f64)
}

/// `-sum lambda log2 lambda` with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_bits(&rho.spectrum()?))
}

fn shannon_bits(p: &[f64]) -> f64 {
    let s: f64 = p.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum();
    s.max(0.0)
}

/// `Tr[(rho^{T_A})^n]` from the eigenvalues of the partial transpose.
pub fn pt_moment(rho: &DensityMatrix, region_a: &SubsystemSpec, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidSpec("PT moment order must be >= 1".into()));
    }
    let pt = partial_transpose(rho, region_a)?;
    let mu = eigvals_hermitian(&pt)?;
    Ok(mu.iter().map(|m| m.powi(n as i32)).sum())
}

/// Relative-entropy coherence `S(rho_diag) - S(rho)` in the computational basis.
pub fn coherence(rho: &DensityMatrix) -> Result<f64> {
    let diag: Vec<f64> = rho.matrix.diagonal().iter().map(|d| d.re.clamp(0.0, 1.0)).collect();
    let c = shannon_bits(&diag) - von_neumann_entropy(rho)?;
    Ok(c.max(0.0))
}

/// Evaluates one spec on a pure state.
pub fn evaluate_metric(psi: &StateVector, spec: &MetricSpec) -> Result<f64> {
    spec.validate(psi.n_qubits())?;
    match spec.kind {
        MetricKind::Renyi => renyi_entropy(&reduced_density(psi, &spec.region_a)?, spec.order),
        MetricKind::Coherence => coherence(&reduced_density(psi, &spec.region_a)?),
        MetricKind::PtMoment => {
            let b = spec.region_b.as_ref().expect("validated");
            let ab = spec.region_a.union(b);
            let rho_ab = reduced_density(psi, &ab)?;
            pt_moment(&rho_ab, &spec.region_a.relabel_within(&ab)?, spec.order)
        }
    }
}

/// One value per spec, in order.
pub fn evaluate_metrics(psi: &StateVector, specs: &[MetricSpec]) -> Result<Vec<f64>> {
    specs.iter().map(|s| evaluate_metric(psi, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::ZERO;
    use crate::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn sub(labels: &[usize]) -> SubsystemSpec {
        SubsystemSpec::new(labels.iter().copied()).unwrap()
    }

    fn bell() -> StateVector {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        StateVector::new(vec![s, ZERO, ZERO, s]).unwrap()
    }

    fn ghz3() -> StateVector {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        let mut a = vec![ZERO; 8];
        a[0] = s;
        a[7] = s;
        StateVector::new(a).unwrap()
    }

    fn plus() -> StateVector {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        StateVector::new(vec![s, s]).unwrap()
    }

    fn real_diag(vals: &[f64]) -> DensityMatrix {
        let d: Vec<C64> = vals.iter().map(|&v| C64::new(v, 0.0)).collect();
        DensityMatrix::new(CMatrix::from_diag(&d)).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn density_of_basis_and_plus() {
        let rho = density_matrix(&StateVector::basis(1, 0).unwrap());
        assert_eq!(rho, real_diag(&[1.0, 0.0]));
        let rho = density_matrix(&plus());
        for x in rho.matrix().as_slice() {
            close(x.re, 0.5, 1e-15);
        }
        close(rho.purity(), 1.0, 1e-12);
    }

    #[test]
    fn partial_trace_cases() {
        let rho = density_matrix(&bell());
        let a = partial_trace(&rho, &sub(&[1])).unwrap();
        assert!(a.matrix().max_abs_diff(real_diag(&[0.5, 0.5]).matrix()) < 1e-15);

        let prod = StateVector::basis(1, 0).unwrap().tensor(&plus()).unwrap();
        let b = partial_trace(&density_matrix(&prod), &sub(&[2])).unwrap();
        assert!(b.matrix().max_abs_diff(density_matrix(&plus()).matrix()) < 1e-15);

        let g = partial_trace(&density_matrix(&ghz3()), &sub(&[1, 2])).unwrap();
        assert!(g.matrix().max_abs_diff(real_diag(&[0.5, 0.0, 0.0, 0.5]).matrix()) < 1e-15);

        assert_eq!(partial_trace(&rho, &sub(&[1, 2])).unwrap(), rho);
        assert!(partial_trace(&rho, &sub(&[3])).is_err());
        assert!(SubsystemSpec::new([]).is_err());
    }

    #[test]
    fn reduced_density_matches_partial_trace() {
        let psi = crate::qcore::prepare_initial_state(3, 0.3, 0.2).unwrap();
        let h = crate::qcore::Hamiltonian::ising_quench(3, 0.8, 0.6).unwrap();
        let psi = crate::qcore::evolve(&h, &psi, 1.3).unwrap();
        for keep in [vec![1], vec![2], vec![1, 3], vec![2, 3], vec![1, 2, 3]] {
            let k = sub(&keep);
            let a = reduced_density(&psi, &k).unwrap();
            let b = partial_trace(&density_matrix(&psi), &k).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
        }
    }

    #[test]
    fn partial_transpose_cases() {
        let rho = density_matrix(&bell());
        let full = partial_transpose(&rho, &sub(&[1, 2])).unwrap();
        assert_eq!(full, rho.matrix().transpose());

        let pt = partial_transpose(&rho, &sub(&[1])).unwrap();
        let vals = eigvals_hermitian(&pt).unwrap();
        for (v, w) in vals.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            close(*v, w, 1e-14);
        }
        let back = DensityMatrix::from_parts(2, pt);
        assert_eq!(partial_transpose(&back, &sub(&[1])).unwrap(), *rho.matrix());
    }

    #[test]
    fn partial_transpose_of_product() {
        let ra = density_matrix(&crate::qcore::prepare_initial_state(1, 0.7, 0.4).unwrap());
        let rb = density_matrix(&crate::qcore::prepare_initial_state(1, 1.9, -0.3).unwrap());
        let prod = DensityMatrix::from_parts(2, ra.matrix().kron(rb.matrix()));
        let pt = partial_transpose(&prod, &sub(&[1])).unwrap();
        let want = ra.matrix().transpose().kron(rb.matrix());
        assert!(pt.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn renyi_cases() {
        close(renyi_entropy(&density_matrix(&plus()), 2).unwrap(), 0.0, 1e-12);
        close(renyi_entropy(&density_matrix(&plus()), 5).unwrap(), 0.0, 1e-12);
        close(renyi_entropy(&real_diag(&[0.5, 0.5]), 2).unwrap(), 1.0, 1e-14);
        close(renyi_entropy(&real_diag(&[0.75, 0.25]), 2).unwrap(), -(10.0f64 / 16.0).log2(), 1e-14);
        close(renyi_entropy(&real_diag(&[0.75, 0.25]), 2).unwrap(), 0.678_071_905_112_638, 1e-12);
        assert!(renyi_entropy(&real_diag(&[0.5, 0.5]), 1).is_err());
    }

    #[test]
    fn von_neumann_cases() {
        close(von_neumann_entropy(&density_matrix(&plus())).unwrap(), 0.0, 1e-12);
        close(von_neumann_entropy(&real_diag(&[0.5, 0.5])).unwrap(), 1.0, 1e-14);
        close(von_neumann_entropy(&real_diag(&[0.75, 0.25])).unwrap(), 0.811_278_124_459_132_8, 1e-12);
    }

    #[test]
    fn pt_moment_cases() {
        let rho = density_matrix(&bell());
        close(pt_moment(&rho, &sub(&[1]), 1).unwrap(), 1.0, 1e-12);
        close(pt_moment(&rho, &sub(&[1]), 2).unwrap(), 1.0, 1e-12);
        close(pt_moment(&rho, &sub(&[1]), 3).unwrap(), 0.25, 1e-12);
        let sep = real_diag(&[0.5, 0.0, 0.0, 0.5]);
        let p2 = pt_moment(&sep, &sub(&[1]), 2).unwrap();
        let p3 = pt_moment(&sep, &sub(&[1]), 3).unwrap();
        close(p3, 0.25, 1e-14);
        assert!(p3 >= p2 * p2 - 1e-12);
    }

    #[test]
    fn coherence_cases() {
        close(coherence(&density_matrix(&StateVector::basis(1, 0).unwrap())).unwrap(), 0.0, 1e-14);
        close(coherence(&density_matrix(&plus())).unwrap(), 1.0, 1e-12);
        close(coherence(&density_matrix(&bell())).unwrap(), 1.0, 1e-12);
    }

    #[test]
    fn evaluate_bundle() {
        let zero = StateVector::basis(2, 0).unwrap();
        let v = evaluate_metrics(&zero, &[MetricSpec::renyi(2, sub(&[1]))]).unwrap();
        close(v[0], 0.0, 1e-14);

        let specs = [
            MetricSpec::renyi(2, sub(&[1])),
            MetricSpec::pt_moment(3, sub(&[1]), sub(&[2])),
            MetricSpec::coherence(sub(&[1, 2])),
        ];
        let v = evaluate_metrics(&bell(), &specs).unwrap();
        close(v[0], 1.0, 1e-12);
        close(v[1], 0.25, 1e-12);
        close(v[2], 1.0, 1e-12);
    }

    #[test]
    fn pt_moment_on_partial_union() {
        // A={1}, B={3} on GHZ3: reduced state of {1,3} is the separable
        // diag(1/2, 0, 0, 1/2).
        let v = evaluate_metric(&ghz3(), &MetricSpec::pt_moment(3, sub(&[1]), sub(&[3]))).unwrap();
        close(v, 0.25, 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(MetricSpec::renyi(1, sub(&[1])).validate(2).is_err());
        assert!(MetricSpec::renyi(2, sub(&[3])).validate(2).is_err());
        assert!(MetricSpec::pt_moment(3, sub(&[1, 2]), sub(&[2])).validate(3).is_err());
        let no_b = MetricSpec { region_b: None, ..MetricSpec::pt_moment(3, sub(&[1]), sub(&[2])) };
        assert!(no_b.validate(2).is_err());
        assert!(MetricSpec::coherence(sub(&[1, 2])).validate(2).is_ok());
        assert!(SubsystemSpec::new([1, 1]).is_err());
        assert!(SubsystemSpec::new([0]).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s = MetricSpec::pt_moment(3, sub(&[1]), sub(&[2]));
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"pt_moment","order":3,"region_a":[1],"region_b":[2]}"#);
        let back: MetricSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(s.label(), "P3[1|2]");
        let c: MetricSpec = serde_json::from_str(r#"{"kind":"coherence","region_a":[2,1]}"#).unwrap();
        assert_eq!(c.label(), "C[12]");
    }

    #[test]
    fn invalid_density_rejected() {
        assert!(DensityMatrix::new(CMatrix::from_diag(&[C64::new(1.2, 0.0), C64::new(-0.2, 0.0)])).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(2)).is_err());
        let neg = DensityMatrix::from_parts(1, CMatrix::from_diag(&[C64::new(1.1, 0.0), C64::new(-0.1, 0.0)]));
        assert!(renyi_entropy(&neg, 2).is_err());
    }

    #[test]
    fn label_round_trip() {
        for text in ["S2[12]", "S3[1]", "P3[1|2]", "P1[13|24]", "C[1234]", "S2[1.10]"] {
            let spec: MetricSpec = text.parse().unwrap();
            assert_eq!(spec.label(), text);
        }
        assert_eq!("P3[1|2]".parse::<MetricSpec>().unwrap(), MetricSpec::pt_moment(3, sub(&[1]), sub(&[2])));
        for bad in ["S[12]", "X2[1]", "P3[12]", "S2[1a]", "S2 12", "C2[1]"] {
            assert!(bad.parse::<MetricSpec>().is_err(), "{bad}");
        }
    }
}
