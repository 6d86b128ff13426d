//! Dense Hermitian eigendecomposition.
//!
//! A complex Hermitian `H = A + iB` is embedded in the real symmetric matrix
//! `[[A, -B], [B, A]]` of twice the size, which is reduced to tridiagonal form
//! by Householder reflections and diagonalized with implicitly shifted QL
//! sweeps. Every eigenvalue of `H` appears twice in the embedding; a real
//! eigenvector `(u, v)` maps back to the complex eigenvector `u + iv`, and the
//! doubled spectrum is folded by orthonormalizing these complex candidates
//! within each cluster of (numerically) equal eigenvalues.
//!
//! Inside a degenerate eigenspace the basis is fixed canonically: vectors are
//! projections of computational basis states, picked greedily by largest
//! overlap. The result therefore depends only on the eigenspace, not on the
//! rotation the QL sweeps happened to produce.

use num_complex::Complex64 as C64;

use super::matrix::{norm, vdot, CMatrix, ZERO};
use crate::error::{Error, Result};

/// Largest supported matrix dimension (8 qubits).
pub const MAX_DIM: usize = 256;

/// Tolerance on `max |M - M^dag|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative spread below which eigenvalues are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(values) V^dag`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj()).sum()
        })
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eig_hermitian(m: &CMatrix) -> Result<EigenDecomposition> {
    let n = check_input(m)?;
    let mut work = embed(m);
    let two_n = 2 * n;
    let mut d = vec![0.0; two_n];
    let mut e = vec![0.0; two_n];
    tred2(&mut work, two_n, &mut d, &mut e, true);
    tql2(&mut work, two_n, &mut d, &mut e, true);
    let order = ascending_order(&d);

    let mut values = Vec::with_capacity(n);
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(n);
    let scale = d.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let mut start = 0;
    while start < two_n {
        let mut end = start + 1;
        while end < two_n && d[order[end]] - d[order[start]] <= CLUSTER_TOL * scale {
            end += 1;
        }
        // Clusters hold both copies of each eigenvalue; an odd count means the
        // tolerance split a pair, so absorb the partner.
        if (end - start) % 2 == 1 && end < two_n {
            end += 1;
        }
        let candidates: Vec<Vec<C64>> = order[start..end]
            .iter()
            .map(|&k| (0..n).map(|i| C64::new(work[i * two_n + k], work[(i + n) * two_n + k])).collect())
            .collect();
        let k = (end - start) / 2;
        let basis = orthonormal_span(candidates, k);
        let basis = if k > 1 { canonical_basis(&basis) } else { basis };
        for mut z in basis {
            fix_phase(&mut z);
            let hz = m.matvec(&z)?;
            values.push(vdot(&z, &hz).re);
            columns.push(z);
        }
        start = end;
    }

    // Rayleigh quotients inside a cluster can reorder at the 1e-16 level.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values: Vec<f64> = idx.iter().map(|&k| values[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| columns[idx[j]][i]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    let n = check_input(m)?;
    let mut work = embed(m);
    let two_n = 2 * n;
    let mut d = vec![0.0; two_n];
    let mut e = vec![0.0; two_n];
    tred2(&mut work, two_n, &mut d, &mut e, false);
    tql2(&mut work, two_n, &mut d, &mut e, false);
    d.sort_by(f64::total_cmp);
    Ok(d.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

fn check_input(m: &CMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionMismatch(format!("matrix dimension {n} outside 1..={MAX_DIM}")));
    }
    let defect = m.hermiticity_defect();
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(n)
}

/// Row-major `[[A, -B], [B, A]]`, symmetrized from the Hermitian part.
fn embed(m: &CMatrix) -> Vec<f64> {
    let n = m.rows();
    let two_n = 2 * n;
    let mut w = vec![0.0; two_n * two_n];
    for i in 0..n {
        for j in 0..n {
            let h = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            w[i * two_n + j] = h.re;
            w[(i + n) * two_n + j + n] = h.re;
            w[i * two_n + j + n] = -h.im;
            w[(i + n) * two_n + j] = h.im;
        }
    }
    w
}

fn ascending_order(d: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    order
}

/// Picks `k` orthonormal vectors spanning the candidates, largest residual first.
fn orthonormal_span(mut candidates: Vec<Vec<C64>>, k: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let (best, _) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm(c)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut z = candidates.swap_remove(best);
        // Second pass of Gram-Schmidt keeps orthogonality at machine precision.
        for _ in 0..2 {
            for q in &basis {
                let p = vdot(q, &z);
                z.iter_mut().zip(q).for_each(|(zi, qi)| *zi -= p * qi);
            }
        }
        let nz = norm(&z);
        z.iter_mut().for_each(|x| *x /= nz);
        for c in candidates.iter_mut() {
            let p = vdot(&z, c);
            c.iter_mut().zip(&z).for_each(|(ci, zi)| *ci -= p * zi);
        }
        basis.push(z);
    }
    basis
}

/// Re-expresses an orthonormal basis of a subspace as successive projections of
/// computational basis states.
fn canonical_basis(basis: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = basis[0].len();
    let k = basis.len();
    let mut chosen: Vec<Vec<C64>> = Vec::with_capacity(k);
    for _ in 0..k {
        // Remaining projector weight on each basis state.
        let weights: Vec<f64> = (0..n)
            .map(|j| {
                basis.iter().map(|q| q[j].norm_sqr()).sum::<f64>()
                    - chosen.iter().map(|z| z[j].norm_sqr()).sum::<f64>()
            })
            .collect();
        let max_w = weights.iter().cloned().fold(f64::MIN, f64::max);
        let pick = weights.iter().position(|&w| w >= max_w * (1.0 - 1e-9)).unwrap_or(0);
        let mut z = vec![ZERO; n];
        for q in basis {
            let c = q[pick].conj();
            z.iter_mut().zip(q).for_each(|(zi, qi)| *zi += c * qi);
        }
        for prev in &chosen {
            let c = prev[pick].conj();
            z.iter_mut().zip(prev).for_each(|(zi, pi)| *zi -= c * pi);
        }
        let nz = norm(&z);
        z.iter_mut().for_each(|x| *x /= nz);
        chosen.push(z);
    }
    chosen
}

/// Rotates the global phase so the largest-magnitude amplitude is real positive.
pub(crate) fn fix_phase(z: &mut [C64]) {
    let max_mag = z.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if max_mag == 0.0 {
        return;
    }
    let Some(pivot) = z.iter().position(|x| x.norm() >= max_mag * (1.0 - 1e-9)) else {
        return;
    };
    let phase = z[pivot].conj() / z[pivot].norm();
    z.iter_mut().for_each(|x| *x *= phase);
    z[pivot] = C64::new(z[pivot].re, 0.0);
}

// Householder tridiagonalization (EISPACK tred2). `v` is row-major n x n; on
// return `d` holds the diagonal, `e[1..]` the subdiagonal, and `v` the
// accumulated orthogonal transform when `vectors` is set.
#[allow(clippy::needless_range_loop)]
fn tred2(v: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vectors: bool) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if !vectors {
        for i in 0..n {
            d[i] = v[at(i, i)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e), EISPACK tql2. Eigenvalues are
// left unsorted in `d`; columns of `v` are rotated along when `vectors` is set.
fn tql2(v: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vectors: bool) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for k in 0..n {
                            let row = k * n;
                            h = v[row + i + 1];
                            v[row + i + 1] = s * v[row + i] + c * h;
                            v[row + i] = c * v[row + i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iter >= 200 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn unitarity_defect(v: &CMatrix) -> f64 {
        v.adjoint().matmul(v).unwrap().max_abs_diff(&CMatrix::identity(v.rows()))
    }

    #[test]
    fn diagonal_input_sorted() {
        let m = CMatrix::from_diag(&[C64::new(3.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let eig = eig_hermitian(&m).unwrap();
        for (got, want) in eig.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn sigma_x_spectrum() {
        let o = C64::new(1.0, 0.0);
        let m = CMatrix::from_vec(2, 2, vec![ZERO, o, o, ZERO]).unwrap();
        let eig = eig_hermitian(&m).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = eig.vector(0);
        let plus = eig.vector(1);
        // Phase convention makes the first max-magnitude amplitude positive.
        assert!((minus[0] - C64::new(s, 0.0)).norm() < 1e-12);
        assert!((minus[1] + C64::new(s, 0.0)).norm() < 1e-12);
        assert!((plus[0] - C64::new(s, 0.0)).norm() < 1e-12);
        assert!((plus[1] - C64::new(s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        for seed in 0..5 {
            let m = random_hermitian(16, seed);
            let eig = eig_hermitian(&m).unwrap();
            assert!(eig.reconstruct().max_abs_diff(&m) < 1e-9);
            assert!(unitarity_defect(&eig.vectors) < 1e-9);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            let vals = eigvals_hermitian(&m).unwrap();
            for (a, b) in vals.iter().zip(&eig.values) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_space_gets_basis_states() {
        // diag(-1, 0, 0, -1): the -1 eigenspace is span{|00>, |11>} and
        // canonicalization must return the basis states themselves.
        let m = CMatrix::from_diag(&[
            C64::new(-1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ]);
        let eig = eig_hermitian(&m).unwrap();
        let v0 = eig.vector(0);
        assert!((v0[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(v0[3].norm() < 1e-12);
        assert!(unitarity_defect(&eig.vectors) < 1e-12);
    }

    #[test]
    fn degenerate_random_unitary_conjugate() {
        // Highly degenerate spectrum hidden behind a random unitary.
        let h = random_hermitian(8, 11);
        let basis = eig_hermitian(&h).unwrap().vectors;
        let diag: Vec<C64> =
            [1.0, 1.0, 1.0, -2.0, -2.0, 0.5, 0.5, 0.5].iter().map(|&x| C64::new(x, 0.0)).collect();
        let m = basis.matmul(&CMatrix::from_diag(&diag)).unwrap().matmul(&basis.adjoint()).unwrap();
        let eig = eig_hermitian(&m).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-9);
        assert!(unitarity_defect(&eig.vectors) < 1e-9);
        assert!((eig.values[0] + 2.0).abs() < 1e-10 && (eig.values[7] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn deterministic_bits() {
        let m = random_hermitian(12, 3);
        let a = eig_hermitian(&m).unwrap();
        let b = eig_hermitian(&m).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn rejects_non_hermitian_and_oversize() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian(_))));
        assert!(eig_hermitian(&CMatrix::zeros(2, 3)).is_err());
        assert!(eig_hermitian(&CMatrix::identity(257)).is_err());
    }

    #[test]
    fn one_by_one() {
        let m = CMatrix::from_diag(&[C64::new(-4.5, 0.0)]);
        let eig = eig_hermitian(&m).unwrap();
        assert_eq!(eig.values, vec![-4.5]);
        assert_eq!(eig.vector(0), vec![C64::new(1.0, 0.0)]);
    }
}
