//! Dense complex linear algebra for small Hilbert spaces (dim ≤ 8).
//!
//! Matrices are immutable values: every operation returns a fresh matrix.
//! Hermitian eigenproblems are solved by a cyclic Jacobi sweep, which is
//! simple and accurate at these sizes.

use num_complex::Complex64;

use crate::{Error, Result};

/// Dense square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} entries"
            )));
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Rank-1 projector |v⟩⟨v| (v need not be normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            dim: self.dim,
            data,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product: entry ((i·db+k),(j·db+l)) = a[i][j]·b[k][l].
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let n = da * db;
        let mut out = Self::zeros(n);
        for i in 0..da {
            for j in 0..da {
                let aij = self.data[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        out.data[(i * db + k) * n + (j * db + l)] = aij * other.data[k * db + l];
                    }
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |A − A†| entrywise.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Real part of Tr[self · other].
    pub fn trace_product_re(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        Ok(acc.re)
    }

    /// Eigenvalues of a Hermitian matrix, ascending. Errors on non-Hermitian
    /// input.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        Ok(self.eigh()?.values)
    }

    /// Full Hermitian eigendecomposition by cyclic Jacobi sweeps.
    pub fn eigh(&self) -> Result<EigenDecomposition> {
        let dev = self.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let n = self.dim;
        let mut a = self.clone();
        // symmetrize away rounding noise so diagonals are exactly real
        for i in 0..n {
            for j in 0..n {
                let s = (a.get(i, j) + a.get(j, i).conj()) * Complex64::new(0.5, 0.0);
                a.data[i * n + j] = s;
            }
        }
        let mut v = Self::identity(n);
        let scale: f64 = self
            .data
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
            .max(1.0);

        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a.get(p, q).norm_sqr();
                }
            }
            if off.sqrt() <= 1e-14 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }

        let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a.get(i, i).re, i)).collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let values: Vec<f64> = pairs.iter().map(|&(val, _)| val).collect();
        let vectors = Self::from_fn(n, |i, j| v.get(i, pairs[j].1));
        Ok(EigenDecomposition { values, vectors })
    }

    /// True iff the smallest eigenvalue is ≥ −tol. Non-Hermitian input is an
    /// error, not `false`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let dev = self.hermiticity_deviation();
        if dev > tol.max(1e-10) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let values = self.eigenvalues_hermitian()?;
        Ok(values.first().is_none_or(|&lo| lo >= -tol))
    }

    /// Partial trace over the tensor factors not listed in `keep`.
    /// `dims` gives the factor dimensions in order; `keep` must be strictly
    /// increasing positions into `dims`.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "factors {:?} give {total}, matrix has {}",
                dims, self.dim
            )));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::InvalidParameter(
                "keep must be strictly increasing factor positions".into(),
            ));
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
        let keep_dim: usize = keep.iter().map(|&k| dims[k]).product();
        let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

        // expand a (kept, traced) pair of multi-indices into a full flat index
        let flat = |kept_idx: usize, traced_idx: usize| -> usize {
            let mut digits = vec![0usize; dims.len()];
            let mut rem = kept_idx;
            for &pos in keep.iter().rev() {
                digits[pos] = rem % dims[pos];
                rem /= dims[pos];
            }
            let mut rem = traced_idx;
            for &pos in traced.iter().rev() {
                digits[pos] = rem % dims[pos];
                rem /= dims[pos];
            }
            digits.iter().zip(dims).fold(0, |acc, (&d, &dd)| acc * dd + d)
        };

        let mut out = Self::zeros(keep_dim);
        for i in 0..keep_dim {
            for j in 0..keep_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..traced_dim {
                    acc += self.get(flat(i, t), flat(j, t));
                }
                out.data[i * keep_dim + j] = acc;
            }
        }
        Ok(out)
    }

    /// Reorder tensor factors: output factor at position i is input factor
    /// `perm[i]`. `dims` lists the input factor dimensions.
    pub fn permute_systems(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "factors {:?} give {total}, matrix has {}",
                dims, self.dim
            )));
        }
        let mut seen = vec![false; dims.len()];
        for &p in perm {
            if p >= dims.len() || seen[p] {
                return Err(Error::InvalidParameter(format!(
                    "invalid permutation {:?}",
                    perm
                )));
            }
            seen[p] = true;
        }
        let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let to_digits = |mut idx: usize, ds: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize; ds.len()];
            for pos in (0..ds.len()).rev() {
                out[pos] = idx % ds[pos];
                idx /= ds[pos];
            }
            out
        };
        let from_digits = |digits: &[usize], ds: &[usize]| -> usize {
            digits.iter().zip(ds).fold(0, |acc, (&d, &dd)| acc * dd + d)
        };
        let map_index = |idx: usize| -> usize {
            let out_digits = to_digits(idx, &out_dims);
            let mut in_digits = vec![0usize; dims.len()];
            for (i, &p) in perm.iter().enumerate() {
                in_digits[p] = out_digits[i];
            }
            from_digits(&in_digits, dims)
        };
        Ok(Self::from_fn(self.dim, |i, j| {
            self.get(map_index(i), map_index(j))
        }))
    }

    /// Apply to a vector: A·v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }
}

/// One complex Jacobi rotation zeroing a[p][q] (and a[q][p]) in place,
/// accumulating the unitary into `v`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.dim;
    let apq = a.get(p, q);
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / Complex64::new(r, 0.0);
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let cs = Complex64::new(c, 0.0);
    let sp = phase * Complex64::new(s, 0.0); // s·e^{iφ}

    // columns: [col_p, col_q] ← [col_p, col_q] · J2 with J2 = [[c, sφ], [−s φ̄, c]]
    for i in 0..n {
        let aip = a.data[i * n + p];
        let aiq = a.data[i * n + q];
        a.data[i * n + p] = aip * cs - aiq * sp.conj();
        a.data[i * n + q] = aip * sp + aiq * cs;
    }
    // rows: J2† acting from the left
    for j in 0..n {
        let apj = a.data[p * n + j];
        let aqj = a.data[q * n + j];
        a.data[p * n + j] = apj * cs - aqj * sp;
        a.data[q * n + j] = apj * sp.conj() + aqj * cs;
    }
    // clean the pivot pair and keep diagonals real
    a.data[p * n + q] = Complex64::new(0.0, 0.0);
    a.data[q * n + p] = Complex64::new(0.0, 0.0);
    a.data[p * n + p] = Complex64::new(a.data[p * n + p].re, 0.0);
    a.data[q * n + q] = Complex64::new(a.data[q * n + q].re, 0.0);

    for i in 0..n {
        let vip = v.data[i * n + p];
        let viq = v.data[i * n + q];
        v.data[i * n + p] = vip * cs - viq * sp.conj();
        v.data[i * n + q] = vip * sp + viq * cs;
    }
}
