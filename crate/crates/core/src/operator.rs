//! Truncated Fock-space operators and their embedding into the composite
//! atom ⊗ cavity ⊗ mechanics space.
//!
//! The tensor order is fixed: the atom is the slowest-varying factor and the
//! mechanical mode the fastest, so the composite basis index of
//! `|atom, n_cavity, n_mech⟩` is `atom·(Nc·Nm) + n_cavity·Nm + n_mech`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ATOM_DIM: usize = 3;

/// One factor of the composite Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Atom,
    Cavity,
    Mech,
}

impl Subsystem {
    pub const ORDER: [Subsystem; 3] = [Subsystem::Atom, Subsystem::Cavity, Subsystem::Mech];
}

/// Truncation of the three-level atom ⊗ cavity ⊗ mechanics space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    cavity_dim: usize,
    mech_dim: usize,
}

impl HilbertSpec {
    pub fn new(cavity_dim: usize, mech_dim: usize) -> Result<Self> {
        for d in [cavity_dim, mech_dim] {
            if d < 2 {
                return Err(Error::InvalidDimension(d));
            }
        }
        Ok(Self {
            cavity_dim,
            mech_dim,
        })
    }

    pub fn atom_dim(&self) -> usize {
        ATOM_DIM
    }

    pub fn cavity_dim(&self) -> usize {
        self.cavity_dim
    }

    pub fn mech_dim(&self) -> usize {
        self.mech_dim
    }

    pub fn dim(&self, sub: Subsystem) -> usize {
        match sub {
            Subsystem::Atom => ATOM_DIM,
            Subsystem::Cavity => self.cavity_dim,
            Subsystem::Mech => self.mech_dim,
        }
    }

    pub fn total_dim(&self) -> usize {
        ATOM_DIM * self.cavity_dim * self.mech_dim
    }

    /// Composite index of `|atom, n_c, n_m⟩`.
    pub fn index(&self, atom: usize, n_c: usize, n_m: usize) -> usize {
        (atom * self.cavity_dim + n_c) * self.mech_dim + n_m
    }

    /// Inverse of [`HilbertSpec::index`].
    pub fn decompose(&self, k: usize) -> (usize, usize, usize) {
        let n_m = k % self.mech_dim;
        let rest = k / self.mech_dim;
        (rest / self.cavity_dim, rest % self.cavity_dim, n_m)
    }

    /// Total boson number `n_c + n_m` of every composite basis state.
    pub fn excitation_levels(&self) -> Vec<usize> {
        (0..self.total_dim())
            .map(|k| {
                let (_, c, m) = self.decompose(k);
                c + m
            })
            .collect()
    }
}

impl fmt::Display for HilbertSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "3x{}x{}", self.cavity_dim, self.mech_dim)
    }
}

/// Complex matrix in compressed sparse row form. Entries within a row are
/// sorted by column and duplicates are merged at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates
    /// and dropping entries that cancel to exactly zero.
    ///
    /// Panics if an index is out of bounds.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != C64::new(0.0, 0.0));

        let mut indptr = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            indptr[r + 1] += 1;
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        let indices = merged.iter().map(|e| e.1).collect();
        let values = merged.iter().map(|e| e.2).collect();
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &Mat<C64>) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(p) => vals[p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.cols,
            self.rows,
            self.iter().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn matmul(&self, rhs: &SparseMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut triplets = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); rhs.cols];
        let mut touched = Vec::new();
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (rc, rv) = rhs.row(k);
                for (&c, &b) in rc.iter().zip(rv) {
                    if acc[c] == C64::new(0.0, 0.0) {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                triplets.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
            }
            touched.clear();
        }
        Self::from_triplets(self.rows, rhs.cols, triplets)
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &SparseMatrix) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz() * rhs.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in rhs.iter() {
                triplets.push((r1 * rhs.rows + r2, c1 * rhs.cols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.rows * rhs.rows, self.cols * rhs.cols, triplets)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            *out = cols
                .iter()
                .zip(vals)
                .fold(C64::new(0.0, 0.0), |s, (&c, &v)| s + v * x[c]);
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && (self - &self.adjoint()).norm_max() <= tol
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Principal submatrix on `keep` (indices into both rows and columns).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.cols.max(self.rows)];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_r, &r) in keep.iter().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if pos[c] != usize::MAX {
                    triplets.push((new_r, pos[c], v));
                }
            }
        }
        Self::from_triplets(keep.len(), keep.len(), triplets)
    }

    fn combine(&self, rhs: &SparseMatrix, sign: f64) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self::from_triplets(
            self.rows,
            self.cols,
            self.iter()
                .chain(rhs.iter().map(|(r, c, v)| (r, c, v * sign))),
        )
    }
}

impl Add for &SparseMatrix {
    type Output = SparseMatrix;
    fn add(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &SparseMatrix {
    type Output = SparseMatrix;
    fn sub(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &SparseMatrix {
    type Output = SparseMatrix;
    fn mul(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.matmul(rhs)
    }
}

/// Bosonic lowering operator truncated to `dim` Fock levels.
pub fn annihilation(dim: usize) -> Result<SparseMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(SparseMatrix::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
    ))
}

pub fn creation(dim: usize) -> Result<SparseMatrix> {
    Ok(annihilation(dim)?.adjoint())
}

pub fn number(dim: usize) -> Result<SparseMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(SparseMatrix::diagonal(
        &(0..dim).map(|n| C64::new(n as f64, 0.0)).collect::<Vec<_>>(),
    ))
}

/// Atomic transition operator `|i⟩⟨j|`. For `i > j` this is the raising
/// operator σ⁺_ij; `i == j` gives the level projector.
pub fn atomic_ladder(i: usize, j: usize) -> Result<SparseMatrix> {
    for l in [i, j] {
        if l >= ATOM_DIM {
            return Err(Error::InvalidLevel(l));
        }
    }
    Ok(SparseMatrix::from_triplets(
        ATOM_DIM,
        ATOM_DIM,
        [(i, j, C64::new(1.0, 0.0))],
    ))
}

/// Places `op` on subsystem `sub`, with identities on the other two factors.
pub fn embed(op: &SparseMatrix, sub: Subsystem, spec: &HilbertSpec) -> Result<SparseMatrix> {
    let expected = spec.dim(sub);
    if op.nrows() != expected || op.ncols() != expected {
        return Err(Error::Embedding {
            sub,
            expected,
            found: op.nrows(),
        });
    }
    let factors = Subsystem::ORDER.map(|s| {
        if s == sub {
            op.clone()
        } else {
            SparseMatrix::identity(spec.dim(s))
        }
    });
    Ok(factors[0].kron(&factors[1]).kron(&factors[2]))
}

/// Composite-space mode and atom operators for a given truncation.
#[derive(Clone, Debug)]
pub struct CompositeOps {
    pub spec: HilbertSpec,
    /// Cavity lowering operator `a`.
    pub a: SparseMatrix,
    /// Mechanical lowering operator `b`.
    pub b: SparseMatrix,
}

impl CompositeOps {
    pub fn new(spec: &HilbertSpec) -> Result<Self> {
        Ok(Self {
            spec: *spec,
            a: embed(&annihilation(spec.cavity_dim())?, Subsystem::Cavity, spec)?,
            b: embed(&annihilation(spec.mech_dim())?, Subsystem::Mech, spec)?,
        })
    }

    /// `|i⟩⟨j|` on the atom, embedded.
    pub fn sigma(&self, i: usize, j: usize) -> Result<SparseMatrix> {
        embed(&atomic_ladder(i, j)?, Subsystem::Atom, &self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_entries() {
        let a2 = annihilation(2).unwrap();
        assert_eq!(a2.to_dense()[(0, 1)], c(1.0));
        assert_eq!(a2.nnz(), 1);

        let a3 = annihilation(3).unwrap();
        assert!((a3.get(1, 2).re - 1.414_213_56).abs() < 1e-8);
        assert!(matches!(annihilation(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn number_operator_from_ladder() {
        let a = annihilation(4).unwrap();
        let n = &a.adjoint() * &a;
        for k in 0..4 {
            assert!((n.get(k, k) - c(k as f64)).norm() < 1e-14);
        }
        assert_eq!(n.nnz(), 3);
    }

    #[test]
    fn commutator_is_identity_below_cutoff() {
        for dim in 2..9 {
            let a = annihilation(dim).unwrap();
            let ad = a.adjoint();
            let comm = &(&a * &ad) - &(&ad * &a);
            for (r, col, v) in comm.iter() {
                if r < dim - 1 && col < dim - 1 {
                    let expected = if r == col { c(1.0) } else { c(0.0) };
                    assert!((v - expected).norm() < 1e-14);
                }
            }
            // the truncation artifact lives only in the last level
            assert!((comm.get(dim - 1, dim - 1) - c(-((dim - 1) as f64))).norm() < 1e-13);
        }
    }

    #[test]
    fn ladder_products() {
        let s21 = atomic_ladder(2, 1).unwrap();
        assert_eq!(s21.get(2, 1), c(1.0));
        assert_eq!(s21.nnz(), 1);
        let p1 = atomic_ladder(1, 1).unwrap();
        assert_eq!(p1.get(1, 1), c(1.0));
        let s12 = atomic_ladder(1, 2).unwrap();
        assert_eq!(&s21 * &s12, atomic_ladder(2, 2).unwrap());
        assert!(matches!(atomic_ladder(3, 0), Err(Error::InvalidLevel(3))));
    }

    #[test]
    fn embedding_properties() {
        let spec = HilbertSpec::new(3, 4).unwrap();
        let id = embed(&SparseMatrix::identity(3), Subsystem::Atom, &spec).unwrap();
        assert_eq!(id, SparseMatrix::identity(spec.total_dim()));

        let ops = CompositeOps::new(&spec).unwrap();
        let comm = &(&ops.a * &ops.b) - &(&ops.b * &ops.a);
        assert_eq!(comm.norm_max(), 0.0);
        let comm = &(&ops.a * &ops.b.adjoint()) - &(&ops.b.adjoint() * &ops.a);
        assert_eq!(comm.norm_max(), 0.0);

        // 3 · mech_dim · (0 + 1 + 2)
        let n = embed(&number(3).unwrap(), Subsystem::Cavity, &spec).unwrap();
        assert_eq!(n.trace(), c(3.0 * 4.0 * 3.0));

        let bad = annihilation(5).unwrap();
        assert!(matches!(
            embed(&bad, Subsystem::Cavity, &spec),
            Err(Error::Embedding { expected: 3, found: 5, .. })
        ));
    }

    #[test]
    fn embedded_basis_matches_index() {
        let spec = HilbertSpec::new(3, 4).unwrap();
        let ops = CompositeOps::new(&spec).unwrap();
        // a|1, 2, 3⟩ = √2 |1, 1, 3⟩
        let v = ops.a.get(spec.index(1, 1, 3), spec.index(1, 2, 3));
        assert!((v.re - 2f64.sqrt()).abs() < 1e-15);
        for k in 0..spec.total_dim() {
            let (x, y, z) = spec.decompose(k);
            assert_eq!(spec.index(x, y, z), k);
        }
        assert!(HilbertSpec::new(1, 4).is_err());
    }

    #[test]
    fn triplet_duplicates_are_summed_and_cancellations_dropped() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            [
                (0, 0, c(1.0)),
                (0, 0, c(2.0)),
                (1, 0, c(1.0)),
                (1, 0, c(-1.0)),
                (1, 1, c(4.0)),
            ],
        );
        assert_eq!(m.get(0, 0), c(3.0));
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.row(1).0, &[1]);
    }
}
