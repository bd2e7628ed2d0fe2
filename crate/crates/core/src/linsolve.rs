//! Sparse linear solves behind the steady-state and implicit time-stepping
//! routines: a direct sparse LU (faer) and restarted GMRES preconditioned by
//! a block Gauss–Seidel sweep over excitation-number blocks.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatMut};

use crate::error::{Error, Result};
use crate::operator::{SparseMatrix, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Blocks up to this size are factored densely.
const DENSE_BLOCK_LIMIT: usize = 96;

fn to_faer(a: &SparseMatrix) -> Result<SparseColMat<usize, C64>> {
    let triplets: Vec<_> = a.iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &triplets)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))
}

enum Factor {
    Sparse(Lu<usize, C64>),
    Dense(PartialPivLu<C64>),
}

impl Factor {
    fn new(a: &SparseMatrix) -> Result<Self> {
        if a.nrows() <= DENSE_BLOCK_LIMIT {
            return Ok(Factor::Dense(a.to_dense().partial_piv_lu()));
        }
        let lu = to_faer(a)?
            .sp_lu()
            .map_err(|e| Error::LinearAlgebra(format!("sparse LU failed: {e:?}")))?;
        Ok(Factor::Sparse(lu))
    }

    fn solve_in_place(&self, x: &mut [C64]) {
        let n = x.len();
        let rhs = MatMut::from_column_major_slice_mut(x, n, 1);
        match self {
            Factor::Sparse(lu) => lu.solve_in_place(rhs),
            Factor::Dense(lu) => lu.solve_in_place(rhs),
        }
    }
}

/// LU factorization of a full sparse system.
pub struct DirectSolver {
    factor: Factor,
    n: usize,
}

impl DirectSolver {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        Ok(Self {
            factor: Factor::new(a)?,
            n: a.nrows(),
        })
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        self.factor.solve_in_place(&mut x);
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::LinearAlgebra("singular system (non-finite solution)".into()));
        }
        Ok(x)
    }
}

/// One sweep of block Gauss–Seidel: blocks are visited in the given order,
/// each solved exactly with the contributions of already-visited blocks moved
/// to the right-hand side. Couplings towards not-yet-visited blocks are
/// dropped.
pub struct BlockGaussSeidel {
    blocks: Vec<Vec<usize>>,
    factors: Vec<Factor>,
    /// Per unknown, the entries of its row that point into earlier blocks.
    lower: SparseMatrix,
    n: usize,
}

impl BlockGaussSeidel {
    /// `block_of[k]` is the sweep position of unknown `k`'s block.
    pub fn new(a: &SparseMatrix, block_of: &[usize]) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(block_of.len(), n);
        let n_blocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); n_blocks];
        for (k, &b) in block_of.iter().enumerate() {
            blocks[b].push(k);
        }
        blocks.retain(|b| !b.is_empty());

        let factors = blocks
            .iter()
            .map(|rows| Factor::new(&a.submatrix(rows)))
            .collect::<Result<Vec<_>>>()?;

        let lower = SparseMatrix::from_triplets(
            n,
            n,
            a.iter().filter(|&(r, c, _)| block_of[c] < block_of[r]),
        );
        Ok(Self {
            blocks,
            factors,
            lower,
            n,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn apply(&self, r: &[C64], z: &mut [C64]) {
        assert_eq!(r.len(), self.n);
        z.iter_mut().for_each(|v| *v = ZERO);
        let mut buf = Vec::new();
        for (rows, factor) in self.blocks.iter().zip(&self.factors) {
            buf.clear();
            for &k in rows {
                let (cols, vals) = self.lower.row(k);
                let s = cols.iter().zip(vals).fold(ZERO, |s, (&c, &v)| s + v * z[c]);
                buf.push(r[k] - s);
            }
            factor.solve_in_place(&mut buf);
            for (&k, &v) in rows.iter().zip(&buf) {
                z[k] = v;
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Stop when `‖b − Ax‖₂ ≤ tol·‖b‖₂`.
    pub tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 40,
            max_iterations: 2000,
            tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).fold(ZERO, |s, (a, b)| s + a.conj() * b)
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Right-preconditioned restarted GMRES for `A x = b`, with `A` given by its
/// action `apply_a(x, out)`.
pub fn gmres(
    apply_a: impl Fn(&[C64], &mut [C64]),
    precond: &BlockGaussSeidel,
    b: &[C64],
    x0: Option<&[C64]>,
    opts: &GmresOptions,
) -> Result<GmresOutcome> {
    let n = b.len();
    let m = opts.restart.max(1);
    let b_norm = norm2(b);
    let mut x = x0.map_or_else(|| vec![ZERO; n], <[C64]>::to_vec);
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            x: vec![ZERO; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let mut iterations = 0;
    let mut r = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    let mut z = vec![ZERO; n];
    loop {
        apply_a(&x, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        let beta = norm2(&r);
        if !beta.is_finite() {
            return Err(Error::LinearAlgebra("non-finite residual (singular preconditioner?)".into()));
        }
        let rel = beta / b_norm;
        if rel <= opts.tol {
            return Ok(GmresOutcome {
                x,
                iterations,
                relative_residual: rel,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::Convergence {
                iterations,
                residual: rel,
            });
        }

        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess = vec![vec![ZERO; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![ZERO; m];
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);

        let mut k = 0;
        while k < m && iterations < opts.max_iterations {
            precond.apply(&basis[k], &mut z);
            apply_a(&z, &mut w);
            for (i, v) in basis.iter().enumerate() {
                let h = dot(v, &w);
                hess[i][k] = h;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= h * vi);
            }
            let h_next = norm2(&w);
            hess[k + 1][k] = C64::new(h_next, 0.0);

            for i in 0..k {
                let (a_, b_) = (hess[i][k], hess[i + 1][k]);
                hess[i][k] = a_ * cs[i] + sn[i] * b_;
                hess[i + 1][k] = -sn[i].conj() * a_ + b_ * cs[i];
            }
            let (a_, b_) = (hess[k][k], hess[k + 1][k]);
            let denom = (a_.norm_sqr() + b_.norm_sqr()).sqrt();
            if a_.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = C64::new(1.0, 0.0);
                hess[k][k] = b_;
            } else {
                let phase = a_ / a_.norm();
                cs[k] = a_.norm() / denom;
                sn[k] = phase * b_.conj() / denom;
                hess[k][k] = phase * denom;
            }
            hess[k + 1][k] = ZERO;
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];

            iterations += 1;
            k += 1;
            if g[k].norm() / b_norm <= opts.tol || h_next == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // back substitution for the k×k triangular system
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let s = (i + 1..k).fold(g[i], |s, j| s - hess[i][j] * y[j]);
            y[i] = s / hess[i][i];
        }
        let mut update = vec![ZERO; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vi)| *u += yi * vi);
        }
        precond.apply(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
    }
}

/// Dense helper used by small systems and tests.
pub fn dense_solve(a: &Mat<C64>, b: &[C64]) -> Vec<C64> {
    let mut x = b.to_vec();
    let n = x.len();
    a.partial_piv_lu()
        .solve_in_place(MatMut::from_column_major_slice_mut(&mut x, n, 1));
    x
}
