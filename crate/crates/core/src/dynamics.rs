//! Density matrices, stationary states and time evolution of `dρ/dt = Lρ`.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::liouvillian::{unvectorize, vectorize, Liouvillian};
use crate::linsolve::{gmres, BlockGaussSeidel, DirectSolver, GmresOptions};
use crate::operator::{HilbertSpec, SparseMatrix, Subsystem, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Which Hilbert space a density matrix lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSpace {
    Composite(HilbertSpec),
    /// A single subsystem, after tracing out the others.
    Reduced(Subsystem),
    /// No subsystem structure attached.
    Plain,
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Mat<C64>,
    space: StateSpace,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_SLACK: f64 = 1e-8;

    /// Validates Hermiticity, unit trace and positivity (within slack).
    pub fn new(matrix: Mat<C64>, space: StateSpace) -> Result<Self> {
        let rho = Self::unchecked(matrix, space)?;
        rho.check_hermitian_and_trace()?;
        let min_eig = rho.min_eigenvalue()?;
        if min_eig < -Self::POSITIVITY_SLACK {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_eig:.3e} below -{:.0e}",
                Self::POSITIVITY_SLACK
            )));
        }
        Ok(rho)
    }

    fn unchecked(matrix: Mat<C64>, space: StateSpace) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        if let StateSpace::Composite(spec) = space {
            if spec.total_dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: spec.total_dim(),
                    found: n,
                });
            }
        }
        Ok(Self { matrix, space })
    }

    fn check_hermitian_and_trace(&self) -> Result<()> {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        if dev > Self::HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(())
    }

    /// Projector onto a normalized pure state.
    pub fn pure(psi: &[C64], space: StateSpace) -> Result<Self> {
        let norm: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let m = Mat::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(m, space)
    }

    /// Atom in `|0⟩`, both modes in vacuum.
    pub fn ground(spec: &HilbertSpec) -> Self {
        let n = spec.total_dim();
        let mut m = Mat::zeros(n, n);
        m[(spec.index(0, 0, 0), spec.index(0, 0, 0))] = ONE;
        Self {
            matrix: m,
            space: StateSpace::Composite(*spec),
        }
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.matrix
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, op: &SparseMatrix) -> C64 {
        op.iter().map(|(r, c, v)| v * self.matrix[(c, r)]).sum()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = hermitian_part(&self.matrix);
        h.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }
}

pub(crate) fn hermitian_part(m: &Mat<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// `½ Σ |λ_k(ρ₁ − ρ₂)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = hermitian_part(&(a.matrix() - b.matrix()));
    let eig = diff
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))?;
    Ok(0.5 * eig.iter().map(|v| v.abs()).sum::<f64>())
}

/// The unknowns `vec(ρ)[j·d + i]` that the dynamics can reach, together with
/// the block each belongs to in the Gauss–Seidel sweep.
///
/// When every term of `L` changes the total excitation number by an even
/// amount on each side of `ρ`, elements with odd `levels[i] + levels[j]`
/// decouple and vanish in the stationary state; only the even sector is kept.
/// Blocks group elements with equal `(levels[i], levels[j])`, ordered from the
/// highest total excitation down so that decay processes point towards
/// later blocks.
struct Sector {
    keep: Vec<usize>,
    position: Vec<Option<usize>>,
    block_of: Vec<usize>,
}

impl Sector {
    fn new(l: &Liouvillian) -> Self {
        let d = l.dim();
        let levels = l.levels();
        let parity = |k: usize| (levels[k % d] + levels[k / d]) % 2;
        let decoupled = l.matrix().iter().all(|(r, c, _)| parity(r) == parity(c));
        let keep: Vec<usize> = (0..d * d)
            .filter(|&k| !decoupled || parity(k) == 0)
            .collect();
        let mut position = vec![None; d * d];
        for (p, &k) in keep.iter().enumerate() {
            position[k] = Some(p);
        }
        let key = |k: usize| {
            let (li, lj) = (levels[k % d], levels[k / d]);
            (Reverse(li + lj), li)
        };
        let ranks: BTreeMap<_, usize> = keep
            .iter()
            .map(|&k| key(k))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(r, k)| (k, r))
            .collect();
        let block_of = keep.iter().map(|&k| ranks[&key(k)]).collect();
        Self {
            keep,
            position,
            block_of,
        }
    }

    fn len(&self) -> usize {
        self.keep.len()
    }

    fn restrict_matrix(&self, m: &SparseMatrix) -> SparseMatrix {
        m.submatrix(&self.keep)
    }

    fn restrict(&self, full: &[C64]) -> Vec<C64> {
        self.keep.iter().map(|&k| full[k]).collect()
    }

    fn expand(&self, part: &[C64], full_len: usize) -> Vec<C64> {
        let mut out = vec![ZERO; full_len];
        for (&k, &v) in self.keep.iter().zip(part) {
            out[k] = v;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyStateMethod {
    /// Sparse LU of the trace-constrained system. Memory grows quickly with
    /// the Fock cutoff; suited to small truncations.
    DirectLu,
    /// GMRES with a block Gauss–Seidel preconditioner over excitation blocks.
    IterativeKrylov,
}

#[derive(Clone, Copy, Debug)]
pub struct SteadyStateOptions {
    pub method: SteadyStateMethod,
    /// Bound on `‖L vec(ρ)‖∞` for the returned state.
    pub residual_tol: f64,
    /// GMRES iteration cap (ignored by the direct method).
    pub max_iterations: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            method: SteadyStateMethod::IterativeKrylov,
            residual_tol: 1e-10,
            max_iterations: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub state: DensityMatrix,
    /// `‖L vec(ρ)‖∞` of the returned state.
    pub residual: f64,
    /// GMRES iterations, zero for the direct method.
    pub iterations: usize,
    /// Size of the solved linear system.
    pub unknowns: usize,
}

pub fn steady_state(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<DensityMatrix> {
    steady_state_report(l, opts).map(|r| r.state)
}

/// Solves `L vec(ρ) = 0` with the equation for `ρ[0,0]` replaced by
/// `Tr ρ = 1`.
pub fn steady_state_report(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateReport> {
    if !(opts.residual_tol > 0.0) {
        return Err(Error::InvalidParameters("residual_tol must be positive".into()));
    }
    let d = l.dim();
    let sector = Sector::new(l);
    let n = sector.len();
    let reduced = sector.restrict_matrix(l.matrix());

    let trace_row = sector.position[0].expect("ρ[0,0] is always kept");
    let mut triplets: Vec<_> = reduced.iter().filter(|&(r, _, _)| r != trace_row).collect();
    triplets.extend(
        (0..d).filter_map(|i| sector.position[i * d + i]).map(|c| (trace_row, c, ONE)),
    );
    let system = SparseMatrix::from_triplets(n, n, triplets);
    let mut rhs = vec![ZERO; n];
    rhs[trace_row] = ONE;

    let singular = |_| Error::NoUniqueSteadyState { residual: f64::INFINITY };
    let (x, iterations) = match opts.method {
        SteadyStateMethod::DirectLu => {
            let lu = DirectSolver::new(&system).map_err(singular)?;
            (lu.solve(&rhs).map_err(singular)?, 0)
        }
        SteadyStateMethod::IterativeKrylov => {
            let pc = BlockGaussSeidel::new(&system, &sector.block_of).map_err(singular)?;
            let gopts = GmresOptions {
                restart: 40,
                max_iterations: opts.max_iterations,
                tol: (opts.residual_tol * 1e-3).max(1e-15),
            };
            let out = gmres(|x, y| system.mul_vec_into(x, y), &pc, &rhs, None, &gopts).map_err(|e| match e {
                Error::LinearAlgebra(_) => singular(e),
                e => e,
            })?;
            if out.x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NoUniqueSteadyState { residual: f64::INFINITY });
            }
            (out.x, out.iterations)
        }
    };

    let full = sector.expand(&x, d * d);
    let rho = hermitian_part(&unvectorize(&full, d));
    let tr: C64 = (0..d).map(|i| rho[(i, i)]).sum();
    if tr.norm() < 0.5 {
        return Err(Error::NoUniqueSteadyState { residual: f64::INFINITY });
    }
    let rho = Mat::from_fn(d, d, |i, j| rho[(i, j)] / tr);
    let residual = l
        .matrix()
        .mul_vec(&vectorize(&rho))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if !(residual <= opts.residual_tol) {
        return Err(Error::NoUniqueSteadyState { residual });
    }
    let space = l.spec().map_or(StateSpace::Plain, |s| StateSpace::Composite(*s));
    Ok(SteadyStateReport {
        state: DensityMatrix::new(rho, space)?,
        residual,
        iterations,
        unknowns: n,
    })
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub t_final: f64,
    /// Number of evenly spaced output times in `[0, t_final]`, both ends included.
    pub n_samples: usize,
    pub initial_state: DensityMatrix,
}

impl EvolveOptions {
    /// Starts from [`DensityMatrix::ground`] with `rtol = 1e-6`, `atol = 1e-9`.
    pub fn from_ground(spec: &HilbertSpec, t_final: f64, n_samples: usize) -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-9,
            t_final,
            n_samples,
            initial_state: DensityMatrix::ground(spec),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameters("tolerances must be positive".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameters("t_final must be positive".into()));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParameters("n_samples must be at least 2".into()));
        }
        if self.initial_state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.initial_state.dim(),
            });
        }
        Ok(())
    }
}

const GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;
const DIAG: f64 = GAMMA / 2.0;

/// Solves `(I − d·h·L) x = b` by preconditioned GMRES. The preconditioner
/// is factored for a reference step and reused while `h` stays within a
/// factor of two of it.
struct StageSolver<'a> {
    l: &'a SparseMatrix,
    block_of: &'a [usize],
    /// Positions of the diagonal elements `ρ[i,i]`.
    diagonal: Vec<usize>,
    pc: Option<(f64, BlockGaussSeidel)>,
    gopts: GmresOptions,
}

impl<'a> StageSolver<'a> {
    fn new(l: &'a SparseMatrix, block_of: &'a [usize], diagonal: Vec<usize>, tol: f64) -> Self {
        Self {
            l,
            block_of,
            diagonal,
            pc: None,
            gopts: GmresOptions {
                restart: 40,
                max_iterations: 1000,
                tol,
            },
        }
    }

    fn prepare(&mut self, step: f64) -> Result<()> {
        let fresh = matches!(&self.pc, Some((h, _)) if (0.5..=2.0).contains(&(step / h)));
        if !fresh {
            let n = self.l.nrows();
            let matrix = &SparseMatrix::identity(n) - &self.l.scale_re(DIAG * step);
            self.pc = Some((step, BlockGaussSeidel::new(&matrix, self.block_of)?));
        }
        Ok(())
    }

    fn solve(&self, step: f64, rhs: &[C64], guess: &[C64]) -> Result<Vec<C64>> {
        let (_, pc) = self.pc.as_ref().expect("prepare() before solve()");
        let dh = DIAG * step;
        let apply = |x: &[C64], out: &mut [C64]| {
            self.l.mul_vec_into(x, out);
            out.iter_mut().zip(x).for_each(|(o, xi)| *o = xi - *o * dh);
        };
        let mut x = gmres(apply, pc, rhs, Some(guess), &self.gopts)?.x;
        // Tr(I − dhL)x = Tr x holds exactly; remove the solver's trace error
        let trace = |v: &[C64]| self.diagonal.iter().map(|&k| v[k]).sum::<C64>();
        let shift = (trace(rhs) - trace(&x)) / self.diagonal.len() as f64;
        self.diagonal.iter().for_each(|&k| x[k] += shift);
        Ok(x)
    }
}

fn axpy(out: &mut [C64], a: f64, x: &[C64]) {
    out.iter_mut().zip(x).for_each(|(o, v)| *o += v * a);
}

/// Cubic Hermite interpolation on `[0, h]` at fraction `s`.
fn hermite(y0: &[C64], f0: &[C64], y1: &[C64], f1: &[C64], h: f64, s: f64) -> Vec<C64> {
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len())
        .map(|k| y0[k] * h00 + f0[k] * (h10 * h) + y1[k] * h01 + f1[k] * (h11 * h))
        .collect()
}

/// Adaptive TR-BDF2 integration of `dρ/dt = Lρ`, sampled at `n_samples`
/// evenly spaced times by cubic Hermite interpolation between steps.
pub fn evolve(l: &Liouvillian, opts: &EvolveOptions) -> Result<Vec<(f64, DensityMatrix)>> {
    let d = l.dim();
    opts.validate(d)?;
    let space = match opts.initial_state.space() {
        StateSpace::Plain => l.spec().map_or(StateSpace::Plain, |s| StateSpace::Composite(*s)),
        s => s,
    };

    let full0 = vectorize(opts.initial_state.matrix());
    let sector = Sector::new(l);
    // an initial state with odd-sector coherences needs the full space
    let sector = if sector.len() < d * d
        && full0
            .iter()
            .enumerate()
            .any(|(k, v)| sector.position[k].is_none() && v.norm() > 0.0)
    {
        let flat = Liouvillian::clone(l).with_levels(vec![0; d])?;
        Sector::new(&flat)
    } else {
        sector
    };
    let lmat = sector.restrict_matrix(l.matrix());
    let n = sector.len();

    let sample_times: Vec<f64> = (0..opts.n_samples)
        .map(|s| opts.t_final * s as f64 / (opts.n_samples - 1) as f64)
        .collect();
    let to_state = |y: &[C64]| -> Result<DensityMatrix> {
        DensityMatrix::new(unvectorize(&sector.expand(y, d * d), d), space)
    };

    let mut y = sector.restrict(&full0);
    let mut f = lmat.mul_vec(&y);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(opts.n_samples);
    out.push((0.0, opts.initial_state.clone()));
    let mut next_sample = 1;

    let gtol = (opts.atol * 1e-2).max(1e-15);
    let l_scale = lmat.norm_max().max(1.0);
    let mut h = (1e-2 / l_scale).min(opts.t_final / 10.0);
    let diagonal = (0..d).filter_map(|i| sector.position[i * d + i]).collect();
    let mut solver = StageSolver::new(&lmat, &sector.block_of, diagonal, gtol);
    let err_coef = 2.0 * (-3.0 * GAMMA * GAMMA + 4.0 * GAMMA - 2.0) / (12.0 * (2.0 - GAMMA));
    let min_step = 1e-14 * opts.t_final.max(1.0);

    while next_sample < opts.n_samples {
        let remaining = opts.t_final - t;
        let step = h.min(remaining);
        if step < min_step && remaining > min_step {
            return Err(Error::Stiffness { time: t, step });
        }
        solver.prepare(step)?;

        let mut rhs = y.clone();
        axpy(&mut rhs, DIAG * step, &f);
        let y_mid = solver.solve(step, &rhs, &y)?;
        let f_mid = lmat.mul_vec(&y_mid);
        let a = 1.0 / (GAMMA * (2.0 - GAMMA));
        let b = (1.0 - GAMMA) * (1.0 - GAMMA) / (GAMMA * (2.0 - GAMMA));
        let rhs2: Vec<C64> = y_mid.iter().zip(&y).map(|(m, p)| m * a - p * b).collect();
        let y_new = solver.solve(step, &rhs2, &y_mid)?;
        let f_new = lmat.mul_vec(&y_new);

        let est: Vec<C64> = (0..n)
            .map(|k| {
                (f[k] / GAMMA - f_mid[k] / (GAMMA * (1.0 - GAMMA)) + f_new[k] / (1.0 - GAMMA))
                    * (err_coef * step)
            })
            .collect();
        let est = solver.solve(step, &est, &vec![ZERO; n])?;
        let err = (0..n)
            .map(|k| {
                let scale = opts.atol + opts.rtol * y[k].norm().max(y_new[k].norm());
                est[k].norm() / scale
            })
            .fold(0.0, f64::max);

        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0) };
        if err > 1.0 || !err.is_finite() {
            h = step * if err.is_finite() { factor.min(0.9) } else { 0.2 };
            continue;
        }

        let t_new = if step == remaining { opts.t_final } else { t + step };
        while next_sample < opts.n_samples && sample_times[next_sample] <= t_new {
            let s = ((sample_times[next_sample] - t) / step).clamp(0.0, 1.0);
            let ys = if next_sample == opts.n_samples - 1 && t_new == opts.t_final {
                y_new.clone()
            } else {
                hermite(&y, &f, &y_new, &f_new, step, s)
            };
            out.push((sample_times[next_sample], to_state(&ys)?));
            next_sample += 1;
        }

        t = t_new;
        y = y_new;
        f = f_new;
        h = step * factor;
    }
    Ok(out)
}
