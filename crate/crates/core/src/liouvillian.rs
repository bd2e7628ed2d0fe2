//! Vectorized Lindblad generators.
//!
//! Density matrices are flattened column by column: `vec(ρ)[j·d + i] = ρ[i, j]`,
//! so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use faer::Mat;

use crate::error::{Error, Result};
use crate::model::{self, ChannelKind, DissipationChannel, Scheme, SqueezedBathParams, SystemParams};
use crate::operator::{annihilation, HilbertSpec, SparseMatrix, C64};

/// Sparse superoperator `L` with `d vec(ρ)/dt = L vec(ρ)`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    matrix: SparseMatrix,
    dim: usize,
    levels: Vec<usize>,
    spec: Option<HilbertSpec>,
}

impl Liouvillian {
    /// Master-equation generator of the hybrid system under `scheme`.
    pub fn from_model(params: &SystemParams, scheme: &Scheme, spec: &HilbertSpec) -> Result<Self> {
        let (h, channels) = model::assemble(params, scheme, spec)?;
        let mut l = build_liouvillian(&h, &channels)?.with_levels(spec.excitation_levels())?;
        l.spec = Some(*spec);
        Ok(l)
    }

    /// Attaches an excitation number to every Hilbert-space basis state.
    ///
    /// The labels only steer the iterative solvers (block ordering and
    /// parity-sector detection); they never change the generator.
    pub fn with_levels(mut self, levels: Vec<usize>) -> Result<Self> {
        if levels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: levels.len(),
            });
        }
        self.levels = levels;
        Ok(self)
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Hilbert-space dimension `d`; the superoperator is `d² × d²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Composite-space layout, when built from the hybrid model.
    pub fn spec(&self) -> Option<&HilbertSpec> {
        self.spec.as_ref()
    }

    /// `dρ/dt` for the given state.
    pub fn apply(&self, rho: &Mat<C64>) -> Mat<C64> {
        unvectorize(&self.matrix.mul_vec(&vectorize(rho)), self.dim)
    }
}

pub fn vectorize(m: &Mat<C64>) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub fn unvectorize(v: &[C64], dim: usize) -> Mat<C64> {
    assert_eq!(v.len(), dim * dim);
    Mat::from_fn(dim, dim, |i, j| v[j * dim + i])
}

/// Triplet accumulator for `Σ c · (B ⊗ A)` terms on a `d²` space.
struct SuperBuilder {
    dim: usize,
    triplets: Vec<(usize, usize, C64)>,
}

impl SuperBuilder {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            triplets: Vec::new(),
        }
    }

    /// Adds `coef · vec(A ρ B)`, i.e. `coef · (Bᵀ ⊗ A)`.
    fn sandwich(&mut self, coef: C64, a: Option<&SparseMatrix>, b: Option<&SparseMatrix>) {
        let d = self.dim;
        match (a, b) {
            (Some(a), None) => {
                for blk in 0..d {
                    for (r, c, v) in a.iter() {
                        self.triplets.push((blk * d + r, blk * d + c, coef * v));
                    }
                }
            }
            (None, Some(b)) => {
                for (r, c, v) in b.iter() {
                    // (Bᵀ)[c, r] = v
                    for i in 0..d {
                        self.triplets.push((c * d + i, r * d + i, coef * v));
                    }
                }
            }
            (Some(a), Some(b)) => {
                for (br, bc, bv) in b.iter() {
                    for (ar, ac, av) in a.iter() {
                        self.triplets
                            .push((bc * d + ar, br * d + ac, coef * bv * av));
                    }
                }
            }
            (None, None) => {
                for k in 0..d * d {
                    self.triplets.push((k, k, coef));
                }
            }
        }
    }

    /// Adds `coef · (2 X ρ Y − Y X ρ − ρ Y X)`.
    fn lindblad_term(&mut self, coef: C64, x: &SparseMatrix, y: &SparseMatrix) {
        let yx = y * x;
        self.sandwich(coef * 2.0, Some(x), Some(y));
        self.sandwich(-coef, Some(&yx), None);
        self.sandwich(-coef, None, Some(&yx));
    }

    fn finish(self) -> SparseMatrix {
        let n = self.dim * self.dim;
        SparseMatrix::from_triplets(n, n, self.triplets)
    }
}

fn check_square(op: &SparseMatrix, dim: usize) -> Result<()> {
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.nrows(),
        });
    }
    Ok(())
}

fn push_dissipator(builder: &mut SuperBuilder, channel: &DissipationChannel) {
    if channel.rate == 0.0 {
        return;
    }
    let half = C64::new(channel.rate / 2.0, 0.0);
    let o = &channel.operator;
    let od = o.adjoint();
    match channel.kind {
        ChannelKind::Standard => builder.lindblad_term(half, o, &od),
        ChannelKind::SqueezedVacuum(bath) => {
            let n = bath.n_sq();
            let m = bath.m_sq();
            builder.lindblad_term(half * (n + 1.0), o, &od);
            builder.lindblad_term(half * n, &od, o);
            if m != C64::new(0.0, 0.0) {
                builder.lindblad_term(half * m, &od, &od);
                builder.lindblad_term(half * m.conj(), o, o);
            }
        }
    }
}

/// Superoperator of `(rate/2)·L[O]` for one channel.
///
/// Standard channels use `L[O]ρ = 2OρO† − O†Oρ − ρO†O`. Squeezed-vacuum
/// channels combine four such terms with weights `N+1`, `N`, `M`, `M*`:
///
/// ```text
/// (N+1)(2OρO† − O†Oρ − ρO†O) + N(2O†ρO − OO†ρ − ρOO†)
///   + M(2O†ρO† − O†O†ρ − ρO†O†) + M*(2OρO − OOρ − ρOO)
/// ```
pub fn dissipator_super(channel: &DissipationChannel, dim: usize) -> Result<SparseMatrix> {
    check_square(&channel.operator, dim)?;
    let mut builder = SuperBuilder::new(dim);
    push_dissipator(&mut builder, channel);
    Ok(builder.finish())
}

/// `L = −i(I ⊗ H − Hᵀ ⊗ I) + Σ dissipators`.
pub fn build_liouvillian(h: &SparseMatrix, channels: &[DissipationChannel]) -> Result<Liouvillian> {
    let dim = h.nrows();
    check_square(h, dim)?;
    let mut builder = SuperBuilder::new(dim);
    builder.sandwich(C64::new(0.0, -1.0), Some(h), None);
    builder.sandwich(C64::new(0.0, 1.0), None, Some(h));
    for ch in channels {
        check_square(&ch.operator, dim)?;
        push_dissipator(&mut builder, ch);
    }
    Ok(Liouvillian {
        matrix: builder.finish(),
        dim,
        levels: vec![0; dim],
        spec: None,
    })
}

/// A lone bosonic mode of dimension `dim` damped at `rate` into a
/// squeezed-vacuum reservoir.
pub fn squeezed_mode(dim: usize, rate: f64, bath: SqueezedBathParams) -> Result<Liouvillian> {
    let channel = DissipationChannel {
        label: "b",
        operator: annihilation(dim)?,
        rate,
        kind: ChannelKind::SqueezedVacuum(bath),
    };
    build_liouvillian(&SparseMatrix::zeros(dim, dim), &[channel])?.with_levels((0..dim).collect())
}
