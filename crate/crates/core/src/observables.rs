//! Reduced states and measured quantities: quadrature variances, Uhlmann
//! fidelity and the Wigner function of a single mode.

use std::f64::consts::PI;

use faer::{Mat, Side};

use crate::dynamics::{hermitian_part, DensityMatrix, StateSpace};
use crate::error::{Error, Result};
use crate::operator::{annihilation, number, Subsystem, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `X = (o + o†)/2`, `Y = (o − o†)/2i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    Y,
}

/// Traces out every factor of `dims` except those listed in `keep`
/// (ascending). Factor 0 is the slowest-varying index.
pub fn partial_trace_dims(rho: &Mat<C64>, dims: &[usize], keep: &[usize]) -> Mat<C64> {
    let total: usize = dims.iter().product();
    assert_eq!(rho.nrows(), total);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let split = |mut idx: usize| {
        let mut digits = vec![0; dims.len()];
        for f in (0..dims.len()).rev() {
            digits[f] = idx % dims[f];
            idx /= dims[f];
        }
        digits
    };
    let kept_index = |digits: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
    let traced = |digits: &[usize]| -> Vec<usize> {
        (0..dims.len()).filter(|f| !keep.contains(f)).map(|f| digits[f]).collect()
    };

    let mut out = Mat::<C64>::zeros(out_dim, out_dim);
    let all: Vec<Vec<usize>> = (0..total).map(split).collect();
    for (i, di) in all.iter().enumerate() {
        let ti = traced(di);
        let ki = kept_index(di);
        for (j, dj) in all.iter().enumerate() {
            if traced(dj) == ti {
                out[(ki, kept_index(dj))] += rho[(i, j)];
            }
        }
    }
    out
}

/// Reduced state of one subsystem of a composite state.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    let StateSpace::Composite(spec) = rho.space() else {
        return Err(Error::InvalidState("partial trace needs a composite state".into()));
    };
    let dims: Vec<usize> = Subsystem::ORDER.iter().map(|&s| spec.dim(s)).collect();
    let k = Subsystem::ORDER.iter().position(|&s| s == keep).expect("all subsystems are ordered");
    let (outer, d, inner) = (
        dims[..k].iter().product::<usize>(),
        dims[k],
        dims[k + 1..].iter().product::<usize>(),
    );
    let m = rho.matrix();
    let red = Mat::from_fn(d, d, |a, b| {
        let mut s = ZERO;
        for o in 0..outer {
            for i in 0..inner {
                s += m[((o * d + a) * inner + i, (o * d + b) * inner + i)];
            }
        }
        s
    });
    DensityMatrix::new(hermitian_part(&red), StateSpace::Reduced(keep))
}

fn require_mode(rho: &DensityMatrix) -> Result<()> {
    match rho.space() {
        StateSpace::Composite(_) | StateSpace::Reduced(Subsystem::Atom) => Err(Error::InvalidState(
            "expected a single bosonic mode".into(),
        )),
        _ => Ok(()),
    }
}

/// `⟨Q²⟩ − ⟨Q⟩²` from `⟨o⟩`, `⟨o²⟩`, `⟨o†o⟩`, using `oo† = o†o + 1`.
pub fn quadrature_variance(rho_mode: &DensityMatrix, quad: Quadrature) -> Result<f64> {
    require_mode(rho_mode)?;
    let dim = rho_mode.dim();
    let a = annihilation(dim)?;
    let mean = rho_mode.expectation(&a);
    let sq = rho_mode.expectation(&(&a * &a));
    let n = rho_mode.expectation(&number(dim)?).re;
    Ok(match quad {
        Quadrature::X => (2.0 * sq.re + 2.0 * n + 1.0) / 4.0 - mean.re * mean.re,
        Quadrature::Y => (-2.0 * sq.re + 2.0 * n + 1.0) / 4.0 - mean.im * mean.im,
    })
}

/// Sets eigenvalues at roundoff level (or negative) to zero.
fn drop_roundoff(vals: &mut [f64]) {
    let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = vals.len() as f64 * f64::EPSILON * max;
    vals.iter_mut().filter(|v| **v <= cut).for_each(|v| *v = 0.0);
}

/// Eigen-decomposition with negative and roundoff-level eigenvalues set to
/// zero and the rest rescaled to unit sum.
fn clamped_eigen(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = hermitian_part(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("eigendecomposition: {e:?}")))?;
    let s = evd.S();
    let mut vals: Vec<f64> = (0..m.nrows()).map(|i| s[i].re).collect();
    drop_roundoff(&mut vals);
    let total: f64 = vals.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidState("no positive spectral weight".into()));
    }
    vals.iter_mut().for_each(|v| *v /= total);
    Ok((vals, evd.U().to_owned()))
}

fn reconstruct(vals: &[f64], u: &Mat<C64>, f: impl Fn(f64) -> f64) -> Mat<C64> {
    let n = u.nrows();
    Mat::from_fn(n, n, |i, j| {
        vals.iter()
            .enumerate()
            .fold(ZERO, |s, (k, &v)| s + u[(i, k)] * u[(j, k)].conj() * f(v))
    })
}

/// Uhlmann root fidelity `Tr √(√ρ₁ ρ₂ √ρ₁)`, clamped to `[0, 1]`.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    let (v1, u1) = clamped_eigen(rho1.matrix())?;
    let (v2, u2) = clamped_eigen(rho2.matrix())?;
    let sqrt1 = reconstruct(&v1, &u1, f64::sqrt);
    let r2 = reconstruct(&v2, &u2, |v| v);
    let inner = hermitian_part(&(&sqrt1 * &r2 * &sqrt1));
    let mut eig = inner
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))?;
    drop_roundoff(&mut eig);
    let f: f64 = eig.iter().map(|&v| v.sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `L_n^{(k)}(x)` for `n = 0..count`.
fn laguerre_column(k: usize, x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let kf = k as f64;
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 0..count {
        out.push(cur);
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + kf - x) * cur - (nf + kf) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    out
}

/// Wigner function `W(α) = (2/π) Tr[ρ D(α) Π D(α)†]` with parity `Π`, so that
/// `∫ W d²α = 1` and the vacuum peaks at `2/π`. The input is clamped to the
/// nearest positive-semidefinite, unit-trace matrix first.
pub fn wigner(rho_mode: &DensityMatrix, grid: &[C64]) -> Result<Vec<f64>> {
    require_mode(rho_mode)?;
    let (vals, u) = clamped_eigen(rho_mode.matrix())?;
    let rho = reconstruct(&vals, &u, |v| v);
    let dim = rho.nrows();
    // √(n!/m!) for m ≥ n, built incrementally
    let mut ratio = vec![vec![0.0; dim]; dim];
    for n in 0..dim {
        ratio[n][n] = 1.0;
        for m in n + 1..dim {
            ratio[n][m] = ratio[n][m - 1] / (m as f64).sqrt();
        }
    }
    let laguerre_cols = |x: f64| -> Vec<Vec<f64>> { (0..dim).map(|k| laguerre_column(k, x, dim)).collect() };

    Ok(grid
        .iter()
        .map(|&alpha| {
            let r2 = alpha.norm_sqr();
            let x = 4.0 * r2;
            let lag = laguerre_cols(x);
            let two_conj = alpha.conj() * 2.0;
            let mut powers = vec![C64::new(1.0, 0.0); dim];
            for k in 1..dim {
                powers[k] = powers[k - 1] * two_conj;
            }
            let mut total = 0.0;
            for n in 0..dim {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * rho[(n, n)].re * lag[0][n];
                for m in n + 1..dim {
                    let k = m - n;
                    let x_nm = powers[k] * (sign * ratio[n][m] * lag[k][n]);
                    total += 2.0 * (rho[(m, n)] * x_nm).re;
                }
            }
            2.0 / PI * (-2.0 * r2).exp() * total
        })
        .collect())
}

/// Fock-basis amplitudes of the coherent state `|α⟩`, truncated to `dim`.
pub fn coherent_amplitudes(dim: usize, alpha: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Fock-basis amplitudes of `S(ξ)|0⟩` with
/// `S(ξ) = exp[(ξ* o² − ξ o†²)/2]`, `ξ = r e^{iφ}`. `φ = 0` squeezes `X`,
/// `φ = π` squeezes `Y`.
pub fn squeezed_vacuum_amplitudes(dim: usize, r: f64, phi: f64) -> Vec<C64> {
    let mut out = vec![ZERO; dim];
    let t = -C64::from_polar(r.tanh(), phi);
    // c_{2n} = t^n √((2n)!) / (2^n n!) / √cosh r
    let mut c = C64::new(1.0 / r.cosh().sqrt(), 0.0);
    let mut n = 0;
    while 2 * n < dim {
        out[2 * n] = c;
        let nf = n as f64;
        c = c * t * (((2.0 * nf + 1.0) * (2.0 * nf + 2.0)).sqrt() / (2.0 * (nf + 1.0)));
        n += 1;
    }
    out
}
