//! Second-moment equations of the two modes with the atomic coherence frozen
//! at its adiabatic value, their stability, and the closed-form stationary
//! variances.
//!
//! Moments obey `dx/dt = M x + c` on the real vector
//! `(n_a, n_b, Re a², Im a², Re b², Im b², Re a†b, Im a†b, Re ab, Im ab)`.
//! Population equations couple to the real parts of `⟨a†b⟩` and `⟨b²⟩`, and
//! the pump couples `⟨a†b⟩` to `⟨ab⟩*`, as required for `n_a`, `n_b` to stay
//! real.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::model::{SqueezedBathParams, SystemParams};
use crate::operator::C64;

pub const N_REAL: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentState {
    /// `⟨a†a⟩`
    pub n_a: f64,
    /// `⟨b†b⟩`
    pub n_b: f64,
    /// `⟨a²⟩`
    pub a2: C64,
    /// `⟨b²⟩`
    pub b2: C64,
    /// `⟨a†b⟩`
    pub adb: C64,
    /// `⟨ab⟩`
    pub ab: C64,
}

impl MomentState {
    pub fn to_real(&self) -> [f64; N_REAL] {
        [
            self.n_a, self.n_b, self.a2.re, self.a2.im, self.b2.re, self.b2.im, self.adb.re,
            self.adb.im, self.ab.re, self.ab.im,
        ]
    }

    pub fn from_real(x: &[f64; N_REAL]) -> Self {
        Self {
            n_a: x[0],
            n_b: x[1],
            a2: C64::new(x[2], x[3]),
            b2: C64::new(x[4], x[5]),
            adb: C64::new(x[6], x[7]),
            ab: C64::new(x[8], x[9]),
        }
    }

    pub fn norm_max(&self) -> f64 {
        self.to_real().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Var((a+a†)/2)`, assuming `⟨a⟩ = 0`.
    pub fn var_xa(&self) -> f64 {
        (2.0 * self.n_a + 2.0 * self.a2.re + 1.0) / 4.0
    }

    /// `Var((a−a†)/2i)`, assuming `⟨a⟩ = 0`.
    pub fn var_ya(&self) -> f64 {
        (2.0 * self.n_a - 2.0 * self.a2.re + 1.0) / 4.0
    }

    pub fn var_xb(&self) -> f64 {
        (2.0 * self.n_b + 2.0 * self.b2.re + 1.0) / 4.0
    }

    pub fn var_yb(&self) -> f64 {
        (2.0 * self.n_b - 2.0 * self.b2.re + 1.0) / 4.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiclassicalParams {
    pub j: f64,
    pub q: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub e1: f64,
    pub e2: f64,
    pub gamma10: f64,
    /// Stationary `⟨σ₂₁⁺⟩`, see [`sigma_ss`].
    pub sigma: f64,
}

impl SemiclassicalParams {
    pub fn from_system(p: &SystemParams) -> Result<Self> {
        Ok(Self {
            j: p.j(),
            q: p.q,
            kappa_a: p.kappa_a,
            kappa_b: p.kappa_b,
            e1: p.e1,
            e2: p.e2,
            gamma10: p.gamma10,
            sigma: sigma_ss(p.e1, p.e2, p.gamma10)?,
        })
    }

    pub fn with_q(self, q: f64) -> Self {
        Self { q, ..self }
    }

    /// Effective beam-splitter rate `J·σ`.
    fn coupling(&self) -> f64 {
        self.j * self.sigma
    }
}

/// Adiabatic atomic coherence `2E₁E₂ / (γ₁₀² + 4(E₁² + E₂²))`.
pub fn sigma_ss(e1: f64, e2: f64, gamma10: f64) -> Result<f64> {
    let denom = gamma10 * gamma10 + 4.0 * (e1 * e1 + e2 * e2);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "sigma_ss undefined for E1={e1}, E2={e2}, gamma10={gamma10}"
        )));
    }
    Ok(2.0 * e1 * e2 / denom)
}

pub fn moment_rhs(x: &MomentState, p: &SemiclassicalParams) -> MomentState {
    let g = p.coupling();
    let q = p.q;
    let k_ab = (p.kappa_a + p.kappa_b) / 2.0;
    MomentState {
        n_a: -2.0 * g * x.adb.re - p.kappa_a * x.n_a,
        n_b: 2.0 * g * x.adb.re + 4.0 * q * x.b2.re - p.kappa_b * x.n_b,
        a2: -x.ab * (2.0 * g) - x.a2 * p.kappa_a,
        b2: x.ab * (2.0 * g) + C64::new(4.0 * q * x.n_b + 2.0 * q, 0.0) - x.b2 * p.kappa_b,
        adb: C64::new(-g * (x.n_b - x.n_a), 0.0) + x.ab.conj() * (2.0 * q) - x.adb * k_ab,
        ab: -(x.b2 - x.a2) * g + x.adb.conj() * (2.0 * q) - x.ab * k_ab,
    }
}

/// `(M, c)` with `dx/dt = M x + c` on the real moment vector.
pub fn drift_system(p: &SemiclassicalParams) -> (Mat<f64>, [f64; N_REAL]) {
    let c = moment_rhs(&MomentState::default(), p).to_real();
    let mut m = Mat::zeros(N_REAL, N_REAL);
    for k in 0..N_REAL {
        let mut e = [0.0; N_REAL];
        e[k] = 1.0;
        let col = moment_rhs(&MomentState::from_real(&e), p).to_real();
        for r in 0..N_REAL {
            m[(r, k)] = col[r] - c[r];
        }
    }
    (m, c)
}

/// Fixed point of the moment equations, `x = −M⁻¹c`.
pub fn stationary_moments(p: &SemiclassicalParams) -> Result<MomentState> {
    let (m, c) = drift_system(p);
    let mut rhs = Mat::from_fn(N_REAL, 1, |r, _| -c[r]);
    m.partial_piv_lu().solve_in_place(rhs.as_mut());
    let mut x = [0.0; N_REAL];
    for (r, v) in x.iter_mut().enumerate() {
        *v = rhs[(r, 0)];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearAlgebra("singular drift matrix".into()));
    }
    Ok(MomentState::from_real(&x))
}

#[derive(Clone, Debug)]
pub struct Stability {
    pub is_stable: bool,
    pub eigenvalues: Vec<C64>,
}

impl Stability {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Eigenvalues of the drift matrix; stable iff all real parts are negative.
pub fn stability(p: &SemiclassicalParams) -> Result<Stability> {
    let (m, _) = drift_system(p);
    let eigenvalues: Vec<C64> = m
        .eigenvalues()
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))?
        .into_iter()
        .map(|z| C64::new(z.re, z.im))
        .collect();
    let is_stable = eigenvalues.iter().all(|e| e.re < 0.0);
    Ok(Stability {
        is_stable,
        eigenvalues,
    })
}

/// Pump strength at which the eigenvalue test flips from stable to unstable,
/// located by bisection inside `[q_lo, q_hi]`.
pub fn stability_threshold(p: &SemiclassicalParams, q_lo: f64, q_hi: f64, tol: f64) -> Result<f64> {
    let stable_at = |q: f64| stability(&p.with_q(q)).map(|s| s.is_stable);
    if !stable_at(q_lo)? || stable_at(q_hi)? {
        return Err(Error::InvalidParameters(format!(
            "stability does not change sign on [{q_lo}, {q_hi}]"
        )));
    }
    let (mut lo, mut hi) = (q_lo, q_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The closed criterion: stationary only while `4q < κa + κb`.
pub fn closed_form_threshold(p: &SemiclassicalParams) -> f64 {
    (p.kappa_a + p.kappa_b) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentVariances {
    pub var_ya: f64,
    pub var_yb: f64,
    pub m: f64,
    pub n: f64,
    pub s: f64,
}

/// Closed-form stationary `Var(Y_a)`, `Var(Y_b)` under the coherent pump.
/// At `q = 0` both are the vacuum value `1/4` and `n` is reported as infinite.
pub fn analytic_variance_coherent(p: &SemiclassicalParams) -> Result<CoherentVariances> {
    if p.q < 0.0 || !p.q.is_finite() {
        return Err(Error::InvalidParameters(format!("q = {} must be non-negative", p.q)));
    }
    let kk = p.kappa_a + p.kappa_b;
    let s = p.kappa_b / kk;
    if p.q == 0.0 {
        return Ok(CoherentVariances {
            var_ya: 0.25,
            var_yb: 0.25,
            m: 0.0,
            n: f64::INFINITY,
            s,
        });
    }
    let g = p.coupling();
    let m = 4.0 * p.q / kk;
    let n = (p.kappa_a * p.kappa_b + 4.0 * g * g) / (4.0 * p.q * p.kappa_a);
    let denom = 4.0 * (m + 1.0) * (n + 1.0);
    Ok(CoherentVariances {
        var_ya: (m + n + s + 1.0) / denom,
        var_yb: (n + s) / denom,
        m,
        n,
        s,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathVariances {
    pub var_xa: f64,
    pub var_xb: f64,
    pub pcoef: f64,
    pub l: f64,
}

/// Closed-form stationary `Var(X_a)`, `Var(X_b)` with the mechanics coupled
/// to a squeezed reservoir. Uses `N − Re M`, which is real and equal to
/// `(e^{−2r} − 1)/2` at `θ = π`.
pub fn analytic_variance_bath(p: &SemiclassicalParams, bath: &SqueezedBathParams) -> BathVariances {
    let g2 = p.coupling().powi(2);
    let kk = p.kappa_a * p.kappa_b;
    let nm = bath.n_sq() - bath.m_sq().re;
    let pcoef = kk / (4.0 * g2 + kk);
    let l = g2 * (p.kappa_b * (1.0 + 2.0 * nm) + p.kappa_a)
        / ((p.kappa_a + p.kappa_b) * (4.0 * g2 + kk));
    BathVariances {
        var_xa: pcoef / 4.0 + l,
        var_xb: pcoef / 4.0 * (2.0 * nm + 1.0) + l,
        pcoef,
        l,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fig2(q: f64) -> SemiclassicalParams {
        SemiclassicalParams::from_system(&SystemParams::coherent_pump(0.01, q)).unwrap()
    }

    fn fig4() -> SemiclassicalParams {
        SemiclassicalParams::from_system(&SystemParams::squeezed_bath(0.01)).unwrap()
    }

    #[test]
    fn adiabatic_coherence() {
        assert_relative_eq!(sigma_ss(25.0, 25.0, 20.0).unwrap(), 1250.0 / 5400.0, max_relative = 1e-15);
        assert_eq!(sigma_ss(0.0, 25.0, 20.0).unwrap(), 0.0);
        assert!(matches!(sigma_ss(0.0, 0.0, 0.0), Err(Error::InvalidParameters(_))));
        // 2E²/(γ² + 8E²) grows monotonically towards 1/4
        for e in [0.1, 1.0, 10.0, 1e3, 1e6] {
            assert!(sigma_ss(e, e, 20.0).unwrap() <= 0.25);
        }
    }

    #[test]
    fn fig2_closed_forms() {
        let v = analytic_variance_coherent(&fig2(0.01)).unwrap();
        // independent arithmetic: J = 1, σ = 25/108
        let sigma: f64 = 25.0 / 108.0;
        let m = 0.04 / 0.202;
        let n = (0.2 * 0.002 + 4.0 * sigma * sigma) / (4.0 * 0.01 * 0.2);
        let s = 0.002 / 0.202;
        assert_relative_eq!(v.m, m, max_relative = 1e-12);
        assert_relative_eq!(v.n, n, max_relative = 1e-12);
        assert_relative_eq!(v.s, s, max_relative = 1e-12);
        assert!((v.m - 0.198020).abs() < 1e-6);
        assert!((v.n - 26.8417).abs() < 2e-4);
        assert!((v.s - 0.009901).abs() < 1e-6);
        assert!((v.var_ya - 0.21024).abs() < 1e-5);
        assert!((v.var_yb - 0.20126).abs() < 1e-5);
        assert_relative_eq!(v.var_ya - v.var_yb, 1.0 / (4.0 * (n + 1.0)), max_relative = 1e-10);
    }

    #[test]
    fn coherent_edge_cases() {
        let v = analytic_variance_coherent(&fig2(0.0)).unwrap();
        assert_eq!((v.var_ya, v.var_yb), (0.25, 0.25));
        let tiny = analytic_variance_coherent(&fig2(1e-12)).unwrap();
        assert!((tiny.var_ya - 0.25).abs() < 1e-9 && (tiny.var_yb - 0.25).abs() < 1e-9);
        assert!(analytic_variance_coherent(&fig2(-0.1)).is_err());
    }

    #[test]
    fn fig4_closed_forms() {
        let bath = SqueezedBathParams::new(0.3, PI).unwrap();
        let v = analytic_variance_bath(&fig4(), &bath);
        assert!((v.pcoef - 0.157273).abs() < 1e-6);
        assert!((v.l - 0.163153).abs() < 1e-6);
        assert!((v.var_xa - 0.202471).abs() < 1e-6);
        assert!((v.var_xb - 0.184731).abs() < 1e-6);
        let nm = bath.n_sq() - bath.m_sq().re;
        assert!((1.0 + 2.0 * nm - (-0.6f64).exp()).abs() < 1e-12);

        let vacuum = analytic_variance_bath(&fig4(), &SqueezedBathParams::new(0.0, PI).unwrap());
        assert!((vacuum.var_xa - 0.25).abs() < 1e-15 && (vacuum.var_xb - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rhs_examples() {
        let d = moment_rhs(&MomentState::default(), &fig2(0.01));
        assert_eq!(d.b2, C64::new(0.02, 0.0));
        assert_eq!((d.n_a, d.n_b, d.a2, d.adb, d.ab), (0.0, 0.0, C64::default(), C64::default(), C64::default()));

        let p = SemiclassicalParams { j: 0.0, ..fig2(0.01) };
        let x = MomentState {
            n_a: 0.7,
            n_b: 0.2,
            adb: C64::new(0.3, -0.1),
            ..Default::default()
        };
        assert_eq!(moment_rhs(&x, &p).n_a, -0.2 * 0.7);
    }

    #[test]
    fn fixed_point_matches_closed_form() {
        for q in [0.001, 0.01, 0.03] {
            let p = fig2(q);
            let x = stationary_moments(&p).unwrap();
            assert!(moment_rhs(&x, &p).norm_max() <= 1e-12);
            let v = analytic_variance_coherent(&p).unwrap();
            assert!((x.var_yb() - v.var_yb).abs() < 1e-10);
            assert!((x.var_ya() - v.var_ya).abs() < 1e-10);
            assert!(x.b2.norm() <= x.n_b + 0.5 + 1e-12);
        }
    }

    #[test]
    fn damping_only_spectrum() {
        let p = SemiclassicalParams { j: 0.0, ..fig2(0.0) };
        let st = stability(&p).unwrap();
        assert!(st.is_stable);
        let mut re: Vec<f64> = st.eigenvalues.iter().map(|e| e.re).collect();
        re.sort_by(f64::total_cmp);
        let mut expected = vec![-0.2, -0.2, -0.2, -0.002, -0.002, -0.002, -0.101, -0.101, -0.101, -0.101];
        expected.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(stability(&fig2(0.0)).unwrap().is_stable);
    }

    #[test]
    fn fig2_stability() {
        assert!(stability(&fig2(0.01)).unwrap().is_stable);
        assert!(!stability(&fig2(0.06)).unwrap().is_stable);
        let q_star = stability_threshold(&fig2(0.0), 0.0, 0.1, 1e-13).unwrap();
        assert!((q_star - closed_form_threshold(&fig2(0.0))).abs() < 1e-10);
    }

    #[test]
    fn uncoupled_mechanics_destabilizes_first() {
        // at J = 0 the (n_b, Re b²) pair has eigenvalues −κb ± 4q
        let p = SemiclassicalParams { j: 0.0, ..fig2(0.0) };
        let q_star = stability_threshold(&p, 0.0, 0.1, 1e-13).unwrap();
        assert!((q_star - 0.002 / 4.0).abs() < 1e-10);
    }

    #[test]
    fn threshold_requires_sign_change() {
        assert!(stability_threshold(&fig2(0.0), 0.0, 0.01, 1e-10).is_err());
    }

    #[test]
    fn integrating_from_zero_reaches_fixed_point() {
        let p = fig2(0.01);
        let target = stationary_moments(&p).unwrap();
        // classic RK4 on the linear system
        let (m, c) = drift_system(&p);
        let f = |x: &[f64; N_REAL]| {
            let mut out = c;
            for r in 0..N_REAL {
                for k in 0..N_REAL {
                    out[r] += m[(r, k)] * x[k];
                }
            }
            out
        };
        let add = |x: &[f64; N_REAL], k: &[f64; N_REAL], h: f64| {
            let mut y = *x;
            y.iter_mut().zip(k).for_each(|(a, b)| *a += h * b);
            y
        };
        let (h, steps) = (0.05, 400_000);
        let mut x = [0.0; N_REAL];
        for _ in 0..steps {
            let k1 = f(&x);
            let k2 = f(&add(&x, &k1, h / 2.0));
            let k3 = f(&add(&x, &k2, h / 2.0));
            let k4 = f(&add(&x, &k3, h));
            for r in 0..N_REAL {
                x[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
            }
        }
        let diff = MomentState::from_real(&x).to_real();
        let t = target.to_real();
        for r in 0..N_REAL {
            assert!((diff[r] - t[r]).abs() < 1e-8, "component {r}");
        }
    }
}
