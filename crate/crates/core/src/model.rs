//! Interaction-picture Hamiltonians and dissipation channels of the hybrid
//! atom–cavity–mechanics system.
//!
//! The lab-frame model couples a three-level atom (levels 0, 1, 2) to a
//! cavity mode `a` through the 1↔2 transition and the cavity to a
//! mechanical mode `b` through radiation pressure. Moving to the frame
//! rotating at the mechanical frequency, expanding the displacement
//! operator to first order in `g_cm/ω_m` and keeping resonant terms at the
//! blue-detuned point `Δ = ω_m` leaves the time-independent coupling
//!
//! ```text
//! H2 = i J σ₂₁⁺ a b† + i q b†² − 2i K a†a b† + h.c.,   J = g_ac·g_cm/ω_m,  K = q·g_cm/ω_m
//! ```
//!
//! which is what is simulated here. The level energies, the detuning and
//! the time-dependent displacement never appear. All quantities are in
//! units of `ω_m`.

use crate::error::{Error, Result};
use crate::operator::{CompositeOps, HilbertSpec, SparseMatrix, C64};

/// Physical rates and amplitudes in units of the mechanical frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub g_ac: f64,
    pub g_cm: f64,
    pub q: f64,
    pub e1: f64,
    pub e2: f64,
    pub gamma10: f64,
    pub gamma21: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    /// Keep the `K a†a b†` correction in the Hamiltonian.
    pub include_k: bool,
}

impl SystemParams {
    /// Coherent-pump parameter set: g_ac = 100, κa = 0.2, κb = κa/100,
    /// γ10 = 20, γ21 = 0, E1 = E2 = 25.
    pub fn coherent_pump(g_cm: f64, q: f64) -> Self {
        Self {
            g_ac: 100.0,
            g_cm,
            q,
            e1: 25.0,
            e2: 25.0,
            gamma10: 20.0,
            gamma21: 0.0,
            kappa_a: 0.2,
            kappa_b: 0.002,
            include_k: false,
        }
    }

    /// Squeezed-bath parameter set: as [`SystemParams::coherent_pump`] but
    /// with q = 0 and κa = κb = 0.2.
    pub fn squeezed_bath(g_cm: f64) -> Self {
        Self {
            q: 0.0,
            kappa_b: 0.2,
            ..Self::coherent_pump(g_cm, 0.0)
        }
    }

    /// Tripartite atom–photon–phonon coupling.
    pub fn j(&self) -> f64 {
        self.g_ac * self.g_cm
    }

    pub fn k(&self) -> f64 {
        if self.include_k {
            self.q * self.g_cm
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g_ac", self.g_ac),
            ("g_cm", self.g_cm),
            ("q", self.q),
            ("E1", self.e1),
            ("E2", self.e2),
            ("gamma10", self.gamma10),
            ("gamma21", self.gamma21),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameters(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Squeezed phonon reservoir with squeezing magnitude `r` and phase `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedBathParams {
    pub r: f64,
    pub theta: f64,
}

impl SqueezedBathParams {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 || !theta.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "squeezed bath needs finite r >= 0 and finite theta, got r={r}, theta={theta}"
            )));
        }
        Ok(Self { r, theta })
    }

    /// `N = sinh² r`
    pub fn n_sq(&self) -> f64 {
        self.r.sinh().powi(2)
    }

    /// `M = −e^{iθ} sinh r cosh r`
    pub fn m_sq(&self) -> C64 {
        -C64::from_polar(1.0, self.theta) * (self.r.sinh() * self.r.cosh())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    Standard,
    SqueezedVacuum(SqueezedBathParams),
}

/// A Lindblad channel `(rate/2)·L[O]` acting on the composite space.
#[derive(Clone, Debug)]
pub struct DissipationChannel {
    pub label: &'static str,
    pub operator: SparseMatrix,
    pub rate: f64,
    pub kind: ChannelKind,
}

/// Which way squeezing is injected into the mechanics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    /// Coherent two-phonon pump `i q (b†² − b²)`, zero-temperature baths.
    CoherentPump,
    /// No pump (q = 0); the mechanics sees a squeezed-vacuum reservoir.
    SqueezedBath(SqueezedBathParams),
}

fn i_times(m: &SparseMatrix, s: f64) -> SparseMatrix {
    m.scale(C64::new(0.0, s))
}

fn hermitian_part(t: &SparseMatrix) -> SparseMatrix {
    t + &t.adjoint()
}

/// `i J σ₂₁⁺ a b† + i q b†² − 2i K a†a b† + h.c.`
pub fn build_h2(params: &SystemParams, spec: &HilbertSpec) -> Result<SparseMatrix> {
    params.validate()?;
    let ops = CompositeOps::new(spec)?;
    let ad = ops.a.adjoint();
    let bd = ops.b.adjoint();
    let s21p = ops.sigma(2, 1)?;

    let tripartite = i_times(&(&(&s21p * &ops.a) * &bd), params.j());
    let pump = i_times(&(&bd * &bd), params.q);
    let correction = i_times(&(&(&ad * &ops.a) * &bd), -2.0 * params.k());
    Ok(hermitian_part(&(&(&tripartite + &pump) + &correction)))
}

/// The q = 0, K = 0 tripartite Hamiltonian `iJ(σ₂₁⁺ a b† − σ₂₁⁻ a† b)`.
pub fn build_h3(params: &SystemParams, spec: &HilbertSpec) -> Result<SparseMatrix> {
    let reduced = SystemParams {
        q: 0.0,
        include_k: false,
        ..*params
    };
    build_h2(&reduced, spec)
}

/// Atomic drives `i E1 (σ₂₀⁻ − σ₂₀⁺) + i E2 (σ₁₀⁻ − σ₁₀⁺)`.
pub fn build_he(params: &SystemParams, spec: &HilbertSpec) -> Result<SparseMatrix> {
    params.validate()?;
    let ops = CompositeOps::new(spec)?;
    let lower20 = ops.sigma(0, 2)?;
    let lower10 = ops.sigma(0, 1)?;
    let t = &i_times(&lower20, params.e1) + &i_times(&lower10, params.e2);
    Ok(hermitian_part(&t))
}

/// Spontaneous emission 2→1 and 1→0, cavity loss and mechanical loss, all
/// into zero-temperature baths.
pub fn standard_channels(
    params: &SystemParams,
    spec: &HilbertSpec,
) -> Result<Vec<DissipationChannel>> {
    params.validate()?;
    let ops = CompositeOps::new(spec)?;
    let standard = |label, operator, rate| DissipationChannel {
        label,
        operator,
        rate,
        kind: ChannelKind::Standard,
    };
    Ok(vec![
        standard("sigma21", ops.sigma(1, 2)?, params.gamma21),
        standard("sigma10", ops.sigma(0, 1)?, params.gamma10),
        standard("a", ops.a.clone(), params.kappa_a),
        standard("b", ops.b, params.kappa_b),
    ])
}

/// As [`standard_channels`], with the mechanical channel coupled to a
/// squeezed-vacuum reservoir.
pub fn squeezed_channels(
    params: &SystemParams,
    bath: &SqueezedBathParams,
    spec: &HilbertSpec,
) -> Result<Vec<DissipationChannel>> {
    let mut channels = standard_channels(params, spec)?;
    let mech = channels.last_mut().expect("mechanical channel");
    mech.kind = ChannelKind::SqueezedVacuum(*bath);
    Ok(channels)
}

/// Total Hamiltonian and channel list for a pumping scheme.
pub fn assemble(
    params: &SystemParams,
    scheme: &Scheme,
    spec: &HilbertSpec,
) -> Result<(SparseMatrix, Vec<DissipationChannel>)> {
    let he = build_he(params, spec)?;
    match scheme {
        Scheme::CoherentPump => Ok((&build_h2(params, spec)? + &he, standard_channels(params, spec)?)),
        Scheme::SqueezedBath(bath) => Ok((
            &build_h3(params, spec)? + &he,
            squeezed_channels(params, bath, spec)?,
        )),
    }
}
