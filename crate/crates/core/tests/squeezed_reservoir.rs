use std::f64::consts::PI;

use squeeze_core::dynamics::{steady_state_report, SteadyStateMethod, SteadyStateOptions};
use squeeze_core::liouvillian::squeezed_mode;
use squeeze_core::observables::{quadrature_variance, Quadrature};
use squeeze_core::operator::{annihilation, number};
use squeeze_core::SqueezedBathParams;

const DIM: usize = 40;

fn solve(r: f64, theta: f64, method: SteadyStateMethod) -> squeeze_core::DensityMatrix {
    let bath = SqueezedBathParams::new(r, theta).unwrap();
    let l = squeezed_mode(DIM, 0.2, bath).unwrap();
    let opts = SteadyStateOptions {
        method,
        ..Default::default()
    };
    let rep = steady_state_report(&l, &opts).unwrap();
    assert!(rep.residual <= 1e-10);
    rep.state
}

#[test]
fn stationary_moments_match_reservoir() {
    let b = annihilation(DIM).unwrap();
    let bb = &b * &b;
    let n_op = number(DIM).unwrap();
    for method in [SteadyStateMethod::DirectLu, SteadyStateMethod::IterativeKrylov] {
        for r in [0.1, 0.3, 0.5] {
            let bath = SqueezedBathParams::new(r, PI).unwrap();
            let rho = solve(r, PI, method);
            assert!((rho.expectation(&n_op).re - bath.n_sq()).abs() < 1e-8);
            // d⟨b²⟩/dt = −κ(⟨b²⟩ + M) fixes ⟨bb⟩ = −M
            assert!((rho.expectation(&bb) + bath.m_sq()).norm() < 1e-8);
            let vx = quadrature_variance(&rho, Quadrature::X).unwrap();
            assert!((vx - (-2.0 * r).exp() / 4.0).abs() < 1e-6, "r = {r}: {vx}");
        }
    }
}

#[test]
fn squeezing_axis_follows_reservoir_phase() {
    let rho = solve(0.3, 0.0, SteadyStateMethod::IterativeKrylov);
    let vy = quadrature_variance(&rho, Quadrature::Y).unwrap();
    assert!((vy - (-0.6f64).exp() / 4.0).abs() < 1e-6);
    assert!((vy - 0.137203).abs() < 1e-6);
}

#[test]
fn unsqueezed_reservoir_gives_vacuum() {
    let rho = solve(0.0, PI, SteadyStateMethod::DirectLu);
    assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
}
