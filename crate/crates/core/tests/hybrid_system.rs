use std::f64::consts::PI;

use squeeze_core::dynamics::{
    evolve, steady_state_report, trace_distance, DensityMatrix, EvolveOptions, SteadyStateMethod,
    SteadyStateOptions,
};
use squeeze_core::observables::{partial_trace, quadrature_variance, Quadrature};
use squeeze_core::semiclassical::{analytic_variance_coherent, SemiclassicalParams};
use squeeze_core::{HilbertSpec, Liouvillian, Scheme, SqueezedBathParams, Subsystem, SystemParams};

fn coherent(q: f64, cutoff: usize) -> (Liouvillian, HilbertSpec) {
    let spec = HilbertSpec::new(cutoff, cutoff).unwrap();
    let l = Liouvillian::from_model(&SystemParams::coherent_pump(0.01, q), &Scheme::CoherentPump, &spec).unwrap();
    (l, spec)
}

fn check_invariants(rho: &DensityMatrix) {
    let m = rho.matrix();
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            assert!((m[(i, j)] - m[(j, i)].conj()).norm() <= 1e-10);
        }
    }
    assert!((rho.trace().re - 1.0).abs() <= 1e-10 && rho.trace().im.abs() <= 1e-10);
    assert!(rho.min_eigenvalue().unwrap() >= -1e-8);
}

fn mode_variance(rho: &DensityMatrix, sub: Subsystem, q: Quadrature) -> f64 {
    quadrature_variance(&partial_trace(rho, sub).unwrap(), q).unwrap()
}

#[test]
fn direct_and_iterative_solvers_agree() {
    let (l, _) = coherent(0.01, 5);
    let direct = steady_state_report(
        &l,
        &SteadyStateOptions {
            method: SteadyStateMethod::DirectLu,
            ..Default::default()
        },
    )
    .unwrap();
    let krylov = steady_state_report(&l, &SteadyStateOptions::default()).unwrap();
    for rep in [&direct, &krylov] {
        assert!(rep.residual <= 1e-10);
        check_invariants(&rep.state);
    }
    assert!(trace_distance(&direct.state, &krylov.state).unwrap() < 1e-10);
    assert_eq!(direct.iterations, 0);
}

#[test]
fn parity_sector_is_exploited_only_when_exact() {
    let (l, spec) = coherent(0.01, 4);
    let d = spec.total_dim();
    let even = steady_state_report(&l, &SteadyStateOptions::default()).unwrap();
    assert_eq!(even.unknowns, d * d / 2);
    let levels = spec.excitation_levels();
    let m = even.state.matrix();
    for i in 0..d {
        for j in 0..d {
            if (levels[i] + levels[j]) % 2 == 1 {
                assert_eq!(m[(i, j)].norm(), 0.0);
            }
        }
    }

    // the K a†a b† term changes n_m by one and couples the sectors
    let mut p = SystemParams::coherent_pump(0.01, 0.01);
    p.include_k = true;
    let lk = Liouvillian::from_model(&p, &Scheme::CoherentPump, &spec).unwrap();
    let full = steady_state_report(&lk, &SteadyStateOptions::default()).unwrap();
    assert_eq!(full.unknowns, d * d);
    assert!(full.residual <= 1e-10);
    let direct = steady_state_report(
        &lk,
        &SteadyStateOptions {
            method: SteadyStateMethod::DirectLu,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(trace_distance(&direct.state, &full.state).unwrap() < 1e-10);
    // K = q·g_cm is tiny; its effect on the state is far below the squeezing itself
    assert!(trace_distance(&even.state, &full.state).unwrap() < 1e-3);
}

#[test]
fn pump_squeezes_y_quadratures_near_closed_form() {
    let (l, _) = coherent(0.01, 8);
    let rho = steady_state_report(&l, &SteadyStateOptions::default()).unwrap().state;
    let ana = analytic_variance_coherent(
        &SemiclassicalParams::from_system(&SystemParams::coherent_pump(0.01, 0.01)).unwrap(),
    )
    .unwrap();
    let ya = mode_variance(&rho, Subsystem::Cavity, Quadrature::Y);
    let yb = mode_variance(&rho, Subsystem::Mech, Quadrature::Y);
    assert!((yb - 0.20126).abs() < 0.02 && (ya - ana.var_ya).abs() < 0.02);
    assert!(ya > yb && yb < 0.25);
    // the conjugate quadratures are amplified
    assert!(mode_variance(&rho, Subsystem::Mech, Quadrature::X) > 0.25);
}

#[test]
fn squeezed_bath_squeezes_x_quadratures() {
    let spec = HilbertSpec::new(6, 6).unwrap();
    let bath = SqueezedBathParams::new(0.3, PI).unwrap();
    let l = Liouvillian::from_model(&SystemParams::squeezed_bath(0.01), &Scheme::SqueezedBath(bath), &spec).unwrap();
    let rep = steady_state_report(&l, &SteadyStateOptions::default()).unwrap();
    assert!(rep.residual <= 1e-10);
    check_invariants(&rep.state);
    let xa = mode_variance(&rep.state, Subsystem::Cavity, Quadrature::X);
    let xb = mode_variance(&rep.state, Subsystem::Mech, Quadrature::X);
    assert!(xa < 0.25 && xb < 0.25);
    assert!((xa - 0.202471).abs() < 0.02 && (xb - 0.184731).abs() < 0.02);
}

#[test]
fn transient_from_vacuum_squeezes_both_modes() {
    let (l, spec) = coherent(0.01, 3);
    let opts = EvolveOptions {
        rtol: 1e-5,
        atol: 1e-8,
        ..EvolveOptions::from_ground(&spec, 150.0, 6)
    };
    let traj = evolve(&l, &opts).unwrap();
    let first = &traj[0].1;
    assert_eq!(mode_variance(first, Subsystem::Cavity, Quadrature::Y), 0.25);
    assert_eq!(mode_variance(first, Subsystem::Mech, Quadrature::Y), 0.25);
    let gaps: Vec<f64> = traj
        .iter()
        .map(|(_, rho)| {
            check_invariants(rho);
            mode_variance(rho, Subsystem::Cavity, Quadrature::Y) - mode_variance(rho, Subsystem::Mech, Quadrature::Y)
        })
        .collect();
    let (_, last) = traj.last().unwrap();
    assert!(mode_variance(last, Subsystem::Cavity, Quadrature::Y) < 0.25);
    assert!(mode_variance(last, Subsystem::Mech, Quadrature::Y) < 0.25);
    assert!(gaps.last().unwrap().abs() < 0.02);

    let ss = steady_state_report(&l, &SteadyStateOptions::default()).unwrap().state;
    assert!(trace_distance(last, &ss).unwrap() < 1e-4);
}
