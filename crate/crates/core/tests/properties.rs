use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use squeeze_core::dynamics::{DensityMatrix, StateSpace};
use squeeze_core::liouvillian::{unvectorize, vectorize};
use squeeze_core::observables::{fidelity, partial_trace, partial_trace_dims, quadrature_variance, Quadrature};
use squeeze_core::semiclassical::{analytic_variance_coherent, SemiclassicalParams};
use squeeze_core::{HilbertSpec, Liouvillian, Scheme, SqueezedBathParams, Subsystem, SystemParams, C64};

fn random_pure(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Random mixed state `G G† / Tr(G G†)`.
fn random_mixed(rng: &mut ChaCha8Rng, dim: usize) -> Mat<C64> {
    let g = Mat::from_fn(dim, dim, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let p = &g * g.adjoint();
    let tr: C64 = (0..dim).map(|i| p[(i, i)]).sum();
    Mat::from_fn(dim, dim, |i, j| p[(i, j)] / tr)
}

fn overlap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_preserves_hermiticity_and_trace(seed in any::<u64>(), q in 0.0..0.04f64, r in 0.0..0.6f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = HilbertSpec::new(3, 3).unwrap();
        let d = spec.total_dim();
        let rho = random_mixed(&mut rng, d);
        let bath = SqueezedBathParams::new(r, 2.0).unwrap();
        for (p, scheme) in [
            (SystemParams::coherent_pump(0.01, q), Scheme::CoherentPump),
            (SystemParams::squeezed_bath(0.01), Scheme::SqueezedBath(bath)),
        ] {
            let l = Liouvillian::from_model(&p, &scheme, &spec).unwrap();
            let out = unvectorize(&l.matrix().mul_vec(&vectorize(&rho)), d);
            let tr: C64 = (0..d).map(|i| out[(i, i)]).sum();
            prop_assert!(tr.norm() < 1e-10);
            for i in 0..d {
                for j in 0..d {
                    prop_assert!((out[(i, j)] - out[(j, i)].conj()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pure(&mut rng, dim);
        let b = random_pure(&mut rng, dim);
        let ra = DensityMatrix::pure(&a, StateSpace::Plain).unwrap();
        let rb = DensityMatrix::pure(&b, StateSpace::Plain).unwrap();
        let f = fidelity(&ra, &rb).unwrap();
        prop_assert!((f - overlap(&a, &b)).abs() < 1e-8);
        prop_assert!((f - fidelity(&rb, &ra).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(seed in any::<u64>(), dim in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DensityMatrix::new(random_mixed(&mut rng, dim), StateSpace::Plain).unwrap();
        let b = DensityMatrix::new(random_mixed(&mut rng, dim), StateSpace::Plain).unwrap();
        let fab = fidelity(&a, &b).unwrap();
        prop_assert!((fab - fidelity(&b, &a).unwrap()).abs() < 1e-8);
        prop_assert!((0.0..=1.0).contains(&fab));
        prop_assert!(fab < 1.0 - 1e-6);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn partial_traces_keep_unit_trace(seed in any::<u64>(), nc in 2usize..4, nm in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = HilbertSpec::new(nc, nm).unwrap();
        let rho = DensityMatrix::new(random_mixed(&mut rng, spec.total_dim()), StateSpace::Composite(spec)).unwrap();
        for sub in Subsystem::ORDER {
            let red = partial_trace(&rho, sub).unwrap();
            prop_assert!((red.trace().re - 1.0).abs() < 1e-12);
        }
        // removing the atom, then the cavity, leaves the mechanics
        let dims = [3, nc, nm];
        let cm = partial_trace_dims(rho.matrix(), &dims, &[1, 2]);
        let m = partial_trace_dims(&cm, &[nc, nm], &[1]);
        let direct = partial_trace(&rho, Subsystem::Mech).unwrap();
        prop_assert!((&m - direct.matrix()).norm_max() < 1e-12);
        let tr: C64 = (0..nm).map(|i| m[(i, i)]).sum();
        prop_assert!((tr.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_bound_on_random_modes(seed in any::<u64>(), dim in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_pure(&mut rng, dim);
        let rho = DensityMatrix::pure(&psi, StateSpace::Plain).unwrap();
        let vx = quadrature_variance(&rho, Quadrature::X).unwrap();
        let vy = quadrature_variance(&rho, Quadrature::Y).unwrap();
        prop_assert!(vx * vy >= 1.0 / 16.0 - 1e-10);
    }

    #[test]
    fn cavity_is_always_less_squeezed(q in 1e-4..0.05f64, g_cm in 1e-3..0.02f64) {
        let p = SemiclassicalParams::from_system(&SystemParams::coherent_pump(g_cm, q)).unwrap();
        let v = analytic_variance_coherent(&p).unwrap();
        prop_assert!(v.var_ya > v.var_yb);
        prop_assert!((v.var_ya - v.var_yb - 1.0 / (4.0 * (v.n + 1.0))).abs() < 1e-12);
    }
}
