use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::polyfit::MultiIndex;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn eig4() -> Vec<Complex64> {
    let a = Complex64::from_polar(0.9, 0.3);
    let b = Complex64::from_polar(0.8, 1.1);
    vec![a, a.conj(), b, b.conj()]
}

/// Random nonlinearity with `g_{P(j)}^{P(m)} = conj(g_j^m)`, `P` swapping each pair.
fn symmetric_g(rng: &mut ChaCha8Rng, dim: usize, degree: u32) -> PolyMap<Complex64> {
    let mut g = PolyMap::<Complex64>::zeros(dim, dim, degree);
    let basis = g.basis().to_vec();
    for m in basis.iter().filter(|m| m.degree() >= 2) {
        let mut pm = MultiIndex::zeros(dim);
        for l in 0..dim / 2 {
            pm.0[2 * l] = m.0[2 * l + 1];
            pm.0[2 * l + 1] = m.0[2 * l];
        }
        for j in (0..dim).step_by(2) {
            let v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            g.set_coefficient(j, m, v).unwrap();
            g.set_coefficient(j + 1, &pm, v.conj()).unwrap();
        }
    }
    g
}

fn max_diff(a: &SsmModel, b: &SsmModel) -> f64 {
    let mut d: f64 = 0.0;
    for j in 0..a.dim() {
        for (s1, s2) in a.multi_indices() {
            d = d.max((a.w(j, s1, s2) - b.w(j, s1, s2)).norm());
        }
    }
    for (x, y) in a.reduced.iter().zip(&b.reduced) {
        d = d.max((x - y).norm());
    }
    for (x, y) in a.reduced_conj.iter().zip(&b.reduced_conj) {
        d = d.max((x - y).norm());
    }
    d
}

#[test]
fn zero_nonlinearity_gives_flat_model() {
    let g = PolyMap::<Complex64>::zeros(4, 4, 5);
    for model in [
        ssm_cubic_discrete(&g, &eig4(), 0, 1e-2).unwrap(),
        ssm_recursive(&g, &eig4(), 1, 5, Flavor::DiscreteMap, 1e-2).unwrap(),
        brute_force_homological(&g, &eig4(), 0, 3, Flavor::DiscreteMap).unwrap(),
    ] {
        for j in 0..4 {
            for (s1, s2) in model.multi_indices().into_iter().filter(|&(a, b)| a + b >= 2) {
                assert_eq!(model.w(j, s1, s2), c(0.0, 0.0));
            }
        }
        assert!(model.reduced.iter().all(|r| *r == c(0.0, 0.0)));
        assert_eq!(model.validity_radius, 1.0);
    }
}

#[test]
fn single_quadratic_term() {
    let eig = eig4();
    let mut g = PolyMap::<Complex64>::zeros(4, 4, 3);
    g.set_coefficient(0, &MultiIndex(vec![2, 0, 0, 0]), c(1.0, 0.0))
        .unwrap();
    let model = ssm_cubic_discrete(&g, &eig, 0, 1e-2).unwrap();
    let expected = c(1.0, 0.0) / (eig[0] * eig[0] - eig[0]);
    assert!((model.w(0, 2, 0) - expected).norm() < 1e-15);
    for j in 0..4 {
        for (s1, s2) in [(2, 0), (1, 1), (0, 2)] {
            if (j, s1, s2) != (0, 2, 0) {
                assert_eq!(model.w(j, s1, s2), c(0.0, 0.0));
            }
        }
    }
    assert_eq!(model.beta(), c(0.0, 0.0));
    let brute = brute_force_homological(&g, &eig, 0, 3, Flavor::DiscreteMap).unwrap();
    assert!(max_diff(&model, &brute) < 1e-12);
}

#[test]
fn recursive_matches_closed_form_at_cubic_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for flavor in [Flavor::DiscreteMap, Flavor::ContinuousFlow] {
        for _ in 0..10 {
            let g = symmetric_g(&mut rng, 4, 3);
            let eig = match flavor {
                Flavor::DiscreteMap => eig4(),
                Flavor::ContinuousFlow => {
                    let a = c(-0.05, 1.0);
                    let b = c(-0.2, 2.7);
                    vec![a, a.conj(), b, b.conj()]
                }
            };
            for mode in 0..2 {
                let closed = match flavor {
                    Flavor::DiscreteMap => ssm_cubic_discrete(&g, &eig, mode, 1e-3).unwrap(),
                    Flavor::ContinuousFlow => ssm_cubic_continuous(&g, &eig, mode, 1e-3).unwrap(),
                };
                let rec = ssm_recursive(&g, &eig, mode, 3, flavor, 1e-3).unwrap();
                let scale = rec.w.iter().map(|z| z.norm()).fold(1.0, f64::max);
                assert!(max_diff(&closed, &rec) <= 1e-13 * scale, "{flavor:?} mode {mode}");
                assert!(closed.conjugate_symmetry_defect() < 1e-13 * scale);
                assert_eq!(closed.w(2 * mode, 2, 1), c(0.0, 0.0));
                assert_eq!(closed.w(2 * mode + 1, 1, 2), c(0.0, 0.0));
            }
        }
    }
}

#[test]
fn brute_force_agrees_at_quintic_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = symmetric_g(&mut rng, 4, 5);
    for flavor in [Flavor::DiscreteMap, Flavor::ContinuousFlow] {
        let eig = match flavor {
            Flavor::DiscreteMap => eig4(),
            Flavor::ContinuousFlow => {
                let a = c(-0.05, 1.0);
                let b = c(-0.2, 2.7);
                vec![a, a.conj(), b, b.conj()]
            }
        };
        let rec = ssm_recursive(&g, &eig, 0, 5, flavor, 1e-3).unwrap();
        let brute = brute_force_homological(&g, &eig, 0, 5, flavor).unwrap();
        let scale = rec.w.iter().map(|z| z.norm()).fold(1.0, f64::max);
        assert!(
            max_diff(&rec, &brute) <= 1e-10 * scale,
            "{flavor:?}: {}",
            max_diff(&rec, &brute)
        );
        assert!(rec.gamma().is_some());
    }
}

#[test]
fn residual_slopes_follow_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let g = symmetric_g(&mut rng, 4, 5);
    for flavor in [Flavor::DiscreteMap, Flavor::ContinuousFlow] {
        let eig = match flavor {
            Flavor::DiscreteMap => eig4(),
            Flavor::ContinuousFlow => vec![c(-0.05, 1.0), c(-0.05, -1.0), c(-0.2, 2.7), c(-0.2, -2.7)],
        };
        for order in [3, 5] {
            let model = ssm_recursive(&g, &eig, 0, order, flavor, 1e-3).unwrap();
            let r = residual_slope(&model, &g, 1e-2, 64).unwrap();
            assert!(r.slope > order as f64 + 0.5, "{flavor:?} order {order}: {r:?}");
        }
    }
}

#[test]
fn linear_model_has_zero_residual() {
    let g = PolyMap::<Complex64>::zeros(4, 4, 3);
    let model = ssm_recursive(&g, &eig4(), 0, 3, Flavor::DiscreteMap, 1e-2).unwrap();
    assert_eq!(invariance_residual(&model, &g, 0.1, 32).unwrap(), 0.0);
}

#[test]
fn resonances_are_detected() {
    let a = Complex64::from_polar(0.9, 0.3);
    let b = a * a;
    let eig = vec![a, a.conj(), b, b.conj()];
    let mut g = PolyMap::<Complex64>::zeros(4, 4, 3);
    g.set_coefficient(2, &MultiIndex(vec![2, 0, 0, 0]), c(1.0, 0.0))
        .unwrap();
    g.set_coefficient(3, &MultiIndex(vec![0, 2, 0, 0]), c(1.0, 0.0))
        .unwrap();
    assert!(matches!(
        ssm_cubic_discrete(&g, &eig, 0, 1e-2),
        Err(Error::NearResonance { s1: 2, s2: 0, j: 2, .. })
    ));
    assert!(matches!(
        brute_force_homological(&g, &eig, 0, 3, Flavor::DiscreteMap),
        Err(Error::SingularSystem { .. })
    ));
}
