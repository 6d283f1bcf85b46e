#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssm_backbone::polyfit::{compose_linear_change, MultiIndex, PolyMap};
use ssm_backbone::signal_io::DelayDataset;
use ssm_backbone::spectral::{eigendecompose, SpectralData};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable, non-resonant discrete spectrum in paired layout (slowest pair first).
pub fn random_spectrum(rng: &mut ChaCha8Rng, pairs: usize) -> Vec<Complex64> {
    loop {
        let mut mus: Vec<Complex64> = (0..pairs)
            .map(|_| Complex64::from_polar(rng.random_range(0.5..0.97), rng.random_range(0.2..2.9)))
            .collect();
        mus.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        let distinct = mus.windows(2).all(|w| w[0].norm() - w[1].norm() > 0.02);
        if distinct {
            return mus.iter().flat_map(|&m| [m, m.conj()]).collect();
        }
    }
}

/// Nonlinearity with `g_{P(j)}^{P(m)} = conj(g_j^m)`, `P` swapping each pair;
/// terms of degree 2 to `degree` with entries uniform in `[-scale, scale]²`.
pub fn symmetric_g(rng: &mut ChaCha8Rng, dim: usize, degree: u32, scale: f64) -> PolyMap<Complex64> {
    let mut g = PolyMap::<Complex64>::zeros(dim, dim, degree);
    let basis = g.basis().to_vec();
    for m in basis.iter().filter(|m| m.degree() >= 2) {
        let mut pm = MultiIndex::zeros(dim);
        for l in 0..dim / 2 {
            pm.0[2 * l] = m.0[2 * l + 1];
            pm.0[2 * l + 1] = m.0[2 * l];
        }
        for j in (0..dim).step_by(2) {
            let v = Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
            g.set_coefficient(j, m, v).unwrap();
            g.set_coefficient(j + 1, &pm, v.conj()).unwrap();
        }
    }
    g
}

/// Real matrix `P B P⁻¹` with `B` the real block form of `mus` (paired layout).
pub fn real_matrix_with_spectrum(rng: &mut ChaCha8Rng, mus: &[Complex64]) -> DMatrix<f64> {
    let n = mus.len();
    let mut b = DMatrix::<f64>::zeros(n, n);
    for l in 0..n / 2 {
        let m = mus[2 * l];
        b[(2 * l, 2 * l)] = m.re;
        b[(2 * l, 2 * l + 1)] = -m.im;
        b[(2 * l + 1, 2 * l)] = m.im;
        b[(2 * l + 1, 2 * l + 1)] = m.re;
    }
    loop {
        let p = DMatrix::<f64>::from_fn(
            n,
            n,
            |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.4..0.4),
        );
        if let Some(inv) = p.clone().try_inverse() {
            if p.norm() * inv.norm() < 30.0 {
                return &p * b * inv;
            }
        }
    }
}

/// Real map `A x + N(x)` with random real terms of degree 2 to `degree`.
pub fn real_map(rng: &mut ChaCha8Rng, a: &DMatrix<f64>, degree: u32, scale: f64) -> PolyMap<f64> {
    let n = a.nrows();
    let mut f = PolyMap::<f64>::from_linear(a, degree).unwrap();
    let basis = f.basis().to_vec();
    for m in basis.iter().filter(|m| m.degree() >= 2) {
        for j in 0..n {
            f.set_coefficient(j, m, rng.random_range(-scale..scale)).unwrap();
        }
    }
    f
}

/// Random real system, its spectral data and its diagonal-coordinate nonlinearity.
pub struct RealSystem {
    pub map: PolyMap<f64>,
    pub spec: SpectralData,
    pub g: PolyMap<Complex64>,
}

pub fn real_system(seed: u64, pairs: usize, degree: u32, period: f64) -> RealSystem {
    let mut rng = rng(seed);
    let mus = random_spectrum(&mut rng, pairs);
    let a = real_matrix_with_spectrum(&mut rng, &mus);
    let map = real_map(&mut rng, &a, degree, 0.3);
    let spec = eigendecompose(&a, period).unwrap();
    let g = compose_linear_change(&map, &spec.v, &spec.v_inv)
        .unwrap()
        .without_linear_part();
    RealSystem { map, spec, g }
}

/// Training pairs `(x, F(x))` at random points of the cube `[-r, r]^n`.
pub fn sampled_dataset(rng: &mut ChaCha8Rng, f: &PolyMap<f64>, points: usize, r: f64) -> DelayDataset {
    let n = f.in_dim();
    let states: Vec<Vec<f64>> = (0..points)
        .map(|_| (0..n).map(|_| rng.random_range(-r..r)).collect())
        .collect();
    let successors = states.iter().map(|x| f.eval(x)).collect();
    DelayDataset {
        nu: n / 2,
        states,
        successors,
        source: vec![0; points],
        counts: vec![points],
        lengths: vec![points + n],
    }
}

/// Largest entrywise difference, relative to the largest entry of `a`.
pub fn relative_coeff_error<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64
where
    T: nalgebra::ComplexField<RealField = f64> + Copy,
{
    let scale = a.iter().map(|x| x.modulus()).fold(0.0, f64::max);
    let diff = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).modulus())
        .fold(0.0, f64::max);
    diff / scale
}
