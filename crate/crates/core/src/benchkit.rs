//! Two-mass oscillator with a cubic spring on the first mass: simulator,
//! modal initial conditions and closed-form reference values.
//!
//! State order is `(x1, x2, v1, v2)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::backbone::BackboneCurve;
use crate::error::{Error, Result};
use crate::polyfit::{MultiIndex, PolyMap};
use crate::signal_io::SignalSet;
use crate::ssm::{Flavor, SsmModel};

pub const DEFAULT_PERIOD: f64 = 0.8;
pub const DEFAULT_SAMPLES: usize = 8000;
/// Integrator steps per sampling period in [`benchmark_signals`].
pub const DEFAULT_STEPS_PER_SAMPLE: usize = 200;
/// States beyond this norm abort the integration.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

pub type State = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParams {
    pub c: f64,
    pub k0: f64,
    pub kappa: f64,
}

impl Default for MechanicalParams {
    fn default() -> Self {
        Self {
            c: 0.003,
            k0: 1.0,
            kappa: 0.5,
        }
    }
}

impl MechanicalParams {
    /// Both modes underdamped, `c, k0 > 0`, `κ ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.k0 > 0.0 && self.kappa >= 0.0) {
            return Err(Error::Config(format!(
                "need c > 0, k0 > 0, kappa >= 0 (got c={}, k0={}, kappa={})",
                self.c, self.k0, self.kappa
            )));
        }
        if self.c >= 2.0 * (self.k0 / 3.0).sqrt() {
            return Err(Error::Config(format!(
                "c = {} overdamps the second mode (limit 2√(k0/3) = {})",
                self.c,
                2.0 * (self.k0 / 3.0).sqrt()
            )));
        }
        Ok(())
    }

    /// `(λ1, λ̄1, λ3, λ̄3)`: in-phase pair first.
    pub fn eigenvalues(&self) -> [Complex64; 4] {
        let (c, k) = (self.c, self.k0);
        let l1 = Complex64::new(-c / 2.0, (k * (1.0 - c * c / (4.0 * k))).sqrt());
        let l3 = Complex64::new(-1.5 * c, (3.0 * k * (1.0 - 3.0 * c * c / (4.0 * k))).sqrt());
        [l1, l1.conj(), l3, l3.conj()]
    }
}

/// `ẋ = f(x)` of the oscillator.
pub fn shaw_pierre_rhs(s: &State, p: &MechanicalParams) -> State {
    let [x1, x2, v1, v2] = *s;
    [
        v1,
        v2,
        -p.c * v1 - p.k0 * x1 - p.kappa * x1 * x1 * x1 - p.k0 * (x1 - x2) - p.c * (v1 - v2),
        -p.c * v2 - p.k0 * x2 - p.k0 * (x2 - x1) - p.c * (v2 - v1),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(move |k| k as f64 * self.dt)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

fn rk4_step(s: &State, h: f64, p: &MechanicalParams) -> State {
    let add = |a: &State, b: &State, t: f64| [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2], a[3] + t * b[3]];
    let k1 = shaw_pierre_rhs(s, p);
    let k2 = shaw_pierre_rhs(&add(s, &k1, h / 2.0), p);
    let k3 = shaw_pierre_rhs(&add(s, &k2, h / 2.0), p);
    let k4 = shaw_pierre_rhs(&add(s, &k3, h), p);
    let mut out = *s;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn step_count(total: f64, step: f64, what: &str) -> Result<usize> {
    if !(step > 0.0 && total >= 0.0) {
        return Err(Error::Config(format!(
            "{what}: need positive step and non-negative span"
        )));
    }
    let n = (total / step).round();
    if (n * step - total).abs() > 1e-9 * total.max(step) {
        return Err(Error::Config(format!("{what}: {total} is not a multiple of {step}")));
    }
    Ok(n as usize)
}

/// Classical fixed-step RK4 from `x0` over `[0, t_end]`, storing every step.
pub fn integrate(params: &MechanicalParams, x0: State, dt: f64, t_end: f64) -> Result<Trajectory> {
    let n = step_count(t_end, dt, "integration span")?;
    let mut states = Vec::with_capacity(n + 1);
    let mut s = x0;
    states.push(s);
    for k in 1..=n {
        s = rk4_step(&s, dt, params);
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { time: k as f64 * dt });
        }
        states.push(s);
    }
    Ok(Trajectory { dt, states })
}

/// RK4 with `substeps` internal steps per sample, keeping only the samples;
/// returns `samples + 1` states.
pub fn integrate_sampled(
    params: &MechanicalParams,
    x0: State,
    period: f64,
    substeps: usize,
    samples: usize,
) -> Result<Trajectory> {
    if substeps == 0 {
        return Err(Error::Config("need at least one integrator step per sample".into()));
    }
    let h = period / substeps as f64;
    let mut states = Vec::with_capacity(samples + 1);
    let mut s = x0;
    states.push(s);
    for k in 1..=samples {
        for _ in 0..substeps {
            s = rk4_step(&s, h, params);
        }
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence {
                time: k as f64 * period,
            });
        }
        states.push(s);
    }
    Ok(Trajectory { dt: period, states })
}

/// Initial conditions in the linear modal subspaces (mode 1: in phase, mode 2: anti-phase).
pub fn modal_initial_conditions(mode: usize) -> Result<State> {
    match mode {
        1 => {
            let a = 2.0 / 3f64.sqrt();
            Ok([a, a, 0.0, 0.0])
        }
        2 => Ok([-2.0 / 3.0, 2.0 / 3.0, 0.0, 0.0]),
        _ => Err(Error::InvalidMode(format!("benchmark mode must be 1 or 2, got {mode}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    X1,
    X2,
    V1,
    V2,
}

impl Observable {
    pub fn index(self) -> usize {
        match self {
            Observable::X1 => 0,
            Observable::X2 => 1,
            Observable::V1 => 2,
            Observable::V2 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        ["x1", "x2", "v1", "v2"][self.index()]
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x1" => Ok(Observable::X1),
            "x2" => Ok(Observable::X2),
            "v1" => Ok(Observable::V1),
            "v2" => Ok(Observable::V2),
            other => Err(Error::Config(format!("unknown observable '{other}'"))),
        }
    }
}

/// Every `period / dt`-th state's `observable` as a one-trajectory signal set.
pub fn sample_observable(traj: &Trajectory, observable: Observable, period: f64) -> Result<SignalSet> {
    let stride = step_count(period, traj.dt, "sampling period")?;
    if stride == 0 {
        return Err(Error::Config(
            "sampling period shorter than the integration step".into(),
        ));
    }
    let values = traj
        .states
        .iter()
        .step_by(stride)
        .map(|s| s[observable.index()])
        .collect();
    SignalSet::with_labels(vec![values], period, vec![observable.name().to_string()])
}

/// The two modal decay signals of the benchmark: `samples` values each of
/// `observable`, sampled at `period` with `substeps` RK4 steps per sample.
pub fn benchmark_signals(
    params: &MechanicalParams,
    observable: Observable,
    period: f64,
    samples: usize,
    substeps: usize,
) -> Result<SignalSet> {
    params.validate()?;
    let mut sets = Vec::new();
    for mode in [1, 2] {
        let x0 = modal_initial_conditions(mode)?;
        let traj = integrate_sampled(params, x0, period, substeps, samples - 1)?;
        let values = traj.component(observable.index());
        sets.push(SignalSet::with_labels(
            vec![values],
            period,
            vec![format!("{}_mode{mode}", observable.name())],
        )?);
    }
    SignalSet::merge(sets)
}

/// Closed-form backbone `(ω(ρ), Amp(ρ) ≈ 2ρ)` of mode 1 or 2.
pub fn analytic_backbone(params: &MechanicalParams, mode: usize, rho: f64) -> Result<(f64, f64)> {
    let (c, k, kappa) = (params.c, params.k0, params.kappa);
    let omega = match mode {
        1 => {
            let s = (4.0 * k - c * c).sqrt();
            0.5 * (s + 3.0 * kappa / s * rho * rho)
        }
        2 => {
            let s = (4.0 * k - 3.0 * c * c).sqrt();
            0.5 * ((3.0f64).sqrt() * s + (3.0f64).sqrt() * kappa / s * rho * rho)
        }
        _ => return Err(Error::InvalidMode(format!("benchmark mode must be 1 or 2, got {mode}"))),
    };
    Ok((omega, 2.0 * rho))
}

/// Eigenvector matrix with columns for `(λ1, λ̄1, λ3, λ̄3)`.
pub fn analytic_v(params: &MechanicalParams) -> DMatrix<Complex64> {
    let [l1, l2, l3, l4] = params.eigenvalues();
    let one = Complex64::new(1.0, 0.0);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            one, one, one, one, one, one, -one, -one, l1, l2, l3, l4, l1, l2, -l3, -l4,
        ],
    )
}

/// Inverse of [`analytic_v`], entry by entry.
pub fn analytic_v_inv(params: &MechanicalParams) -> DMatrix<Complex64> {
    let [l1, l1b, l3, l3b] = params.eigenvalues();
    let d1 = 2.0 * (l1 - l1b);
    let d3 = 2.0 * (l3 - l3b);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            -l1b / d1,
            -l1b / d1,
            1.0 / d1,
            1.0 / d1,
            l1 / d1,
            l1 / d1,
            -1.0 / d1,
            -1.0 / d1,
            -l3b / d3,
            l3b / d3,
            1.0 / d3,
            -1.0 / d3,
            l3 / d3,
            -l3 / d3,
            -1.0 / d3,
            1.0 / d3,
        ],
    )
}

/// `G(y) = (iκ γ(y)/4)(1/Im λ1, −1/Im λ1, 1/Im λ3, −1/Im λ3)` with
/// `γ(y) = (y1 + y2 + y3 + y4)³`, expanded term by term.
pub fn analytic_g(params: &MechanicalParams) -> PolyMap<Complex64> {
    let [l1, _, l3, _] = params.eigenvalues();
    let scale = Complex64::new(0.0, params.kappa / 4.0);
    let weights = [1.0 / l1.im, -1.0 / l1.im, 1.0 / l3.im, -1.0 / l3.im];
    let mut g = PolyMap::<Complex64>::zeros(4, 4, 3);
    let basis: Vec<MultiIndex> = g.basis().iter().filter(|m| m.degree() == 3).cloned().collect();
    for m in basis {
        // Multinomial coefficient 3!/∏ m_i!.
        let denom: u32 = m.exponents().iter().map(|&e| (1..=e).product::<u32>()).product();
        let multinomial = 6.0 / denom as f64;
        for (j, w) in weights.iter().enumerate() {
            g.set_coefficient(j, &m, scale * (multinomial * w))
                .expect("index within basis");
        }
    }
    g
}

/// Cubic SSM of mode 1 or 2 of the flow in the coordinates of [`analytic_v`],
/// entered coefficient by coefficient from the closed-form tables.
pub fn analytic_ssm_coefficients(params: &MechanicalParams, mode: usize) -> Result<SsmModel> {
    let eig = params.eigenvalues();
    let [l1, l1b, l3, l3b] = eig;
    let (i1, i3) = (l1.im, l3.im);
    let ik = Complex64::new(0.0, params.kappa);
    let zero = Complex64::new(0.0, 0.0);
    let index = match mode {
        1 => 0,
        2 => 1,
        _ => return Err(Error::InvalidMode(format!("benchmark mode must be 1 or 2, got {mode}"))),
    };
    let mut model = SsmModel::linear(&eig, index, 3, Flavor::ContinuousFlow)?;
    // Rows j = 1..4; columns (3,0), (0,3), (2,1), (1,2).
    let table: [[Complex64; 4]; 4] = if mode == 1 {
        [
            [
                ik / (8.0 * l1 * i1),
                ik / (4.0 * (3.0 * l1b - l1) * i1),
                zero,
                3.0 * ik / (8.0 * l1b * i1),
            ],
            [
                -ik / (4.0 * (3.0 * l1 - l1b) * i1),
                -ik / (8.0 * l1b * i1),
                -3.0 * ik / (8.0 * l1 * i1),
                zero,
            ],
            [
                ik / (4.0 * (3.0 * l1 - l3) * i3),
                ik / (4.0 * (3.0 * l1b - l3) * i3),
                3.0 * ik / (4.0 * (2.0 * l1 + l1b - l3) * i3),
                3.0 * ik / (4.0 * (l1 + 2.0 * l1b - l3) * i3),
            ],
            [
                -ik / (4.0 * (3.0 * l1 - l3b) * i3),
                -ik / (4.0 * (3.0 * l1b - l3b) * i3),
                -3.0 * ik / (4.0 * (2.0 * l1 + l1b - l3b) * i3),
                -3.0 * ik / (4.0 * (l1 + 2.0 * l1b - l3b) * i3),
            ],
        ]
    } else {
        [
            [
                ik / (4.0 * (3.0 * l3 - l1) * i1),
                ik / (4.0 * (3.0 * l3b - l1) * i1),
                3.0 * ik / (4.0 * (2.0 * l3 + l3b - l1) * i1),
                3.0 * ik / (4.0 * (l3 + 2.0 * l3b - l1) * i1),
            ],
            [
                -ik / (4.0 * (3.0 * l3 - l1b) * i1),
                -ik / (4.0 * (3.0 * l3b - l1b) * i1),
                -3.0 * ik / (4.0 * (2.0 * l3 + l3b - l1b) * i1),
                -3.0 * ik / (4.0 * (l3 + 2.0 * l3b - l1b) * i1),
            ],
            [
                ik / (8.0 * l3 * i3),
                ik / (4.0 * (3.0 * l3b - l3) * i3),
                zero,
                3.0 * ik / (8.0 * l3b * i3),
            ],
            [
                -ik / (4.0 * (3.0 * l3 - l3b) * i3),
                -ik / (8.0 * l3b * i3),
                -3.0 * ik / (8.0 * l3 * i3),
                zero,
            ],
        ]
    };
    for (j, row) in table.iter().enumerate() {
        for (&(s1, s2), &v) in [(3, 0), (0, 3), (2, 1), (1, 2)].iter().zip(row) {
            model.set_w(j, s1, s2, v);
        }
    }
    let beta = 3.0 * ik / (4.0 * if mode == 1 { i1 } else { i3 });
    model.reduced = vec![beta];
    model.reduced_conj = vec![beta.conj()];
    model.finish(3);
    Ok(model)
}

/// Cubic coefficient of the time-`T` map of `ż = λz + β z²z̄`:
/// `β e^{λT}(e^{2 Re λ T} − 1)/(2 Re λ)`.
pub fn discrete_beta(beta: Complex64, lambda: Complex64, period: f64) -> Complex64 {
    let growth = if lambda.re == 0.0 {
        period
    } else {
        ((2.0 * lambda.re * period).exp() - 1.0) / (2.0 * lambda.re)
    };
    beta * (lambda * period).exp() * growth
}

/// Frequency deviation of a measured backbone from [`analytic_backbone`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    /// Largest `|ω − ω_analytic| / ω_analytic` over the compared points.
    pub max_relative: f64,
    pub points: usize,
    /// Largest compared amplitude.
    pub amp_reached: f64,
}

/// Compares `curve` with the closed-form backbone at equal amplitude for
/// `Amp ≤ amp_cap`. The curve's observed amplitude must be the RMS
/// displacement of the first mass (e.g. velocity data with the
/// divide-by-frequency transform); both masses move with equal magnitude in
/// either mode, so the displacement-vector amplitude is `√2` times it.
pub fn backbone_deviation(
    curve: &BackboneCurve,
    params: &MechanicalParams,
    mode: usize,
    amp_cap: f64,
) -> Result<Deviation> {
    let mut dev = Deviation {
        max_relative: 0.0,
        points: 0,
        amp_reached: 0.0,
    };
    for p in &curve.points {
        let amp = std::f64::consts::SQRT_2 * p.observed;
        if amp > amp_cap {
            continue;
        }
        let (omega, _) = analytic_backbone(params, mode, amp / 2.0)?;
        dev.max_relative = dev.max_relative.max((p.omega - omega).abs() / omega);
        dev.points += 1;
        dev.amp_reached = dev.amp_reached.max(amp);
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_hand_values() {
        let p = MechanicalParams::default();
        assert_eq!(shaw_pierre_rhs(&[0.0; 4], &p), [0.0; 4]);
        let lin = MechanicalParams { kappa: 0.0, ..p };
        let d = shaw_pierre_rhs(&[1.0, 1.0, 0.0, 0.0], &lin);
        assert_eq!((d[2], d[3]), (-1.0, -1.0));
        let cons = MechanicalParams { c: 0.0, ..p };
        let d = shaw_pierre_rhs(&[1.0, 0.0, 0.0, 0.0], &cons);
        assert_eq!((d[2], d[3]), (-2.5, 1.0));
    }

    #[test]
    fn params_validation() {
        assert!(MechanicalParams::default().validate().is_ok());
        assert!(MechanicalParams {
            c: 1.2,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(MechanicalParams {
            k0: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    fn energy(s: &State, p: &MechanicalParams) -> f64 {
        let [x1, x2, v1, v2] = *s;
        0.5 * (v1 * v1 + v2 * v2)
            + 0.5 * p.k0 * (x1 * x1 + x2 * x2 + (x1 - x2) * (x1 - x2))
            + 0.25 * p.kappa * x1.powi(4)
    }

    #[test]
    fn conservative_energy() {
        let p = MechanicalParams {
            c: 0.0,
            k0: 1.0,
            kappa: 0.0,
        };
        let t = integrate(&p, [1.0, 0.3, 0.0, 0.2], 0.01, 10.0).unwrap();
        assert_eq!(t.states.len(), 1001);
        let e0 = energy(&t.states[0], &p);
        for s in &t.states {
            assert!((energy(s, &p) - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_damped_matches_modal_solution() {
        let p = MechanicalParams {
            kappa: 0.0,
            ..Default::default()
        };
        let x0 = modal_initial_conditions(1).unwrap();
        let t = integrate(&p, x0, 0.005, 200.0).unwrap();
        // x1 = a e^{-ct/2}(cos ωd t + (c/2ωd) sin ωd t).
        let l = p.eigenvalues()[0];
        let a = x0[0];
        let worst = t
            .times()
            .zip(&t.states)
            .map(|(time, s)| {
                let exact = a * (l.re * time).exp() * ((l.im * time).cos() - l.re / l.im * (l.im * time).sin());
                (s[0] - exact).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn energy_decays() {
        let p = MechanicalParams::default();
        let t = integrate(&p, modal_initial_conditions(1).unwrap(), 0.02, 100.0).unwrap();
        let e: Vec<f64> = t.states.iter().step_by(10).map(|s| energy(s, &p)).collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn divergence_detected() {
        let p = MechanicalParams {
            c: -5.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&p, [1.0, 0.0, 0.0, 0.0], 0.01, 100.0),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn modal_ic() {
        let a = 2.0 / 3f64.sqrt();
        assert_eq!(modal_initial_conditions(1).unwrap(), [a, a, 0.0, 0.0]);
        assert_eq!(modal_initial_conditions(2).unwrap(), [-2.0 / 3.0, 2.0 / 3.0, 0.0, 0.0]);
        assert!(modal_initial_conditions(3).is_err());
    }

    #[test]
    fn sampling_stride() {
        let p = MechanicalParams::default();
        let t = integrate(&p, modal_initial_conditions(1).unwrap(), 0.05, 8.0).unwrap();
        let s = sample_observable(&t, Observable::V1, 0.8).unwrap();
        assert_eq!(s.trajectories[0].len(), 11);
        assert_eq!(s.trajectories[0][1], t.states[16][2]);
        let x = sample_observable(&t, Observable::X1, 0.8).unwrap();
        assert_eq!(x.trajectories[0][0], t.states[0][0]);
        assert!(sample_observable(&t, Observable::V1, 0.12).is_err());
        assert_eq!(step_count(6400.0, 0.8, "x").unwrap() + 1, 8001);
    }

    #[test]
    fn sampled_integration_matches_dense() {
        let p = MechanicalParams::default();
        let x0 = modal_initial_conditions(2).unwrap();
        let dense = integrate(&p, x0, 0.04, 8.0).unwrap();
        let sampled = integrate_sampled(&p, x0, 0.8, 20, 10).unwrap();
        assert_eq!(sampled.states[10], dense.states[200]);
    }

    #[test]
    fn analytic_frequencies() {
        let p = MechanicalParams::default();
        let (w, a) = analytic_backbone(&p, 1, 0.0).unwrap();
        assert!((w - 0.999_998_875).abs() < 1e-9);
        assert_eq!(a, 0.0);
        let (w, _) = analytic_backbone(&p, 1, 0.25).unwrap();
        assert!((w - 1.023_436).abs() < 1e-6, "{w}");
        let (w2, _) = analytic_backbone(&p, 2, 0.0).unwrap();
        assert!((w2 - 3f64.sqrt()).abs() < 1e-4);
        assert!((w2 - p.eigenvalues()[2].im).abs() < 1e-14);
        let flat = MechanicalParams { kappa: 0.0, ..p };
        assert_eq!(
            analytic_backbone(&flat, 1, 0.7).unwrap().0,
            analytic_backbone(&flat, 1, 0.0).unwrap().0
        );
    }

    #[test]
    fn v_and_inverse() {
        let p = MechanicalParams::default();
        let prod = analytic_v(&p) * analytic_v_inv(&p);
        assert!((prod - DMatrix::<Complex64>::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn eigenvectors_diagonalize_linear_part() {
        let p = MechanicalParams::default();
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
                -2.0 * p.k0,
                p.k0,
                -2.0 * p.c,
                p.c,
                p.k0,
                -2.0 * p.k0,
                p.c,
                -2.0 * p.c,
            ],
        )
        .map(|v| Complex64::new(v, 0.0));
        let d = analytic_v_inv(&p) * a * analytic_v(&p);
        let eig = p.eigenvalues();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { eig[i] } else { Complex64::new(0.0, 0.0) };
                assert!((d[(i, j)] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn g_matches_transformed_cubic_force() {
        let p = MechanicalParams::default();
        let g = analytic_g(&p);
        let (v, vi) = (analytic_v(&p), analytic_v_inv(&p));
        let y = [
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.3, 0.05),
            Complex64::new(0.2, -0.1),
            Complex64::new(0.07, 0.0),
        ];
        let x = &v * nalgebra::DVector::from_column_slice(&y);
        let f = nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            -p.kappa * x[0].powu(3),
            Complex64::new(0.0, 0.0),
        ]);
        let expected = vi * f;
        let got = g.eval(&y);
        for j in 0..4 {
            assert!((got[j] - expected[j]).norm() < 1e-14);
        }
    }

    #[test]
    fn table_has_zero_quadratic_block_and_beta() {
        let p = MechanicalParams::default();
        for mode in [1, 2] {
            let m = analytic_ssm_coefficients(&p, mode).unwrap();
            for j in 0..4 {
                for (s1, s2) in [(2, 0), (1, 1), (0, 2)] {
                    assert_eq!(m.w(j, s1, s2), Complex64::new(0.0, 0.0));
                }
            }
            assert!(m.conjugate_symmetry_defect() < 1e-15);
        }
        let m = analytic_ssm_coefficients(&p, 1).unwrap();
        assert!((m.beta() - Complex64::new(0.0, 0.375 / p.eigenvalues()[0].im)).norm() < 1e-15);
    }

    #[test]
    fn discrete_beta_matches_flow_of_normal_form() {
        let lambda = Complex64::new(-0.0015, 1.0);
        let beta = Complex64::new(0.02, 0.375);
        let t = 0.8;
        let f = |z: Complex64| lambda * z + beta * z * z * z.conj();
        let z0 = Complex64::from_polar(0.01, 0.3);
        let mut z = z0;
        let n = 2000;
        let h = t / n as f64;
        for _ in 0..n {
            let k1 = f(z);
            let k2 = f(z + k1 * (h / 2.0));
            let k3 = f(z + k2 * (h / 2.0));
            let k4 = f(z + k3 * h);
            z += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        }
        let cubic = z - (lambda * t).exp() * z0;
        let predicted = discrete_beta(beta, lambda, t) * z0 * z0 * z0.conj();
        assert!(
            (cubic - predicted).norm() < 1e-3 * predicted.norm(),
            "{cubic} {predicted}"
        );
    }
}
