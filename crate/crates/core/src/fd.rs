//! Explicit finite-difference time stepping.
//!
//! `u_j^{n+1} = u_j^n + dt * (a (u_{j+1} - 2 u_j + u_{j-1}) / dx^2 - b I_dx[u^n]_j)`
//!
//! where `I_dx` is [`apply_nonlocal_discrete`]. The scheme is only
//! conditionally stable; [`check_stability`] evaluates the mesh condition and
//! the CFL-like time-step condition, and [`filter_fd`] refuses to run when
//! either fails unless explicitly overridden.

use std::fmt;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryPolicy;
use crate::error::{invalid, Error, Result};
use crate::fractional::{alpha_lambda, apply_nonlocal_discrete, truncation_a, FractionalOrder, NonlocalMode};
use crate::signal::Signal;

/// Outcome of the two stability conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `(1 - 2^(1-lambda)) b / dx^lambda`
    pub cond1_lhs: f64,
    /// `2 a / dx^2`
    pub cond1_rhs: f64,
    /// `2 a dt / dx^2 + (2 - 2^(1-lambda)) b dt / dx^lambda`, must stay below 1.
    pub cond2_value: f64,
    pub satisfied: bool,
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mesh condition {:.6e} < {:.6e}: {}; time-step condition {:.6} < 1: {}",
            self.cond1_lhs,
            self.cond1_rhs,
            self.cond1_lhs < self.cond1_rhs,
            self.cond2_value,
            self.cond2_value < 1.0
        )
    }
}

pub fn check_stability(a: f64, b: f64, lambda: f64, dx: f64, dt: f64) -> Result<StabilityReport> {
    if !(a > 0.0 && a.is_finite()) || !(b >= 0.0 && b.is_finite()) {
        return invalid(format!("need a > 0 and b >= 0, got a={a}, b={b}"));
    }
    if !(dx > 0.0 && dx.is_finite() && dt > 0.0 && dt.is_finite()) {
        return invalid(format!("need dx > 0 and dt > 0, got dx={dx}, dt={dt}"));
    }
    FractionalOrder::new(lambda)?;
    let two_pow = 2f64.powf(1.0 - lambda);
    let dx_lambda = dx.powf(lambda);
    let cond1_lhs = (1.0 - two_pow) * b / dx_lambda;
    let cond1_rhs = 2.0 * a / (dx * dx);
    let cond2_value = 2.0 * a * dt / (dx * dx) + (2.0 - two_pow) * b * dt / dx_lambda;
    Ok(StabilityReport {
        cond1_lhs,
        cond1_rhs,
        cond2_value,
        satisfied: cond1_lhs < cond1_rhs && cond2_value < 1.0,
    })
}

/// Time-stepping configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub dt: f64,
    pub steps: usize,
    /// Number of terms `A` kept in the nonlocal sum.
    pub truncation: usize,
    pub mode: NonlocalMode,
    pub boundary: BoundaryPolicy,
    /// Run even when the stability conditions fail.
    #[serde(default)]
    pub allow_unstable: bool,
}

impl FdConfig {
    /// Causal mode, constant-extension boundary and the default truncation
    /// for `lambda`.
    pub fn new(dt: f64, steps: usize, order: FractionalOrder) -> Self {
        FdConfig {
            dt,
            steps,
            truncation: truncation_a(order),
            mode: NonlocalMode::Causal,
            boundary: BoundaryPolicy::ConstantExtension,
            allow_unstable: false,
        }
    }

    /// `steps = round(total_time / dt)`.
    pub fn steps_for(total_time: f64, dt: f64) -> Result<usize> {
        if !(total_time >= 0.0 && total_time.is_finite() && dt > 0.0) {
            return invalid(format!("cannot derive steps from T={total_time}, dt={dt}"));
        }
        Ok((total_time / dt).round() as usize)
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn with_mode(mut self, mode: NonlocalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryPolicy) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn allowing_unstable(mut self, allow: bool) -> Self {
        self.allow_unstable = allow;
        self
    }
}

/// One explicit step, fully specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    pub a: f64,
    pub b: f64,
    pub order: FractionalOrder,
    pub dx: f64,
    pub dt: f64,
    pub truncation: usize,
    pub mode: NonlocalMode,
    pub boundary: BoundaryPolicy,
}

impl Scheme {
    pub fn new(a: f64, b: f64, lambda: f64, dx: f64, cfg: &FdConfig) -> Result<Self> {
        let order = FractionalOrder::new(lambda)?;
        if !(a > 0.0 && a.is_finite()) {
            return invalid(format!("diffusion coefficient must be > 0, got {a}"));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return invalid(format!("anti-diffusion coefficient must be >= 0, got {b}"));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return invalid(format!("grid spacing must be > 0, got {dx}"));
        }
        if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
            return invalid(format!("time step must be > 0, got {}", cfg.dt));
        }
        if cfg.truncation < 1 {
            return invalid("truncation A must be at least 1");
        }
        if cfg.mode == NonlocalMode::Symmetric {
            alpha_lambda(order)?;
        }
        Ok(Scheme {
            a,
            b,
            order,
            dx,
            dt: cfg.dt,
            truncation: cfg.truncation,
            mode: cfg.mode,
            boundary: cfg.boundary,
        })
    }

    /// Coefficient in front of the one-sided power-law sum. In symmetric mode
    /// the operator carries `alpha_lambda`, so the stability conditions see
    /// `alpha_lambda * b`.
    pub fn effective_b(&self) -> f64 {
        match self.mode {
            NonlocalMode::Causal => self.b,
            NonlocalMode::Symmetric => self.b * alpha_lambda(self.order).unwrap_or(1.0),
        }
    }

    pub fn stability(&self) -> StabilityReport {
        check_stability(self.a, self.effective_b(), self.order.value(), self.dx, self.dt)
            .expect("scheme parameters are validated on construction")
    }

    pub fn step(&self, u: &[f64]) -> Result<Vec<f64>> {
        step_explicit(u, self)
    }

    /// Complex amplification factor `G(theta_k)`, `theta_k = 2 pi k / n`, of
    /// one periodic step on an `n`-point grid.
    pub fn amplification_factors(&self, n: usize) -> Result<Vec<Complex64>> {
        let periodic = Scheme {
            boundary: BoundaryPolicy::Periodic,
            ..*self
        };
        let mut delta = vec![0.0; n];
        delta[0] = 1.0;
        let response = periodic.step(&delta)?;
        let mut spec: Vec<Complex64> = response.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut spec);
        Ok(spec)
    }
}

pub fn step_explicit(u: &[f64], scheme: &Scheme) -> Result<Vec<f64>> {
    if u.len() < 3 {
        return invalid(format!("explicit step needs at least 3 samples, got {}", u.len()));
    }
    if let Some(j) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite value at sample {j}")));
    }
    let nonlocal = if scheme.b == 0.0 {
        vec![0.0; u.len()]
    } else {
        apply_nonlocal_discrete(
            u,
            scheme.order,
            scheme.dx,
            scheme.truncation,
            scheme.mode,
            scheme.boundary,
        )?
    };
    let r = scheme.a / (scheme.dx * scheme.dx);
    let bc = scheme.boundary;
    let next = (0..u.len())
        .map(|j| {
            let ji = j as isize;
            let lap = bc.sample(u, ji + 1) - 2.0 * u[j] + bc.sample(u, ji - 1);
            u[j] + scheme.dt * (r * lap - scheme.b * nonlocal[j])
        })
        .collect();
    Ok(next)
}

/// Result of an explicit run: the filtered signal and the stability report
/// it ran under.
#[derive(Debug, Clone, PartialEq)]
pub struct FdRun {
    pub signal: Signal,
    pub stability: StabilityReport,
    /// Coefficient the stability check was evaluated with.
    pub effective_b: f64,
}

/// Applies `cfg.steps` explicit steps to `u`.
///
/// Fails with [`Error::Unstable`] when the stability conditions are violated
/// and `cfg.allow_unstable` is not set.
pub fn filter_fd(u: &Signal, a: f64, b: f64, lambda: f64, cfg: &FdConfig) -> Result<FdRun> {
    let scheme = Scheme::new(a, b, lambda, u.dx(), cfg)?;
    let stability = scheme.stability();
    if !stability.satisfied && !cfg.allow_unstable {
        return Err(Error::Unstable(stability));
    }
    if cfg.steps > 0 && u.len() < 3 {
        return invalid("explicit scheme needs at least 3 samples");
    }
    let mut state = u.samples().to_vec();
    for n in 0..cfg.steps {
        state = scheme.step(&state).map_err(|e| match e {
            Error::Numeric(msg) => Error::Numeric(format!("step {n}: {msg}")),
            other => other,
        })?;
    }
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("solution overflowed after {} steps", cfg.steps)));
    }
    Ok(FdRun {
        signal: u.with_samples(state)?,
        stability,
        effective_b: scheme.effective_b(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(l: f64) -> FractionalOrder {
        FractionalOrder::new(l).unwrap()
    }

    #[test]
    fn reference_parameters_are_stable() {
        let r = check_stability(4.0, 0.5, 1.7, 1.0, 0.1).unwrap();
        // hand evaluation: (1 - 2^-0.7) * 0.5 and 0.8 + (2 - 2^-0.7) * 0.05
        assert!((r.cond1_lhs - 0.192_213_896_663_771).abs() < 1e-12);
        assert_eq!(r.cond1_rhs, 8.0);
        assert!((r.cond2_value - 0.869_221_389_666_377).abs() < 1e-12);
        assert!(r.satisfied);
    }

    #[test]
    fn doubling_dt_breaks_cfl() {
        let r = check_stability(4.0, 0.5, 1.7, 1.0, 0.2).unwrap();
        assert!((r.cond2_value - 1.738_442_779_332_754).abs() < 1e-12);
        assert!(!r.satisfied);
    }

    #[test]
    fn without_anti_diffusion_it_is_the_heat_cfl() {
        let r = check_stability(1.0, 0.0, 1.2, 0.1, 0.004).unwrap();
        assert_eq!(r.cond1_lhs, 0.0);
        assert!((r.cond2_value - 0.8).abs() < 1e-12);
        assert!(r.satisfied);
        let r = check_stability(1.0, 0.0, 1.2, 0.1, 0.006).unwrap();
        assert!(!r.satisfied);
    }

    #[test]
    fn stability_argument_errors() {
        assert!(check_stability(0.0, 1.0, 1.5, 1.0, 0.1).is_err());
        assert!(check_stability(1.0, -1.0, 1.5, 1.0, 0.1).is_err());
        assert!(check_stability(1.0, 1.0, 2.5, 1.0, 0.1).is_err());
        assert!(check_stability(1.0, 1.0, 1.5, 0.0, 0.1).is_err());
    }

    fn scheme(a: f64, b: f64, l: f64, dx: f64, dt: f64, mode: NonlocalMode, bc: BoundaryPolicy) -> Scheme {
        let cfg = FdConfig::new(dt, 1, order(l))
            .with_mode(mode)
            .with_boundary(bc)
            .with_truncation(20);
        Scheme::new(a, b, l, dx, &cfg).unwrap()
    }

    #[test]
    fn constant_is_equilibrium() {
        for mode in [NonlocalMode::Causal, NonlocalMode::Symmetric] {
            for bc in [BoundaryPolicy::ConstantExtension, BoundaryPolicy::Periodic] {
                let s = scheme(1.0, 0.5, 1.5, 0.1, 1e-3, mode, bc);
                let u = vec![0.7; 32];
                assert_eq!(s.step(&u).unwrap(), u);
            }
        }
    }

    #[test]
    fn heat_stencil_on_delta() {
        let s = scheme(
            2.0,
            0.0,
            1.0,
            0.5,
            0.025,
            NonlocalMode::Causal,
            BoundaryPolicy::ConstantExtension,
        );
        let mut u = vec![0.0; 9];
        u[4] = 1.0;
        let v = s.step(&u).unwrap();
        let r = 2.0 * 0.025 / 0.25;
        assert!((v[4] - (1.0 - 2.0 * r)).abs() < 1e-15);
        assert!((v[3] - r).abs() < 1e-15);
        assert!((v[5] - r).abs() < 1e-15);
        assert!(v.iter().enumerate().all(|(j, &x)| (3..=5).contains(&j) || x == 0.0));
    }

    #[test]
    fn rejects_non_finite_state() {
        let s = scheme(1.0, 0.1, 1.5, 0.1, 1e-3, NonlocalMode::Causal, BoundaryPolicy::Periodic);
        let mut u = vec![0.0; 10];
        u[3] = f64::NAN;
        assert!(matches!(s.step(&u), Err(Error::Numeric(_))));
    }

    #[test]
    fn zero_steps_is_identity() {
        let u = Signal::new(vec![1.0, -2.0, 3.0, 0.5], 0.1, 0.0).unwrap();
        let cfg = FdConfig::new(1e-4, 0, order(1.5));
        let run = filter_fd(&u, 1.0, 0.2, 1.5, &cfg).unwrap();
        assert_eq!(run.signal, u);
    }

    #[test]
    fn refuses_unstable_unless_forced() {
        let u = Signal::new((0..32).map(|j| (j as f64 * 0.3).sin()).collect(), 1.0, 0.0).unwrap();
        let cfg = FdConfig::new(0.2, 5, order(1.7));
        match filter_fd(&u, 4.0, 0.5, 1.7, &cfg) {
            Err(Error::Unstable(r)) => assert!(!r.satisfied),
            other => panic!("expected refusal, got {other:?}"),
        }
        let run = filter_fd(&u, 4.0, 0.5, 1.7, &cfg.allowing_unstable(true)).unwrap();
        assert!(!run.stability.satisfied);
    }

    #[test]
    fn symmetric_mode_needs_lambda_above_one() {
        let cfg = FdConfig::new(1e-3, 1, order(0.5)).with_mode(NonlocalMode::Symmetric);
        assert!(Scheme::new(1.0, 0.1, 0.5, 0.1, &cfg).is_err());
    }

    #[test]
    fn periodic_mass_is_conserved() {
        let n = 64;
        let dx = 1.0 / n as f64;
        let u0: Vec<f64> = (0..n)
            .map(|j| 1.0 + (-((j as f64 * dx - 0.4) / 0.08).powi(2)).exp())
            .collect();
        for mode in [NonlocalMode::Causal, NonlocalMode::Symmetric] {
            let cfg = FdConfig::new(0.2 * dx * dx, 10_000, order(1.5))
                .with_mode(mode)
                .with_boundary(BoundaryPolicy::Periodic)
                .with_truncation(40);
            let s = Scheme::new(1.0, 0.05, 1.5, dx, &cfg).unwrap();
            assert!(s.stability().satisfied);
            let m0: f64 = u0.iter().sum();
            let mut u = u0.clone();
            for _ in 0..cfg.steps {
                u = s.step(&u).unwrap();
                let m: f64 = u.iter().sum();
                assert!((m - m0).abs() <= 1e-10 * m0.abs() + 1e-12);
            }
        }
    }

    #[test]
    fn violated_cfl_blows_up_high_modes() {
        // cond2 = 2 on a Nyquist mode.
        let s = scheme(1.0, 0.1, 1.5, 1.0, 1.0, NonlocalMode::Causal, BoundaryPolicy::Periodic);
        let r0 = check_stability(1.0, 0.1, 1.5, 1.0, 1.0).unwrap();
        let dt = 2.0 / r0.cond2_value;
        let s = Scheme { dt, ..s };
        assert!((s.stability().cond2_value - 2.0).abs() < 1e-12);
        let mut u: Vec<f64> = (0..64).map(|j| if j % 2 == 0 { 1e-3 } else { -1e-3 }).collect();
        let start = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut grew = false;
        for _ in 0..100 {
            u = s.step(&u).unwrap();
            if u.iter().fold(0.0f64, |m, v| m.max(v.abs())) >= 10.0 * start {
                grew = true;
                break;
            }
        }
        assert!(grew);
    }

    #[test]
    fn stable_scheme_damps_high_frequencies() {
        for mode in [NonlocalMode::Causal, NonlocalMode::Symmetric] {
            let cfg = FdConfig::new(0.1, 1, order(1.7)).with_mode(mode).with_truncation(100);
            let s = Scheme::new(4.0, 0.5, 1.7, 1.0, &cfg).unwrap();
            assert!(s.stability().satisfied);
            let n = 256;
            let g = s.amplification_factors(n).unwrap();
            for (k, gk) in g.iter().enumerate().take(n / 2 + 1) {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                if theta >= std::f64::consts::FRAC_PI_2 {
                    assert!(gk.norm() <= 1.0, "{mode}: theta={theta} |G|={}", gk.norm());
                }
            }
        }
    }

    #[test]
    fn growth_bounded_by_largest_amplification() {
        let n = 128;
        let dx = 1.0 / n as f64;
        let cfg = FdConfig::new(0.2 * dx * dx, 400, order(1.3))
            .with_boundary(BoundaryPolicy::Periodic)
            .with_truncation(100);
        let s = Scheme::new(1e-2, 0.5, 1.3, dx, &cfg).unwrap();
        assert!(s.stability().satisfied);
        let gmax = s
            .amplification_factors(n)
            .unwrap()
            .iter()
            .map(|g| g.norm())
            .fold(0.0, f64::max);
        let mut u: Vec<f64> = (0..n).map(|j| ((j * 37) % 17) as f64 / 17.0 - 0.5).collect();
        let norm0 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        for step in 1..=cfg.steps {
            u = s.step(&u).unwrap();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= gmax.powi(step as i32) * norm0 * (1.0 + 1e-12));
        }
    }
}
