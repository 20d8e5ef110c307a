use num_complex::Complex64;

use super::trajectory::{StepDiagnostics, Termination, Trajectory};
use super::{Scheme, SolverConfig};
use crate::error::{Error, Result};
use crate::gauge::Coefficients;
use crate::semigroup::PropagatorSpec;
use crate::spectral::{l2_norm, Field, Grid};

/// The direct solve stops once `||u||_2` exceeds this multiple of `||phi||_2`.
pub const DIRECT_BLOWUP_FACTOR: f64 = 1e6;

/// Symbol of `U_eps(t)` tabulated on the grid frequencies.
pub(crate) fn propagator_table(grid: &Grid, epsilon: f64, t: f64) -> Vec<Complex64> {
    let spec = PropagatorSpec::new(epsilon, t).expect("validated by the caller");
    grid.freqs().iter().map(|&eta| spec.symbol(eta)).collect()
}

fn coefficient_norm(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Works on unitary Fourier coefficients throughout.
struct Stepper {
    grid: Grid,
    coeffs: Coefficients,
    dt: f64,
    scheme: Scheme,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    /// 1 on kept modes, 0 on the dealiased band and Nyquist.
    keep: Vec<f64>,
    /// `keep * eta`: `-i d_x` of a quadratic product is `eta` times its coefficient.
    flux: Vec<f64>,
    dealias: bool,
    picard_tol: f64,
    picard_max_iters: usize,
}

impl Stepper {
    fn new(grid: &Grid, coeffs: &Coefficients, cfg: &SolverConfig, dt: f64, scheme: Scheme, dealias: bool) -> Self {
        let n = grid.n();
        let nyq = grid.nyquist_index();
        let keep: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j } else { n - j };
                if j == nyq || (dealias && m >= n / 3) {
                    0.0
                } else {
                    1.0
                }
            })
            .collect();
        let flux = keep.iter().zip(grid.freqs()).map(|(k, eta)| k * eta).collect();
        Stepper {
            grid: grid.clone(),
            coeffs: *coeffs,
            dt,
            scheme,
            full: propagator_table(grid, cfg.epsilon, dt),
            half: propagator_table(grid, cfg.epsilon, dt / 2.0),
            keep,
            flux,
            dealias,
            picard_tol: cfg.picard_tol,
            picard_max_iters: cfg.picard_max_iters,
        }
    }

    /// Coefficients of `-i d_x(lambda u^2 + mu |u|^2)`.
    fn rhs(&self, u_hat: &[Complex64]) -> Vec<Complex64> {
        let mut u = u_hat.to_vec();
        if self.dealias {
            u.iter_mut().zip(&self.keep).for_each(|(z, k)| *z *= k);
        }
        self.grid.inverse(&mut u);
        let (lambda, mu) = (self.coeffs.lambda, self.coeffs.mu);
        let mut q: Vec<Complex64> = u.iter().map(|&z| lambda * z * z + mu * z.norm_sqr()).collect();
        self.grid.forward(&mut q);
        q.iter_mut().zip(&self.flux).for_each(|(z, f)| *z *= f);
        q
    }

    fn step(&self, u_hat: &[Complex64]) -> Result<(Vec<Complex64>, usize)> {
        if self.coeffs.is_zero() {
            return Ok((u_hat.iter().zip(&self.full).map(|(a, e)| a * e).collect(), 0));
        }
        match self.scheme {
            Scheme::ExponentialPicard => self.step_picard(u_hat),
            Scheme::StrangSplit => Ok((self.step_strang(u_hat), 0)),
        }
    }

    fn step_picard(&self, u_hat: &[Complex64]) -> Result<(Vec<Complex64>, usize)> {
        let dt = self.dt;
        let f0 = self.rhs(u_hat);
        let base: Vec<Complex64> = (0..u_hat.len())
            .map(|j| self.full[j] * (u_hat[j] + 0.5 * dt * f0[j]))
            .collect();
        let mut y: Vec<Complex64> = (0..u_hat.len())
            .map(|j| self.full[j] * (u_hat[j] + dt * f0[j]))
            .collect();
        let mut residual = f64::INFINITY;
        for iter in 1..=self.picard_max_iters {
            let fy = self.rhs(&y);
            let next: Vec<Complex64> = base.iter().zip(&fy).map(|(b, f)| b + 0.5 * dt * f).collect();
            let diff = coefficient_norm(&next.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
            let size = coefficient_norm(&next);
            residual = if size > 0.0 { diff / size } else { diff };
            y = next;
            if !residual.is_finite() {
                break;
            }
            if residual <= self.picard_tol {
                return Ok((y, iter));
            }
        }
        Err(Error::PicardDivergence {
            iterations: self.picard_max_iters,
            residual,
        })
    }

    fn step_strang(&self, u_hat: &[Complex64]) -> Vec<Complex64> {
        let dt = self.dt;
        let y: Vec<Complex64> = u_hat.iter().zip(&self.half).map(|(a, e)| a * e).collect();
        let axpy = |a: &[Complex64], h: f64, b: &[Complex64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + h * y).collect()
        };
        let k1 = self.rhs(&y);
        let k2 = self.rhs(&axpy(&y, dt / 2.0, &k1));
        let k3 = self.rhs(&axpy(&y, dt / 2.0, &k2));
        let k4 = self.rhs(&axpy(&y, dt, &k3));
        (0..y.len())
            .map(|j| {
                let z = y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                z * self.half[j]
            })
            .collect()
    }
}

fn to_coefficients(f: &Field) -> Vec<Complex64> {
    f.spectral_values().into_owned()
}

fn from_coefficients(grid: &Grid, c: Vec<Complex64>) -> Field {
    Field::from_spectrum(grid, c)
        .expect("length matches the grid")
        .into_physical()
}

/// One step of size `cfg.dt` with `cfg.scheme`.
pub fn step_regularized(u: &Field, c: &Coefficients, cfg: &SolverConfig) -> Result<Field> {
    cfg.validate()?;
    let stepper = Stepper::new(u.grid(), c, cfg, cfg.dt, cfg.scheme, cfg.dealias);
    let (next, _) = stepper.step(&to_coefficients(u))?;
    Ok(from_coefficients(u.grid(), next))
}

fn abort(partial: Trajectory, t: f64, source: Error) -> Error {
    Error::SolveAborted {
        t,
        source: Box::new(source),
        partial: Box::new(partial),
    }
}

pub fn solve_regularized(phi: &Field, c: &Coefficients, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.epsilon == 0.0 && !c.is_zero() {
        log::warn!("regularized solve with epsilon = 0 has no parabolic damping and may be unstable");
    }
    let (steps, dt) = cfg.step_plan();
    let grid = phi.grid();
    let stepper = Stepper::new(grid, c, cfg, dt, cfg.scheme, cfg.dealias);
    let s = cfg.sobolev_index;
    let mut traj = Trajectory::empty(grid);
    traj.push(0.0, phi.clone(), StepDiagnostics::measure(0.0, phi, c, s, 0))?;
    let mut u_hat = to_coefficients(phi);
    let mut window_iters = 0;
    for k in 1..=steps {
        let t = k as f64 * dt;
        match stepper.step(&u_hat) {
            Ok((next, iters)) => {
                u_hat = next;
                window_iters = window_iters.max(iters);
            }
            Err(e) => return Err(abort(traj, t, e)),
        }
        if !u_hat.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(abort(traj, t, Error::NonFinite { t }));
        }
        if cfg.records(k, steps) {
            let u = from_coefficients(grid, u_hat.clone());
            let diag = StepDiagnostics::measure(t, &u, c, s, window_iters);
            traj.push(t, u, diag)?;
            window_iters = 0;
        }
    }
    Ok(traj)
}

/// Pseudo-spectral Strang split of the undamped equation with dealiasing.
///
/// Growth past [`DIRECT_BLOWUP_FACTOR`] or a non-finite field ends the run
/// with [`Termination::BlowUp`]; samples up to that point are kept.
pub fn solve_direct(phi: &Field, c: &Coefficients, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.epsilon != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the direct solver integrates the undamped equation; got epsilon = {}",
            cfg.epsilon
        )));
    }
    let (steps, dt) = cfg.step_plan();
    let grid = phi.grid();
    let stepper = Stepper::new(grid, c, cfg, dt, Scheme::StrangSplit, true);
    let s = cfg.sobolev_index;
    let threshold = DIRECT_BLOWUP_FACTOR * l2_norm(phi);
    let mut traj = Trajectory::empty(grid);
    traj.push(0.0, phi.clone(), StepDiagnostics::measure(0.0, phi, c, s, 0))?;
    let mut u_hat = to_coefficients(phi);
    for k in 1..=steps {
        let t = k as f64 * dt;
        u_hat = stepper.step(&u_hat)?.0;
        // unitary coefficients carry the L^2 norm up to sqrt(dx)
        let l2 = coefficient_norm(&u_hat) * grid.dx().sqrt();
        if !l2.is_finite() || (l2 > threshold && threshold > 0.0) {
            traj.set_termination(Termination::BlowUp { t, l2_norm: l2 });
            return Ok(traj);
        }
        if cfg.records(k, steps) {
            let u = from_coefficients(grid, u_hat.clone());
            let diag = StepDiagnostics::measure(t, &u, c, s, 0);
            traj.push(t, u, diag)?;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::propagate;
    use crate::spectral::make_grid;

    fn gaussian(grid: &Grid, amp: f64, width: f64) -> Field {
        Field::from_real_fn(grid, |x| amp * (-x * x / (2.0 * width * width)).exp())
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            t_final: 0.1,
            epsilon: 0.1,
            ..Default::default()
        };
        let traj = solve_regularized(&Field::zeros(&g), &Coefficients::canonical_special(), &cfg).unwrap();
        assert!(traj.fields().iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn linear_reduction_matches_the_propagator() {
        let g = make_grid(128, 20.0, -10.0).unwrap();
        let phi = gaussian(&g, 1.0, 1.0);
        for scheme in [Scheme::ExponentialPicard, Scheme::StrangSplit] {
            let cfg = SolverConfig {
                dt: 0.05,
                t_final: 0.05,
                epsilon: 0.2,
                scheme,
                ..Default::default()
            };
            let u = step_regularized(&phi, &Coefficients::zero(), &cfg).unwrap();
            let exact = propagate(&phi, PropagatorSpec::new(0.2, 0.05).unwrap());
            assert!(l2_norm(&u.sub(&exact).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn schemes_agree_on_small_data() {
        let g = make_grid(128, 40.0, -20.0).unwrap();
        let phi = gaussian(&g, 0.3, 2.0);
        let c = Coefficients::canonical_special();
        let run = |scheme| {
            let cfg = SolverConfig {
                dt: 1e-3,
                t_final: 0.1,
                epsilon: 0.05,
                scheme,
                ..Default::default()
            };
            solve_regularized(&phi, &c, &cfg).unwrap().last().unwrap().1.clone()
        };
        let a = run(Scheme::ExponentialPicard);
        let b = run(Scheme::StrangSplit);
        assert!(l2_norm(&a.sub(&b).unwrap()) < 1e-6);
    }

    #[test]
    fn picard_failure_carries_the_residual() {
        let g = make_grid(64, 10.0, -5.0).unwrap();
        let phi = gaussian(&g, 50.0, 0.3);
        let cfg = SolverConfig {
            dt: 0.5,
            t_final: 0.5,
            epsilon: 0.0,
            picard_max_iters: 2,
            picard_tol: 1e-14,
            ..Default::default()
        };
        match step_regularized(&phi, &Coefficients::canonical_special(), &cfg) {
            Err(Error::PicardDivergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn solve_errors_keep_the_partial_trajectory() {
        let g = make_grid(64, 10.0, -5.0).unwrap();
        let phi = gaussian(&g, 5.0, 0.5);
        let cfg = SolverConfig {
            dt: 0.05,
            t_final: 1.0,
            epsilon: 0.0,
            picard_max_iters: 2,
            picard_tol: 1e-15,
            output_stride: 1,
            ..Default::default()
        };
        match solve_regularized(&phi, &Coefficients::canonical_special(), &cfg) {
            Err(Error::SolveAborted { partial, .. }) => assert!(!partial.is_empty()),
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn direct_solver_checks_epsilon_and_handles_zero() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            t_final: 0.1,
            epsilon: 0.1,
            ..Default::default()
        };
        assert!(solve_direct(&Field::zeros(&g), &Coefficients::canonical_special(), &cfg).is_err());
        let cfg = SolverConfig { epsilon: 0.0, ..cfg };
        let traj = solve_direct(&Field::zeros(&g), &Coefficients::canonical_special(), &cfg).unwrap();
        assert_eq!(traj.termination(), Termination::Completed);
        assert!(traj.fields().iter().all(|f| f.max_abs() == 0.0));
    }
}
