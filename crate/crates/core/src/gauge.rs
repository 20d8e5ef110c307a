//! Gauge phase `Lambda = 2 lambda int u + mu int conj(u)`, the maps
//! `u -> e^{-Lambda} u` and back, the gauged nonlinearities, and the
//! residual of the gauged equation along a trajectory.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::Trajectory;
use crate::spectral::{
    decay_check, derivative, l2_norm, primitive, second_derivative, translate, DecayWarning, Field, DEFAULT_DECAY_TOL,
};

/// Largest `|Re Lambda|` before `e^{Lambda}` is refused.
pub const OVERFLOW_LIMIT: f64 = 700.0;

/// Tolerance of the `2 lambda + conj(mu) = 0` predicate.
pub const SPECIAL_CASE_TOL: f64 = 1e-14;

const POLISH_MAX_ITERS: usize = 60;

/// Nonlinearity coefficients of `d_x(lambda u^2 + mu |u|^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub lambda: Complex64,
    pub mu: Complex64,
}

impl Coefficients {
    pub fn new(lambda: Complex64, mu: Complex64) -> Self {
        Coefficients { lambda, mu }
    }

    /// `lambda = i/2, mu = i`, the canonical instance of the special case.
    pub fn canonical_special() -> Self {
        Coefficients::new(Complex64::new(0.0, 0.5), Complex64::new(0.0, 1.0))
    }

    pub fn zero() -> Self {
        Coefficients::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn is_special_case(&self) -> bool {
        (2.0 * self.lambda + self.mu.conj()).norm() <= SPECIAL_CASE_TOL
    }

    pub fn is_zero(&self) -> bool {
        self.lambda == Complex64::new(0.0, 0.0) && self.mu == Complex64::new(0.0, 0.0)
    }

    /// `mu conj(lambda) + mu^2 / 2`, the `|u|^2 conj(u)` coefficient at `eps = 0`.
    pub fn conjugate_cubic_coefficient(&self) -> Complex64 {
        self.mu * self.lambda.conj() + 0.5 * self.mu * self.mu
    }

    /// `2 lambda z + mu conj(z)`, the derivative of the phase density.
    pub fn phase_density(&self, z: Complex64) -> Complex64 {
        2.0 * self.lambda * z + self.mu * z.conj()
    }
}

/// A field together with its gauge phase.
#[derive(Clone, Debug)]
pub struct GaugePair {
    pub u: Field,
    pub phase: Field,
    pub coeffs: Coefficients,
    /// `Lambda(x_left + L) - Lambda(x_left)`, the jump across the periodic seam.
    pub phase_jump: Complex64,
    pub warning: Option<DecayWarning>,
}

impl GaugePair {
    /// `d_x Lambda` with the seam jump removed before differentiating.
    pub fn phase_derivative(&self) -> Field {
        crate::spectral::derivative_with_jump(&self.phase, self.phase_jump)
    }

    pub fn max_re_phase(&self) -> f64 {
        max_re(&self.phase)
    }

    /// `v = e^{-Lambda} u`.
    pub fn gauged(&self) -> Result<Field> {
        apply_gauge(&self.u, &self.phase, GaugeDirection::Forward)
    }
}

fn max_re(f: &Field) -> f64 {
    f.physical_values().iter().map(|v| v.re.abs()).fold(0.0, f64::max)
}

pub fn gauge_phase(u: &Field, c: &Coefficients) -> GaugePair {
    let prim = primitive(u);
    let phase = prim.field.map(|p| c.phase_density(p));
    GaugePair {
        u: u.clone().into_physical(),
        phase,
        coeffs: *c,
        phase_jump: c.phase_density(prim.box_integral),
        warning: prim.warning,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeDirection {
    /// multiply by `e^{-Lambda}`
    Forward,
    /// multiply by `e^{+Lambda}`
    Inverse,
}

pub fn apply_gauge(u: &Field, phase: &Field, direction: GaugeDirection) -> Result<Field> {
    let m = max_re(phase);
    if m > OVERFLOW_LIMIT || !m.is_finite() {
        return Err(Error::GaugeOverflow {
            max_re_phase: m,
            limit: OVERFLOW_LIMIT,
        });
    }
    let sign = match direction {
        GaugeDirection::Forward => -1.0,
        GaugeDirection::Inverse => 1.0,
    };
    u.zip_map(phase, |v, l| v * (sign * l).exp())
}

/// `N3_eps(u) + eps N2(u)`, the right side of the gauged regularized equation
/// before multiplying by `e^{-Lambda}`.
pub fn gauged_nonlinearity(u: &Field, c: &Coefficients, epsilon: f64) -> Field {
    let i = Complex64::new(0.0, 1.0);
    let (lambda, mu) = (c.lambda, c.mu);
    let cubic = -2.0 * i * lambda * lambda * epsilon;
    let direct = mu.norm_sqr() - 2.0 * i * lambda * mu * epsilon;
    let conjugate = mu * lambda.conj() + 0.5 * (1.0 - i * epsilon) * mu * mu;
    let n3 = u.map(|z| {
        let m = z.norm_sqr();
        cubic * z * z * z + direct * m * z + conjugate * m * z.conj()
    });
    if epsilon == 0.0 {
        return n3;
    }
    let ux = derivative(u);
    let n2 = u.zip_map(&ux, |z, dz| i * c.phase_density(z) * dz).expect("same grid");
    n3.zip_map(&n2, |a, b| a + epsilon * b).expect("same grid")
}

/// Recovers `u = e^{Lambda} v` from `v` by solving
/// `Lambda' = 2 lambda e^{Lambda} v + mu conj(e^{Lambda} v)`, `Lambda(x_left) = 0`.
///
/// A classical RK4 march over the grid (midpoint values of `v` by spectral
/// translation) gives a fourth-order phase, which is then polished by fixed
/// point iteration of the spectral primitive so that `gauge_phase(u)`
/// reproduces the returned phase to roundoff.
pub fn invert_gauge(v: &Field, c: &Coefficients) -> Result<GaugePair> {
    let grid = v.grid().clone();
    let v = v.clone().into_physical();
    let warning = decay_check(&v, DEFAULT_DECAY_TOL);
    if c.is_zero() {
        return Ok(GaugePair {
            u: v.clone(),
            phase: Field::zeros(&grid),
            coeffs: *c,
            phase_jump: Complex64::new(0.0, 0.0),
            warning,
        });
    }

    let rhs = |w: Complex64, lam: Complex64| c.phase_density(lam.exp() * w);
    let h = grid.dx();
    let n = grid.n();
    let mid = translate(&v, 0.5 * h);
    let vals = v.values();
    let mids = mid.values();
    let mut phase = Vec::with_capacity(n);
    let mut lam = Complex64::new(0.0, 0.0);
    phase.push(lam);
    for j in 0..n - 1 {
        let k1 = rhs(vals[j], lam);
        let k2 = rhs(mids[j], lam + 0.5 * h * k1);
        let k3 = rhs(mids[j], lam + 0.5 * h * k2);
        let k4 = rhs(vals[j + 1], lam + h * k3);
        lam += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if lam.re.abs() > OVERFLOW_LIMIT || !lam.re.is_finite() {
            return Err(Error::GaugeOverflow {
                max_re_phase: lam.re.abs(),
                limit: OVERFLOW_LIMIT,
            });
        }
        phase.push(lam);
    }
    let marched = Field::physical_unchecked(&grid, phase);

    let fixed_point_map = |phase: &Field| -> Result<GaugePair> {
        let u = apply_gauge(&v, phase, GaugeDirection::Inverse)?;
        Ok(gauge_phase(&u, c))
    };
    let mut best = fixed_point_map(&marched)?;
    let mut best_residual = sup_distance(&best.phase, &marched);
    for _ in 0..POLISH_MAX_ITERS {
        let scale = 1.0 + best.phase.max_abs();
        if best_residual <= 1e-14 * scale {
            break;
        }
        let next = match fixed_point_map(&best.phase) {
            Ok(next) => next,
            Err(_) => break,
        };
        let residual = sup_distance(&next.phase, &best.phase);
        if !(residual < best_residual) {
            break;
        }
        best = next;
        best_residual = residual;
    }
    let u = apply_gauge(&v, &best.phase, GaugeDirection::Inverse)?;
    Ok(GaugePair {
        u,
        phase: best.phase,
        coeffs: *c,
        phase_jump: best.phase_jump,
        warning,
    })
}

fn sup_distance(a: &Field, b: &Field) -> f64 {
    a.physical_values()
        .iter()
        .zip(b.physical_values().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `||gauge_phase(u) - Lambda||_inf` for a pair returned by [`invert_gauge`].
pub fn inversion_residual(pair: &GaugePair) -> f64 {
    let again = gauge_phase(&pair.u, &pair.coeffs);
    sup_distance(&again.phase, &pair.phase)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub l2: f64,
}

/// `L^2` norm of `i v_t + (1/2)(1 - i eps) v_xx - e^{-Lambda}(N3_eps(u) + eps N2(u))`
/// at every interior sample, with `v = e^{-Lambda} u` and a centered time difference.
pub fn gauge_identity_residual(traj: &Trajectory, c: &Coefficients, epsilon: f64) -> Result<Vec<ResidualSample>> {
    let n_times = traj.len();
    if n_times < 3 {
        return Err(Error::TrajectoryMismatch(format!(
            "need at least 3 samples for centered differences, got {n_times}"
        )));
    }
    let mut gauged = Vec::with_capacity(n_times);
    let mut pairs = Vec::with_capacity(n_times);
    for u in traj.fields() {
        let pair = gauge_phase(u, c);
        gauged.push(pair.gauged()?);
        pairs.push(pair);
    }
    let i = Complex64::new(0.0, 1.0);
    let dispersion = 0.5 * (1.0 - i * epsilon);
    let times = traj.times();
    let mut out = Vec::with_capacity(n_times - 2);
    for k in 1..n_times - 1 {
        let dt = times[k + 1] - times[k - 1];
        let v = &gauged[k];
        let vxx = second_derivative(v);
        let forcing = apply_gauge(
            &gauged_nonlinearity(&pairs[k].u, c, epsilon),
            &pairs[k].phase,
            GaugeDirection::Forward,
        )?;
        let prev = gauged[k - 1].physical_values();
        let next = gauged[k + 1].physical_values();
        let values: Vec<Complex64> = (0..v.grid().n())
            .map(|j| i * (next[j] - prev[j]) / dt + dispersion * vxx.values()[j] - forcing.values()[j])
            .collect();
        let r = Field::physical_unchecked(v.grid(), values);
        out.push(ResidualSample {
            t: times[k],
            l2: l2_norm(&r),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, sobolev_norm};

    fn gaussian(grid: &crate::Grid, amp: f64, width: f64) -> Field {
        Field::from_real_fn(grid, |x| amp * (-x * x / (2.0 * width * width)).exp())
    }

    #[test]
    fn special_case_predicate() {
        assert!(Coefficients::canonical_special().is_special_case());
        let c = Coefficients::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert!(!c.is_special_case());
        let c = Coefficients::new(Complex64::new(0.3, 0.2), Complex64::new(-0.6, 0.4));
        assert!(c.is_special_case());
        assert_eq!(
            Coefficients::canonical_special().conjugate_cubic_coefficient(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn zero_coefficients_give_zero_phase() {
        let g = make_grid(128, 20.0, -10.0).unwrap();
        let u = gaussian(&g, 1.0, 1.0);
        let pair = gauge_phase(&u, &Coefficients::zero());
        assert_eq!(pair.phase.max_abs(), 0.0);
        let v = apply_gauge(&u, &pair.phase, GaugeDirection::Forward).unwrap();
        assert!(l2_norm(&v.sub(&u).unwrap()) == 0.0);
    }

    #[test]
    fn phase_derivative_matches_density() {
        let g = make_grid(256, 40.0, -20.0).unwrap();
        let u = Field::from_fn(&g, |x| Complex64::new(0.7, 0.4 * x) * (-x * x / 3.0).exp());
        let c = Coefficients::new(Complex64::new(0.3, -0.2), Complex64::new(0.5, 0.1));
        let pair = gauge_phase(&u, &c);
        let density = u.map(|z| c.phase_density(z));
        let err = l2_norm(&pair.phase_derivative().sub(&density).unwrap());
        assert!(err <= 1e-10 * (1.0 + sobolev_norm(&u, 1.0)), "{err}");
        assert!(pair.phase.values()[0].norm() == 0.0);
    }

    #[test]
    fn overflow_guard_refuses_huge_phases() {
        let g = make_grid(16, 1.0, 0.0).unwrap();
        let u = Field::from_real_fn(&g, |_| 1.0);
        let phase = Field::from_real_fn(&g, |_| 701.0);
        assert!(matches!(
            apply_gauge(&u, &phase, GaugeDirection::Inverse),
            Err(Error::GaugeOverflow { .. })
        ));
    }

    #[test]
    fn gauged_nonlinearity_vanishes_for_zero_data_and_pure_lambda() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let c = Coefficients::canonical_special();
        assert_eq!(gauged_nonlinearity(&Field::zeros(&g), &c, 0.3).max_abs(), 0.0);
        let pure = Coefficients::new(Complex64::new(0.8, -0.3), Complex64::new(0.0, 0.0));
        let u = gaussian(&g, 1.0, 1.0).map(|z| z * Complex64::new(1.0, 0.5));
        assert_eq!(gauged_nonlinearity(&u, &pure, 0.0).max_abs(), 0.0);
    }

    #[test]
    fn special_case_nonlinearity_is_the_defocusing_cubic() {
        // 2 lambda + conj(mu) = 0 kills the |u|^2 conj(u) term at eps = 0
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let c = Coefficients::canonical_special();
        let u = Field::from_fn(&g, |x| Complex64::new(x.cos(), 0.3 * x.sin()) * (-x * x / 4.0).exp());
        let n = gauged_nonlinearity(&u, &c, 0.0);
        for (z, got) in u.values().iter().zip(n.values()) {
            let want = 1.0 * z.norm_sqr() * z;
            assert!((got - want).norm() < 1e-15);
        }
    }

    #[test]
    fn mu_zero_inversion_matches_the_closed_form() {
        // mu = 0: e^{-Lambda} = 1 - 2 lambda int v
        let g = make_grid(512, 80.0, -40.0).unwrap();
        let lambda = Complex64::new(0.5, 0.2);
        let c = Coefficients::new(lambda, Complex64::new(0.0, 0.0));
        // larger amplitudes push the poles of e^Lambda toward the real axis
        let v = gaussian(&g, 0.2, 1.2);
        let pair = invert_gauge(&v, &c).unwrap();
        let pv = primitive(&v).field;
        let expected = pv.map(|p| -(1.0 - 2.0 * lambda * p).ln());
        let err = pair
            .phase
            .values()
            .iter()
            .zip(expected.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn inversion_roundtrip_on_general_coefficients() {
        let g = make_grid(512, 80.0, -40.0).unwrap();
        let c = Coefficients::new(Complex64::new(0.3, 0.4), Complex64::new(-0.2, 0.5));
        let u = Field::from_fn(&g, |x| Complex64::new(0.5, 0.2 * x) * (-x * x / 2.0).exp());
        let pair = gauge_phase(&u, &c);
        let v = pair.gauged().unwrap();
        let back = invert_gauge(&v, &c).unwrap();
        assert!(l2_norm(&back.u.sub(&u).unwrap()) < 1e-10);
        assert!(inversion_residual(&back) < 1e-12);
    }

    #[test]
    fn residual_needs_three_samples() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let traj = Trajectory::from_samples(vec![0.0, 0.1], vec![Field::zeros(&g), Field::zeros(&g)]).unwrap();
        assert!(gauge_identity_residual(&traj, &Coefficients::canonical_special(), 0.0).is_err());
    }

    #[test]
    fn zero_trajectory_has_zero_residual() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let fields = vec![Field::zeros(&g); 4];
        let traj = Trajectory::from_samples(vec![0.0, 0.1, 0.2, 0.3], fields).unwrap();
        let res = gauge_identity_residual(&traj, &Coefficients::canonical_special(), 0.1).unwrap();
        assert_eq!(res.len(), 2);
        assert!(res.iter().all(|r| r.l2 == 0.0));
    }
}
