//! Free and parabolically regularized Schrödinger propagators
//! `U_eps(t) = exp((i/2)(1 - i eps) t d_x^2)` as Fourier multipliers, with
//! the linear estimates expressed as measurable ratios.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{homogeneous_sobolev_norm, l2_norm, sobolev_norm, sup_norm, Field};

/// Validated `(eps, t)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSpec {
    epsilon: f64,
    t: f64,
}

impl PropagatorSpec {
    /// Backward diffusion (`eps > 0`, `t < 0`) is rejected.
    pub fn new(epsilon: f64, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter("time must be finite".into()));
        }
        if epsilon > 0.0 && t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "negative time {t} with epsilon = {epsilon} > 0 would run the heat flow backwards"
            )));
        }
        Ok(PropagatorSpec { epsilon, t })
    }

    pub fn free(t: f64) -> Self {
        PropagatorSpec { epsilon: 0.0, t }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `exp(-(1/2)(i + eps) t eta^2)`.
    pub fn symbol(&self, eta: f64) -> Complex64 {
        let q = 0.5 * self.t * eta * eta;
        Complex64::new(-self.epsilon * q, -q).exp()
    }
}

pub fn propagate(f: &Field, spec: PropagatorSpec) -> Field {
    if spec.t == 0.0 {
        return f.clone().into_physical();
    }
    f.apply_multiplier(|eta| spec.symbol(eta))
}

/// Supremum over frequencies of the smoothing ratio for a gap `d = s2 - s1`:
/// `max_z z^{d/2} e^{-z/2} = d^{d/2} e^{-d/2}` (one when `d = 0`).
pub fn smoothing_bound(gap: f64) -> f64 {
    if gap == 0.0 {
        1.0
    } else {
        gap.powf(gap / 2.0) * (-gap / 2.0).exp()
    }
}

/// `||U_eps(t) f||_{H'^{s2}} (eps t)^{(s2-s1)/2} / ||f||_{H'^{s1}}` with homogeneous norms.
pub fn smoothing_ratio(f: &Field, spec: PropagatorSpec, s1: f64, s2: f64) -> Result<f64> {
    if !(spec.epsilon > 0.0 && spec.t > 0.0) {
        return Err(Error::InvalidParameter("smoothing needs eps > 0 and t > 0".into()));
    }
    if s2 < s1 {
        return Err(Error::InvalidParameter(format!(
            "need s2 >= s1, got s1 = {s1}, s2 = {s2}"
        )));
    }
    let denom = homogeneous_sobolev_norm(f, s1);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Degenerate("input has zero homogeneous norm".into()));
    }
    let evolved = propagate(f, spec);
    let scale = (spec.epsilon * spec.t).powf((s2 - s1) / 2.0);
    Ok(homogeneous_sobolev_norm(&evolved, s2) * scale / denom)
}

/// Ratio `||(U_eps1(t) - U_eps2(t)) f||_{H^s} / (|eps1 - eps2|^{a/2} t^{a/2} ||f||_{H^{s+a}})`.
pub fn propagate_difference(f: &Field, t: f64, eps1: f64, eps2: f64, a: f64, s: f64) -> Result<f64> {
    for e in [eps1, eps2] {
        if !(0.0..1.0).contains(&e) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1), got {e}")));
        }
    }
    if !(a > 0.0 && a < 2.0) {
        return Err(Error::InvalidParameter(format!("a must lie in (0, 2), got {a}")));
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter("time must be nonnegative".into()));
    }
    if eps1 == eps2 {
        return Ok(0.0);
    }
    let numer = propagation_gap(f, t, eps1, eps2, s)?;
    let denom = (eps1 - eps2).abs().powf(a / 2.0) * t.powf(a / 2.0) * sobolev_norm(f, s + a);
    if !(denom > 0.0) {
        return Err(Error::Degenerate("difference bound denominator vanishes".into()));
    }
    Ok(numer / denom)
}

/// `||(U_eps1(t) - U_eps2(t)) f||_{H^s}`.
pub fn propagation_gap(f: &Field, t: f64, eps1: f64, eps2: f64, s: f64) -> Result<f64> {
    let a = PropagatorSpec::new(eps1, t)?;
    let b = PropagatorSpec::new(eps2, t)?;
    let diff = f.apply_multiplier(|eta| a.symbol(eta) - b.symbol(eta));
    Ok(sobolev_norm(&diff, s))
}

/// Discrete space-time norms of the free evolution `U(t) phi` on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    /// `max_t ||u(t)||_2`
    pub linf_l2: f64,
    /// `(int_0^T ||u(t)||_inf^4 dt)^{1/4}`, composite trapezoid
    pub l4_linf: f64,
    pub data_l2: f64,
    pub ratio: f64,
}

/// Composite trapezoid for `int |g|^4` over `times`, raised to 1/4.
pub fn l4_in_time(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for w in 0..times.len().saturating_sub(1) {
        let h = times[w + 1] - times[w];
        acc += 0.5 * h * (values[w].powi(4) + values[w + 1].powi(4));
    }
    acc.powf(0.25)
}

pub fn strichartz_check(phi: &Field, t_final: f64, n_t: usize) -> Result<StrichartzReport> {
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter("T must be positive".into()));
    }
    if n_t < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 time samples, got {n_t}"
        )));
    }
    let data_l2 = l2_norm(phi);
    if data_l2 == 0.0 {
        return Err(Error::Degenerate("zero initial datum".into()));
    }
    let times: Vec<f64> = (0..n_t).map(|i| t_final * i as f64 / (n_t - 1) as f64).collect();
    let mut linf_l2: f64 = 0.0;
    let mut sups = Vec::with_capacity(n_t);
    for &t in &times {
        let u = propagate(phi, PropagatorSpec::free(t));
        linf_l2 = linf_l2.max(l2_norm(&u));
        sups.push(sup_norm(&u));
    }
    let l4_linf = l4_in_time(&times, &sups);
    Ok(StrichartzReport {
        linf_l2,
        l4_linf,
        data_l2,
        ratio: (linf_l2 + l4_linf) / data_l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn spec_validation() {
        assert!(PropagatorSpec::new(0.1, -1.0).is_err());
        assert!(PropagatorSpec::new(0.0, -1.0).is_ok());
        assert!(PropagatorSpec::new(1.5, 1.0).is_err());
        assert!(PropagatorSpec::new(-0.1, 1.0).is_err());
    }

    #[test]
    fn tone_picks_up_the_free_phase() {
        let g = make_grid(64, 2.0 * std::f64::consts::PI, 0.0).unwrap();
        let f = Field::tone(&g, 1.0);
        let u = propagate(&f, PropagatorSpec::new(0.0, 1.0).unwrap());
        let expected = f.scale(Complex64::new(0.0, -0.5).exp());
        assert!(l2_norm(&u.sub(&expected).unwrap()) < 1e-13);
    }

    #[test]
    fn zero_time_is_identity() {
        let g = make_grid(64, 10.0, -5.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x).exp());
        for eps in [0.0, 0.3, 1.0] {
            let u = propagate(&f, PropagatorSpec::new(eps, 0.0).unwrap());
            assert!(l2_norm(&u.sub(&f).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn smoothing_ratio_rejects_degenerate_inputs() {
        let g = make_grid(64, 10.0, -5.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x).exp());
        assert!(smoothing_ratio(&f, PropagatorSpec::new(0.0, 1.0).unwrap(), 0.0, 1.0).is_err());
        assert!(smoothing_ratio(&f, PropagatorSpec::new(0.1, 0.0).unwrap(), 0.0, 1.0).is_err());
        assert!(smoothing_ratio(&Field::zeros(&g), PropagatorSpec::new(0.1, 1.0).unwrap(), 0.0, 1.0).is_err());
    }

    #[test]
    fn equal_exponents_never_amplify() {
        let g = make_grid(128, 10.0, -5.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x).exp() * (3.0 * x).cos());
        let r = smoothing_ratio(&f, PropagatorSpec::new(0.2, 0.5).unwrap(), 1.0, 1.0).unwrap();
        assert!(r <= 1.0);
    }

    #[test]
    fn equal_epsilons_give_zero_difference() {
        let g = make_grid(64, 10.0, -5.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x).exp());
        assert_eq!(propagate_difference(&f, 1.0, 0.2, 0.2, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn strichartz_of_a_tone_has_unit_energy_part() {
        let g = make_grid(64, 2.0 * std::f64::consts::PI, 0.0).unwrap();
        let f = Field::tone(&g, 3.0);
        let r = strichartz_check(&f, 1.0, 16).unwrap();
        assert!((r.linf_l2 / r.data_l2 - 1.0).abs() < 1e-14);
        assert!(strichartz_check(&Field::zeros(&g), 1.0, 16).is_err());
        assert!(strichartz_check(&f, 1.0, 4).is_err());
    }
}
