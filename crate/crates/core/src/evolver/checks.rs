use serde::{Deserialize, Serialize};

use super::trajectory::{gauged_energy, Trajectory};
use crate::error::{Error, Result};
use crate::gauge::{gauge_phase, Coefficients};
use crate::spectral::{derivative, l2_norm, sup_norm};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    /// `|M(t)/M(0) - 1|`, zero when `M(0) = 0`.
    pub mass_drift: f64,
    pub energy_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub samples: Vec<ConservationSample>,
    pub max_mass_drift: f64,
    pub max_energy_drift: f64,
}

fn relative_drift(value: f64, initial: f64) -> f64 {
    if initial == 0.0 {
        value.abs()
    } else {
        (value / initial - 1.0).abs()
    }
}

/// Mass `||u||^2` and gauged energy per sample; only defined in the special case.
pub fn conservation_report(traj: &Trajectory, c: &Coefficients) -> Result<ConservationReport> {
    if !c.is_special_case() {
        return Err(Error::NotSpecialCase);
    }
    let mut raw = Vec::with_capacity(traj.len());
    for (&t, u) in traj.times().iter().zip(traj.fields()) {
        let v = gauge_phase(u, c).gauged()?;
        raw.push((t, l2_norm(u).powi(2), gauged_energy(&v, c)));
    }
    let (m0, e0) = raw.first().map(|&(_, m, e)| (m, e)).unwrap_or((0.0, 0.0));
    let samples: Vec<ConservationSample> = raw
        .into_iter()
        .map(|(t, mass, energy)| ConservationSample {
            t,
            mass,
            energy,
            mass_drift: relative_drift(mass, m0),
            energy_drift: relative_drift(energy, e0),
        })
        .collect();
    Ok(ConservationReport {
        max_mass_drift: samples.iter().map(|s| s.mass_drift).fold(0.0, f64::max),
        max_energy_drift: samples.iter().map(|s| s.energy_drift).fold(0.0, f64::max),
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSample {
    pub t: f64,
    /// `||u1(t) - u2(t)||_2^2`
    pub gap_sq: f64,
    /// `int_0^t (||d_x u1||_inf + ||d_x u2||_inf)`, composite trapezoid
    pub gradient_integral: f64,
    /// `||u1(0) - u2(0)||^2 exp(C I(t))` with the minimal `C`.
    pub majorant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceReport {
    pub samples: Vec<DifferenceSample>,
    pub initial_gap_sq: f64,
    /// Smallest `C >= 0` for which the exponential majorant holds at every sample.
    pub minimal_constant: f64,
}

/// Exponential `L^2` difference bound for two runs on the same time grid.
pub fn l2_difference_check(a: &Trajectory, b: &Trajectory, c: &Coefficients) -> Result<DifferenceReport> {
    if !c.is_special_case() {
        return Err(Error::NotSpecialCase);
    }
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    if a.len() != b.len()
        || a.times()
            .iter()
            .zip(b.times())
            .any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs()))
    {
        return Err(Error::TrajectoryMismatch("time grids differ".into()));
    }
    if a.is_empty() {
        return Err(Error::TrajectoryMismatch("empty trajectories".into()));
    }
    let gaps: Vec<f64> = a
        .fields()
        .iter()
        .zip(b.fields())
        .map(|(x, y)| x.sub(y).map(|d| l2_norm(&d).powi(2)))
        .collect::<Result<_>>()?;
    let grads: Vec<f64> = a
        .fields()
        .iter()
        .zip(b.fields())
        .map(|(x, y)| sup_norm(&derivative(x)) + sup_norm(&derivative(y)))
        .collect();
    let times = a.times();
    let mut integrals = vec![0.0; times.len()];
    for k in 1..times.len() {
        integrals[k] = integrals[k - 1] + 0.5 * (times[k] - times[k - 1]) * (grads[k] + grads[k - 1]);
    }
    let initial_gap_sq = gaps[0];
    let mut minimal_constant: f64 = 0.0;
    if initial_gap_sq > 0.0 {
        for k in 1..times.len() {
            if integrals[k] > 0.0 && gaps[k] > initial_gap_sq {
                minimal_constant = minimal_constant.max((gaps[k] / initial_gap_sq).ln() / integrals[k]);
            }
        }
    } else if gaps.iter().any(|&g| g > 0.0) {
        minimal_constant = f64::INFINITY;
    }
    let samples = (0..times.len())
        .map(|k| DifferenceSample {
            t: times[k],
            gap_sq: gaps[k],
            gradient_integral: integrals[k],
            majorant: initial_gap_sq * (minimal_constant * integrals[k]).exp(),
        })
        .collect();
    Ok(DifferenceReport {
        samples,
        initial_gap_sq,
        minimal_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, Field};

    fn gaussian_traj(amp: f64) -> Trajectory {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let f = |s: f64| Field::from_real_fn(&g, |x| amp * s * (-x * x).exp());
        Trajectory::from_samples(vec![0.0, 0.5, 1.0], vec![f(1.0), f(1.0), f(1.0)]).unwrap()
    }

    #[test]
    fn zero_trajectory_has_zero_quantities() {
        let r = conservation_report(&gaussian_traj(0.0), &Coefficients::canonical_special()).unwrap();
        assert!(r.samples.iter().all(|s| s.mass == 0.0 && s.energy == 0.0));
        assert_eq!(r.max_mass_drift, 0.0);
    }

    #[test]
    fn general_coefficients_are_rejected() {
        let c = Coefficients::new(
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
        );
        assert!(matches!(
            conservation_report(&gaussian_traj(1.0), &c),
            Err(Error::NotSpecialCase)
        ));
    }

    #[test]
    fn identical_runs_have_zero_gap() {
        let t = gaussian_traj(1.0);
        let r = l2_difference_check(&t, &t, &Coefficients::canonical_special()).unwrap();
        assert!(r.samples.iter().all(|s| s.gap_sq == 0.0));
        assert_eq!(r.minimal_constant, 0.0);
    }

    #[test]
    fn misaligned_runs_are_rejected() {
        let a = gaussian_traj(1.0);
        let g = a.grid().clone();
        let b = Trajectory::from_samples(vec![0.0, 0.4, 1.0], a.fields().to_vec()).unwrap();
        assert!(l2_difference_check(&a, &b, &Coefficients::canonical_special()).is_err());
        let c = Trajectory::from_samples(vec![0.0], vec![Field::zeros(&g)]).unwrap();
        assert!(l2_difference_check(&a, &c, &Coefficients::canonical_special()).is_err());
    }

    #[test]
    fn majorant_equals_the_gap_at_time_zero() {
        let a = gaussian_traj(1.0);
        let b = gaussian_traj(1.001);
        let r = l2_difference_check(&a, &b, &Coefficients::canonical_special()).unwrap();
        assert_eq!(r.samples[0].majorant, r.samples[0].gap_sq);
        assert!(r.samples.iter().all(|s| s.gap_sq <= s.majorant * (1.0 + 1e-12)));
    }
}
