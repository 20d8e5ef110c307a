//! Inhomogeneous dyadic projectors and the Bernstein / commutator ratio checks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{derivative, l2_norm, sup_norm, Field, Grid};

/// Values of the committed bump profile that the regression tests pin.
pub const BUMP_AT_1_25: f64 = 0.935_030_830_871_336;

fn transition_kernel(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// `C^infinity` step from 0 at `t <= 0` to 1 at `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    let a = transition_kernel(t);
    let b = transition_kernel(1.0 - t);
    a / (a + b)
}

/// Even bump: 1 on `|xi| <= 1`, 0 on `|xi| >= 2`, smooth nonincreasing in between.
pub fn bump(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        1.0 - smooth_step(a - 1.0)
    }
}

/// Which Littlewood-Paley piece to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorSelector {
    /// `P_{<=k}`
    AtMost(i32),
    /// `P_k = P_{<=k} - P_{<=k-1}`
    Band(i32),
    /// `P_{[j,k]}`
    Range(i32, i32),
    /// `P_{>=j} = I - P_{<=j-1}`
    AtLeast(i32),
}

fn low_pass_symbol(k: i32, xi: f64) -> f64 {
    if k < 0 {
        0.0
    } else {
        bump(xi / 2f64.powi(k))
    }
}

impl ProjectorSelector {
    pub fn symbol(&self, xi: f64) -> f64 {
        match *self {
            ProjectorSelector::AtMost(k) => low_pass_symbol(k, xi),
            ProjectorSelector::Band(k) => low_pass_symbol(k, xi) - low_pass_symbol(k - 1, xi),
            ProjectorSelector::Range(j, k) => {
                if j > k {
                    0.0
                } else {
                    low_pass_symbol(k, xi) - low_pass_symbol(j - 1, xi)
                }
            }
            ProjectorSelector::AtLeast(j) => 1.0 - low_pass_symbol(j - 1, xi),
        }
    }
}

pub fn project(f: &Field, sel: ProjectorSelector) -> Field {
    f.apply_real_multiplier(|xi| sel.symbol(xi))
}

/// Smallest `k` with `P_{<=k} = I` on this grid: every shell above it is empty.
pub fn max_shell(grid: &Grid) -> i32 {
    grid.nyquist().log2().ceil().max(0.0) as i32
}

/// `||P_l f||_inf / (2^{l/2} ||P_l f||_2)`.
pub fn bernstein_ratio(f: &Field, l: i32) -> Result<f64> {
    let piece = project(f, ProjectorSelector::Band(l));
    let l2 = l2_norm(&piece);
    if l2 <= 1e-13 * l2_norm(f) || l2 == 0.0 {
        return Err(Error::Degenerate(format!("band {l} of the field is empty")));
    }
    Ok(sup_norm(&piece) / (2f64.powf(l as f64 / 2.0) * l2))
}

/// Lebesgue exponent for the commutator estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Two,
    Infinity,
}

fn lebesgue_norm(f: &Field, p: Exponent) -> f64 {
    match p {
        Exponent::Two => l2_norm(f),
        Exponent::Infinity => sup_norm(f),
    }
}

/// `sup_y ||h(. + y) g||_p` over all circular grid shifts `y`.
pub fn sup_over_shifts(h: &Field, g: &Field, p: Exponent) -> Result<f64> {
    if h.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    match p {
        Exponent::Infinity => Ok(sup_norm(h) * sup_norm(g)),
        Exponent::Two => {
            let grid = h.grid();
            let n = grid.n();
            // S(m) = sum_j |h_{j+m}|^2 |g_j|^2 as a circular correlation.
            let mut a: Vec<Complex64> = h
                .physical_values()
                .iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0))
                .collect();
            let mut b: Vec<Complex64> = g
                .physical_values()
                .iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0))
                .collect();
            grid.raw_forward(&mut a);
            grid.raw_forward(&mut b);
            let mut prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y.conj()).collect();
            grid.raw_inverse(&mut prod);
            let max = prod.iter().map(|c| c.re / n as f64).fold(0.0, f64::max);
            Ok((grid.dx() * max).sqrt())
        }
    }
}

fn commutator(f: &Field, g: &Field, sel: ProjectorSelector) -> Result<Field> {
    let fg = f.mul(g)?;
    project(&fg, sel).sub(&f.mul(&project(g, sel))?)
}

/// `||[P_k, f] g||_p / (2^{-k} sup_y ||T_y(f') g||_p)`.
pub fn commutator_ratio(f: &Field, g: &Field, k: i32, p: Exponent) -> Result<f64> {
    let comm = commutator(f, g, ProjectorSelector::Band(k))?;
    let denom = 2f64.powi(-k) * sup_over_shifts(&derivative(f), g, p)?;
    if !(denom > 0.0) {
        return Err(Error::Degenerate("commutator bound denominator vanishes".into()));
    }
    Ok(lebesgue_norm(&comm, p) / denom)
}

/// Refined form with a low-passed multiplier:
/// `||[P_k, P_{<=k-3} f] g||_p / (2^{-k} sup_y ||T_y(d_x P_{<=k-3} f) P_{[k-2,k+2]} g||_p)`.
pub fn low_pass_commutator_ratio(f: &Field, g: &Field, k: i32, p: Exponent) -> Result<f64> {
    let f_low = project(f, ProjectorSelector::AtMost(k - 3));
    let comm = commutator(&f_low, g, ProjectorSelector::Band(k))?;
    let g_mid = project(g, ProjectorSelector::Range(k - 2, k + 2));
    let denom = 2f64.powi(-k) * sup_over_shifts(&derivative(&f_low), &g_mid, p)?;
    if !(denom > 0.0) {
        return Err(Error::Degenerate("commutator bound denominator vanishes".into()));
    }
    Ok(lebesgue_norm(&comm, p) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn bump_values() {
        assert_eq!(bump(0.5), 1.0);
        assert_eq!(bump(-0.5), 1.0);
        assert_eq!(bump(3.0), 0.0);
        assert_eq!(bump(2.0), 0.0);
        assert!((bump(1.5) - 0.5).abs() < 1e-15);
        assert!((bump(1.25) - BUMP_AT_1_25).abs() < 1e-14);
        assert_eq!(bump(1.3), bump(-1.3));
    }

    #[test]
    fn bump_is_nonincreasing_on_the_transition() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = bump(1.0 + i as f64 / 1000.0);
            assert!(v <= prev + 1e-15);
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn band_symbols_vanish_for_negative_shells() {
        assert_eq!(ProjectorSelector::Band(-1).symbol(0.0), 0.0);
        assert_eq!(ProjectorSelector::Band(0).symbol(0.0), 1.0);
        assert_eq!(ProjectorSelector::AtLeast(0).symbol(0.3), 1.0);
    }

    #[test]
    fn tones_inside_and_outside_the_low_pass_region() {
        let g = make_grid(256, 2.0 * std::f64::consts::PI, 0.0).unwrap();
        let inside = Field::tone(&g, 8.0);
        let out = project(&inside, ProjectorSelector::AtMost(3));
        assert!(l2_norm(&out.sub(&inside).unwrap()) < 1e-12);
        let outside = Field::tone(&g, 16.0);
        assert!(l2_norm(&project(&outside, ProjectorSelector::AtMost(3))) < 1e-12);
    }

    #[test]
    fn empty_band_is_degenerate() {
        let g = make_grid(256, 2.0 * std::f64::consts::PI, 0.0).unwrap();
        let f = Field::tone(&g, 3.0);
        assert!(matches!(bernstein_ratio(&f, 5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bernstein_ratio_of_a_tone() {
        let length = 16.0 * std::f64::consts::PI;
        let g = make_grid(512, length, 0.0).unwrap();
        // the band-2 symbol equals one at |xi| = 4
        let f = Field::tone(&g, 4.0);
        let ratio = bernstein_ratio(&f, 2).unwrap();
        let expected = 2f64.powf(-1.0) / length.sqrt();
        assert!((ratio - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn commutator_with_constant_vanishes() {
        let g = make_grid(256, 16.0, -8.0).unwrap();
        let f = Field::from_real_fn(&g, |_| 2.5);
        let h = Field::from_real_fn(&g, |x| (-x * x).exp());
        let comm = commutator(&f, &h, ProjectorSelector::Band(2)).unwrap();
        assert!(comm.max_abs() < 1e-14);
    }

    #[test]
    fn sup_over_shifts_matches_brute_force() {
        let g = make_grid(64, 8.0, -4.0).unwrap();
        let h = Field::from_real_fn(&g, |x| (-(x - 1.0) * (x - 1.0)).exp());
        let f = Field::from_fn(&g, |x| Complex64::new((-x * x / 2.0).exp(), 0.2 * x.sin()));
        let fast = sup_over_shifts(&h, &f, Exponent::Two).unwrap();
        let hv = h.values();
        let fv = f.values();
        let mut best: f64 = 0.0;
        for m in 0..64 {
            let s: f64 = (0..64).map(|j| (hv[(j + m) % 64] * fv[j]).norm_sqr()).sum();
            best = best.max((g.dx() * s).sqrt());
        }
        assert!((fast - best).abs() < 1e-12 * best);
    }

    #[test]
    fn max_shell_covers_the_grid() {
        let g = make_grid(512, 80.0, -40.0).unwrap();
        let k = max_shell(&g);
        assert_eq!(k, 5);
        let f = Field::from_fn(&g, |x| {
            Complex64::new((-x * x / 8.0).exp(), (0.7 * x).sin() * (-x * x / 8.0).exp())
        });
        let all = project(&f, ProjectorSelector::AtMost(k));
        assert!(l2_norm(&all.sub(&f).unwrap()) < 1e-13);
    }
}
