//! Periodic grids, unitary spectral transforms, Sobolev and `X^s` norms,
//! and the box primitive.
//!
//! Spectral coefficients are stored in FFT order (`m = 0, 1, .., n/2-1,
//! -n/2, .., -1`) with the unitary normalization `c_m = n^{-1/2} sum_j f_j
//! e^{-2 pi i j m / n}`. Continuous norms use the quadrature weight
//! `dx`, so `||f||_{L^2}^2 = dx sum_j |f_j|^2 = dx sum_m |c_m|^2`.

use std::borrow::Cow;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative edge tolerance for the decay check of [`primitive`].
pub const DEFAULT_DECAY_TOL: f64 = 1e-8;

/// Fraction of points on each side of the box that the decay check inspects.
const EDGE_FRACTION: f64 = 0.05;

struct GridInner {
    n: usize,
    length: f64,
    x_left: f64,
    points: Vec<f64>,
    freqs: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid standing in for the real line.
///
/// Cheap to clone: the sample locations, dual frequencies and FFT plans are
/// shared behind an `Arc`.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .field("x_left", &self.inner.x_left)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n
                && self.inner.length.to_bits() == other.inner.length.to_bits()
                && self.inner.x_left.to_bits() == other.inner.x_left.to_bits())
    }
}

/// Serializable grid description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
    pub x_left: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        make_grid(self.n, self.length, self.x_left)
    }
}

/// Builds a grid of `n` points on `[x_left, x_left + length)`.
pub fn make_grid(n: usize, length: f64, x_left: f64) -> Result<Grid> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "point count must be even and at least 8, got {n}"
        )));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
    }
    if !x_left.is_finite() {
        return Err(Error::InvalidGrid("left endpoint must be finite".into()));
    }
    let dx = length / n as f64;
    let points = (0..n).map(|j| x_left + j as f64 * dx).collect();
    let freqs = (0..n)
        .map(|j| {
            let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            2.0 * PI * m as f64 / length
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    Ok(Grid {
        inner: Arc::new(GridInner {
            n,
            length,
            x_left,
            points,
            freqs,
            fft,
            ifft,
        }),
    })
}

impl Grid {
    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn x_left(&self) -> f64 {
        self.inner.x_left
    }

    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.inner.points
    }

    /// Dual frequencies in FFT order.
    pub fn freqs(&self) -> &[f64] {
        &self.inner.freqs
    }

    /// Index of the single unpaired (Nyquist) mode.
    pub fn nyquist_index(&self) -> usize {
        self.inner.n / 2
    }

    /// Largest resolved frequency magnitude, `pi n / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.inner.n as f64 / self.inner.length
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            n: self.n(),
            length: self.length(),
            x_left: self.x_left(),
        }
    }

    pub(crate) fn forward(&self, values: &mut [Complex64]) {
        self.inner.fft.process(values);
        let scale = 1.0 / (self.inner.n as f64).sqrt();
        values.iter_mut().for_each(|v| *v *= scale);
    }

    pub(crate) fn inverse(&self, values: &mut [Complex64]) {
        self.inner.ifft.process(values);
        let scale = 1.0 / (self.inner.n as f64).sqrt();
        values.iter_mut().for_each(|v| *v *= scale);
    }

    /// Unnormalized forward transform, used for correlations.
    pub(crate) fn raw_forward(&self, values: &mut [Complex64]) {
        self.inner.fft.process(values);
    }

    pub(crate) fn raw_inverse(&self, values: &mut [Complex64]) {
        self.inner.ifft.process(values);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Physical,
    Spectral,
}

/// Complex samples of a function on a [`Grid`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    repr: Representation,
}

impl Field {
    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        Self::with_representation(grid, values, Representation::Physical)
    }

    pub fn from_spectrum(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_representation(grid, coeffs, Representation::Spectral)
    }

    fn with_representation(grid: &Grid, values: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.n(),
                values.len()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
            repr,
        })
    }

    pub(crate) fn physical_unchecked(grid: &Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Field {
            grid: grid.clone(),
            values,
            repr: Representation::Physical,
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::physical_unchecked(grid, values)
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::physical_unchecked(grid, vec![Complex64::new(0.0, 0.0); grid.n()])
    }

    /// The plane wave `e^{i eta x}` sampled on the grid.
    pub fn tone(grid: &Grid, eta: f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(0.0, eta * x).exp())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn to_spectral(&self) -> Result<Field> {
        if self.repr != Representation::Physical {
            return Err(Error::RepresentationMismatch {
                expected: Representation::Physical,
                found: self.repr,
            });
        }
        let mut values = self.values.clone();
        self.grid.forward(&mut values);
        Ok(Field {
            grid: self.grid.clone(),
            values,
            repr: Representation::Spectral,
        })
    }

    pub fn to_physical(&self) -> Result<Field> {
        if self.repr != Representation::Spectral {
            return Err(Error::RepresentationMismatch {
                expected: Representation::Spectral,
                found: self.repr,
            });
        }
        let mut values = self.values.clone();
        self.grid.inverse(&mut values);
        Ok(Field {
            grid: self.grid.clone(),
            values,
            repr: Representation::Physical,
        })
    }

    /// Physical samples, transforming if needed.
    pub fn physical_values(&self) -> Cow<'_, [Complex64]> {
        match self.repr {
            Representation::Physical => Cow::Borrowed(&self.values),
            Representation::Spectral => {
                let mut values = self.values.clone();
                self.grid.inverse(&mut values);
                Cow::Owned(values)
            }
        }
    }

    /// Spectral coefficients, transforming if needed.
    pub fn spectral_values(&self) -> Cow<'_, [Complex64]> {
        match self.repr {
            Representation::Spectral => Cow::Borrowed(&self.values),
            Representation::Physical => {
                let mut values = self.values.clone();
                self.grid.forward(&mut values);
                Cow::Owned(values)
            }
        }
    }

    pub fn into_physical(self) -> Field {
        match self.repr {
            Representation::Physical => self,
            Representation::Spectral => {
                let mut values = self.values;
                self.grid.inverse(&mut values);
                Field {
                    grid: self.grid,
                    values,
                    repr: Representation::Physical,
                }
            }
        }
    }

    /// Pointwise map in physical space.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        let values = self.physical_values().iter().map(|&v| f(v)).collect();
        Field::physical_unchecked(&self.grid, values)
    }

    /// Pointwise map with access to the sample location.
    pub fn map_with_x(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Field {
        let values = self
            .physical_values()
            .iter()
            .zip(self.grid.points())
            .map(|(&v, &x)| f(x, v))
            .collect();
        Field::physical_unchecked(&self.grid, values)
    }

    /// Pointwise combination of two physical fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let a = self.physical_values();
        let b = other.physical_values();
        let values = a.iter().zip(b.iter()).map(|(&x, &y)| f(x, y)).collect();
        Ok(Field::physical_unchecked(&self.grid, values))
    }

    pub fn conj(&self) -> Field {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, factor: Complex64) -> Field {
        self.map(|v| v * factor)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Applies the Fourier multiplier `symbol(eta)` and returns a physical field.
    ///
    /// The Nyquist coefficient is multiplied by `symbol(-pi n / L)`.
    pub fn apply_multiplier(&self, symbol: impl Fn(f64) -> Complex64) -> Field {
        let mut coeffs = self.spectral_values().into_owned();
        for (c, &eta) in coeffs.iter_mut().zip(self.grid.freqs()) {
            *c *= symbol(eta);
        }
        self.grid.inverse(&mut coeffs);
        Field::physical_unchecked(&self.grid, coeffs)
    }

    /// Real-valued multiplier variant of [`Field::apply_multiplier`].
    pub fn apply_real_multiplier(&self, symbol: impl Fn(f64) -> f64) -> Field {
        self.apply_multiplier(|eta| Complex64::new(symbol(eta), 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.physical_values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True if every sample is finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// `L^2` norm with the `dx` quadrature weight.
pub fn l2_norm(f: &Field) -> f64 {
    let dx = f.grid().dx();
    (dx * f.physical_values().iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// `L^p` norm for finite `p >= 1`.
pub fn lp_norm(f: &Field, p: f64) -> f64 {
    let dx = f.grid().dx();
    (dx * f.physical_values().iter().map(|v| v.norm().powf(p)).sum::<f64>()).powf(1.0 / p)
}

pub fn sup_norm(f: &Field) -> f64 {
    f.max_abs()
}

/// `l^2` norm of the unitary spectral coefficients scaled by `sqrt(dx)`;
/// equals [`l2_norm`] by Parseval.
pub fn spectral_l2_norm(f: &Field) -> f64 {
    let dx = f.grid().dx();
    (dx * f.spectral_values().iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Inhomogeneous Sobolev norm `(sum (1 + eta^2)^s |f^(eta)|^2)^{1/2}`.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    let dx = f.grid().dx();
    let coeffs = f.spectral_values();
    let sum: f64 = coeffs
        .iter()
        .zip(f.grid().freqs())
        .map(|(c, &eta)| {
            let w = if s == 0.0 { 1.0 } else { (1.0 + eta * eta).powf(s) };
            w * c.norm_sqr()
        })
        .sum();
    (dx * sum).sqrt()
}

/// Homogeneous Sobolev norm with weight `|eta|^{2s}`; the zero mode is
/// dropped for `s > 0` and kept with weight one for `s = 0`.
pub fn homogeneous_sobolev_norm(f: &Field, s: f64) -> f64 {
    let dx = f.grid().dx();
    let coeffs = f.spectral_values();
    let sum: f64 = coeffs
        .iter()
        .zip(f.grid().freqs())
        .map(|(c, &eta)| homogeneous_weight(eta, s) * c.norm_sqr())
        .sum();
    (dx * sum).sqrt()
}

pub(crate) fn homogeneous_weight(eta: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if eta == 0.0 {
        if s > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        eta.abs().powf(2.0 * s)
    }
}

/// Spectral derivative; the Nyquist mode is dropped.
pub fn derivative(f: &Field) -> Field {
    let nyq = f.grid().nyquist_index();
    let mut coeffs = f.spectral_values().into_owned();
    for (m, (c, &eta)) in coeffs.iter_mut().zip(f.grid().freqs()).enumerate() {
        *c = if m == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            *c * Complex64::new(0.0, eta)
        };
    }
    f.grid().inverse(&mut coeffs);
    Field::physical_unchecked(f.grid(), coeffs)
}

pub fn second_derivative(f: &Field) -> Field {
    f.apply_real_multiplier(|eta| -eta * eta)
}

/// Zeroes every mode with `|m| >= n/3` (the 2/3 rule).
pub fn dealias(f: &Field) -> Field {
    let n = f.grid().n();
    let cutoff = n / 3;
    let mut coeffs = f.spectral_values().into_owned();
    for (j, c) in coeffs.iter_mut().enumerate() {
        let m = if j < n / 2 { j } else { n - j };
        if m >= cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    f.grid().inverse(&mut coeffs);
    Field::physical_unchecked(f.grid(), coeffs)
}

/// Shifts a band-limited field by `shift` (fractional grid offsets allowed)
/// through the phase multiplier `e^{i eta shift}`; the Nyquist mode is dropped.
pub fn translate(f: &Field, shift: f64) -> Field {
    let nyq = f.grid().nyquist_index();
    let mut coeffs = f.spectral_values().into_owned();
    for (m, (c, &eta)) in coeffs.iter_mut().zip(f.grid().freqs()).enumerate() {
        *c = if m == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            *c * Complex64::new(0.0, eta * shift).exp()
        };
    }
    f.grid().inverse(&mut coeffs);
    Field::physical_unchecked(f.grid(), coeffs)
}

/// Raised when a field does not decay at the box edges, so the periodic
/// box no longer stands in for the line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayWarning {
    /// `max |f|` over the edge strips divided by `max |f|`.
    pub edge_ratio: f64,
    pub decay_tol: f64,
}

impl fmt::Display for DecayWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "field does not decay at the box edges (edge ratio {:.3e} > {:.1e})",
            self.edge_ratio, self.decay_tol
        )
    }
}

/// Checks the outermost 5% of samples on each side against `decay_tol * max |f|`.
pub fn decay_check(f: &Field, decay_tol: f64) -> Option<DecayWarning> {
    let values = f.physical_values();
    let n = values.len();
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    let edge = ((EDGE_FRACTION * n as f64).ceil() as usize).max(1);
    let edge_max = values[..edge]
        .iter()
        .chain(values[n - edge..].iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let edge_ratio = edge_max / max;
    (edge_ratio > decay_tol).then_some(DecayWarning { edge_ratio, decay_tol })
}

/// Box primitive `F(x) = int_{x_left}^x f`, plus the total integral over
/// the box (the jump of `F` across the periodic seam).
#[derive(Clone, Debug)]
pub struct Antiderivative {
    pub field: Field,
    pub box_integral: Complex64,
    pub warning: Option<DecayWarning>,
}

impl Antiderivative {
    /// Recovers the integrand: spectral derivative of the periodic part plus
    /// the constant slope `box_integral / L`.
    pub fn derivative(&self) -> Field {
        derivative_with_jump(&self.field, self.box_integral)
    }

    pub fn sup(&self) -> f64 {
        self.field.max_abs()
    }
}

/// Spectral derivative of `F = periodic + jump (x - x_left) / L`.
pub fn derivative_with_jump(f: &Field, jump: Complex64) -> Field {
    let grid = f.grid();
    let slope = jump / grid.length();
    let x0 = grid.x_left();
    let periodic = f.map_with_x(|x, v| v - slope * (x - x0));
    derivative(&periodic).map(|v| v + slope)
}

pub fn primitive(f: &Field) -> Antiderivative {
    primitive_with_tol(f, DEFAULT_DECAY_TOL)
}

/// Spectral primitive normalized by `F(x_left) = 0`.
///
/// Non-zero modes are divided by `i eta`; the mean mode contributes
/// `mean (x - x_left)`; the Nyquist mode is dropped.
pub fn primitive_with_tol(f: &Field, decay_tol: f64) -> Antiderivative {
    let grid = f.grid();
    let n = grid.n();
    let nyq = grid.nyquist_index();
    let warning = decay_check(f, decay_tol);
    let mut coeffs = f.spectral_values().into_owned();
    let mean = coeffs[0] / (n as f64).sqrt();
    for (m, (c, &eta)) in coeffs.iter_mut().zip(grid.freqs()).enumerate() {
        *c = if m == 0 || m == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            *c / Complex64::new(0.0, eta)
        };
    }
    grid.inverse(&mut coeffs);
    let offset = coeffs[0];
    let x0 = grid.x_left();
    let values = coeffs
        .iter()
        .zip(grid.points())
        .map(|(&g, &x)| g - offset + mean * (x - x0))
        .collect();
    Antiderivative {
        field: Field::physical_unchecked(grid, values),
        box_integral: mean * grid.length(),
        warning,
    }
}

/// `X^s` norm: `H^s` norm plus the sup of the primitive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XsNorm {
    pub value: f64,
    pub sobolev: f64,
    pub sup_primitive: f64,
    pub warning: Option<DecayWarning>,
}

pub fn xs_norm(f: &Field, s: f64) -> XsNorm {
    let sobolev = sobolev_norm(f, s);
    let prim = primitive(f);
    let sup_primitive = prim.sup();
    XsNorm {
        value: sobolev + sup_primitive,
        sobolev,
        sup_primitive,
        warning: prim.warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn grid_frequencies_follow_fft_order() {
        let g = make_grid(8, 2.0 * PI, -PI).unwrap();
        assert!((g.dx() - PI / 4.0).abs() < 1e-15);
        let expected = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (a, b) in g.freqs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }

        let g = make_grid(8, 4.0 * PI, 0.0).unwrap();
        let expected = [0.0, 0.5, 1.0, 1.5, -2.0, -1.5, -1.0, -0.5];
        for (a, b) in g.freqs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(g.freqs().iter().filter(|&&e| e == 0.0).count(), 1);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(matches!(make_grid(7, 2.0 * PI, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(6, 2.0 * PI, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(8, 0.0, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(8, -1.0, 0.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn constant_field_has_only_the_zero_mode() {
        let g = make_grid(32, 10.0, -5.0).unwrap();
        let f = Field::from_real_fn(&g, |_| 1.0).to_spectral().unwrap();
        for (m, c) in f.values().iter().enumerate() {
            if m == 0 {
                assert!((c.re - (32f64).sqrt()).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn pure_tone_is_a_single_coefficient() {
        let g = make_grid(64, 2.0 * PI, -PI).unwrap();
        let f = Field::tone(&g, 5.0).to_spectral().unwrap();
        let big: Vec<_> = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-10)
            .collect();
        assert_eq!(big.len(), 1);
        assert_eq!(big[0].0, 5);
    }

    #[test]
    fn representation_mismatch_is_an_error() {
        let g = make_grid(16, 1.0, 0.0).unwrap();
        let f = Field::zeros(&g);
        assert!(f.to_physical().is_err());
        assert!(f.to_spectral().unwrap().to_spectral().is_err());
    }

    #[test]
    fn sobolev_norm_of_a_tone() {
        let g = make_grid(64, 8.0, -4.0).unwrap();
        let eta0 = g.freqs()[3];
        let f = Field::tone(&g, eta0);
        for s in [0.0, 0.5, 1.0, 2.5] {
            let expected = 8f64.sqrt() * (1.0 + eta0 * eta0).powf(s / 2.0);
            assert!(rel_err(sobolev_norm(&f, s), expected) < 1e-13);
        }
        assert!(rel_err(sobolev_norm(&f, 0.0), l2_norm(&f)) < 1e-14);
    }

    #[test]
    fn primitive_of_zero_is_zero() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let p = primitive(&Field::zeros(&g));
        assert_eq!(p.sup(), 0.0);
        assert!(p.warning.is_none());
        assert_eq!(xs_norm(&Field::zeros(&g), 1.0).value, 0.0);
    }

    #[test]
    fn primitive_starts_at_zero_and_warns_without_decay() {
        let g = make_grid(128, 20.0, -10.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x).exp());
        let p = primitive(&f);
        assert!(p.field.values()[0].norm() < 1e-15);
        assert!(p.warning.is_none());

        let wide = Field::from_real_fn(&g, |x| (0.3 * x).cos());
        assert!(primitive(&wide).warning.is_some());
    }

    #[test]
    fn derivative_with_jump_inverts_the_primitive() {
        let g = make_grid(256, 40.0, -20.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-(x - 1.0) * (x - 1.0)).exp() * (1.0 + 0.3 * x));
        let back = primitive(&f).derivative();
        let err = l2_norm(&back.sub(&f).unwrap()) / l2_norm(&f);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let g = make_grid(48, 2.0 * PI, 0.0).unwrap();
        let low = Field::tone(&g, 15.0);
        let high = Field::tone(&g, 16.0);
        assert!(l2_norm(&dealias(&low).sub(&low).unwrap()) < 1e-12);
        assert!(l2_norm(&dealias(&high)) < 1e-12);
    }

    #[test]
    fn translate_shifts_smooth_fields() {
        let g = make_grid(128, 30.0, -15.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-x * x / 2.0).exp());
        let shifted = translate(&f, 0.37);
        let expected = Field::from_real_fn(&g, |x| (-(x + 0.37) * (x + 0.37) / 2.0).exp());
        assert!(l2_norm(&shifted.sub(&expected).unwrap()) < 1e-12);
    }
}
