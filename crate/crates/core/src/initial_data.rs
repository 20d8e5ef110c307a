//! Initial-data recipes used by configs and tests.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{l2_norm, Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tone {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `a exp(-(x - x0)^2 / (2 w^2)) e^{i v x}`
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        velocity: f64,
    },
    /// `a sech((x - x0) / w) e^{i v x}`
    SolitonLike {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        velocity: f64,
    },
    /// Sum of tones, optionally multiplied by a Gaussian window so it decays.
    ToneSum {
        tones: Vec<Tone>,
        #[serde(default)]
        window_width: Option<f64>,
    },
    /// Deterministic full-band field with `|f^(eta)|` proportional to
    /// `(1 + eta^2)^{-decay/2}`, centered in the box and rescaled to `L^2` norm `norm`.
    FullBand { decay: f64, norm: f64 },
    /// Complex Gaussian coefficients weighted by `(1 + eta^2)^{-decay/2}`,
    /// windowed in space and rescaled to `L^2` norm `norm`.
    Random {
        seed: u64,
        decay: f64,
        norm: f64,
        window_width: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl InitialData {
    pub fn gaussian(amplitude: f64, width: f64, center: f64) -> Self {
        InitialData::Gaussian {
            amplitude,
            width,
            center,
            velocity: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialData::Gaussian { width, .. } | InitialData::SolitonLike { width, .. } => positive("width", *width),
            InitialData::ToneSum { tones, window_width } => {
                if tones.is_empty() {
                    return Err(Error::Config("tone_sum needs at least one tone".into()));
                }
                if let Some(w) = window_width {
                    positive("window_width", *w)?;
                }
                Ok(())
            }
            InitialData::FullBand { decay, norm } => {
                if !(*norm >= 0.0) || !decay.is_finite() {
                    return Err(Error::Config(
                        "full_band needs finite decay and nonnegative norm".into(),
                    ));
                }
                Ok(())
            }
            InitialData::Random {
                norm,
                window_width,
                decay,
                ..
            } => {
                positive("window_width", *window_width)?;
                if !(*norm >= 0.0) {
                    return Err(Error::Config(format!("norm must be nonnegative, got {norm}")));
                }
                if !decay.is_finite() {
                    return Err(Error::Config("decay must be finite".into()));
                }
                Ok(())
            }
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<Field> {
        self.validate()?;
        let i = Complex64::new(0.0, 1.0);
        Ok(match *self {
            InitialData::Gaussian {
                amplitude,
                width,
                center,
                velocity,
            } => Field::from_fn(grid, |x| {
                let y = x - center;
                amplitude * (-y * y / (2.0 * width * width)).exp() * (i * velocity * x).exp()
            }),
            InitialData::SolitonLike {
                amplitude,
                width,
                center,
                velocity,
            } => Field::from_fn(grid, |x| {
                amplitude / ((x - center) / width).cosh() * (i * velocity * x).exp()
            }),
            InitialData::ToneSum {
                ref tones,
                window_width,
            } => Field::from_fn(grid, |x| {
                let s: Complex64 = tones
                    .iter()
                    .map(|t| t.amplitude * (i * (t.frequency * x + t.phase)).exp())
                    .sum();
                match window_width {
                    Some(w) => s * (-x * x / (2.0 * w * w)).exp(),
                    None => s,
                }
            }),
            InitialData::FullBand { decay, norm } => full_band_field(grid, decay, norm)?,
            InitialData::Random {
                seed,
                decay,
                norm,
                window_width,
            } => random_field(grid, seed, decay, norm, window_width)?,
        })
    }
}

fn rescale(f: Field, norm: f64) -> Field {
    let current = l2_norm(&f);
    if current == 0.0 {
        return f;
    }
    f.scale(Complex64::new(norm / current, 0.0))
}

fn full_band_field(grid: &Grid, decay: f64, norm: f64) -> Result<Field> {
    let center = grid.length() / 2.0;
    let coeffs = grid
        .freqs()
        .iter()
        .map(|&eta| Complex64::new(0.0, -eta * center).exp() * (1.0 + eta * eta).powf(-decay / 2.0))
        .collect();
    Ok(rescale(Field::from_spectrum(grid, coeffs)?.into_physical(), norm))
}

fn random_field(grid: &Grid, seed: u64, decay: f64, norm: f64, window_width: f64) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Complex64> = grid
        .freqs()
        .iter()
        .map(|&eta| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * (1.0 + eta * eta).powf(-decay / 2.0)
        })
        .collect();
    let center = grid.x_left() + grid.length() / 2.0;
    let raw = Field::from_spectrum(grid, coeffs)?
        .into_physical()
        .map_with_x(|x, z| z * (-(x - center) * (x - center) / (2.0 * window_width * window_width)).exp());
    Ok(rescale(raw, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn random_fields_are_seeded() {
        let g = make_grid(128, 40.0, -20.0).unwrap();
        let r = InitialData::Random {
            seed: 11,
            decay: 2.0,
            norm: 0.7,
            window_width: 3.0,
        };
        let a = r.build(&g).unwrap();
        let b = r.build(&g).unwrap();
        assert_eq!(a.values(), b.values());
        assert!((l2_norm(&a) - 0.7).abs() < 1e-12);
        let c = InitialData::Random {
            seed: 12,
            decay: 2.0,
            norm: 0.7,
            window_width: 3.0,
        }
        .build(&g)
        .unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn recipes_parse_from_json() {
        let d: InitialData = serde_json::from_str(r#"{"kind": "gaussian", "amplitude": 0.5, "width": 2.0}"#).unwrap();
        assert_eq!(d, InitialData::gaussian(0.5, 2.0, 0.0));
        assert!(
            serde_json::from_str::<InitialData>(r#"{"kind": "gaussian", "amplitude": 0.5, "width": 2.0, "x": 1}"#)
                .is_err()
        );
        let t: InitialData =
            serde_json::from_str(r#"{"kind": "tone_sum", "tones": [{"amplitude": 1.0, "frequency": 2.0}]}"#).unwrap();
        assert!(t.validate().is_ok());
    }

    #[test]
    fn bad_recipes_are_rejected() {
        assert!(InitialData::gaussian(1.0, 0.0, 0.0).validate().is_err());
        assert!(InitialData::ToneSum {
            tones: vec![],
            window_width: None
        }
        .validate()
        .is_err());
    }

    #[test]
    fn gaussian_peak() {
        let g = make_grid(64, 20.0, -10.0).unwrap();
        let f = InitialData::gaussian(0.5, 2.0, 0.0).build(&g).unwrap();
        assert!((f.max_abs() - 0.5).abs() < 1e-15);
    }
}
