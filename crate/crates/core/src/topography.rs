//! Bottom profiles `b(x)` with analytic derivatives up to order six.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, ORDER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Topography {
    Flat,
    /// `amplitude * exp(-((x - center)/width)^2 / 2)`
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// `amplitude * sin(2 pi (x - center) / width)`
    Sine { amplitude: f64, width: f64, center: f64 },
    /// Trigonometric interpolant of uniform periodic samples on
    /// `[x_min, x_min + length)`.
    Tabulated { x_min: f64, length: f64, samples: Vec<f64> },
}

impl Default for Topography {
    fn default() -> Self {
        Topography::Flat
    }
}

impl Topography {
    pub fn from_family(family: &str, amplitude: f64, width: f64, center: f64) -> Result<Self> {
        let topo = match family {
            "flat" => Topography::Flat,
            "gaussian" => Topography::Gaussian { amplitude, width, center },
            "sine" => Topography::Sine { amplitude, width, center },
            other => {
                return Err(Error::Config(format!(
                    "unknown topography family `{other}` (expected flat, gaussian, sine or tabulated)"
                )))
            }
        };
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Topography::Flat => Ok(()),
            Topography::Gaussian { amplitude, width, center }
            | Topography::Sine { amplitude, width, center } => {
                if !(amplitude.is_finite() && center.is_finite() && *width > 0.0 && width.is_finite()) {
                    Err(Error::Config(format!(
                        "topography needs finite amplitude/center and positive width, got {amplitude}, {width}, {center}"
                    )))
                } else {
                    Ok(())
                }
            }
            Topography::Tabulated { length, samples, .. } => {
                if samples.len() < 4 || !(*length > 0.0) || samples.iter().any(|v| !v.is_finite()) {
                    Err(Error::Config("tabulated topography needs >= 4 finite samples and a positive length".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_flat(&self) -> bool {
        match self {
            Topography::Flat => true,
            Topography::Gaussian { amplitude, .. } | Topography::Sine { amplitude, .. } => *amplitude == 0.0,
            Topography::Tabulated { samples, .. } => samples.iter().all(|v| *v == 0.0),
        }
    }

    /// Values of `b, b', ..., b^(6)` at `x`.
    pub fn derivatives(&self, x: f64) -> [f64; ORDER] {
        match self {
            Topography::Flat => [0.0; ORDER],
            Topography::Gaussian { amplitude, width, center } => {
                let xi = (Jet::variable(x) + (-center)) * (1.0 / width);
                ((xi * xi) * -0.5).exp().scale(*amplitude).derivatives()
            }
            Topography::Sine { amplitude, width, center } => {
                let k = 2.0 * std::f64::consts::PI / width;
                let phase = k * (x - center);
                let mut d = [0.0; ORDER];
                let mut kp = *amplitude;
                for (n, v) in d.iter_mut().enumerate() {
                    *v = kp * (phase + n as f64 * std::f64::consts::FRAC_PI_2).sin();
                    kp *= k;
                }
                d
            }
            Topography::Tabulated { x_min, length, samples } => {
                tabulated_derivatives(*x_min, *length, samples, x)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivatives(x)[0]
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Topography::Flat => 0.0,
            Topography::Gaussian { amplitude, width, center } => {
                let xi = (x - center) / width;
                -amplitude * xi / width * (-0.5 * xi * xi).exp()
            }
            Topography::Sine { amplitude, width, center } => {
                let k = 2.0 * std::f64::consts::PI / width;
                amplitude * k * (k * (x - center)).cos()
            }
            Topography::Tabulated { .. } => self.derivatives(x)[1],
        }
    }
}

fn tabulated_derivatives(x_min: f64, length: f64, samples: &[f64], x: f64) -> [f64; ORDER] {
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|v| Complex::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut d = [0.0; ORDER];
    let theta = 2.0 * std::f64::consts::PI * (x - x_min) / length;
    for (m, c) in buf.iter().enumerate() {
        let c = c / n as f64;
        // signed mode number; the Nyquist mode is taken as a pure cosine
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let nyquist = n % 2 == 0 && m == n / 2;
        let k = 2.0 * std::f64::consts::PI * signed / length;
        for (order, v) in d.iter_mut().enumerate() {
            let ik = Complex::new(0.0, k).powu(order as u32);
            let e = Complex::from_polar(1.0, signed * theta);
            // the Nyquist mode contributes as a cosine, from its real part
            let amp = if nyquist { Complex::new(c.re, 0.0) } else { c };
            *v += (amp * ik * e).re;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_derivatives_match_hermite_formula() {
        // d^n/dx^n exp(-x^2/2) = (-1)^n He_n(x) exp(-x^2/2)
        let t = Topography::Gaussian { amplitude: 1.0, width: 1.0, center: 0.0 };
        let x: f64 = 0.8;
        let he = [1.0, x, x * x - 1.0, x.powi(3) - 3.0 * x, x.powi(4) - 6.0 * x * x + 3.0];
        let d = t.derivatives(x);
        for n in 0..5 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((d[n] - sign * he[n] * (-0.5 * x * x).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn tabulated_sine_samples_reproduce_sine() {
        let n = 32;
        let l = 2.0 * std::f64::consts::PI;
        let samples: Vec<f64> = (0..n).map(|i| (2.0 * (i as f64) * l / n as f64).sin()).collect();
        let t = Topography::Tabulated { x_min: 0.0, length: l, samples };
        let x = 0.37;
        let d = t.derivatives(x);
        assert!((d[0] - (2.0 * x).sin()).abs() < 1e-12);
        assert!((d[1] - 2.0 * (2.0 * x).cos()).abs() < 1e-12);
        assert!((d[3] + 8.0 * (2.0 * x).cos()).abs() < 1e-11);
    }

    #[test]
    fn unknown_family_is_config_error() {
        assert!(Topography::from_family("ramp", 1.0, 1.0, 0.0).is_err());
        assert!(Topography::from_family("gaussian", 1.0, 0.0, 0.0).is_err());
    }
}
