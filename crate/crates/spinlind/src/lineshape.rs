//! Frequency distribution of the oscillating field: density, characteristic
//! function and Hilbert transform.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lorentzian,
    Gaussian,
    Delta,
}

/// ρ_f(ω′) parameterised by its centre ω and full width at half maximum Δν.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyDistribution {
    pub kind: Kind,
    pub center: f64,
    pub width: f64,
}

impl FrequencyDistribution {
    pub fn new(kind: Kind, center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !width.is_finite() {
            return Err(Error::Argument("distribution centre and width must be finite".into()));
        }
        match kind {
            Kind::Delta if width != 0.0 => Err(Error::Argument("delta distribution has zero width".into())),
            Kind::Lorentzian | Kind::Gaussian if width <= 0.0 => {
                Err(Error::Argument(format!("{kind:?} width must be positive, got {width}")))
            }
            _ => Ok(Self { kind, center, width }),
        }
    }

    pub fn lorentzian(center: f64, fwhm: f64) -> Result<Self> { Self::new(Kind::Lorentzian, center, fwhm) }

    pub fn gaussian(center: f64, fwhm: f64) -> Result<Self> { Self::new(Kind::Gaussian, center, fwhm) }

    pub fn delta(center: f64) -> Self { Self { kind: Kind::Delta, center, width: 0.0 } }

    /// Lorentzian half width Δν/2.
    fn half_width(&self) -> f64 { 0.5 * self.width }

    /// Gaussian standard deviation.
    pub fn sigma(&self) -> f64 { self.width / (2.0 * (2.0 * LN_2).sqrt()) }

    /// Relaxation time of |φ_f(t)|.
    pub fn tau_f(&self) -> f64 {
        match self.kind {
            Kind::Lorentzian => 1.0 / self.half_width(),
            Kind::Gaussian => 1.0 / self.sigma(),
            Kind::Delta => f64::INFINITY,
        }
    }

    /// ρ_f(ω′). The Lorentzian is the normalised Cauchy density; a delta
    /// returns +∞ at its centre and 0 elsewhere.
    pub fn density(&self, omega_prime: f64) -> f64 {
        let x = omega_prime - self.center;
        match self.kind {
            Kind::Lorentzian => {
                let a = self.half_width();
                a / (PI * (a * a + x * x))
            }
            Kind::Gaussian => {
                let s = self.sigma();
                (-0.5 * (x / s).powi(2)).exp() / (s * (2.0 * PI).sqrt())
            }
            Kind::Delta => {
                if x == 0.0 { f64::INFINITY } else { 0.0 }
            }
        }
    }

    /// φ_f(t) = ∫ρ_f(ω′)e^{iω′t}dω′.
    pub fn characteristic(&self, t: f64) -> C64 {
        let phase = C64::from_polar(1.0, self.center * t);
        let envelope = match self.kind {
            Kind::Lorentzian => (-self.half_width() * t.abs()).exp(),
            Kind::Gaussian => (-0.5 * (self.sigma() * t).powi(2)).exp(),
            Kind::Delta => 1.0,
        };
        phase * envelope
    }

    /// ρ_f^≻(x) = (1/π) PV∫ρ_f(ω′)/(x − ω′) dω′.
    pub fn hilbert(&self, x: f64) -> Result<f64> {
        let d = x - self.center;
        match self.kind {
            Kind::Lorentzian => {
                let a = self.half_width();
                Ok(d / (PI * (d * d + a * a)))
            }
            Kind::Gaussian => {
                if d == 0.0 {
                    return Ok(0.0);
                }
                let s = self.sigma();
                let v = quad::principal_value(|y| self.density(y), x, 0.01 * s, s, 1e-13 / s);
                Ok(v / PI)
            }
            Kind::Delta => {
                if d == 0.0 {
                    Err(Error::Pole(x))
                } else {
                    Ok(1.0 / (PI * d))
                }
            }
        }
    }
}

/// Symbolic split of Γ(ω) = B₁²∫₀^∞e^{iωτ}dτ = B₁²[πδ(ω) + i PV(1/ω)].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfLineIntegral {
    /// Coefficient of δ(ω): πB₁².
    pub delta_weight: f64,
    /// Coefficient of i PV(1/ω): B₁².
    pub pv_weight: f64,
}

pub fn gamma_halfline(b1: f64) -> HalfLineIntegral {
    HalfLineIntegral { delta_weight: PI * b1 * b1, pv_weight: b1 * b1 }
}

impl HalfLineIntegral {
    /// 2 Re Γ averaged over ρ_f with the field frequency entering as ω − ω′:
    /// 2πB₁²ρ_f(ω).
    pub fn dissipation_rate(&self, dist: &FrequencyDistribution, omega: f64) -> f64 {
        2.0 * self.delta_weight * dist.density(omega)
    }

    /// Im Γ averaged the same way: πB₁²ρ_f^≻(ω).
    pub fn lamb_coefficient(&self, dist: &FrequencyDistribution, omega: f64) -> Result<f64> {
        Ok(self.pv_weight * PI * dist.hilbert(omega)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // D(x) = e^{-x²}∫₀ˣ e^{t²} dt
    fn dawson(x: f64) -> f64 {
        quad::gauss_kronrod(0.0, x, 1e-15, 1e-14, |t: f64| (t * t - x * x).exp())
    }

    #[test]
    fn lorentzian_half_maximum() {
        let d = FrequencyDistribution::lorentzian(3.0, 0.4).unwrap();
        let peak = d.density(3.0);
        assert!((peak - 1.0 / (PI * 0.2)).abs() < 1e-14);
        assert!((d.density(3.2) - 0.5 * peak).abs() < 1e-14);
        assert!((d.density(2.8) - 0.5 * peak).abs() < 1e-14);
    }

    #[test]
    fn gaussian_normalisation_and_half_maximum() {
        let d = FrequencyDistribution::gaussian(-1.0, 0.3).unwrap();
        let s = d.sigma();
        let v = quad::gauss_kronrod(-1.0 - 8.0 * s, -1.0 + 8.0 * s, 1e-14, 1e-14, |w| d.density(w));
        assert!((v - 1.0).abs() < 1e-6);
        assert!((d.density(-0.85) - 0.5 * d.density(-1.0)).abs() < 1e-12);
    }

    #[test]
    fn characteristic_functions() {
        let l = FrequencyDistribution::lorentzian(2.0, 0.6).unwrap();
        assert_eq!(l.characteristic(0.0), C64::new(1.0, 0.0));
        let t: f64 = 1.7;
        let want = C64::from_polar((-0.3 * t).exp(), 2.0 * t);
        assert!((l.characteristic(t) - want).norm() < 1e-15);

        let g = FrequencyDistribution::gaussian(2.0, 0.6).unwrap();
        let s = g.sigma();
        for &t in &[0.3, 1.1, 4.0] {
            let q: C64 = quad::gauss_kronrod(2.0 - 12.0 * s, 2.0 + 12.0 * s, 1e-14, 1e-14, |w| {
                C64::from_polar(g.density(w), w * t)
            });
            assert!((q - g.characteristic(t)).norm() < 1e-8);
        }
    }

    #[test]
    fn lorentzian_hilbert_against_pv_quadrature() {
        let d = FrequencyDistribution::lorentzian(1.0, 0.5).unwrap();
        for &x in &[-3.0, 0.2, 0.9, 1.4, 6.0] {
            let q = quad::principal_value(|y| d.density(y), x, 0.0025, 0.25, 1e-12) / PI;
            assert!((q - d.hilbert(x).unwrap()).abs() < 1e-6);
        }
        assert_eq!(d.hilbert(1.0).unwrap(), 0.0);
        let far = d.hilbert(1.0 + 1e6 * 0.5).unwrap();
        assert!(far.abs() < 1e-5 * d.density(1.0));
    }

    #[test]
    fn gaussian_hilbert_against_dawson() {
        let d = FrequencyDistribution::gaussian(0.5, 1.2).unwrap();
        let s = d.sigma();
        for &x in &[-2.0, 0.1, 0.5, 0.8, 3.0] {
            let u = (x - 0.5) / (s * 2f64.sqrt());
            let want = 2f64.sqrt() / (PI * s) * dawson(u);
            let got = d.hilbert(x).unwrap();
            assert!((got - want).abs() < 1e-9, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn delta_hilbert_pole() {
        let d = FrequencyDistribution::delta(2.0);
        assert!(matches!(d.hilbert(2.0), Err(Error::Pole(_))));
        assert!((d.hilbert(3.0).unwrap() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn halfline_contributions() {
        let d = FrequencyDistribution::lorentzian(1.0, 0.5).unwrap();
        let g = gamma_halfline(0.3);
        assert!((g.dissipation_rate(&d, 1.2) - 2.0 * PI * 0.09 * d.density(1.2)).abs() < 1e-15);
        assert!((g.lamb_coefficient(&d, -1.2).unwrap() - PI * 0.09 * d.hilbert(-1.2).unwrap()).abs() < 1e-15);
    }
}
