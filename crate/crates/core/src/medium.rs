//! Complex wavenumber of a gain/absorption medium built from signed Lorentzian lines.
//!
//! Every line contributes
//!
//! ```text
//! k_j(Δ) = ½ · s_j · γ_j / ((Δ − Δ_j) + i γ_j)
//! ```
//!
//! to the envelope wavenumber, with the field transfer `exp(i k L)`.
//! Sign convention: `strength > 0` is gain. An isolated line of strength `s`
//! has intensity gain `exp(s L)` at its center, is slow (positive group delay)
//! at its center and fast on its wings beyond `|Δ − Δ_j| > γ_j`. Absorption
//! lines (`s < 0`) mirror all of this.
//!
//! The carrier term `ω n₀ / c` is not part of [`MediumChannel::evaluate_k`];
//! the background index only enters through the excess delay `(n₀ − 1) L / c`
//! relative to a vacuum reference.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Real, SPEED_OF_LIGHT};

/// One Lorentzian contribution. Angular frequencies in rad/s, strength in 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineComponent<T> {
    pub center_detuning: T,
    pub hwhm: T,
    pub strength: T,
}

impl<T: Real> LineComponent<T> {
    pub fn new(center_detuning: T, hwhm: T, strength: T) -> Result<Self> {
        let line = Self {
            center_detuning,
            hwhm,
            strength,
        };
        line.validate()?;
        Ok(line)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center_detuning.is_finite() {
            return Err(Error::invalid("center_detuning", "must be finite"));
        }
        if !(self.hwhm > T::zero()) || !self.hwhm.is_finite() {
            return Err(Error::invalid("hwhm", "hwhm must be positive"));
        }
        if !self.strength.is_finite() || self.strength == T::zero() {
            return Err(Error::invalid("strength", "strength must be finite and nonzero"));
        }
        Ok(())
    }

    #[inline]
    fn denominator(&self, detuning: T) -> Complex<T> {
        Complex::new(detuning - self.center_detuning, self.hwhm)
    }

    /// Wavenumber contribution in 1/m.
    #[inline]
    pub fn k(&self, detuning: T) -> Complex<T> {
        let num = T::lit(0.5) * self.strength * self.hwhm;
        Complex::new(num, T::zero()) / self.denominator(detuning)
    }

    /// Closed-form derivative `dk/dΔ` in s/m.
    #[inline]
    pub fn dk(&self, detuning: T) -> Complex<T> {
        let d = self.denominator(detuning);
        let num = -T::lit(0.5) * self.strength * self.hwhm;
        Complex::new(num, T::zero()) / (d * d)
    }

    /// `ln G / L` for this line alone: `s γ² / ((Δ − Δ_j)² + γ²)`.
    #[inline]
    pub fn log_gain_per_length(&self, detuning: T) -> T {
        let x = detuning - self.center_detuning;
        let g2 = self.hwhm * self.hwhm;
        self.strength * g2 / (x * x + g2)
    }

    pub fn shifted(&self, offset: T) -> Self {
        Self {
            center_detuning: self.center_detuning + offset,
            ..*self
        }
    }
}

/// A propagation channel: background index, interaction length and a set of lines.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumChannel<T> {
    pub background_index: T,
    pub length: T,
    pub lines: Vec<LineComponent<T>>,
}

/// Pointwise dispersion quantities at one detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample<T> {
    pub detuning: T,
    pub k_complex: Complex<T>,
    pub intensity_gain: T,
    /// Seconds relative to vacuum; negative values are advancement.
    pub group_delay: T,
}

impl<T: Real> MediumChannel<T> {
    pub fn new(background_index: T, length: T, lines: Vec<LineComponent<T>>) -> Result<Self> {
        let channel = Self {
            background_index,
            length,
            lines,
        };
        channel.validate()?;
        Ok(channel)
    }

    /// A line-free channel with unit background index.
    pub fn vacuum(length: T) -> Self {
        Self {
            background_index: T::one(),
            length,
            lines: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.background_index.is_finite() || self.background_index < T::one() - T::lit(1e-6) {
            return Err(Error::invalid("background_index", "must be at least 1 - 1e-6"));
        }
        if !(self.length > T::zero()) || !self.length.is_finite() {
            return Err(Error::invalid("length", "length must be positive"));
        }
        self.lines.iter().try_for_each(LineComponent::validate)
    }

    /// The same channel seen from a carrier sitting at `carrier` on the original
    /// detuning axis: envelope detuning 0 maps to `carrier`.
    pub fn at_carrier(&self, carrier: T) -> Self {
        Self {
            background_index: self.background_index,
            length: self.length,
            lines: self.lines.iter().map(|l| l.shifted(-carrier)).collect(),
        }
    }

    /// Complex wavenumber deviation (1/m), background term excluded.
    pub fn evaluate_k(&self, detuning: T) -> Complex<T> {
        self.lines
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, l| acc + l.k(detuning))
    }

    pub fn dk_ddetuning(&self, detuning: T) -> Complex<T> {
        self.lines
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, l| acc + l.dk(detuning))
    }

    /// Excess delay of the background index over vacuum, `(n₀ − 1) L / c`.
    pub fn background_delay(&self) -> T {
        (self.background_index - T::one()) * self.length / T::lit(SPEED_OF_LIGHT)
    }

    /// Group delay relative to a vacuum reference, `L · Re(dk/dΔ) + (n₀ − 1) L / c`.
    pub fn group_delay_analytic(&self, detuning: T) -> T {
        self.length * self.dk_ddetuning(detuning).re + self.background_delay()
    }

    /// Intensity gain `exp(−2 Im(k) L)`.
    pub fn intensity_gain(&self, detuning: T) -> T {
        (-T::lit(2.0) * self.evaluate_k(detuning).im * self.length).exp()
    }

    /// `ln G(Δ)` evaluated directly from the line sum (no exp/ln round trip).
    pub fn log_intensity_gain(&self, detuning: T) -> T {
        self.length
            * self
                .lines
                .iter()
                .fold(T::zero(), |acc, l| acc + l.log_gain_per_length(detuning))
    }

    pub fn sample(&self, detuning: T) -> DispersionSample<T> {
        DispersionSample {
            detuning,
            k_complex: self.evaluate_k(detuning),
            intensity_gain: self.intensity_gain(detuning),
            group_delay: self.group_delay_analytic(detuning),
        }
    }

    pub fn gain_spectrum(&self, detuning_grid: &[T]) -> Result<Vec<DispersionSample<T>>> {
        check_grid(detuning_grid)?;
        Ok(detuning_grid.iter().map(|&d| self.sample(d)).collect())
    }

    /// Peak advancement predicted by first-order dispersion: `−group_delay`.
    pub fn advancement_curve(&self, detuning_grid: &[T]) -> Result<Vec<(T, T)>> {
        check_grid(detuning_grid)?;
        Ok(detuning_grid
            .iter()
            .map(|&d| (d, -self.group_delay_analytic(d)))
            .collect())
    }
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnsortedGrid);
    }
    Ok(())
}
