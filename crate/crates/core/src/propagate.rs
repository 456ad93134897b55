//! Spectral propagation through a [`MediumChannel`] relative to a vacuum reference.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::medium::MediumChannel;
use crate::pulse::{field_spectrum, Envelope, SampledTrace};
use crate::scalar::{Real, SPEED_OF_LIGHT};

/// Fraction of the output energy allowed in the outer window edges.
pub const DEFAULT_WRAPAROUND_LIMIT: f64 = 1e-6;
/// Width of each guarded edge, as a fraction of the window.
pub const EDGE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult<T> {
    /// `|output field|`.
    pub output: SampledTrace<T>,
    pub output_field: Envelope<T>,
    /// The unpropagated input: what a c-speed pulse would look like.
    pub reference: SampledTrace<T>,
    pub transfer_samples: Vec<Complex<T>>,
    pub edge_energy_fraction: T,
}

/// `H(Δ) = exp(i k(Δ) L) · exp(i Δ (n₀ − 1) L / c)`; identically 1 in vacuum.
pub fn relative_transfer<T: Real>(channel: &MediumChannel<T>, detunings: &[T]) -> Vec<Complex<T>> {
    let excess = channel.background_delay();
    detunings
        .iter()
        .map(|&d| {
            let phase = channel.evaluate_k(d) * channel.length + Complex::new(d * excess, T::zero());
            (Complex::<T>::i() * phase).exp()
        })
        .collect()
}

/// Multiplies the field spectrum by `transfer` (ordered as [`crate::pulse::Spectrum`]) and inverts.
pub fn apply_transfer<T: Real>(field: &Envelope<T>, transfer: &[Complex<T>]) -> Result<Envelope<T>> {
    let mut spectrum = field_spectrum(field)?;
    if transfer.len() != spectrum.len() {
        return Err(Error::GridMismatch);
    }
    spectrum
        .samples
        .iter_mut()
        .zip(transfer)
        .for_each(|(x, h)| *x = *x * h);
    spectrum.to_envelope()
}

/// Energy in the outer [`EDGE_FRACTION`] of the window on each side, over the total.
pub fn edge_energy_fraction<T: Real>(field: &Envelope<T>) -> T {
    let n = field.len();
    let edge = ((n as f64) * EDGE_FRACTION).ceil() as usize;
    let total = field.energy();
    if total == T::zero() {
        return T::zero();
    }
    let outer = field.samples[..edge]
        .iter()
        .chain(&field.samples[n - edge..])
        .fold(T::zero(), |acc, c| acc + c.norm_sqr());
    outer / total
}

pub fn propagate_field<T: Real>(
    field: &Envelope<T>,
    channel: &MediumChannel<T>,
    wraparound_limit: T,
) -> Result<PropagationResult<T>> {
    let detunings = field_spectrum(field)?.detunings();
    let transfer_samples = relative_transfer(channel, &detunings);
    let output_field = apply_transfer(field, &transfer_samples)?;
    let edge_energy_fraction = edge_energy_fraction(&output_field);
    if !(edge_energy_fraction < wraparound_limit) {
        return Err(Error::Wraparound {
            fraction: edge_energy_fraction.as_f64(),
        });
    }
    Ok(PropagationResult {
        output: output_field.magnitude(),
        output_field,
        reference: field.magnitude(),
        transfer_samples,
        edge_energy_fraction,
    })
}

pub fn propagate_pulse<T: Real>(
    trace: &SampledTrace<T>,
    channel: &MediumChannel<T>,
) -> Result<PropagationResult<T>> {
    let mut result = propagate_field(&trace.to_envelope(), channel, T::lit(DEFAULT_WRAPAROUND_LIMIT))?;
    result.reference = trace.clone();
    Ok(result)
}

/// Linear-phase transfer `exp(iΔτ)`: a pure delay of `delay` seconds.
pub fn pure_delay_transfer<T: Real>(detunings: &[T], delay: T) -> Vec<Complex<T>> {
    detunings
        .iter()
        .map(|&d| Complex::from_polar(T::one(), d * delay))
        .collect()
}

/// Common vacuum transit time `L / c` that the relative frame divides out.
pub fn vacuum_transit<T: Real>(length: T) -> T {
    length / T::lit(SPEED_OF_LIGHT)
}
