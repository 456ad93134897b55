//! Four-wave-mixing frequency bookkeeping and the stimulated conjugate model.
//!
//! Two pump photons become one seed and one conjugate photon, so
//! `ν_s + ν_c = 2 ν_p`. Raising the seed by δ lowers the conjugate by δ.
//! All frequencies here are ordinary frequencies in Hz measured from a common
//! reference (the D1 line); channel detunings are angular (rad/s).

use crate::error::{Error, Result};
use crate::medium::MediumChannel;
use crate::propagate::{propagate_field, PropagationResult, DEFAULT_WRAPAROUND_LIMIT};
use crate::pulse::SampledTrace;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourWmGeometry<T> {
    /// Pump offset from the reference line (Hz).
    pub pump_detuning: T,
    /// Nominal seed offset from the pump (Hz).
    pub seed_offset: T,
    /// Two-photon detuning δ (Hz).
    pub two_photon_detuning: T,
    /// Conjugate seeding efficiency κ.
    pub coupling: T,
}

impl<T: Real> FourWmGeometry<T> {
    pub fn new(pump_detuning: T, seed_offset: T, two_photon_detuning: T, coupling: T) -> Result<Self> {
        let g = Self {
            pump_detuning,
            seed_offset,
            two_photon_detuning,
            coupling,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling >= T::zero()) || !self.coupling.is_finite() {
            return Err(Error::invalid("coupling", "coupling must be non-negative"));
        }
        for (key, v) in [
            ("pump_detuning", self.pump_detuning),
            ("seed_offset", self.seed_offset),
            ("two_photon_detuning", self.two_photon_detuning),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn with_detuning(&self, two_photon_detuning: T) -> Self {
        Self {
            two_photon_detuning,
            ..*self
        }
    }

    pub fn pump_frequency(&self) -> T {
        self.pump_detuning
    }

    pub fn seed_frequency(&self) -> T {
        self.pump_detuning + self.seed_offset + self.two_photon_detuning
    }

    pub fn conjugate_frequency(&self) -> T {
        conjugate_frequency(self.pump_frequency(), self.seed_frequency())
    }

    /// Nominal conjugate offset from the pump, `−seed_offset`.
    pub fn conjugate_offset(&self) -> T {
        -self.seed_offset
    }
}

/// Energy conservation: `ν_c = 2 ν_p − ν_s`.
pub fn conjugate_frequency<T: Real>(pump: T, seed: T) -> T {
    pump + pump - seed
}

/// Angular detunings `(seed, conjugate) = (2πδ, −2πδ)` of the two channels
/// from their own line-system references.
pub fn channel_detunings<T: Real>(_geometry: &FourWmGeometry<T>, two_photon_detuning: T) -> (T, T) {
    let seed = T::TAU() * two_photon_detuning;
    (seed, -seed)
}

/// Conjugate pulse stimulated by `seed_input`: the phase-conjugated seed
/// envelope scaled by κ and filtered by the conjugate channel at the mirrored
/// detuning. The reference is the unscaled seed input.
pub fn stimulate_conjugate<T: Real>(
    seed_input: &SampledTrace<T>,
    geometry: &FourWmGeometry<T>,
    conjugate_channel: &MediumChannel<T>,
) -> Result<PropagationResult<T>> {
    stimulate_conjugate_with_limit(
        seed_input,
        geometry,
        conjugate_channel,
        T::lit(DEFAULT_WRAPAROUND_LIMIT),
    )
}

pub fn stimulate_conjugate_with_limit<T: Real>(
    seed_input: &SampledTrace<T>,
    geometry: &FourWmGeometry<T>,
    conjugate_channel: &MediumChannel<T>,
    wraparound_limit: T,
) -> Result<PropagationResult<T>> {
    geometry.validate()?;
    let (_, conj_detuning) = channel_detunings(geometry, geometry.two_photon_detuning);
    let channel = conjugate_channel.at_carrier(conj_detuning);
    let generated = seed_input.to_envelope().conj().scaled(geometry.coupling);
    let mut result = propagate_field(&generated, &channel, wraparound_limit)?;
    result.reference = seed_input.clone();
    Ok(result)
}
