//! Peak timing, widths and advancement figures extracted from trace pairs.
//!
//! All functions take amplitude traces; power is `amplitude²`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::pulse::SampledTrace;
use crate::scalar::{Real, SPEED_OF_LIGHT};

/// Region of the reference used for the distortion figure (fraction of peak power).
pub const DISTORTION_REGION: f64 = 0.01;
/// Fraction of the window taken as the pre-pulse baseline for noise estimation.
pub const BASELINE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEstimate<T> {
    pub time: T,
    /// Vertex value of the interpolating parabola.
    pub value: T,
    /// Several samples shared the maximum; the earliest was used.
    pub tie: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvancementMetrics<T> {
    /// Positive when the output peak leaves earlier than the reference peak.
    pub peak_advance: T,
    pub relative_advance: T,
    /// Peak power ratio output / reference.
    pub intensity_gain: T,
    pub fwhm_out: T,
    pub fwhm_ref: T,
    pub distortion: T,
    /// Signed; infinite at the pole `peak_advance = L / c`.
    pub group_velocity: T,
    pub tie: bool,
}

/// Parabolic interpolation around the global maximum.
pub fn peak_time<T: Real>(trace: &SampledTrace<T>) -> Result<PeakEstimate<T>> {
    let s = &trace.samples;
    let mut imax = 0;
    for (i, &v) in s.iter().enumerate() {
        if v > s[imax] {
            imax = i;
        }
    }
    let tie = s.iter().filter(|&&v| v == s[imax]).count() > 1;
    if imax == 0 || imax + 1 == s.len() {
        return Err(Error::PeakAtBoundary);
    }
    let (a, b, c) = (s[imax - 1], s[imax], s[imax + 1]);
    let curvature = a - T::lit(2.0) * b + c;
    let (offset, value) = if curvature < T::zero() {
        let off = T::lit(0.5) * (a - c) / curvature;
        (off, b - (a - c) * (a - c) / (T::lit(8.0) * curvature))
    } else {
        (T::zero(), b)
    };
    Ok(PeakEstimate {
        time: trace.time_at(T::from_usize(imax).unwrap() + offset),
        value,
        tie,
    })
}

/// Full width at half maximum by linear interpolation of the half-max crossings.
pub fn fwhm<T: Real>(trace: &SampledTrace<T>) -> Result<T> {
    let s = &trace.samples;
    let imax = s
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > s[best] { i } else { best });
    let half = s[imax] * T::lit(0.5);
    let crossing = |i: usize, j: usize| {
        // s[i] >= half > s[j], |i - j| = 1
        let frac = (s[i] - half) / (s[i] - s[j]);
        let fi = T::from_usize(i).unwrap();
        let fj = T::from_usize(j).unwrap();
        fi + frac * (fj - fi)
    };
    let left = (1..=imax)
        .rev()
        .find(|&i| s[i - 1] < half)
        .map(|i| crossing(i, i - 1))
        .ok_or(Error::UnboundedPulse { side: "leading" })?;
    let right = (imax..s.len() - 1)
        .find(|&i| s[i + 1] < half)
        .map(|i| crossing(i, i + 1))
        .ok_or(Error::UnboundedPulse { side: "trailing" })?;
    Ok((right - left) * trace.dt)
}

/// `v_g = L / (L/c − advance)`. Returns infinity at the pole.
pub fn group_velocity_from_advance<T: Real>(peak_advance: T, length: T) -> T {
    let transit = length / T::lit(SPEED_OF_LIGHT) - peak_advance;
    if transit.abs() < T::lit(1e-15) {
        return T::infinity();
    }
    length / transit
}

/// Inverse of [`group_velocity_from_advance`].
pub fn advance_from_group_velocity<T: Real>(group_velocity: T, length: T) -> T {
    length / T::lit(SPEED_OF_LIGHT) - length / group_velocity
}

fn interpolate<T: Real>(values: &[T], position: T) -> T {
    if position < T::zero() {
        return T::zero();
    }
    let i = position.floor();
    let Some(idx) = i.to_usize() else {
        return T::zero();
    };
    if idx + 1 >= values.len() {
        return if idx + 1 == values.len() && position == i {
            values[idx]
        } else {
            T::zero()
        };
    }
    let frac = position - i;
    values[idx] + frac * (values[idx + 1] - values[idx])
}

/// RMS difference of peak-aligned, peak-normalized power traces over the
/// region where the reference exceeds [`DISTORTION_REGION`] of its peak power.
pub fn distortion<T: Real>(output: &SampledTrace<T>, reference: &SampledTrace<T>) -> Result<T> {
    let p_out = peak_time(output)?;
    let p_ref = peak_time(reference)?;
    let out_power = output.power();
    let ref_power = reference.power();
    let out_peak = p_out.value * p_out.value;
    let ref_peak = p_ref.value * p_ref.value;
    let shift = (p_out.time - p_ref.time) / output.dt;
    let threshold = ref_peak * T::lit(DISTORTION_REGION);
    let mut sum = T::zero();
    let mut count = 0usize;
    for (i, &r) in ref_power.iter().enumerate() {
        if r > threshold {
            let o = interpolate(&out_power, T::from_usize(i).unwrap() + shift);
            let diff = o / out_peak - r / ref_peak;
            sum = sum + diff * diff;
            count += 1;
        }
    }
    Ok((sum / T::from_usize(count.max(1)).unwrap()).sqrt())
}

pub fn advancement<T: Real>(
    output: &SampledTrace<T>,
    reference: &SampledTrace<T>,
    length: T,
) -> Result<AdvancementMetrics<T>> {
    if !output.same_grid(reference) {
        return Err(Error::GridMismatch);
    }
    let p_out = peak_time(output)?;
    let p_ref = peak_time(reference)?;
    let peak_advance = p_ref.time - p_out.time;
    let fwhm_out = fwhm(output)?;
    let fwhm_ref = fwhm(reference)?;
    let gain = (p_out.value * p_out.value) / (p_ref.value * p_ref.value);
    Ok(AdvancementMetrics {
        peak_advance,
        relative_advance: peak_advance / fwhm_ref,
        intensity_gain: gain,
        fwhm_out,
        fwhm_ref,
        distortion: distortion(output, reference)?,
        group_velocity: group_velocity_from_advance(peak_advance, length),
        tie: p_out.tie || p_ref.tie,
    })
}

/// Standard deviation of the leading [`BASELINE_FRACTION`] of the trace.
pub fn baseline_noise<T: Real>(trace: &SampledTrace<T>) -> T {
    let n = ((trace.len() as f64 * BASELINE_FRACTION) as usize).max(2);
    let head = &trace.samples[..n];
    let nf = T::from_usize(n).unwrap();
    let mean = head.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let var = head.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / (nf - T::one());
    var.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredAdvancement<T> {
    pub metrics: AdvancementMetrics<T>,
    /// One-σ uncertainty of `peak_advance`.
    pub advance_sigma: T,
    pub draws: usize,
}

/// Advancement with a residual-noise bootstrap of the peak times.
///
/// Noise levels are estimated from each trace's pre-pulse baseline; each draw
/// perturbs both traces with fresh Gaussian noise of that level. Draws whose
/// peak lands on the window edge are skipped.
pub fn advancement_with_uncertainty<T: Real>(
    output: &SampledTrace<T>,
    reference: &SampledTrace<T>,
    length: T,
    draws: usize,
    seed: u64,
) -> Result<MeasuredAdvancement<T>> {
    let metrics = advancement(output, reference, length)?;
    let sigma_out = baseline_noise(output).as_f64();
    let sigma_ref = baseline_noise(reference).as_f64();
    if draws < 2 || (sigma_out == 0.0 && sigma_ref == 0.0) {
        return Ok(MeasuredAdvancement {
            metrics,
            advance_sigma: T::zero(),
            draws: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = |trace: &SampledTrace<T>, sigma: f64, rng: &mut ChaCha8Rng| {
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        SampledTrace {
            samples: trace
                .samples
                .iter()
                .map(|&s| s + T::lit(normal.sample(rng)))
                .collect(),
            ..trace.clone()
        }
    };
    let mut advances = Vec::with_capacity(draws);
    for _ in 0..draws {
        let o = noisy(output, sigma_out, &mut rng);
        let r = noisy(reference, sigma_ref, &mut rng);
        if let (Ok(po), Ok(pr)) = (peak_time(&o), peak_time(&r)) {
            advances.push((pr.time - po.time).as_f64());
        }
    }
    let n = advances.len() as f64;
    let mean = advances.iter().sum::<f64>() / n;
    let var = advances.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeasuredAdvancement {
        metrics,
        advance_sigma: T::lit(var.sqrt()),
        draws: advances.len(),
    })
}
