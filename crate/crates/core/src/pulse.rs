//! Pulse envelopes on uniform time grids and their discrete spectra.
//!
//! Envelopes follow the optical convention `E(t) = A(t) e^{−iω₀t}`, so a
//! spectral component at detuning `Δ` evolves as `e^{−iΔt}`:
//!
//! ```text
//! X(Δ_k) = Σ_n x_n e^{+iΔ_k n dt}        x_n = (1/N) Σ_k X(Δ_k) e^{−iΔ_k n dt}
//! ```
//!
//! Under this pairing a transfer phase `φ(Δ)` delays the envelope by `dφ/dΔ`.
//! Spectra are stored ordered from the most negative detuning `−N/2 · df`
//! up to `(N/2 − 1) · df`, with `df = 2π / (N dt)`.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MIN_GRID_POINTS: usize = 1 << 10;
pub const MAX_GRID_POINTS: usize = 1 << 22;
pub const MIN_TRACE_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseShape {
    #[default]
    Gaussian,
}

/// Input pulse definition. `fwhm` refers to the amplitude envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec<T> {
    pub shape: PulseShape,
    pub fwhm: T,
    pub peak_amplitude: T,
    pub center_time: T,
}

impl<T: Real> PulseSpec<T> {
    pub fn gaussian(fwhm: T, peak_amplitude: T, center_time: T) -> Result<Self> {
        let spec = Self {
            shape: PulseShape::Gaussian,
            fwhm,
            peak_amplitude,
            center_time,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > T::zero()) || !self.fwhm.is_finite() {
            return Err(Error::invalid("fwhm", "fwhm must be positive"));
        }
        if !(self.peak_amplitude > T::zero()) || !self.peak_amplitude.is_finite() {
            return Err(Error::invalid("peak_amplitude", "peak_amplitude must be positive"));
        }
        if !self.center_time.is_finite() {
            return Err(Error::invalid("center_time", "must be finite"));
        }
        Ok(())
    }

    pub fn amplitude_at(&self, t: T) -> T {
        match self.shape {
            PulseShape::Gaussian => {
                let u = (t - self.center_time) / self.fwhm;
                self.peak_amplitude * (-T::lit(4.0 * std::f64::consts::LN_2) * u * u).exp()
            }
        }
    }
}

/// Time window and sample count of a simulation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub window: T,
    pub n_points: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(window: T, n_points: usize) -> Result<Self> {
        let grid = Self { window, n_points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window > T::zero()) || !self.window.is_finite() {
            return Err(Error::invalid("window", "window must be positive"));
        }
        if !self.n_points.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.n_points));
        }
        if !(MIN_GRID_POINTS..=MAX_GRID_POINTS).contains(&self.n_points) {
            return Err(Error::invalid("n_points", "must lie in [2^10, 2^22]"));
        }
        Ok(())
    }

    pub fn dt(&self) -> T {
        self.window / T::from_usize(self.n_points).unwrap()
    }
}

/// Real samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrace<T> {
    pub t_start: T,
    pub dt: T,
    pub samples: Vec<T>,
}

impl<T: Real> SampledTrace<T> {
    pub fn new(t_start: T, dt: T, samples: Vec<T>) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() || !t_start.is_finite() {
            return Err(Error::invalid("dt", "dt must be positive"));
        }
        if samples.len() < MIN_TRACE_SAMPLES {
            return Err(Error::TraceTooShort(samples.len()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("samples[{i}]"), "must be finite"));
        }
        Ok(Self {
            t_start,
            dt,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_at(&self, index: T) -> T {
        self.t_start + index * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |i| self.time_at(T::from_usize(i).unwrap()))
    }

    pub fn window(&self) -> T {
        self.dt * T::from_usize(self.len()).unwrap()
    }

    /// Detected power, `amplitude²`.
    pub fn power(&self) -> Vec<T> {
        self.samples.iter().map(|&a| a * a).collect()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| s * factor).collect(),
            ..self.clone()
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (self.dt - other.dt).abs() <= T::epsilon() * T::lit(16.0) * self.dt
            && (self.t_start - other.t_start).abs() <= T::epsilon() * T::lit(16.0) * self.window()
    }

    pub fn to_envelope(&self) -> Envelope<T> {
        Envelope {
            t_start: self.t_start,
            dt: self.dt,
            samples: self.samples.iter().map(|&s| Complex::new(s, T::zero())).collect(),
        }
    }
}

/// Complex field envelope on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<T> {
    pub t_start: T,
    pub dt: T,
    pub samples: Vec<Complex<T>>,
}

impl<T: Real> Envelope<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `|A(t)|` as a real trace.
    pub fn magnitude(&self) -> SampledTrace<T> {
        SampledTrace {
            t_start: self.t_start,
            dt: self.dt,
            samples: self.samples.iter().map(|c| c.norm()).collect(),
        }
    }

    pub fn real_part(&self) -> SampledTrace<T> {
        SampledTrace {
            t_start: self.t_start,
            dt: self.dt,
            samples: self.samples.iter().map(|c| c.re).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            samples: self.samples.iter().map(|c| c.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&c| c * factor).collect(),
            ..self.clone()
        }
    }

    pub fn energy(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }
}

/// Discrete spectrum; `f_start` and `df` are angular detunings (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub f_start: T,
    pub df: T,
    pub samples: Vec<Complex<T>>,
    /// Time origin of the originating trace, needed to invert.
    pub t_start: T,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn detunings(&self) -> Vec<T> {
        (0..self.len())
            .map(|k| self.f_start + T::from_usize(k).unwrap() * self.df)
            .collect()
    }

    /// Energy normalized so that it equals the time-domain energy (Parseval).
    pub fn energy(&self) -> T {
        let n = T::from_usize(self.len()).unwrap();
        self.samples.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()) / n
    }

    pub fn to_envelope(&self) -> Result<Envelope<T>> {
        let n = self.len();
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let half = n / 2;
        let mut buf: Vec<Complex<T>> = (0..n).map(|i| self.samples[(i + half) % n]).collect();
        // x_n = (1/N) Σ X_k e^{−2πi kn/N}: rustfft's forward kernel
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = T::one() / T::from_usize(n).unwrap();
        buf.iter_mut().for_each(|c| *c = *c * scale);
        let dt = T::TAU() / (T::from_usize(n).unwrap() * self.df);
        Ok(Envelope {
            t_start: self.t_start,
            dt,
            samples: buf,
        })
    }
}

pub fn synthesize<T: Real>(spec: &PulseSpec<T>, grid: &GridSpec<T>) -> Result<SampledTrace<T>> {
    spec.validate()?;
    grid.validate()?;
    if grid.window < T::lit(8.0) * spec.fwhm {
        return Err(Error::WindowTooSmall {
            window: grid.window.as_f64(),
            fwhm: spec.fwhm.as_f64(),
        });
    }
    let dt = grid.dt();
    let samples = (0..grid.n_points)
        .map(|i| spec.amplitude_at(T::from_usize(i).unwrap() * dt))
        .collect();
    SampledTrace::new(T::zero(), dt, samples)
}

pub fn field_spectrum<T: Real>(field: &Envelope<T>) -> Result<Spectrum<T>> {
    let n = field.len();
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut buf = field.samples.clone();
    // X_k = Σ x_n e^{+2πi kn/N}: rustfft's (unnormalized) inverse kernel
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let half = n / 2;
    let samples = (0..n).map(|j| buf[(j + half) % n]).collect();
    let nf = T::from_usize(n).unwrap();
    let df = T::TAU() / (nf * field.dt);
    Ok(Spectrum {
        f_start: -T::from_usize(half).unwrap() * df,
        df,
        samples,
        t_start: field.t_start,
    })
}

pub fn to_spectrum<T: Real>(trace: &SampledTrace<T>) -> Result<Spectrum<T>> {
    field_spectrum(&trace.to_envelope())
}

/// Inverse transform keeping the real part of the envelope.
pub fn to_trace<T: Real>(spectrum: &Spectrum<T>) -> Result<SampledTrace<T>> {
    Ok(spectrum.to_envelope()?.real_part())
}
