//! Batch runs on a [`RunConfig`]: trace triples at one detuning, detuning
//! sweeps, the constrained search for maximum advancement, and the
//! calibration of the two free constants of the default configuration.

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fourwm::{channel_detunings, stimulate_conjugate_with_limit, FourWmGeometry};
use crate::io::{Table, Value};
use crate::medium::MediumChannel;
use crate::metrics::{advancement, peak_time, AdvancementMetrics};
use crate::propagate::propagate_field;
use crate::pulse::{synthesize, SampledTrace};
use crate::scalar::mhz_to_rad;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Two-photon detuning δ (Hz).
    pub two_photon_detuning: f64,
    pub seed_frequency: f64,
    pub conjugate_frequency: f64,
    pub seed_advance: f64,
    pub conjugate_advance: f64,
    pub seed_relative_advance: f64,
    pub conjugate_relative_advance: f64,
    /// Output peak power over reference peak power.
    pub seed_gain: f64,
    pub conjugate_gain: f64,
    pub conjugate_measurable: bool,
    /// `(seed, conjugate)`.
    pub distortions: (f64, f64),
    /// Seed peak time minus conjugate peak time; positive when the conjugate exits first.
    pub conjugate_lead: f64,
}

/// One sweep point; failures are kept per row instead of aborting the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub two_photon_detuning: f64,
    pub outcome: std::result::Result<SweepRow, String>,
}

impl SweepRecord {
    pub fn row(&self) -> Option<&SweepRow> {
        self.outcome.as_ref().ok()
    }
}

/// Channels, geometry and input pulse resolved once from a config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub seed_channel: MediumChannel<f64>,
    pub conjugate_channel: MediumChannel<f64>,
    pub geometry: FourWmGeometry<f64>,
    pub reference: SampledTrace<f64>,
    pub measurability: f64,
    pub wraparound: f64,
}

impl Setup {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            seed_channel: config.seed_channel()?,
            conjugate_channel: config.conjugate_channel()?,
            geometry: config.geometry()?,
            reference: synthesize(&config.pulse_spec()?, &config.grid_spec()?)?,
            measurability: config.thresholds.measurability,
            wraparound: config.thresholds.wraparound,
        })
    }

    /// Amplified seed and stimulated conjugate at δ (Hz), as magnitudes.
    pub fn simulate(&self, two_photon_detuning: f64) -> Result<(SampledTrace<f64>, SampledTrace<f64>)> {
        let geometry = self.geometry.with_detuning(two_photon_detuning);
        let (seed_det, _) = channel_detunings(&geometry, two_photon_detuning);
        let seed = propagate_field(
            &self.reference.to_envelope(),
            &self.seed_channel.at_carrier(seed_det),
            self.wraparound,
        )?;
        let conjugate =
            stimulate_conjugate_with_limit(&self.reference, &geometry, &self.conjugate_channel, self.wraparound)?;
        Ok((seed.output, conjugate.output))
    }

    pub fn row(&self, two_photon_detuning: f64) -> Result<(SweepRow, SampledTrace<f64>, SampledTrace<f64>)> {
        let (seed, conjugate) = self.simulate(two_photon_detuning)?;
        let length = self.seed_channel.length;
        let ms = advancement(&seed, &self.reference, length)?;
        let conjugate_gain = peak_power_ratio(&conjugate, &self.reference)?;
        let mc = if conjugate_gain > 0.0 {
            advancement(&conjugate, &self.reference, self.conjugate_channel.length)?
        } else {
            dark_metrics()
        };
        let geometry = self.geometry.with_detuning(two_photon_detuning);
        let row = SweepRow {
            two_photon_detuning,
            seed_frequency: geometry.seed_frequency(),
            conjugate_frequency: geometry.conjugate_frequency(),
            seed_advance: ms.peak_advance,
            conjugate_advance: mc.peak_advance,
            seed_relative_advance: ms.relative_advance,
            conjugate_relative_advance: mc.relative_advance,
            seed_gain: ms.intensity_gain,
            conjugate_gain,
            conjugate_measurable: conjugate_gain >= self.measurability,
            distortions: (ms.distortion, mc.distortion),
            conjugate_lead: mc.peak_advance - ms.peak_advance,
        };
        Ok((row, seed, conjugate))
    }
}

fn dark_metrics() -> AdvancementMetrics<f64> {
    AdvancementMetrics {
        peak_advance: f64::NAN,
        relative_advance: f64::NAN,
        intensity_gain: 0.0,
        fwhm_out: f64::NAN,
        fwhm_ref: f64::NAN,
        distortion: f64::NAN,
        group_velocity: f64::NAN,
        tie: false,
    }
}

fn peak_power_ratio(output: &SampledTrace<f64>, reference: &SampledTrace<f64>) -> Result<f64> {
    let out = output.samples.iter().cloned().fold(0.0, f64::max);
    if out == 0.0 {
        return Ok(0.0);
    }
    let p_out = peak_time(output)?.value;
    let p_ref = peak_time(reference)?.value;
    Ok((p_out * p_out) / (p_ref * p_ref))
}

/// Runs the configured δ grid; rows are computed in parallel and returned sorted by δ.
pub fn run_detuning_sweep(config: &RunConfig) -> Result<Vec<SweepRecord>> {
    let detunings: Vec<f64> = config.sweep.detunings_mhz().iter().map(|d| d * 1e6).collect();
    run_sweep_at(config, &detunings)
}

/// Sweep over explicit detunings (Hz), in any order.
pub fn run_sweep_at(config: &RunConfig, detunings: &[f64]) -> Result<Vec<SweepRecord>> {
    let setup = Setup::new(config)?;
    let mut records: Vec<SweepRecord> = detunings
        .par_iter()
        .map(|&d| SweepRecord {
            two_photon_detuning: d,
            outcome: setup.row(d).map(|r| r.0).map_err(|e| e.to_string()),
        })
        .collect();
    records.sort_by(|a, b| a.two_photon_detuning.total_cmp(&b.two_photon_detuning));
    Ok(records)
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "delta_hz",
    "seed_frequency_hz",
    "conjugate_frequency_hz",
    "seed_advance_s",
    "conjugate_advance_s",
    "seed_relative_advance",
    "conjugate_relative_advance",
    "seed_gain",
    "conjugate_gain",
    "conjugate_measurable",
    "seed_distortion",
    "conjugate_distortion",
    "conjugate_lead_s",
    "error",
];

/// Sweep table with a preamble stating the seed/conjugate mode separation.
pub fn sweep_table(config: &RunConfig, records: &[SweepRecord]) -> Result<Table> {
    let g = config.geometry()?.with_detuning(0.0);
    let separation = g.seed_frequency() - g.conjugate_frequency();
    if (separation - 2.0 * g.seed_offset).abs() > 1e-9 * g.seed_offset.abs() {
        return Err(Error::invalid("geometry", "seed/conjugate separation is not twice the seed offset"));
    }
    let mut table = Table::new(SWEEP_COLUMNS);
    table.preamble = vec![
        "detuning sweep: advances in seconds, positive = earlier than the reference".into(),
        format!(
            "pump {} Hz, seed offset {} Hz, coupling {}",
            Value::Float(g.pump_frequency()),
            Value::Float(g.seed_offset),
            Value::Float(g.coupling)
        ),
        format!(
            "seed-conjugate separation at delta = 0: {} Hz (= 2 x seed offset)",
            Value::Float(separation)
        ),
        format!("measurability threshold {}", Value::Float(config.thresholds.measurability)),
    ];
    for rec in records {
        let row = match &rec.outcome {
            Ok(r) => vec![
                r.two_photon_detuning.into(),
                r.seed_frequency.into(),
                r.conjugate_frequency.into(),
                r.seed_advance.into(),
                r.conjugate_advance.into(),
                r.seed_relative_advance.into(),
                r.conjugate_relative_advance.into(),
                r.seed_gain.into(),
                r.conjugate_gain.into(),
                r.conjugate_measurable.into(),
                r.distortions.0.into(),
                r.distortions.1.into(),
                r.conjugate_lead.into(),
                "".into(),
            ],
            Err(msg) => {
                let mut cells: Vec<Value> = vec![rec.two_photon_detuning.into()];
                cells.extend((1..13).map(|_| Value::Float(f64::NAN)));
                cells.push(msg.clone().into());
                cells
            }
        };
        table.push(row)?;
    }
    Ok(table)
}

/// Peak-normalized reference, amplified seed and conjugate at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePair {
    pub reference: SampledTrace<f64>,
    pub seed: SampledTrace<f64>,
    pub conjugate: SampledTrace<f64>,
    /// Peak amplitudes before normalization, `(reference, seed, conjugate)`.
    pub peak_amplitudes: (f64, f64, f64),
    pub row: SweepRow,
}

impl TracePair {
    /// Conjugate peak amplitude as a fraction of the reference peak.
    pub fn conjugate_amplitude_ratio(&self) -> f64 {
        self.peak_amplitudes.2 / self.peak_amplitudes.0
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["time_s", "reference", "seed", "conjugate"]);
        let (r, s, c) = self.peak_amplitudes;
        table.preamble = vec![
            format!("delta {} Hz; traces normalized to unit peak", Value::Float(self.row.two_photon_detuning)),
            format!(
                "peak amplitudes: reference {}, seed {}, conjugate {}",
                Value::Float(r),
                Value::Float(s),
                Value::Float(c)
            ),
            format!(
                "advance: seed {} s, conjugate {} s",
                Value::Float(self.row.seed_advance),
                Value::Float(self.row.conjugate_advance)
            ),
        ];
        table.rows = self
            .reference
            .times()
            .enumerate()
            .map(|(i, t)| {
                vec![
                    t.into(),
                    self.reference.samples[i].into(),
                    self.seed.samples[i].into(),
                    self.conjugate.samples[i].into(),
                ]
            })
            .collect();
        table
    }
}

fn normalized(trace: &SampledTrace<f64>) -> (SampledTrace<f64>, f64) {
    let peak = trace.samples.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        let samples = trace.samples.iter().map(|s| s / peak).collect();
        (SampledTrace { samples, ..trace.clone() }, peak)
    } else {
        (trace.clone(), 0.0)
    }
}

/// Trace triple at δ (Hz).
pub fn run_trace_pair(config: &RunConfig, two_photon_detuning: f64) -> Result<TracePair> {
    let setup = Setup::new(config)?;
    let (row, seed, conjugate) = setup.row(two_photon_detuning)?;
    let (reference, r) = normalized(&setup.reference);
    let (seed, s) = normalized(&seed);
    let (conjugate, c) = normalized(&conjugate);
    Ok(TracePair {
        reference,
        seed,
        conjugate,
        peak_amplitudes: (r, s, c),
        row,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxAdvance {
    /// Optimal δ (Hz).
    pub two_photon_detuning: f64,
    pub conjugate_advance: f64,
    pub conjugate_distortion: f64,
    pub conjugate_measurable: bool,
}

/// Grid search over the configured δ grid for the largest conjugate advancement
/// with distortion at most `distortion_cap`. Ties go to the smaller `|δ|`.
pub fn search_max_advance(config: &RunConfig, distortion_cap: f64) -> Result<MaxAdvance> {
    if !(distortion_cap >= 0.0) {
        return Err(Error::invalid("distortion_cap", "must be non-negative"));
    }
    let records = run_detuning_sweep(config)?;
    select_max_advance(&records, distortion_cap)
}

pub fn select_max_advance(records: &[SweepRecord], distortion_cap: f64) -> Result<MaxAdvance> {
    records
        .iter()
        .filter_map(SweepRecord::row)
        .filter(|r| r.distortions.1 <= distortion_cap && r.conjugate_advance.is_finite())
        .fold(None::<&SweepRow>, |best, r| match best {
            Some(b)
                if b.conjugate_advance > r.conjugate_advance
                    || (b.conjugate_advance == r.conjugate_advance
                        && b.two_photon_detuning.abs() <= r.two_photon_detuning.abs()) =>
            {
                Some(b)
            }
            _ => Some(r),
        })
        .map(|r| MaxAdvance {
            two_photon_detuning: r.two_photon_detuning,
            conjugate_advance: r.conjugate_advance,
            conjugate_distortion: r.distortions.1,
            conjugate_measurable: r.conjugate_measurable,
        })
        .ok_or(Error::NoFeasibleDetuning(distortion_cap))
}

/// Largest first-order conjugate advancement over all δ (Hz), with its location.
pub fn peak_conjugate_advancement(channel: &MediumChannel<f64>) -> (f64, f64) {
    let adv = |delta: f64| -channel.group_delay_analytic(-std::f64::consts::TAU * delta);
    let (mut best_d, mut best) = (0.0, f64::NEG_INFINITY);
    for i in -4000..=4000 {
        let d = i as f64 * 0.05e6;
        let a = adv(d);
        if a > best {
            best = a;
            best_d = d;
        }
    }
    let (d, a) = golden_max(adv, best_d - 0.05e6, best_d + 0.05e6, 1e-3);
    if a > best {
        (d, a)
    } else {
        (best_d, best)
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingCalibration {
    /// Absorption-line center relative to the gain line (MHz).
    pub spacing_mhz: f64,
    pub peak_advance: f64,
    /// δ (Hz) at which the peak occurs.
    pub peak_detuning: f64,
}

/// Places the conjugate channel's second line so that the peak first-order
/// conjugate advancement comes as close as possible to `target_advance`.
///
/// The search covers spacings in `[0, 4 γ_gain]` and minimizes
/// `|peak − target|`; when the target is out of reach this is the spacing of
/// largest advancement.
pub fn calibrate_line_spacing(config: &RunConfig, target_advance: f64) -> Result<SpacingCalibration> {
    let base = config.conjugate_channel()?;
    if base.lines.len() != 2 {
        return Err(Error::invalid("conjugate_channel.lines", "calibration needs exactly two lines"));
    }
    let gain_hwhm_mhz = config.conjugate_channel.lines[0].hwhm_mhz;
    let peak_at = |spacing_mhz: f64| {
        let mut ch = base.clone();
        ch.lines[1].center_detuning = ch.lines[0].center_detuning + mhz_to_rad(spacing_mhz);
        peak_conjugate_advancement(&ch)
    };
    let miss = |s: f64| -(peak_at(s).1 - target_advance).abs();
    let hi = 4.0 * gain_hwhm_mhz;
    let (mut best_s, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..=400 {
        let s = hi * i as f64 / 400.0;
        let m = miss(s);
        if m > best {
            best = m;
            best_s = s;
        }
    }
    let step = hi / 400.0;
    let (s, _) = golden_max(miss, (best_s - step).max(0.0), best_s + step, 1e-7);
    let (peak_detuning, peak_advance) = peak_at(s);
    Ok(SpacingCalibration {
        spacing_mhz: s,
        peak_advance,
        peak_detuning,
    })
}

/// κ giving a conjugate peak amplitude of `target_ratio` times the reference
/// at δ (Hz). The conjugate is linear in κ, so one unit-κ run suffices.
pub fn calibrate_coupling(config: &RunConfig, two_photon_detuning: f64, target_ratio: f64) -> Result<f64> {
    if !(target_ratio > 0.0) {
        return Err(Error::invalid("target_ratio", "must be positive"));
    }
    let mut unit = config.clone();
    unit.geometry.coupling = 1.0;
    let setup = Setup::new(&unit)?;
    let (_, conjugate) = setup.simulate(two_photon_detuning)?;
    let ratio = peak_time(&conjugate)?.value / peak_time(&setup.reference)?.value;
    Ok(target_ratio / ratio)
}
