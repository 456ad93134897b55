//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Tolerances and runtime budgets are fixed here.

use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fastlight::experiments::{run_detuning_sweep, run_trace_pair, search_max_advance, sweep_table, SweepRecord, SweepRow};
use fastlight::fit::{fit_lineshape, fit_log_law, LineshapeBounds, LineshapeModel};
use fastlight::fourwm::{channel_detunings, conjugate_frequency};
use fastlight::medium::{LineComponent, MediumChannel};
use fastlight::metrics::{advance_from_group_velocity, advancement, group_velocity_from_advance, peak_time};
use fastlight::propagate::{propagate_field, propagate_pulse};
use fastlight::pulse::{field_spectrum, synthesize, Envelope, GridSpec, PulseSpec, SampledTrace};
use fastlight::scalar::{mhz_to_rad, SPEED_OF_LIGHT};
use fastlight::RunConfig;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn check(id: &'static str, title: &'static str, budget: Duration, body: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = body();
    let elapsed = start.elapsed();
    Outcome {
        id,
        title,
        pass: pass && elapsed <= budget,
        detail,
        elapsed,
        budget,
    }
}

fn ms(x: u64) -> Duration {
    Duration::from_millis(x)
}

fn sweep_rows(records: &[SweepRecord]) -> Vec<&SweepRow> {
    records.iter().filter_map(SweepRecord::row).collect()
}

fn c1_gain_anchor() -> Outcome {
    let cfg = RunConfig::default_config();
    let channel = cfg.seed_channel().unwrap();
    check("1", "line-center gain exp(2.975) = 19.59 +- 1e-6", ms(1), || {
        let g = channel.intensity_gain(0.0);
        let expected = 2.975_f64.exp();
        (
            (g - expected).abs() <= 1e-6 && channel.lines[0].strength == 175.0,
            format!("G = {g:.9}, expected {expected:.9}"),
        )
    })
}

fn c2_group_velocity() -> Outcome {
    check("2", "50 ns over 1.7 cm -> v_g = -c/880 within 0.5%", ms(1), || {
        let l = 0.017;
        let v = group_velocity_from_advance(50e-9, l);
        let target = -SPEED_OF_LIGHT / 880.0;
        let rel = (v - target).abs() / target.abs();
        let back = advance_from_group_velocity(v, l);
        (
            rel <= 0.005 && (v + 3.40e5).abs() <= 0.005 * 3.40e5 && (back - 50e-9).abs() <= 1e-12 * 50e-9,
            format!("v_g = {v:.5e} m/s (c/{:.1}), rel err {rel:.2e}, inverse {back:.6e} s", SPEED_OF_LIGHT / v),
        )
    })
}

fn c3_mode_separation() -> Outcome {
    let cfg = RunConfig::default_config();
    check("3", "conjugate 6 GHz from seed, stated in sweep header", ms(5000), || {
        let g = cfg.geometry().unwrap();
        let base = g.with_detuning(0.0);
        let exact = conjugate_frequency(base.pump_frequency(), base.seed_frequency());
        let sep = base.seed_frequency() - exact;
        let records = run_detuning_sweep(&cfg).unwrap();
        let rows_ok = sweep_rows(&records)
            .iter()
            .all(|r| r.seed_frequency + r.conjugate_frequency == 2.0 * g.pump_frequency());
        let table = sweep_table(&cfg, &records).unwrap();
        let header = table.preamble.iter().any(|l| l.contains("separation at delta = 0: 6.0000000000000000e9 Hz"));
        (
            sep == 6e9 && rows_ok && header,
            format!("separation {sep:e} Hz, energy conserved on every row {rows_ok}, header {header}"),
        )
    })
}

fn random_channel(rng: &mut ChaCha8Rng) -> MediumChannel<f64> {
    let n = rng.random_range(1..=3);
    let lines = (0..n)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            LineComponent::new(
                mhz_to_rad(rng.random_range(-60.0..60.0)),
                mhz_to_rad(rng.random_range(10.0..40.0)),
                sign * rng.random_range(20.0..200.0),
            )
            .unwrap()
        })
        .collect();
    MediumChannel::new(1.0, 0.017, lines).unwrap()
}

fn c4_dispersion_equivalence() -> Outcome {
    check("4", "group delay = FD of k (1e-6) = peak shift of 1600 ns pulses (1%), 100 channels", ms(30_000), || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = GridSpec::new(16.384e-6, 1 << 14).unwrap();
        let input = synthesize(&PulseSpec::gaussian(1600e-9, 1.0, 8.192e-6).unwrap(), &grid).unwrap();
        let t_in = peak_time(&input).unwrap().time;
        let (mut worst_fd, mut worst_pulse, mut accepted) = (0.0_f64, 0.0_f64, 0);
        while accepted < 100 {
            let ch = random_channel(&mut rng);
            let tau = ch.group_delay_analytic(0.0);
            // skip sub-ns delays
            if tau.abs() < 1e-9 {
                continue;
            }
            accepted += 1;
            let h = ch.lines.iter().map(|l| l.hwhm).fold(f64::INFINITY, f64::min) * 1e-4;
            let fd = ch.length * (ch.evaluate_k(h).re - ch.evaluate_k(-h).re) / (2.0 * h);
            worst_fd = worst_fd.max((fd - tau).abs() / tau.abs());
            let out = propagate_pulse(&input, &ch).unwrap();
            let shift = peak_time(&out.output).unwrap().time - t_in;
            worst_pulse = worst_pulse.max((shift - tau).abs() / tau.abs());
        }
        (
            worst_fd <= 1e-6 && worst_pulse <= 0.01,
            format!("worst FD rel err {worst_fd:.2e}, worst pulse rel err {worst_pulse:.2e}"),
        )
    })
}

fn c5_figure3(sweep: &[SweepRecord], elapsed: Duration) -> Vec<Outcome> {
    let rows = sweep_rows(sweep);
    let complete = rows.len() == 81;
    let budget = ms(10_000);
    let mut out = Vec::new();

    let max = rows.iter().map(|r| r.conjugate_advance).fold(f64::NEG_INFINITY, f64::max);
    let arg = rows.iter().find(|r| r.conjugate_advance == max).map_or(f64::NAN, |r| r.two_photon_detuning);
    let mut run = 0;
    let mut longest = 0;
    for r in &rows {
        run = if r.conjugate_advance > 0.0 { run + 1 } else { 0 };
        longest = longest.max(run);
    }
    out.push(Outcome {
        id: "5a",
        title: "conjugate advancement positive over a broad window, max 50 ns +- 10%",
        pass: complete && longest >= 10 && (max - 50e-9).abs() <= 5e-9 && elapsed <= budget,
        detail: format!(
            "max {:.3} ns at delta {:.0} MHz; longest positive run {longest} points",
            max * 1e9,
            arg * 1e-6
        ),
        elapsed,
        budget,
    });

    let first_measurable = rows.iter().find(|r| r.conjugate_measurable).map(|r| r.two_photon_detuning);
    let (pass_b, detail_b) = match first_measurable {
        Some(d) => {
            let below_dark = rows.iter().filter(|r| r.two_photon_detuning < d).all(|r| !r.conjugate_measurable);
            let prev = rows.iter().map(|r| r.two_photon_detuning).filter(|&x| x < d).fold(f64::NAN, f64::max);
            let edge = if prev.is_nan() { d } else { 0.5 * (prev + d) };
            (
                below_dark && (edge + 20e6).abs() <= 5e6,
                format!("unmeasurable below {:.1} MHz", edge * 1e-6),
            )
        }
        None => (false, "never measurable".into()),
    };
    out.push(Outcome {
        id: "5b",
        title: "conjugate unmeasurable below delta = -20 +- 5 MHz",
        pass: complete && pass_b && elapsed <= budget,
        detail: detail_b,
        elapsed,
        budget,
    });

    let region: Vec<f64> = rows
        .iter()
        .filter(|r| r.conjugate_measurable && r.seed_advance > 0.0 && r.conjugate_advance > 0.0 && r.conjugate_lead > 0.0)
        .map(|r| r.two_photon_detuning * 1e-6)
        .collect();
    out.push(Outcome {
        id: "5c",
        title: "a delta region with both pulses advanced and the conjugate leading",
        pass: complete && !region.is_empty() && elapsed <= budget,
        detail: match (region.first(), region.last()) {
            (Some(a), Some(b)) => format!("{} points in [{a:.0}, {b:.0}] MHz", region.len()),
            _ => "none".into(),
        },
        elapsed,
        budget,
    });
    out
}

fn c6_figure2() -> Vec<Outcome> {
    let cfg = RunConfig::default_config();
    let start = Instant::now();
    let pair = run_trace_pair(&cfg, 23e6).unwrap();
    let elapsed = start.elapsed();
    let budget = ms(1000);
    let fwhm = cfg.pulse.fwhm_s;
    let ratio = pair.conjugate_amplitude_ratio();
    let rel = pair.row.conjugate_advance / fwhm;
    let lead = pair.row.conjugate_lead / fwhm;
    vec![
        Outcome {
            id: "6a",
            title: "delta 23 MHz: conjugate peak 20% +- 5% of reference",
            pass: (ratio - 0.20).abs() <= 0.05 && elapsed <= budget,
            detail: format!("{:.2}%", ratio * 100.0),
            elapsed,
            budget,
        },
        Outcome {
            id: "6b",
            title: "delta 23 MHz: conjugate advancement 25% +- 3% of FWHM",
            pass: (rel - 0.25).abs() <= 0.03 && elapsed <= budget,
            detail: format!("{:.3}% ({:.3} ns)", rel * 100.0, pair.row.conjugate_advance * 1e9),
            elapsed,
            budget,
        },
        Outcome {
            id: "6c",
            title: "delta 23 MHz: conjugate 8% +- 3% of FWHM ahead of seed",
            pass: (lead - 0.08).abs() <= 0.03 && elapsed <= budget,
            detail: format!("{:.3}% ({:.3} ns)", lead * 100.0, pair.row.conjugate_lead * 1e9),
            elapsed,
            budget,
        },
    ]
}

fn c7_fit_recovery() -> Outcome {
    check("7", "two-line fits recover six parameters within 1% over 50 noisy trials", ms(60_000), || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let length = 0.017;
        let mut worst = 0.0_f64;
        let mut all_converged = true;
        for _ in 0..50 {
            let gain_hwhm = rng.random_range(15.0..30.0);
            let abs_hwhm = rng.random_range(15.0..30.0);
            let truth = [
                (0.0, gain_hwhm, rng.random_range(120.0..220.0)),
                (rng.random_range(25.0..45.0), abs_hwhm, -rng.random_range(60.0..130.0)),
            ];
            let lines: Vec<_> = truth
                .iter()
                .map(|&(c, g, s)| LineComponent::new(mhz_to_rad(c), mhz_to_rad(g), s).unwrap())
                .collect();
            let ch = MediumChannel::new(1.0, length, lines).unwrap();
            let data: Vec<(f64, f64)> = (0..=400)
                .map(|i| {
                    let d = mhz_to_rad(-100.0 + 0.5 * i as f64);
                    (d, ch.intensity_gain(d) * (1.0 + 1e-3 * rng.random_range(-1.0..1.0) * 3f64.sqrt()))
                })
                .collect();
            let mut init = ch.clone();
            for l in &mut init.lines {
                l.strength *= rng.random_range(0.8..1.2);
                l.hwhm *= rng.random_range(0.8..1.2);
                l.center_detuning += l.hwhm * rng.random_range(-0.2..0.2);
            }
            let fit = fit_lineshape(&data, &init, &LineshapeBounds::unbounded(2)).unwrap();
            all_converged &= fit.converged;
            for (t, f) in ch.lines.iter().zip(&fit.channel.lines) {
                worst = worst
                    .max(((f.strength - t.strength) / t.strength).abs())
                    .max(((f.hwhm - t.hwhm) / t.hwhm).abs())
                    .max(((f.center_detuning - t.center_detuning) / t.hwhm).abs());
            }
        }
        // analytic Jacobian against central differences
        let model = LineshapeModel { length, n_lines: 2 };
        let mut worst_jac = 0.0_f64;
        for _ in 0..200 {
            let p = [
                rng.random_range(20.0..300.0),
                mhz_to_rad(rng.random_range(5.0..50.0)),
                mhz_to_rad(rng.random_range(-40.0..40.0)),
                -rng.random_range(20.0..300.0),
                mhz_to_rad(rng.random_range(5.0..50.0)),
                mhz_to_rad(rng.random_range(-40.0..40.0)),
            ];
            let d = mhz_to_rad(rng.random_range(-100.0..100.0));
            let mut grad = [0.0; 6];
            model.gradient(&p, d, &mut grad);
            for j in 0..6 {
                let h = p[j].abs().max(mhz_to_rad(1.0)) * 1e-6;
                let (mut hi, mut lo) = (p, p);
                hi[j] += h;
                lo[j] -= h;
                let fd = (model.log_gain(&hi, d) - model.log_gain(&lo, d)) / (2.0 * h);
                let line = j / 3;
                let s = p[3 * line].abs();
                let per_unit = if j % 3 == 0 { 1.0 } else { s / p[3 * line + 1] };
                worst_jac = worst_jac.max((fd - grad[j]).abs() / (length * per_unit));
            }
        }
        (
            worst <= 0.01 && all_converged && worst_jac <= 1e-6,
            format!("worst parameter error {:.3}%, all converged {all_converged}, worst Jacobian err {worst_jac:.1e}", worst * 100.0),
        )
    })
}

fn c8_properties() -> Outcome {
    check("8", "DFT round trip, Parseval, linearity, shift equivariance, mirror antisymmetry, determinism", ms(60_000), || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = GridSpec::new(4e-6, 4096).unwrap();
        let mut notes = Vec::new();
        let mut ok = true;

        let (mut rt, mut pv) = (0.0_f64, 0.0_f64);
        for _ in 0..20 {
            let samples: Vec<Complex<f64>> = (0..4096)
                .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let env = Envelope { t_start: 0.0, dt: grid.dt(), samples };
            let spec = field_spectrum(&env).unwrap();
            let back = spec.to_envelope().unwrap();
            let norm = env.energy().sqrt();
            let err = env.samples.iter().zip(&back.samples).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            rt = rt.max(err / norm);
            pv = pv.max((spec.energy() - env.energy()).abs() / env.energy());
        }
        ok &= rt <= 1e-12 && pv <= 1e-10;
        notes.push(format!("round trip {rt:.1e}, Parseval {pv:.1e}"));

        let mut lin = 0.0_f64;
        for _ in 0..10 {
            let ch = random_channel(&mut rng);
            let x = synthesize(&PulseSpec::gaussian(200e-9, 1.0, 2e-6).unwrap(), &grid).unwrap().to_envelope();
            let y = synthesize(&PulseSpec::gaussian(300e-9, 1.0, rng.random_range(1.7e-6..2.3e-6)).unwrap(), &grid)
                .unwrap()
                .to_envelope();
            let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let combo = Envelope {
                samples: x.samples.iter().zip(&y.samples).map(|(p, q)| *p * a + *q * b).collect(),
                ..x.clone()
            };
            let o = propagate_field(&combo, &ch, 1.0).unwrap().output_field;
            let ox = propagate_field(&x, &ch, 1.0).unwrap().output_field;
            let oy = propagate_field(&y, &ch, 1.0).unwrap().output_field;
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..o.len() {
                let e = ox.samples[i] * a + oy.samples[i] * b;
                num += (o.samples[i] - e).norm_sqr();
                den += e.norm_sqr();
            }
            lin = lin.max((num / den).sqrt());
        }
        ok &= lin <= 1e-10;
        notes.push(format!("linearity {lin:.1e}"));

        let mut shift_err = 0.0_f64;
        for _ in 0..20 {
            let fwhm = rng.random_range(150e-9..300e-9);
            let t0 = rng.random_range(1.5e-6..2.5e-6);
            let k = rng.random_range(-100..100);
            let out = synthesize(&PulseSpec::gaussian(fwhm * 1.1, 2.0, t0 - 20e-9).unwrap(), &grid).unwrap();
            let reference = synthesize(&PulseSpec::gaussian(fwhm, 1.0, t0).unwrap(), &grid).unwrap();
            let moved = |t: &SampledTrace<f64>| SampledTrace {
                t_start: t.t_start + k as f64 * t.dt,
                ..t.clone()
            };
            let m0 = advancement(&out, &reference, 0.017).unwrap();
            let m1 = advancement(&moved(&out), &moved(&reference), 0.017).unwrap();
            shift_err = shift_err
                .max((m0.peak_advance - m1.peak_advance).abs() / grid.dt())
                .max((m0.distortion - m1.distortion).abs());
        }
        ok &= shift_err <= 1e-6;
        notes.push(format!("shift equivariance {shift_err:.1e}"));

        let cfg = RunConfig::default_config();
        let g = cfg.geometry().unwrap();
        let mirror = (0..100).all(|_| {
            let d = rng.random_range(-1e8..1e8);
            let (a, b) = channel_detunings(&g, d);
            let (c, e) = channel_detunings(&g, -d);
            a == -c && b == -e && a == -b
        });
        ok &= mirror;
        notes.push(format!("mirror antisymmetry {mirror}"));

        let t1 = sweep_table(&cfg, &run_detuning_sweep(&cfg).unwrap()).unwrap().to_bytes().unwrap();
        let t2 = sweep_table(&cfg, &run_detuning_sweep(&cfg).unwrap()).unwrap().to_bytes().unwrap();
        ok &= t1 == t2;
        notes.push(format!("sweep bytes identical {}", t1 == t2));
        (ok, notes.join(", "))
    })
}

fn c9_structural() -> Outcome {
    check("9", "structural only: log-law fit on digitized-style data, advancement grows as the cap loosens", ms(60_000), || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
            .iter()
            .map(|&p: &f64| (p, 45e-9 - 5e-9 * (p / 50.0).ln() + 1e-9 * rng.random_range(-1.0..1.0)))
            .collect();
        let fit = fit_log_law(&points).unwrap();
        let log_ok = fit.slope.is_finite() && fit.slope < 0.0 && fit.residual_rms.is_finite();

        let cfg = RunConfig::default_config();
        let caps = [0.0005, 0.001, 0.002, 0.004, 0.008];
        let best: Vec<f64> = caps
            .iter()
            .map(|&c| search_max_advance(&cfg, c).map_or(f64::NEG_INFINITY, |b| b.conjugate_advance))
            .collect();
        let monotone = best.windows(2).all(|w| w[1] >= w[0]) && best[caps.len() - 1] > best[0];
        (
            log_ok && monotone,
            format!(
                "log-law slope {:.2} ns, rms {:.2} ns; best advance by cap {:?} ns",
                fit.slope * 1e9,
                fit.residual_rms * 1e9,
                best.iter().map(|b| (b * 1e12).round() / 1e3).collect::<Vec<_>>()
            ),
        )
    })
}

fn main() {
    let cfg = RunConfig::default_config();
    let mut outcomes = vec![c1_gain_anchor(), c2_group_velocity(), c3_mode_separation(), c4_dispersion_equivalence()];
    let start = Instant::now();
    let sweep = run_detuning_sweep(&cfg).unwrap();
    outcomes.extend(c5_figure3(&sweep, start.elapsed()));
    outcomes.extend(c6_figure2());
    outcomes.push(c7_fit_recovery());
    outcomes.push(c8_properties());
    outcomes.push(c9_structural());

    println!();
    println!("acceptance criteria");
    for o in &outcomes {
        println!(
            "{} [{:>2}] {} :: {} ({:.1} ms / {} ms)",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail,
            o.elapsed.as_secs_f64() * 1e3,
            o.budget.as_millis()
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
