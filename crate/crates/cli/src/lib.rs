//! `fastlight` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 numeric failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fastlight::experiments::{run_detuning_sweep, run_trace_pair, search_max_advance, sweep_table, Setup};
use fastlight::fit::{fit_lineshape, fit_log_law, LineshapeBounds};
use fastlight::io::{self, load_trace, read_numeric, Table, Value};
use fastlight::metrics::{advancement, advancement_with_uncertainty};
use fastlight::scalar::{mhz_to_rad, rad_to_mhz};
use fastlight::{load_config, Error, RunConfig, SampledTrace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "fastlight", version, about = "Fast-light pulse propagation in four-wave-mixing media")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Config file, or `default` for the shipped defaults.
    #[arg(long, default_value = "default")]
    config: PathBuf,
    /// Output table; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate the configured pulse at one detuning; writes raw seed and conjugate traces.
    Propagate {
        #[command(flatten)]
        common: Common,
        /// Two-photon detuning in MHz (defaults to the config value).
        #[arg(long, allow_hyphen_values = true)]
        delta_mhz: Option<f64>,
    },
    /// Detuning sweep of seed and conjugate advancement.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Peak-normalized reference, seed and conjugate traces.
    Traces {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        delta_mhz: Option<f64>,
    },
    /// Fit line parameters to a `detuning_mhz, intensity_gain` spectrum.
    FitLineshape {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Channel whose lines seed the fit.
        #[arg(long, default_value = "conjugate", value_parser = ["seed", "conjugate"])]
        channel: String,
    },
    /// Fit advancement against ln(power) from a `power, advancement_s` table.
    FitPower {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
    },
    /// Advancement metrics from two measured traces.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Trace values are detected power; converted to amplitude first.
        #[arg(long)]
        detected_power: bool,
        /// Bootstrap draws for the one-sigma uncertainty.
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Largest conjugate advancement whose distortion stays within the cap.
    SearchMax {
        #[command(flatten)]
        common: Common,
        /// Distortion cap (defaults to the config threshold).
        #[arg(long, allow_hyphen_values = true)]
        cap: Option<f64>,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn emit(table: &Table, out: &Option<PathBuf>) -> fastlight::Result<()> {
    match out {
        Some(path) => io::write_table(path, table),
        None => {
            std::io::stdout().write_all(&table.to_bytes()?)?;
            Ok(())
        }
    }
}

fn detuning_hz(cfg: &RunConfig, delta_mhz: Option<f64>) -> fastlight::Result<f64> {
    let d = delta_mhz.unwrap_or(cfg.geometry.two_photon_detuning_mhz);
    if !d.is_finite() {
        return Err(Error::invalid("delta_mhz", "must be finite"));
    }
    Ok(d * 1e6)
}

fn metric_rows(table: &mut Table, prefix: &str, m: &fastlight::AdvancementMetrics) -> fastlight::Result<()> {
    for (name, v) in [
        ("peak_advance_s", m.peak_advance),
        ("relative_advance", m.relative_advance),
        ("intensity_gain", m.intensity_gain),
        ("fwhm_out_s", m.fwhm_out),
        ("fwhm_ref_s", m.fwhm_ref),
        ("distortion", m.distortion),
        ("group_velocity_m_per_s", m.group_velocity),
    ] {
        table.push(vec![format!("{prefix}{name}").into(), v.into()])?;
    }
    Ok(())
}

fn dispatch(command: Command) -> fastlight::Result<()> {
    match command {
        Command::Propagate { common, delta_mhz } => {
            let cfg = load_config(&common.config)?;
            let setup = Setup::new(&cfg)?;
            let delta = detuning_hz(&cfg, delta_mhz)?;
            let (row, seed, conjugate) = setup.row(delta)?;
            let mut table = Table::new(["time_s", "reference", "seed", "conjugate"]);
            table.preamble = vec![
                format!("delta {} Hz", Value::Float(delta)),
                format!(
                    "seed advance {} s, gain {}; conjugate advance {} s, peak power ratio {}",
                    Value::Float(row.seed_advance),
                    Value::Float(row.seed_gain),
                    Value::Float(row.conjugate_advance),
                    Value::Float(row.conjugate_gain)
                ),
            ];
            let r = &setup.reference;
            table.rows = r
                .times()
                .enumerate()
                .map(|(i, t)| vec![t.into(), r.samples[i].into(), seed.samples[i].into(), conjugate.samples[i].into()])
                .collect();
            emit(&table, &common.out)
        }
        Command::Sweep { common } => {
            let cfg = load_config(&common.config)?;
            let records = run_detuning_sweep(&cfg)?;
            emit(&sweep_table(&cfg, &records)?, &common.out)
        }
        Command::Traces { common, delta_mhz } => {
            let cfg = load_config(&common.config)?;
            let pair = run_trace_pair(&cfg, detuning_hz(&cfg, delta_mhz)?)?;
            emit(&pair.to_table(), &common.out)
        }
        Command::FitLineshape { common, data, channel } => {
            let cfg = load_config(&common.config)?;
            let initial = if channel == "seed" {
                cfg.seed_channel()?
            } else {
                cfg.conjugate_channel()?
            };
            let table = read_numeric(&data)?;
            if table.n_columns() != 2 {
                return Err(Error::invalid("data", "expected two columns: detuning_mhz, intensity_gain"));
            }
            let samples: Vec<(f64, f64)> = table.rows.iter().map(|r| (mhz_to_rad(r[0]), r[1])).collect();
            let fit = fit_lineshape(&samples, &initial, &LineshapeBounds::unbounded(initial.lines.len()))?;
            let mut out = Table::new(["parameter", "value", "sigma"]);
            out.preamble = vec![
                "paper-facing units: alpha_per_m (negative = gain), gamma_mhz (HWHM), center_mhz".into(),
                format!(
                    "converged {} after {} iterations, log-gain residual rms {}",
                    fit.converged,
                    fit.iterations,
                    Value::Float(fit.residual_rms)
                ),
            ];
            if !fit.degenerate_components.is_empty() {
                out.preamble.push(format!("degenerate component(s): {:?}", fit.degenerate_components));
            }
            for (j, line) in fit.channel.lines.iter().enumerate() {
                let s = &fit.parameter_sigmas[3 * j..3 * j + 3];
                out.push(vec![format!("alpha_per_m_{j}").into(), (-line.strength).into(), s[0].into()])?;
                out.push(vec![format!("gamma_mhz_{j}").into(), rad_to_mhz(line.hwhm).into(), rad_to_mhz(s[1]).into()])?;
                out.push(vec![
                    format!("center_mhz_{j}").into(),
                    rad_to_mhz(line.center_detuning).into(),
                    rad_to_mhz(s[2]).into(),
                ])?;
            }
            emit(&out, &common.out)
        }
        Command::FitPower { common, data } => {
            load_config(&common.config)?;
            let table = read_numeric(&data)?;
            if table.n_columns() != 2 {
                return Err(Error::invalid("data", "expected two columns: power, advancement_s"));
            }
            let points: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[0], r[1])).collect();
            let fit = fit_log_law(&points)?;
            let mut out = Table::new(["parameter", "value"]);
            out.preamble = vec!["advancement = offset + slope * ln(power / reference_power)".into()];
            for (name, v) in [
                ("offset_s", fit.offset),
                ("slope_s", fit.slope),
                ("reference_power", fit.reference_power),
                ("residual_rms_s", fit.residual_rms),
            ] {
                out.push(vec![name.into(), v.into()])?;
            }
            emit(&out, &common.out)
        }
        Command::Analyze {
            common,
            reference,
            output,
            detected_power,
            draws,
            seed,
        } => {
            let cfg = load_config(&common.config)?;
            let length = cfg.seed_channel.length_m;
            let mut r = load_trace(&reference)?;
            let mut o = load_trace(&output)?;
            if detected_power {
                r = to_amplitude(&r);
                o = to_amplitude(&o);
            }
            if !o.same_grid(&r) {
                return Err(Error::GridMismatch);
            }
            let measured = advancement_with_uncertainty(&o, &r, length, draws, seed)?;
            let mut out = Table::new(["quantity", "value"]);
            out.preamble = vec![format!("bootstrap draws {}", measured.draws)];
            metric_rows(&mut out, "", &measured.metrics)?;
            out.push(vec!["peak_advance_sigma_s".into(), measured.advance_sigma.into()])?;
            debug_assert_eq!(measured.metrics, advancement(&o, &r, length)?);
            emit(&out, &common.out)
        }
        Command::SearchMax { common, cap } => {
            let cfg = load_config(&common.config)?;
            let cap = cap.unwrap_or(cfg.thresholds.distortion_cap);
            let best = search_max_advance(&cfg, cap)?;
            let mut out = Table::new(["quantity", "value"]);
            out.preamble = vec![format!("distortion cap {}", Value::Float(cap))];
            out.push(vec!["delta_hz".into(), best.two_photon_detuning.into()])?;
            out.push(vec!["conjugate_advance_s".into(), best.conjugate_advance.into()])?;
            out.push(vec!["conjugate_distortion".into(), best.conjugate_distortion.into()])?;
            out.push(vec!["conjugate_measurable".into(), best.conjugate_measurable.into()])?;
            emit(&out, &common.out)
        }
    }
}

fn to_amplitude(trace: &SampledTrace) -> SampledTrace {
    SampledTrace {
        samples: trace.samples.iter().map(|p| p.max(0.0).sqrt()).collect(),
        ..trace.clone()
    }
}
