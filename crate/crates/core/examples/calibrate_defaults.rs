//! Recomputes the two calibrated constants of `configs/default.toml`:
//! the conjugate channel's absorption-line center and the coupling κ.
//!
//! Run with `cargo run --release -p fastlight --example calibrate_defaults`.

use fastlight::experiments::{calibrate_coupling, calibrate_line_spacing, run_detuning_sweep};
use fastlight::RunConfig;

const TARGET_ADVANCE: f64 = 50e-9;
const FIG2_DETUNING: f64 = 23e6;
const TARGET_AMPLITUDE_RATIO: f64 = 0.2;

fn main() -> fastlight::Result<()> {
    let mut cfg = RunConfig::default_config();
    let spacing = calibrate_line_spacing(&cfg, TARGET_ADVANCE)?;
    println!("absorption center      {:.6} MHz", spacing.spacing_mhz);
    println!("peak first-order adv.  {:.4} ns at delta = {:.4} MHz (target {:.1} ns)",
        spacing.peak_advance * 1e9, spacing.peak_detuning * 1e-6, TARGET_ADVANCE * 1e9);
    cfg.conjugate_channel.lines[1].center_mhz = spacing.spacing_mhz;
    let kappa = calibrate_coupling(&cfg, FIG2_DETUNING, TARGET_AMPLITUDE_RATIO)?;
    println!("coupling               {kappa:.6}");
    cfg.geometry.coupling = kappa;

    println!("\n  delta_MHz  seed_ns  conj_ns  seed_G  conj_P/ref  measurable  conj_dist");
    for rec in run_detuning_sweep(&cfg)? {
        match rec.outcome {
            Ok(r) => println!(
                "{:10.1} {:8.3} {:8.3} {:7.3} {:10.4} {:>11} {:10.4}",
                r.two_photon_detuning * 1e-6,
                r.seed_advance * 1e9,
                r.conjugate_advance * 1e9,
                r.seed_gain,
                r.conjugate_gain,
                r.conjugate_measurable,
                r.distortions.1
            ),
            Err(e) => println!("{:10.1} error: {e}", rec.two_photon_detuning * 1e-6),
        }
    }
    Ok(())
}
