//! Damped Gauss-Newton (Levenberg-Marquardt) recovery of Lorentzian line
//! parameters from sampled intensity-gain spectra.
//!
//! Residuals are taken in log-gain space, `r_i = ln G_model(Δ_i) − ln G_i`,
//! with `ln G_model = L Σ_j s_j γ_j² / ((Δ − Δ_j)² + γ_j²)`. Parameters are
//! ordered `(strength, hwhm, center)` per line and internally rescaled by
//! their initial magnitudes so the damping acts uniformly.

use crate::error::{Error, Result};
use crate::medium::{LineComponent, MediumChannel};
use crate::scalar::Real;

use super::linalg::{cholesky, cholesky_solve, inverse_diagonal};

/// Lines weaker than this fraction of the strongest are reported degenerate.
pub const DEGENERATE_STRENGTH_RATIO: f64 = 1e-3;

const PARAMS_PER_LINE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    pub max_iterations: usize,
    pub initial_damping: T,
    pub max_damping: T,
    pub relative_tolerance: T,
    pub gradient_tolerance: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_damping: T::lit(1e-3),
            max_damping: T::lit(1e12),
            relative_tolerance: T::lit(1e-10),
            gradient_tolerance: T::lit(1e-12),
        }
    }
}

/// Box constraints, one entry per parameter in `(strength, hwhm, center)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct LineshapeBounds<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> LineshapeBounds<T> {
    /// Only `hwhm > 0` is enforced.
    pub fn unbounded(n_lines: usize) -> Self {
        let mut lower = Vec::with_capacity(n_lines * PARAMS_PER_LINE);
        let mut upper = Vec::with_capacity(n_lines * PARAMS_PER_LINE);
        for _ in 0..n_lines {
            lower.extend([T::neg_infinity(), T::min_positive_value(), T::neg_infinity()]);
            upper.extend([T::infinity(); PARAMS_PER_LINE]);
        }
        Self { lower, upper }
    }

    fn contains(&self, params: &[T]) -> bool {
        params
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(p, (lo, hi))| *p >= *lo && *p <= *hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub params: Vec<(String, T)>,
    pub residual_rms: T,
    pub iterations: usize,
    pub converged: bool,
    pub parameter_sigmas: Vec<T>,
    /// Fitted lines on the initial channel's length and background index.
    pub channel: MediumChannel<T>,
    /// Indices of lines whose strength collapsed below [`DEGENERATE_STRENGTH_RATIO`].
    pub degenerate_components: Vec<usize>,
    /// Cost `½ Σ r²` after each accepted step, starting with the initial cost.
    pub cost_history: Vec<T>,
    pub gradient_norm: T,
}

/// Log-gain model for a fixed number of lines over a fixed length.
#[derive(Debug, Clone, Copy)]
pub struct LineshapeModel<T> {
    pub length: T,
    pub n_lines: usize,
}

impl<T: Real> LineshapeModel<T> {
    pub fn n_params(&self) -> usize {
        self.n_lines * PARAMS_PER_LINE
    }

    pub fn log_gain(&self, params: &[T], detuning: T) -> T {
        params.chunks_exact(PARAMS_PER_LINE).fold(T::zero(), |acc, p| {
            let (s, g, c) = (p[0], p[1], p[2]);
            let x = detuning - c;
            acc + s * g * g / (x * x + g * g)
        }) * self.length
    }

    /// Analytic gradient of [`Self::log_gain`] with respect to the parameters.
    pub fn gradient(&self, params: &[T], detuning: T, out: &mut [T]) {
        let two = T::lit(2.0);
        for (p, o) in params
            .chunks_exact(PARAMS_PER_LINE)
            .zip(out.chunks_exact_mut(PARAMS_PER_LINE))
        {
            let (s, g, c) = (p[0], p[1], p[2]);
            let x = detuning - c;
            let d = x * x + g * g;
            let d2 = d * d;
            o[0] = self.length * g * g / d;
            o[1] = self.length * two * s * g * x * x / d2;
            o[2] = self.length * two * s * g * g * x / d2;
        }
    }

    pub fn params_of(channel: &MediumChannel<T>) -> Vec<T> {
        channel
            .lines
            .iter()
            .flat_map(|l| [l.strength, l.hwhm, l.center_detuning])
            .collect()
    }

    pub fn residuals(&self, params: &[T], samples: &[(T, T)]) -> Vec<T> {
        samples
            .iter()
            .map(|&(d, g)| self.log_gain(params, d) - g.ln())
            .collect()
    }
}

pub fn fit_lineshape<T: Real>(
    samples: &[(T, T)],
    initial: &MediumChannel<T>,
    bounds: &LineshapeBounds<T>,
) -> Result<FitResult<T>> {
    fit_lineshape_with(samples, initial, bounds, &FitOptions::default())
}

pub fn fit_lineshape_with<T: Real>(
    samples: &[(T, T)],
    initial: &MediumChannel<T>,
    bounds: &LineshapeBounds<T>,
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    initial.validate()?;
    let model = LineshapeModel {
        length: initial.length,
        n_lines: initial.lines.len(),
    };
    let n = model.n_params();
    if n == 0 {
        return Err(Error::invalid("initial", "needs at least one line"));
    }
    if samples.len() < 4 * n {
        return Err(Error::InsufficientData {
            need: 4 * n,
            got: samples.len(),
        });
    }
    if let Some(s) = samples.iter().find(|s| !(s.1 > T::zero()) || !s.0.is_finite()) {
        return Err(Error::invalid(
            "samples",
            format!("gains must be positive and detunings finite (got {:?})", s),
        ));
    }
    if bounds.lower.len() != n || bounds.upper.len() != n {
        return Err(Error::invalid("bounds", format!("expected {n} entries")));
    }
    let p0 = LineshapeModel::params_of(initial);
    if !bounds.contains(&p0) {
        return Err(Error::invalid("initial", "initial parameters lie outside the bounds"));
    }

    // u = p / scale; centers are scaled by their line's width
    let scale: Vec<T> = p0
        .chunks_exact(PARAMS_PER_LINE)
        .flat_map(|p| [p[0].abs(), p[1].abs(), p[1].abs()])
        .collect();
    let lower: Vec<T> = bounds.lower.iter().zip(&scale).map(|(b, s)| *b / *s).collect();
    let upper: Vec<T> = bounds.upper.iter().zip(&scale).map(|(b, s)| *b / *s).collect();
    let to_params = |u: &[T]| -> Vec<T> { u.iter().zip(&scale).map(|(a, b)| *a * *b).collect() };
    let cost_of = |u: &[T]| -> T {
        model
            .residuals(&to_params(u), samples)
            .iter()
            .fold(T::zero(), |a, r| a + *r * *r)
            * T::lit(0.5)
    };
    // normal equations in scaled coordinates
    let normal = |u: &[T]| -> (Vec<T>, Vec<T>) {
        let p = to_params(u);
        let mut jtj = vec![T::zero(); n * n];
        let mut jtr = vec![T::zero(); n];
        let mut row = vec![T::zero(); n];
        for &(d, g) in samples {
            model.gradient(&p, d, &mut row);
            row.iter_mut().zip(&scale).for_each(|(r, s)| *r = *r * *s);
            let r = model.log_gain(&p, d) - g.ln();
            for i in 0..n {
                jtr[i] = jtr[i] + row[i] * r;
                for j in 0..=i {
                    jtj[i * n + j] = jtj[i * n + j] + row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                jtj[j * n + i] = jtj[i * n + j];
            }
        }
        (jtj, jtr)
    };
    let norm = |v: &[T]| v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt();

    let mut u: Vec<T> = p0.iter().zip(&scale).map(|(p, s)| *p / *s).collect();
    let mut cost = cost_of(&u);
    let mut cost_history = vec![cost];
    let mut damping = options.initial_damping;
    let mut streak = 0;
    let mut converged = false;
    let mut iterations = 0;
    let (mut jtj, mut jtr) = normal(&u);
    let mut gradient_norm = norm(&jtr);

    while iterations < options.max_iterations {
        iterations += 1;
        if gradient_norm < options.gradient_tolerance {
            // stationary: the null step is accepted
            streak += 1;
            cost_history.push(cost);
            if streak >= 2 {
                converged = true;
                break;
            }
            continue;
        }
        let max_diag = (0..n).map(|i| jtj[i * n + i]).fold(T::zero(), T::max);
        let floor = max_diag * T::lit(1e-15);
        let mut accepted = false;
        let mut stalled = false;
        loop {
            let mut m = jtj.clone();
            for i in 0..n {
                m[i * n + i] = m[i * n + i] + damping * jtj[i * n + i].max(floor);
            }
            let Some(l) = cholesky(&m, n) else {
                damping = damping * T::lit(10.0);
                if damping > options.max_damping {
                    return Err(Error::SingularNormalMatrix(options.max_damping.as_f64()));
                }
                continue;
            };
            let neg: Vec<T> = jtr.iter().map(|g| -*g).collect();
            let step = cholesky_solve(&l, n, &neg);
            let trial: Vec<T> = u
                .iter()
                .zip(&step)
                .enumerate()
                .map(|(i, (a, b))| (*a + *b).max(lower[i]).min(upper[i]))
                .collect();
            let trial_cost = cost_of(&trial);
            if trial_cost <= cost {
                let rel = (cost - trial_cost) / cost.max(T::min_positive_value());
                u = trial;
                cost = trial_cost;
                cost_history.push(cost);
                damping = (damping / T::lit(10.0)).max(T::lit(1e-12));
                accepted = true;
                if rel < options.relative_tolerance {
                    streak += 1;
                } else {
                    streak = 0;
                }
                break;
            }
            damping = damping * T::lit(10.0);
            if damping > options.max_damping {
                stalled = true;
                break;
            }
        }
        if accepted {
            (jtj, jtr) = normal(&u);
            gradient_norm = norm(&jtr);
            if gradient_norm < options.gradient_tolerance {
                streak = streak.max(1);
            }
        }
        if streak >= 2 {
            converged = true;
            break;
        }
        if stalled {
            // damping exhausted
            converged = streak >= 1;
            break;
        }
    }

    let params = to_params(&u);
    let m = samples.len();
    let sigma2 = T::lit(2.0) * cost / T::from_usize(m - n).unwrap();
    let parameter_sigmas = match cholesky(&jtj, n) {
        Some(l) => inverse_diagonal(&l, n)
            .iter()
            .zip(&scale)
            .map(|(v, s)| (sigma2 * *v).sqrt() * *s)
            .collect(),
        None => vec![T::infinity(); n],
    };
    let lines: Vec<LineComponent<T>> = params
        .chunks_exact(PARAMS_PER_LINE)
        .map(|p| LineComponent {
            strength: p[0],
            hwhm: p[1],
            center_detuning: p[2],
        })
        .collect();
    let strongest = lines.iter().map(|l| l.strength.abs()).fold(T::zero(), T::max);
    let degenerate_components = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.strength.abs() < T::lit(DEGENERATE_STRENGTH_RATIO) * strongest)
        .map(|(i, _)| i)
        .collect();
    let names = ["strength", "hwhm", "center"];
    Ok(FitResult {
        params: params
            .iter()
            .enumerate()
            .map(|(i, p)| (format!("{}_{}", names[i % 3], i / 3), *p))
            .collect(),
        residual_rms: (T::lit(2.0) * cost / T::from_usize(m).unwrap()).sqrt(),
        iterations,
        converged,
        parameter_sigmas,
        channel: MediumChannel {
            background_index: initial.background_index,
            length: initial.length,
            lines,
        },
        degenerate_components,
        cost_history,
        gradient_norm,
    })
}
