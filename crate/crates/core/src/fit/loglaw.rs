use crate::error::{Error, Result};
use crate::scalar::Real;

/// `advance(P) = offset + slope · ln(P / reference_power)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLawFit<T> {
    pub offset: T,
    pub slope: T,
    pub reference_power: T,
    pub residual_rms: T,
}

impl<T: Real> LogLawFit<T> {
    pub fn predict(&self, power: T) -> T {
        self.offset + self.slope * (power / self.reference_power).ln()
    }
}

/// Log-law fit referenced to the largest input power.
pub fn fit_log_law<T: Real>(points: &[(T, T)]) -> Result<LogLawFit<T>> {
    validate(points)?;
    let reference = points.iter().map(|p| p.0).fold(T::neg_infinity(), T::max);
    fit_log_law_with_reference(points, reference)
}

pub fn fit_log_law_with_reference<T: Real>(points: &[(T, T)], reference_power: T) -> Result<LogLawFit<T>> {
    validate(points)?;
    if !(reference_power > T::zero()) {
        return Err(Error::NonPositivePower(reference_power.as_f64()));
    }
    let n = T::from_usize(points.len()).unwrap();
    let xs: Vec<T> = points.iter().map(|p| (p.0 / reference_power).ln()).collect();
    let mean_x = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let mean_y = points.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (sxx, sxy) = xs
        .iter()
        .zip(points)
        .fold((T::zero(), T::zero()), |(sxx, sxy), (&x, p)| {
            let dx = x - mean_x;
            (sxx + dx * dx, sxy + dx * (p.1 - mean_y))
        });
    if sxx == T::zero() {
        return Err(Error::invalid("powers", "need at least two distinct powers"));
    }
    let slope = sxy / sxx;
    let offset = mean_y - slope * mean_x;
    let ss = xs
        .iter()
        .zip(points)
        .fold(T::zero(), |acc, (&x, p)| {
            let r = p.1 - (offset + slope * x);
            acc + r * r
        });
    Ok(LogLawFit {
        offset,
        slope,
        reference_power,
        residual_rms: (ss / n).sqrt(),
    })
}

fn validate<T: Real>(points: &[(T, T)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            need: 3,
            got: points.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > T::zero())) {
        return Err(Error::NonPositivePower(p.0.as_f64()));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::invalid("points", "must be finite"));
    }
    Ok(())
}
