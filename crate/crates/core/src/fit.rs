//! Least-squares line fits.

use crate::error::{Result, ScatterError};

#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
    pub residual_rms: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn line_fit(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 3 {
        return Err(ScatterError::Fit(format!("{n} points; a line fit needs at least 3")));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(ScatterError::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let var = ss / (nf - 2.0);
    if !var.is_finite() {
        return Err(ScatterError::Fit("non-finite residuals".into()));
    }
    Ok(LineFit { slope, intercept, slope_stderr: (var / sxx).sqrt(), residual_rms: (ss / nf).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (0..10).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        let f = line_fit(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 2.0).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-12);
    }
}
