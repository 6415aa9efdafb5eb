use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Least-squares line `y = slope * x + intercept`; `residual` is the RMS misfit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs 2 points, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "line fit needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Fit a power law `y = e^intercept * x^slope` through positive data.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "log-log fit needs 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(invalid(format!(
            "log-log fit needs positive data, got ({x}, {y})"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_power_law() {
        let f = fit_loglog(&[(1.0, 1.0), (10.0, 10.0), (100.0, 100.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
    }

    #[test]
    fn scaled_square() {
        let pts: Vec<_> = [1.0, 2.0, 5.0, 9.0]
            .iter()
            .map(|&x| (x, 3.0 * x * x))
            .collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-13);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn x_over_log_x_slope_below_one() {
        let pts: Vec<_> = (0..=30)
            .map(|i| 10f64.powf(3.0 + 0.1 * i as f64))
            .map(|x| (x, x / x.ln()))
            .collect();
        let f = fit_loglog(&pts).unwrap();
        assert!(f.slope > 0.9 && f.slope < 1.0, "{}", f.slope);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog(&[(1.0, 1.0)]).is_err());
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(fit_loglog(&[(-1.0, 1.0), (2.0, 1.0)]).is_err());
    }
}
